#include "polburst/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

namespace polburst::io {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------- utilities

std::string join_path(const std::string& prefix, const std::string& key)
{
    return prefix.empty() ? key : prefix + "." + key;
}

double as_number(const json& v, const std::string& field)
{
    if (!v.is_number()) throw ConfigError(field, "expected a number");
    return v.get<double>();
}

double as_positive(const json& v, const std::string& field)
{
    const double x = as_number(v, field);
    if (!(x > 0.0)) throw ConfigError(field, "must be > 0");
    return x;
}

double as_nonnegative(const json& v, const std::string& field)
{
    const double x = as_number(v, field);
    if (!(x >= 0.0)) throw ConfigError(field, "must be >= 0");
    return x;
}

int as_int(const json& v, const std::string& field)
{
    if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
    return v.get<int>();
}

std::string as_string(const json& v, const std::string& field)
{
    if (!v.is_string()) throw ConfigError(field, "expected a string");
    return v.get<std::string>();
}

// a sweep axis: bare number, explicit array, or {from, to, steps}
std::vector<double> parse_grid(const json& v, const std::string& field)
{
    std::vector<double> out;
    if (v.is_number()) {
        out.push_back(v.get<double>());
    } else if (v.is_array()) {
        for (const auto& e : v) out.push_back(as_number(e, field));
    } else if (v.is_object()) {
        for (const char* key : {"from", "to", "steps"}) {
            if (!v.contains(key)) {
                throw ConfigError(field, std::string("range needs '") + key + "'");
            }
        }
        const double a = as_number(v.at("from"), field + ".from");
        const double b = as_number(v.at("to"), field + ".to");
        const int n = as_int(v.at("steps"), field + ".steps");
        if (n < 1) throw ConfigError(field + ".steps", "must be >= 1");
        if (n == 1) {
            out.push_back(a);
        } else {
            for (int i = 0; i < n; ++i) {
                out.push_back(a + (b - a) * static_cast<double>(i) / (n - 1));
            }
        }
    } else {
        throw ConfigError(field, "expected a number, an array, or {from, to, steps}");
    }
    if (out.empty()) throw ConfigError(field, "sweep range is empty");
    return out;
}

std::pair<double, double> parse_bounds(const json& v, const std::string& field)
{
    if (!v.is_array() || v.size() != 2) throw ConfigError(field, "expected [lo, hi]");
    const double lo = as_number(v.at(0), field + "[0]");
    const double hi = as_number(v.at(1), field + "[1]");
    if (hi < lo) throw ConfigError(field, "requires hi >= lo");
    return {lo, hi};
}

SchemeKind parse_scheme_kind(const json& v, const std::string& field)
{
    const std::string s = as_string(v, field);
    if (s == "Ideal") return SchemeKind::Ideal;
    if (s == "RbD1") return SchemeKind::RbD1;
    if (s == "RbD2") return SchemeKind::RbD2;
    throw ConfigError(field, "expected one of Ideal, RbD1, RbD2");
}

std::string scheme_name(SchemeKind kind)
{
    switch (kind) {
        case SchemeKind::Ideal: return "Ideal";
        case SchemeKind::RbD1: return "RbD1";
        default: return "RbD2";
    }
}

ScenarioTolerances parse_tolerances(const json& v, const std::string& field)
{
    ScenarioTolerances tol;
    tol.rtol = as_positive(v.at("rtol"), field + ".rtol");
    tol.atol = as_positive(v.at("atol"), field + ".atol");
    tol.n_output = as_int(v.at("n_output"), field + ".n_output");
    if (tol.n_output < 2) throw ConfigError(field + ".n_output", "must be >= 2");
    return tol;
}

SweepSettings parse_optimizer(const json& v, const std::string& field,
                              const ScenarioTolerances& tol)
{
    SweepSettings s;
    s.seeds_per_dim = as_int(v.at("seeds_per_dim"), field + ".seeds_per_dim");
    s.budget = as_int(v.at("budget"), field + ".budget");
    if (s.seeds_per_dim < 1) throw ConfigError(field + ".seeds_per_dim", "must be >= 1");
    if (s.budget < 1) throw ConfigError(field + ".budget", "must be >= 1");
    s.tol = tol;
    return s;
}

// cavity from kappa plus exactly one coupling spec: cooperativity, g_MHz,
// or a mode-volume scaling block
CavityConfig parse_cavity(const json& v, const std::string& field, double gamma)
{
    CavityConfig cav;
    cav.kappa = kTwoPi * as_positive(v.at("kappa_MHz"), field + ".kappa_MHz");
    cav.detuning = kTwoPi * as_number(v.at("detuning_MHz"), field + ".detuning_MHz");
    cav.target_Fprime = as_number(v.at("target_Fprime"), field + ".target_Fprime");
    cav.fock_dim = as_int(v.at("fock_dim"), field + ".fock_dim");
    if (cav.fock_dim < 2) throw ConfigError(field + ".fock_dim", "must be >= 2");

    const bool has_c = !v.at("cooperativity").is_null();
    const bool has_g = !v.at("g_MHz").is_null();
    const bool has_mv = !v.at("mode_volume").is_null();
    if (has_c + has_g + has_mv != 1) {
        throw ConfigError(field, "give exactly one of cooperativity, g_MHz, mode_volume");
    }
    if (has_c) {
        const double C = as_positive(v.at("cooperativity"), field + ".cooperativity");
        cav.g_eff = g_for_cooperativity(C, cav.kappa, gamma);
    } else if (has_g) {
        cav.g_eff = kTwoPi * as_positive(v.at("g_MHz"), field + ".g_MHz");
    } else {
        const json& mv = v.at("mode_volume");
        const std::string mvf = field + ".mode_volume";
        const double volume = as_positive(mv.at("volume"), mvf + ".volume");
        ModeVolumeCalibration calib;
        calib.V0 = as_positive(mv.at("V0"), mvf + ".V0");
        calib.g0 = kTwoPi * as_positive(mv.at("g0_MHz"), mvf + ".g0_MHz");
        const std::string line = as_string(mv.at("line"), mvf + ".line");
        if (line != "D1" && line != "D2") throw ConfigError(mvf + ".line", "expected D1 or D2");
        cav.g_eff = coupling_for_mode_volume(volume, line == "D1" ? Line::D1 : Line::D2, calib);
    }
    cav.validate();
    return cav;
}

VstirapParams parse_vstirap(const json& v, const std::string& field)
{
    VstirapParams p;
    p.duration = as_positive(v.at("duration_us"), field + ".duration_us");
    p.omega = kTwoPi * as_positive(v.at("omega_MHz"), field + ".omega_MHz");
    p.detuning = kTwoPi * as_number(v.at("detuning_MHz"), field + ".detuning_MHz");
    p.target_Fprime = as_number(v.at("target_Fprime"), field + ".target_Fprime");
    return p;
}

// null fields fall back to the per-scheme preset
StirapParams parse_stirap(const json& v, const std::string& field, SchemeKind kind)
{
    StirapParams p = stirap_preset(kind);
    if (!v.at("duration_us").is_null())
        p.duration = as_positive(v.at("duration_us"), field + ".duration_us");
    if (!v.at("omega_MHz").is_null())
        p.omega = kTwoPi * as_positive(v.at("omega_MHz"), field + ".omega_MHz");
    if (!v.at("mask_n").is_null()) {
        p.mask_n = as_int(v.at("mask_n"), field + ".mask_n");
        if (p.mask_n < 1) throw ConfigError(field + ".mask_n", "must be >= 1");
    }
    if (!v.at("mask_a").is_null())
        p.mask_a = as_positive(v.at("mask_a"), field + ".mask_a");
    if (!v.at("mask_c_us").is_null())
        p.mask_c = as_number(v.at("mask_c_us"), field + ".mask_c_us");
    if (!v.at("detuning_MHz").is_null())
        p.detuning = kTwoPi * as_number(v.at("detuning_MHz"), field + ".detuning_MHz");
    if (!v.at("phi").is_null()) p.phi = as_number(v.at("phi"), field + ".phi");
    if (!v.at("target_Fprime").is_null())
        p.target_Fprime = as_number(v.at("target_Fprime"), field + ".target_Fprime");
    return p;
}

PumpingParams parse_pumping(const json& v, const std::string& field, SchemeKind kind)
{
    PumpingParams p = pumping_preset(kind);
    if (!v.at("duration_us").is_null())
        p.duration = as_positive(v.at("duration_us"), field + ".duration_us");
    if (!v.at("delta1_MHz").is_null())
        p.delta1 = kTwoPi * as_number(v.at("delta1_MHz"), field + ".delta1_MHz");
    if (!v.at("delta2_MHz").is_null())
        p.delta2 = kTwoPi * as_number(v.at("delta2_MHz"), field + ".delta2_MHz");
    if (!v.at("omega1_MHz").is_null())
        p.omega1 = kTwoPi * as_positive(v.at("omega1_MHz"), field + ".omega1_MHz");
    if (!v.at("omega2_MHz").is_null())
        p.omega2 = kTwoPi * as_positive(v.at("omega2_MHz"), field + ".omega2_MHz");
    if (!v.at("target_Fprime").is_null())
        p.target_Fprime = as_number(v.at("target_Fprime"), field + ".target_Fprime");
    return p;
}

// run fn(i) for i in [0, n) on up to `jobs` workers; callers store results by
// index so assembly order never depends on scheduling
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn)
{
    jobs = std::clamp(jobs, 1, std::max(n, 1));
    if (jobs == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

ordered_json base_manifest(const std::string& verb, const ordered_json& config)
{
    ordered_json m;
    m["tool"] = "polburst";
    m["version"] = kToolVersion;
    m["schema_version"] = kManifestSchemaVersion;
    m["verb"] = verb;
    m["config"] = config;
    return m;
}

ordered_json tolerances_default()
{
    const ScenarioTolerances tol = relaxed_tolerances();
    return {{"rtol", tol.rtol}, {"atol", tol.atol}, {"n_output", tol.n_output}};
}

ordered_json stirap_default()
{
    return {{"duration_us", nullptr}, {"omega_MHz", nullptr},  {"mask_n", nullptr},
            {"mask_a", nullptr},      {"mask_c_us", nullptr},  {"detuning_MHz", nullptr},
            {"phi", nullptr},         {"target_Fprime", nullptr}};
}

ordered_json pumping_default()
{
    return {{"duration_us", nullptr}, {"delta1_MHz", nullptr}, {"delta2_MHz", nullptr},
            {"omega1_MHz", nullptr},  {"omega2_MHz", nullptr}, {"target_Fprime", nullptr}};
}

ordered_json cavity_default()
{
    return {{"kappa_MHz", 2.0},      {"cooperativity", 10.0}, {"g_MHz", nullptr},
            {"mode_volume", nullptr}, {"detuning_MHz", 0.0},   {"target_Fprime", 1.0},
            {"fock_dim", 3}};
}

// -------------------------------------------------------------------- verbs

VerbResult verb_ideal_vstirap_sweep(const ordered_json& cfg, int jobs)
{
    const std::string root;
    const double gamma = as_positive(cfg.at("gamma_rad_per_us"), "gamma_rad_per_us");
    const double T = as_positive(cfg.at("duration_over_inv_gamma"),
                                 "duration_over_inv_gamma") / gamma;
    const auto g_grid = parse_grid(cfg.at("g_over_gamma"), "g_over_gamma");
    const auto k_grid = parse_grid(cfg.at("kappa_over_gamma"), "kappa_over_gamma");
    const auto omega_b = parse_bounds(cfg.at("omega_over_gamma_bounds"),
                                      "omega_over_gamma_bounds");
    const int fock = as_int(cfg.at("fock_dim"), "fock_dim");
    const ScenarioTolerances tol = parse_tolerances(cfg.at("tolerances"), "tolerances");
    const SweepSettings settings = parse_optimizer(cfg.at("optimizer"), "optimizer", tol);

    struct Point {
        double g, kappa, C, ceiling, eta, omega;
        long evals;
    };
    std::vector<Point> points(g_grid.size() * k_grid.size());
    parallel_for(static_cast<int>(points.size()), jobs, [&](int idx) {
        const double g = g_grid[static_cast<std::size_t>(idx) / k_grid.size()] * gamma;
        const double kappa = k_grid[static_cast<std::size_t>(idx) % k_grid.size()] * gamma;
        SystemSpec sys;
        sys.kind = SchemeKind::Ideal;
        sys.overrides.gamma = gamma;
        sys.cavity = CavityConfig{g, kappa, 0.0, 1.0, fock};
        OptimResult r = optimize_vstirap(sys, T, {omega_b.first * gamma, omega_b.second * gamma},
                                         {0.0, 0.0}, settings);
        const double C = cooperativity(sys.cavity, gamma);
        points[static_cast<std::size_t>(idx)] =
            {g / gamma, kappa / gamma, C, 2.0 * C / (2.0 * C + 1.0),
             r.best_value, r.best_params(0) / gamma, r.evaluations};
    });

    VerbResult out;
    out.csv.header = {"g_over_gamma", "kappa_over_gamma", "cooperativity",
                      "ceiling",      "efficiency",       "omega_opt_over_gamma"};
    ordered_json manifest_points = ordered_json::array();
    for (const Point& p : points) {
        out.csv.rows.push_back({format_number(p.g), format_number(p.kappa),
                                format_number(p.C), format_number(p.ceiling),
                                format_number(p.eta), format_number(p.omega)});
        manifest_points.push_back({{"g_over_gamma", p.g},
                                   {"kappa_over_gamma", p.kappa},
                                   {"best_value", p.eta},
                                   {"omega_opt_over_gamma", p.omega},
                                   {"evaluations", p.evals}});
    }
    out.manifest = base_manifest("ideal-vstirap-sweep", cfg);
    out.manifest["points"] = manifest_points;
    return out;
}

VerbResult verb_ideal_reprep_sweep(const ordered_json& cfg, int jobs)
{
    const double duration = as_positive(cfg.at("duration_us"), "duration_us");
    const double omega = as_positive(cfg.at("omega_rad_per_us"), "omega_rad_per_us");
    const double phi = as_number(cfg.at("phi"), "phi");
    const auto a_grid = parse_grid(cfg.at("mask_a"), "mask_a");
    const double mask_c = as_number(cfg.at("mask_c_us"), "mask_c_us");
    const ScenarioTolerances tol = parse_tolerances(cfg.at("tolerances"), "tolerances");

    std::vector<int> n_values;
    for (double n : parse_grid(cfg.at("n_values"), "n_values")) {
        if (n < 1.0 || n != std::floor(n)) throw ConfigError("n_values", "must be integers >= 1");
        n_values.push_back(static_cast<int>(n));
    }

    const AtomicScheme scheme = build_scheme(SchemeKind::Ideal, {});
    const DensityMatrix rho0 = atom_phi_state(scheme, phi);

    const int total = static_cast<int>(n_values.size() * a_grid.size());
    std::vector<double> eta(static_cast<std::size_t>(total));
    parallel_for(total, jobs, [&](int idx) {
        StirapParams p = stirap_preset(SchemeKind::Ideal);
        p.duration = duration;
        p.omega = omega;
        p.mask_n = n_values[static_cast<std::size_t>(idx) / a_grid.size()];
        p.mask_a = a_grid[static_cast<std::size_t>(idx) % a_grid.size()];
        p.mask_c = mask_c;
        p.phi = phi;
        eta[static_cast<std::size_t>(idx)] =
            run_stirap_reprep(scheme, p, rho0, tol).target_population;
    });

    VerbResult out;
    out.csv.header = {"mask_n", "mask_a", "duration_us", "omega_rad_per_us", "efficiency"};
    for (int idx = 0; idx < total; ++idx) {
        const int n = n_values[static_cast<std::size_t>(idx) / a_grid.size()];
        const double a = a_grid[static_cast<std::size_t>(idx) % a_grid.size()];
        out.csv.rows.push_back({format_number(n), format_number(a), format_number(duration),
                                format_number(omega),
                                format_number(eta[static_cast<std::size_t>(idx)])});
    }
    out.manifest = base_manifest("ideal-reprep-sweep", cfg);
    double best = 0.0;
    int best_idx = 0;
    for (int idx = 0; idx < total; ++idx) {
        if (eta[static_cast<std::size_t>(idx)] > best) {
            best = eta[static_cast<std::size_t>(idx)];
            best_idx = idx;
        }
    }
    out.manifest["best"] = {
        {"mask_n", n_values[static_cast<std::size_t>(best_idx) / a_grid.size()]},
        {"mask_a", a_grid[static_cast<std::size_t>(best_idx) % a_grid.size()]},
        {"efficiency", best}};
    return out;
}

VerbResult verb_rb_vstirap_sweep(const ordered_json& cfg, int jobs)
{
    std::vector<SchemeKind> schemes;
    for (const auto& s : cfg.at("schemes")) schemes.push_back(parse_scheme_kind(s, "schemes"));
    if (schemes.empty()) throw ConfigError("schemes", "sweep range is empty");
    const double duration = as_positive(cfg.at("duration_us"), "duration_us");
    const auto g_grid = parse_grid(cfg.at("g_MHz"), "g_MHz");
    const double kappa_MHz = as_positive(cfg.at("kappa_MHz"), "kappa_MHz");
    const double target_Fprime = as_number(cfg.at("target_Fprime"), "target_Fprime");
    const int fock = as_int(cfg.at("fock_dim"), "fock_dim");
    const auto omega_b = parse_bounds(cfg.at("omega_bounds_MHz"), "omega_bounds_MHz");
    const auto det_b = parse_bounds(cfg.at("detuning_bounds_MHz"), "detuning_bounds_MHz");
    const ScenarioTolerances tol = parse_tolerances(cfg.at("tolerances"), "tolerances");
    const SweepSettings settings = parse_optimizer(cfg.at("optimizer"), "optimizer", tol);

    struct Point {
        SchemeKind kind;
        double g_MHz, C, eta, omega_MHz, det_MHz;
        long evals;
    };
    std::vector<Point> points(schemes.size() * g_grid.size());
    parallel_for(static_cast<int>(points.size()), jobs, [&](int idx) {
        const SchemeKind kind = schemes[static_cast<std::size_t>(idx) / g_grid.size()];
        const double g_MHz = g_grid[static_cast<std::size_t>(idx) % g_grid.size()];
        SystemSpec sys;
        sys.kind = kind;
        sys.cavity = CavityConfig{kTwoPi * g_MHz, kTwoPi * kappa_MHz, 0.0, target_Fprime, fock};
        const double gamma = sys.scheme().gamma;
        OptimResult r = optimize_vstirap(sys, duration,
                                         {kTwoPi * omega_b.first, kTwoPi * omega_b.second},
                                         {kTwoPi * det_b.first, kTwoPi * det_b.second}, settings);
        points[static_cast<std::size_t>(idx)] =
            {kind, g_MHz, cooperativity(sys.cavity, gamma), r.best_value,
             r.best_params(0) / kTwoPi, r.best_params(1) / kTwoPi, r.evaluations};
    });

    VerbResult out;
    out.csv.header = {"scheme",     "g_MHz",         "kappa_MHz",      "cooperativity",
                      "efficiency", "omega_opt_MHz", "detuning_opt_MHz"};
    ordered_json manifest_points = ordered_json::array();
    for (const Point& p : points) {
        out.csv.rows.push_back({scheme_name(p.kind), format_number(p.g_MHz),
                                format_number(kappa_MHz), format_number(p.C),
                                format_number(p.eta), format_number(p.omega_MHz),
                                format_number(p.det_MHz)});
        manifest_points.push_back({{"scheme", scheme_name(p.kind)},
                                   {"g_MHz", p.g_MHz},
                                   {"best_value", p.eta},
                                   {"omega_opt_MHz", p.omega_MHz},
                                   {"detuning_opt_MHz", p.det_MHz},
                                   {"evaluations", p.evals}});
    }
    out.manifest = base_manifest("rb-vstirap-sweep", cfg);
    out.manifest["points"] = manifest_points;
    return out;
}

VerbResult verb_rb_reprep(const ordered_json& cfg, int jobs)
{
    std::vector<SchemeKind> schemes;
    for (const auto& s : cfg.at("schemes")) schemes.push_back(parse_scheme_kind(s, "schemes"));
    if (schemes.empty()) throw ConfigError("schemes", "sweep range is empty");
    const auto durations = parse_grid(cfg.at("durations_us"), "durations_us");
    const ScenarioTolerances tol = parse_tolerances(cfg.at("tolerances"), "tolerances");

    struct Point {
        SchemeKind kind;
        StirapParams params;
        double eta;
    };
    std::vector<Point> points(schemes.size() * durations.size());
    parallel_for(static_cast<int>(points.size()), jobs, [&](int idx) {
        const SchemeKind kind = schemes[static_cast<std::size_t>(idx) / durations.size()];
        StirapParams p = parse_stirap(cfg.at("stirap"), "stirap", kind);
        p.duration = durations[static_cast<std::size_t>(idx) % durations.size()];
        const AtomicScheme scheme = build_scheme(kind, {});
        const DensityMatrix rho0 = atom_phi_state(scheme, p.phi);
        points[static_cast<std::size_t>(idx)] =
            {kind, p, run_stirap_reprep(scheme, p, rho0, tol).target_population};
    });

    VerbResult out;
    out.csv.header = {"scheme", "duration_us", "omega_MHz",
                      "mask_n", "mask_a",      "target_population"};
    for (const Point& p : points) {
        out.csv.rows.push_back({scheme_name(p.kind), format_number(p.params.duration),
                                format_number(p.params.omega / kTwoPi),
                                format_number(p.params.mask_n), format_number(p.params.mask_a),
                                format_number(p.eta)});
    }
    out.manifest = base_manifest("rb-reprep", cfg);
    return out;
}

VerbResult verb_rb_pumping(const ordered_json& cfg, int jobs)
{
    std::vector<SchemeKind> schemes;
    for (const auto& s : cfg.at("schemes")) schemes.push_back(parse_scheme_kind(s, "schemes"));
    if (schemes.empty()) throw ConfigError("schemes", "sweep range is empty");
    std::vector<std::string> initials;
    for (const auto& s : cfg.at("initial_states")) {
        const std::string name = as_string(s, "initial_states");
        if (name != "phi_pi" && name != "mixed_lower" && name != "mixed_upper") {
            throw ConfigError("initial_states",
                              "expected one of phi_pi, mixed_lower, mixed_upper");
        }
        initials.push_back(name);
    }
    if (initials.empty()) throw ConfigError("initial_states", "sweep range is empty");
    const double threshold = as_positive(cfg.at("threshold"), "threshold");
    const ScenarioTolerances tol = parse_tolerances(cfg.at("tolerances"), "tolerances");

    struct Point {
        SchemeKind kind;
        std::string initial;
        PumpingResult result;
        double t95;
    };
    std::vector<Point> points(schemes.size() * initials.size());
    parallel_for(static_cast<int>(points.size()), jobs, [&](int idx) {
        const SchemeKind kind = schemes[static_cast<std::size_t>(idx) / initials.size()];
        const std::string& initial = initials[static_cast<std::size_t>(idx) % initials.size()];
        const PumpingParams p = parse_pumping(cfg.at("pumping"), "pumping", kind);
        const AtomicScheme scheme = build_scheme(kind, {});
        DensityMatrix rho0 = initial == "phi_pi"
                                 ? atom_phi_state(scheme, M_PI)
                                 : atom_mixed_manifold(scheme, initial == "mixed_lower"
                                                                   ? scheme.lower_F()
                                                                   : scheme.upper_F());
        PumpingResult r = run_optical_pumping(scheme, p, rho0, tol);
        const double t95 = time_to_threshold(r, threshold);
        points[static_cast<std::size_t>(idx)] = {kind, initial, std::move(r), t95};
    });

    VerbResult out;
    out.csv.header = {"scheme", "initial_state", "time_us", "target_population"};
    ordered_json thresholds = ordered_json::object();
    for (const Point& p : points) {
        for (std::size_t i = 0; i < p.result.times.size(); ++i) {
            out.csv.rows.push_back({scheme_name(p.kind), p.initial,
                                    format_number(p.result.times[i]),
                                    format_number(p.result.target_trace[i])});
        }
        thresholds[scheme_name(p.kind) + "." + p.initial] = p.t95;
    }
    out.manifest = base_manifest("rb-pumping", cfg);
    out.manifest["threshold"] = threshold;
    out.manifest["time_to_threshold_us"] = thresholds;
    return out;
}

VerbResult verb_rb_burst(const ordered_json& cfg, int /*jobs*/)
{
    BurstConfig bc;
    bc.production.kind = parse_scheme_kind(cfg.at("production_scheme"), "production_scheme");
    bc.reprep_kind = parse_scheme_kind(cfg.at("reprep_scheme"), "reprep_scheme");
    const std::string mode = as_string(cfg.at("mode"), "mode");
    if (mode != "coherent" && mode != "incoherent") {
        throw ConfigError("mode", "expected coherent or incoherent");
    }
    bc.mode = mode == "coherent" ? BurstMode::Coherent : BurstMode::Incoherent;
    bc.n_photons = as_int(cfg.at("n_photons"), "n_photons");
    if (bc.n_photons < 1) throw ConfigError("n_photons", "must be >= 1");
    bc.production.bfield = BFieldConfig{
        kTwoPi * as_nonnegative(cfg.at("bfield_splitting_MHz"), "bfield_splitting_MHz")};
    const double gamma = build_scheme(bc.production.kind, {}).gamma;
    bc.production.cavity = parse_cavity(cfg.at("cavity"), "cavity", gamma);
    bc.vstirap = parse_vstirap(cfg.at("vstirap"), "vstirap");
    bc.stirap = parse_stirap(cfg.at("stirap"), "stirap", bc.reprep_kind);
    bc.pumping = parse_pumping(cfg.at("pumping"), "pumping", bc.reprep_kind);
    const ScenarioTolerances tol = parse_tolerances(cfg.at("tolerances"), "tolerances");

    const BurstReport report = run_burst(bc, tol);

    VerbResult out;
    out.csv.header = {"cycle",      "p_H",        "p_pi",       "purity",
                      "leakage",    "cumulative_efficiency",    "coincidence_rate_Hz",
                      "pop_F1_mm1", "pop_F1_m0",  "pop_F1_mp1", "pop_F2_mm2",
                      "pop_F2_mm1", "pop_F2_m0",  "pop_F2_mp1", "pop_F2_mp2"};
    ordered_json cycles = ordered_json::array();
    for (std::size_t i = 0; i < report.per_cycle.size(); ++i) {
        const CycleResult& c = report.per_cycle[i];
        const auto& pops = report.populations_after_reprep[i];
        std::vector<std::string> row = {format_number(static_cast<double>(i + 1)),
                                        format_number(c.p_H),
                                        format_number(c.p_pi),
                                        format_number(c.purity),
                                        format_number(c.leakage),
                                        format_number(report.cumulative_eff[i]),
                                        format_number(report.coincidence_rate[i])};
        for (double F : {1.0, 2.0}) {
            for (double mF = -F; mF <= F + 0.1; mF += 1.0) {
                const auto it = pops.find({F, mF});
                row.push_back(format_number(it == pops.end() ? 0.0 : it->second));
            }
        }
        out.csv.rows.push_back(std::move(row));
        cycles.push_back({{"cycle", i + 1},
                          {"p_H", c.p_H},
                          {"p_pi", c.p_pi},
                          {"cumulative_efficiency", report.cumulative_eff[i]},
                          {"coincidence_rate_Hz", report.coincidence_rate[i]}});
    }
    out.manifest = base_manifest("rb-burst", cfg);
    out.manifest["repetition_rate_Hz"] = report.repetition_rate;
    out.manifest["resolved_g_MHz"] = bc.production.cavity.g_eff / kTwoPi;
    out.manifest["report"] = {
        {"mode", mode},
        {"n_photons", bc.n_photons},
        {"cumulative_efficiency", report.cumulative_eff.back()},
        {"coincidence_rate_Hz", report.coincidence_rate.back()},
        {"cycles", cycles}};
    return out;
}

VerbResult verb_bfield_scan(const ordered_json& cfg, int /*jobs*/)
{
    SystemSpec sys;
    sys.kind = parse_scheme_kind(cfg.at("scheme"), "scheme");
    const double gamma = build_scheme(sys.kind, {}).gamma;
    sys.cavity = parse_cavity(cfg.at("cavity"), "cavity", gamma);
    const VstirapParams pulse = parse_vstirap(cfg.at("vstirap"), "vstirap");
    const ScenarioTolerances tol = parse_tolerances(cfg.at("tolerances"), "tolerances");

    std::vector<double> splittings;
    for (double mhz : parse_grid(cfg.at("splittings_MHz"), "splittings_MHz")) {
        if (mhz < 0.0) throw ConfigError("splittings_MHz", "must be >= 0");
        splittings.push_back(kTwoPi * mhz);
    }
    const std::vector<BfieldPoint> points = bfield_scan(sys, pulse, splittings, tol);

    VerbResult out;
    out.csv.header = {"splitting_MHz", "field_G", "phi_rad", "eta"};
    for (const BfieldPoint& p : points) {
        const BFieldConfig b{p.splitting};
        out.csv.rows.push_back({format_number(p.splitting / kTwoPi),
                                format_number(b.field_gauss()), format_number(p.phi),
                                format_number(p.eta)});
    }
    out.manifest = base_manifest("bfield-scan", cfg);
    out.manifest["gauss_conversion_MHz_per_G"] = BFieldConfig::gauss_conversion_MHz_per_G;
    out.manifest["resolved_g_MHz"] = sys.cavity.g_eff / kTwoPi;
    return out;
}

VerbResult verb_optimize(const ordered_json& cfg, int /*jobs*/)
{
    const std::string target = as_string(cfg.at("target"), "target");
    const SchemeKind kind = parse_scheme_kind(cfg.at("scheme"), "scheme");
    const double duration = as_positive(cfg.at("duration_us"), "duration_us");
    const ScenarioTolerances tol = parse_tolerances(cfg.at("tolerances"), "tolerances");
    const SweepSettings settings = parse_optimizer(cfg.at("optimizer"), "optimizer", tol);

    OptimResult r;
    std::vector<std::string> param_names;
    Eigen::VectorXd params_out;
    if (target == "vstirap") {
        SystemSpec sys;
        sys.kind = kind;
        const double gamma = build_scheme(kind, {}).gamma;
        sys.cavity = parse_cavity(cfg.at("cavity"), "cavity", gamma);
        const auto omega_b = parse_bounds(cfg.at("omega_bounds_MHz"), "omega_bounds_MHz");
        const auto det_b = parse_bounds(cfg.at("detuning_bounds_MHz"), "detuning_bounds_MHz");
        r = optimize_vstirap(sys, duration, {kTwoPi * omega_b.first, kTwoPi * omega_b.second},
                             {kTwoPi * det_b.first, kTwoPi * det_b.second}, settings);
        param_names = {"omega_MHz", "detuning_MHz"};
        params_out = r.best_params / kTwoPi;
    } else if (target == "stirap") {
        const auto a_b = parse_bounds(cfg.at("a_bounds"), "a_bounds");
        const auto omega_b = parse_bounds(cfg.at("omega_bounds_MHz"), "omega_bounds_MHz");
        std::vector<int> n_values;
        for (double n : parse_grid(cfg.at("n_values"), "n_values")) {
            if (n < 1.0 || n != std::floor(n)) {
                throw ConfigError("n_values", "must be integers >= 1");
            }
            n_values.push_back(static_cast<int>(n));
        }
        StirapOptResult s = optimize_stirap(build_scheme(kind, {}), duration, a_b,
                                            {kTwoPi * omega_b.first, kTwoPi * omega_b.second},
                                            n_values, settings);
        r = s.result;
        param_names = {"mask_n", "mask_a", "omega_MHz"};
        params_out.resize(3);
        params_out << s.n, r.best_params(0), r.best_params(1) / kTwoPi;
    } else if (target == "pumping") {
        const auto d1 = parse_bounds(cfg.at("delta1_bounds_MHz"), "delta1_bounds_MHz");
        const auto d2 = parse_bounds(cfg.at("delta2_bounds_MHz"), "delta2_bounds_MHz");
        const auto o1 = parse_bounds(cfg.at("omega1_bounds_MHz"), "omega1_bounds_MHz");
        const auto o2 = parse_bounds(cfg.at("omega2_bounds_MHz"), "omega2_bounds_MHz");
        r = optimize_pumping(build_scheme(kind, {}), duration,
                             {kTwoPi * d1.first, kTwoPi * d1.second},
                             {kTwoPi * d2.first, kTwoPi * d2.second},
                             {kTwoPi * o1.first, kTwoPi * o1.second},
                             {kTwoPi * o2.first, kTwoPi * o2.second}, settings);
        param_names = {"delta1_MHz", "delta2_MHz", "omega1_MHz", "omega2_MHz"};
        params_out = r.best_params / kTwoPi;
    } else {
        throw ConfigError("target", "expected one of vstirap, stirap, pumping");
    }

    VerbResult out;
    out.csv.header = {"target", "scheme", "best_value", "evaluations"};
    std::vector<std::string> row = {target, scheme_name(kind), format_number(r.best_value),
                                    format_number(static_cast<double>(r.evaluations))};
    ordered_json best = ordered_json::object();
    for (int i = 0; i < params_out.size(); ++i) {
        out.csv.header.push_back(param_names[static_cast<std::size_t>(i)]);
        row.push_back(format_number(params_out(i)));
        best[param_names[static_cast<std::size_t>(i)]] = params_out(i);
    }
    out.csv.rows.push_back(std::move(row));
    out.manifest = base_manifest("optimize", cfg);
    out.manifest["result"] = {{"target", target},
                              {"scheme", scheme_name(kind)},
                              {"best_value", r.best_value},
                              {"evaluations", r.evaluations},
                              {"budget_exhausted", r.budget_exhausted},
                              {"params", best}};
    return out;
}

ordered_json merge_over_defaults(const ordered_json& defaults, const json& user,
                                 const std::string& path)
{
    if (!defaults.is_object() || !user.is_object()) return ordered_json(user);
    ordered_json out = defaults;
    for (const auto& [key, value] : user.items()) {
        const std::string here = join_path(path, key);
        if (!defaults.contains(key)) throw ConfigError(here, "unknown field");
        // null defaults mark preset-backed leaves; user values replace wholesale
        if (defaults.at(key).is_null()) {
            out[key] = value;
        } else {
            out[key] = merge_over_defaults(defaults.at(key), value, here);
        }
    }
    return out;
}

} // namespace

std::string format_number(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

std::string CsvTable::to_string() const
{
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    return out.str();
}

std::vector<std::string> known_verbs()
{
    return {"ideal-vstirap-sweep", "ideal-reprep-sweep", "rb-vstirap-sweep", "rb-reprep",
            "rb-pumping",          "rb-burst",           "bfield-scan",      "optimize"};
}

nlohmann::ordered_json default_config(const std::string& verb)
{
    if (verb == "ideal-vstirap-sweep") {
        return {{"gamma_rad_per_us", 1.0},
                {"duration_over_inv_gamma", 10.0},
                {"g_over_gamma", ordered_json::array({10.0})},
                {"kappa_over_gamma", {{"from", 2.0}, {"to", 20.0}, {"steps", 10}}},
                {"omega_over_gamma_bounds", ordered_json::array({1.0, 40.0})},
                {"fock_dim", 3},
                {"optimizer", {{"seeds_per_dim", 3}, {"budget", 24}}},
                {"tolerances", tolerances_default()}};
    }
    if (verb == "ideal-reprep-sweep") {
        return {{"duration_us", 0.14},
                {"omega_rad_per_us", kTwoPi * 80.0},
                {"phi", M_PI},
                {"n_values", ordered_json::array({2, 4, 6, 8})},
                {"mask_a", {{"from", 6.0}, {"to", 20.0}, {"steps", 8}}},
                {"mask_c_us", 0.0},
                {"tolerances", tolerances_default()}};
    }
    if (verb == "rb-vstirap-sweep") {
        return {{"schemes", ordered_json::array({"RbD1", "RbD2"})},
                {"duration_us", 0.5},
                {"g_MHz", {{"from", 4.0}, {"to", 16.0}, {"steps", 5}}},
                {"kappa_MHz", 2.0},
                {"target_Fprime", 1.0},
                {"fock_dim", 3},
                {"omega_bounds_MHz", ordered_json::array({8.0, 60.0})},
                {"detuning_bounds_MHz", ordered_json::array({0.0, 0.0})},
                {"optimizer", {{"seeds_per_dim", 2}, {"budget", 14}}},
                {"tolerances", tolerances_default()}};
    }
    if (verb == "rb-reprep") {
        return {{"schemes", ordered_json::array({"RbD1", "RbD2"})},
                {"durations_us", ordered_json::array({0.15})},
                {"stirap", stirap_default()},
                {"tolerances", tolerances_default()}};
    }
    if (verb == "rb-pumping") {
        return {{"schemes", ordered_json::array({"RbD1", "RbD2"})},
                {"initial_states", ordered_json::array({"phi_pi"})},
                {"threshold", 0.95},
                {"pumping", pumping_default()},
                {"tolerances", tolerances_default()}};
    }
    if (verb == "rb-burst") {
        return {{"mode", "coherent"},
                {"n_photons", 10},
                {"production_scheme", "RbD2"},
                {"reprep_scheme", "RbD1"},
                {"bfield_splitting_MHz", 0.0},
                {"cavity", cavity_default()},
                {"vstirap",
                 {{"duration_us", 0.86},
                  {"omega_MHz", 25.0},
                  {"detuning_MHz", 0.0},
                  {"target_Fprime", 1.0}}},
                {"stirap", stirap_default()},
                {"pumping", pumping_default()},
                {"tolerances", tolerances_default()}};
    }
    if (verb == "bfield-scan") {
        return {{"scheme", "RbD1"},
                {"cavity", cavity_default()},
                {"vstirap",
                 {{"duration_us", 0.5},
                  {"omega_MHz", 30.0},
                  {"detuning_MHz", 0.0},
                  {"target_Fprime", 1.0}}},
                {"splittings_MHz", {{"from", 0.0}, {"to", 2.0}, {"steps", 5}}},
                {"tolerances", tolerances_default()}};
    }
    if (verb == "optimize") {
        return {{"target", "vstirap"},
                {"scheme", "RbD2"},
                {"duration_us", 1.0},
                {"cavity", cavity_default()},
                {"omega_bounds_MHz", ordered_json::array({10.0, 45.0})},
                {"detuning_bounds_MHz", ordered_json::array({0.0, 0.0})},
                {"a_bounds", ordered_json::array({6.0, 20.0})},
                {"n_values", ordered_json::array({4, 6, 8})},
                {"delta1_bounds_MHz", ordered_json::array({-10.0, 10.0})},
                {"delta2_bounds_MHz", ordered_json::array({-15.0, 5.0})},
                {"omega1_bounds_MHz", ordered_json::array({10.0, 60.0})},
                {"omega2_bounds_MHz", ordered_json::array({10.0, 60.0})},
                {"optimizer", {{"seeds_per_dim", 3}, {"budget", 40}}},
                {"tolerances", tolerances_default()}};
    }
    throw ConfigError("verb", "unknown verb '" + verb + "'");
}

nlohmann::ordered_json resolve_config(const std::string& verb, const nlohmann::json& user)
{
    if (!user.is_null() && !user.is_object()) {
        throw ConfigError("config", "top level must be a JSON object");
    }
    const ordered_json defaults = default_config(verb);
    if (user.is_null()) return defaults;
    return merge_over_defaults(defaults, user, "");
}

VerbResult run_verb(const std::string& verb, const nlohmann::json& user_config, int jobs)
{
    if (jobs < 1) throw ConfigError("jobs", "must be >= 1");
    const ordered_json cfg = resolve_config(verb, user_config);
    if (verb == "ideal-vstirap-sweep") return verb_ideal_vstirap_sweep(cfg, jobs);
    if (verb == "ideal-reprep-sweep") return verb_ideal_reprep_sweep(cfg, jobs);
    if (verb == "rb-vstirap-sweep") return verb_rb_vstirap_sweep(cfg, jobs);
    if (verb == "rb-reprep") return verb_rb_reprep(cfg, jobs);
    if (verb == "rb-pumping") return verb_rb_pumping(cfg, jobs);
    if (verb == "rb-burst") return verb_rb_burst(cfg, jobs);
    if (verb == "bfield-scan") return verb_bfield_scan(cfg, jobs);
    if (verb == "optimize") return verb_optimize(cfg, jobs);
    throw ConfigError("verb", "unknown verb '" + verb + "'");
}

int run_cli(const std::vector<std::string>& args)
{
    CLI::App app{"polburst — polarised single-photon burst simulations"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int jobs = 1;
    std::string mode_override;
    int n_override = 0;

    std::vector<CLI::App*> subs;
    for (const std::string& verb : known_verbs()) {
        CLI::App* sub = app.add_subcommand(verb, "run the " + verb + " scenario");
        sub->add_option("--config", config_path, "JSON config file (merged over defaults)");
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--jobs", jobs, "sweep-point worker threads")->capture_default_str();
        if (verb == "rb-burst") {
            sub->add_option("--mode", mode_override, "coherent | incoherent");
            sub->add_option("--n", n_override, "number of photons in the burst");
        }
        subs.push_back(sub);
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string verb = app.get_subcommands().front()->get_name();
    try {
        json user;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("config", "cannot open '" + config_path + "'");
            try {
                user = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError("config", std::string("invalid JSON: ") + e.what());
            }
        }
        if (verb == "rb-burst") {
            if (!mode_override.empty()) user["mode"] = mode_override;
            if (n_override > 0) user["n_photons"] = n_override;
        }

        const VerbResult result = run_verb(verb, user, jobs);

        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        const fs::path csv_path = fs::path(out_dir) / (verb + ".csv");
        const fs::path manifest_path = fs::path(out_dir) / (verb + ".manifest.json");
        {
            std::ofstream out(csv_path);
            out << result.csv.to_string();
            if (!out) throw std::runtime_error("failed to write " + csv_path.string());
        }
        {
            std::ofstream out(manifest_path);
            out << result.manifest.dump(2) << '\n';
            if (!out) throw std::runtime_error("failed to write " + manifest_path.string());
        }
        std::printf("wrote %s (%zu rows) and %s\n", csv_path.string().c_str(),
                    result.csv.rows.size(), manifest_path.string().c_str());
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace polburst::io
