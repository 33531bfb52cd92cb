#include "polburst/atomic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "polburst/wigner.hpp"

namespace polburst {

namespace {

constexpr double kNuclearSpin = 1.5;  // Rb-87
constexpr double kGroundJ = 0.5;      // 5S1/2

double excited_J(SchemeKind kind)
{
    return kind == SchemeKind::RbD2 ? 1.5 : 0.5;
}

// <F mF| absorption amplitude |F' mF'> before branching normalisation:
// hyperfine reduced factor (6j over J, J', I) times the Clebsch-Gordan
// coefficient of the channel.
double raw_rb_amplitude(SchemeKind kind, double F, double mF,
                        double Fp, double mFp, int q)
{
    const double Jp = excited_J(kind);
    const double cg = wigner::clebsch_gordan(F, mF, 1.0, q, Fp, mFp);
    if (cg == 0.0) return 0.0;
    const double sixj = wigner::wigner6j(kGroundJ, Jp, 1.0, Fp, F, kNuclearSpin);
    const double phase_exp = Fp + kGroundJ + 1.0 + kNuclearSpin;
    const double sign = (std::lround(phase_exp) % 2 == 0) ? 1.0 : -1.0;
    return sign * std::sqrt((2.0 * Fp + 1.0) * (2.0 * kGroundJ + 1.0)) * sixj * cg;
}

void normalize_per_excited(AtomicScheme& scheme)
{
    std::map<int, double> weight;
    for (const auto& c : scheme.couplings) {
        weight[c.excited] += c.amplitude * c.amplitude;
    }
    for (auto& c : scheme.couplings) {
        c.amplitude /= std::sqrt(weight.at(c.excited));
    }
}

void apply_zeeman(AtomicScheme& scheme, const BFieldConfig& bfield)
{
    // linear shifts on the lower ground manifold only; +/- splitting/2 at mF = +/-1
    for (auto& s : scheme.states) {
        if (s.manifold == ManifoldKind::Ground && s.F == scheme.lower_F_) {
            s.energy_shift = s.mF * bfield.splitting / 2.0;
        }
    }
}

AtomicScheme build_ideal(const BFieldConfig& bfield, const SchemeOverrides& overrides)
{
    const double F = overrides.ideal_F;
    if (F < 1.0 || std::abs(2.0 * F - std::round(2.0 * F)) > 1e-12) {
        throw std::invalid_argument("build_scheme: ideal F must be a half-integer >= 1");
    }
    AtomicScheme scheme;
    scheme.kind = SchemeKind::Ideal;
    scheme.gamma = overrides.gamma.value_or(1.0);
    scheme.lower_F_ = F;
    scheme.upper_F_ = F + 1.0;
    for (double mF = -F; mF <= F + 0.5; mF += 1.0) {
        scheme.states.push_back({ManifoldKind::Ground, F, mF, 0.0});
    }
    scheme.states.push_back({ManifoldKind::Ground, F + 1.0, 0.0, 0.0});  // g2
    scheme.states.push_back({ManifoldKind::Excited, F, 0.0, 0.0});       // x
    scheme.excited_F_values = {F};
    scheme.excited_offsets = {0.0};

    const int x = scheme.index_of(ManifoldKind::Excited, F, 0.0);
    const int g2 = scheme.index_of(ManifoldKind::Ground, F + 1.0, 0.0);
    // x couples to g1+/- (sigma-/+) and g2 (pi) with equal branching; the
    // relative sign of the sigma channels follows the F -> F'=F
    // Clebsch-Gordan pattern. The pi channel to (F, 0) is dipole forbidden.
    const double third = 1.0 / std::sqrt(3.0);
    const double cg_plus = wigner::clebsch_gordan(F, 1.0, 1.0, -1.0, F, 0.0);
    const double cg_minus = wigner::clebsch_gordan(F, -1.0, 1.0, 1.0, F, 0.0);
    scheme.couplings.push_back({scheme.g1_plus(), x, -1,
                                third * (cg_plus >= 0.0 ? 1.0 : -1.0)});
    scheme.couplings.push_back({scheme.g1_minus(), x, 1,
                                third * (cg_minus >= 0.0 ? 1.0 : -1.0)});
    scheme.couplings.push_back({g2, x, 0, third});

    apply_zeeman(scheme, bfield);
    return scheme;
}

AtomicScheme build_rb(SchemeKind kind, const BFieldConfig& bfield,
                      const SchemeOverrides& overrides)
{
    AtomicScheme scheme;
    scheme.kind = kind;
    scheme.lower_F_ = 1.0;
    scheme.upper_F_ = 2.0;
    if (kind == SchemeKind::RbD1) {
        scheme.gamma = overrides.gamma.value_or(kTwoPi * 2.87);
        scheme.excited_F_values = {1.0, 2.0};
        scheme.excited_offsets =
            overrides.excited_offsets.value_or(std::vector<double>{0.0, kTwoPi * 816.0});
    } else {
        scheme.gamma = overrides.gamma.value_or(kTwoPi * 3.03);
        scheme.excited_F_values = {0.0, 1.0, 2.0, 3.0};
        // F'=0..3; the 160 MHz F'=1<->2 gap is the paper's, the outer gaps
        // come from the standard Rb-87 reference data.
        scheme.excited_offsets = overrides.excited_offsets.value_or(std::vector<double>{
            0.0, kTwoPi * 72.0, kTwoPi * (72.0 + 160.0), kTwoPi * (72.0 + 160.0 + 267.0)});
    }
    if (scheme.excited_offsets.size() != scheme.excited_F_values.size()) {
        throw std::invalid_argument("build_scheme: excited_offsets size mismatch");
    }

    for (double F : {1.0, 2.0}) {
        for (double mF = -F; mF <= F + 0.5; mF += 1.0) {
            scheme.states.push_back({ManifoldKind::Ground, F, mF, 0.0});
        }
    }
    for (double Fp : scheme.excited_F_values) {
        for (double mFp = -Fp; mFp <= Fp + 0.5; mFp += 1.0) {
            scheme.states.push_back({ManifoldKind::Excited, Fp, mFp, 0.0});
        }
    }

    for (int g = 0; g < scheme.num_states(); ++g) {
        const auto& gs = scheme.states[static_cast<std::size_t>(g)];
        if (gs.manifold != ManifoldKind::Ground) continue;
        for (int e = 0; e < scheme.num_states(); ++e) {
            const auto& es = scheme.states[static_cast<std::size_t>(e)];
            if (es.manifold != ManifoldKind::Excited) continue;
            const double qd = es.mF - gs.mF;
            if (std::abs(qd) > 1.5) continue;
            const int q = static_cast<int>(std::lround(qd));
            const double amp = raw_rb_amplitude(kind, gs.F, gs.mF, es.F, es.mF, q);
            if (amp != 0.0) scheme.couplings.push_back({g, e, q, amp});
        }
    }
    normalize_per_excited(scheme);
    apply_zeeman(scheme, bfield);
    return scheme;
}

} // namespace

int AtomicScheme::index_of(ManifoldKind manifold, double F, double mF) const
{
    for (int i = 0; i < num_states(); ++i) {
        const auto& s = states[static_cast<std::size_t>(i)];
        if (s.manifold == manifold && s.F == F && s.mF == mF) return i;
    }
    throw std::invalid_argument("AtomicScheme: unknown state (F=" + std::to_string(F) +
                                ", mF=" + std::to_string(mF) + ")");
}

bool AtomicScheme::has_state(ManifoldKind manifold, double F, double mF) const
{
    for (const auto& s : states) {
        if (s.manifold == manifold && s.F == F && s.mF == mF) return true;
    }
    return false;
}

double AtomicScheme::coupling(int ground, int excited, int q) const
{
    for (const auto& c : couplings) {
        if (c.ground == ground && c.excited == excited && c.q == q) return c.amplitude;
    }
    return 0.0;
}

double AtomicScheme::excited_offset(double Fprime) const
{
    for (std::size_t i = 0; i < excited_F_values.size(); ++i) {
        if (excited_F_values[i] == Fprime) return excited_offsets[i];
    }
    throw std::invalid_argument("AtomicScheme: no excited level F'=" + std::to_string(Fprime));
}

std::vector<double> AtomicScheme::ground_F_values() const
{
    std::vector<double> out;
    for (const auto& s : states) {
        if (s.manifold != ManifoldKind::Ground) continue;
        if (std::find(out.begin(), out.end(), s.F) == out.end()) out.push_back(s.F);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> AtomicScheme::states_in(ManifoldKind manifold, double F) const
{
    std::vector<int> out;
    for (int i = 0; i < num_states(); ++i) {
        const auto& s = states[static_cast<std::size_t>(i)];
        if (s.manifold == manifold && s.F == F) out.push_back(i);
    }
    return out;
}

AtomicScheme build_scheme(SchemeKind kind, const BFieldConfig& bfield,
                          const SchemeOverrides& overrides)
{
    if (bfield.splitting < 0.0) {
        throw std::invalid_argument("build_scheme: splitting must be >= 0");
    }
    if (kind == SchemeKind::Ideal) return build_ideal(bfield, overrides);
    return build_rb(kind, bfield, overrides);
}

double dipole_coupling(const AtomicScheme& scheme,
                       double F, double mF, double Fprime, double mFprime, int q)
{
    const int g = scheme.index_of(ManifoldKind::Ground, F, mF);
    const int e = scheme.index_of(ManifoldKind::Excited, Fprime, mFprime);
    return scheme.coupling(g, e, q);
}

std::vector<CollapseSpec> decay_channels(const AtomicScheme& scheme)
{
    std::vector<CollapseSpec> out;
    out.reserve(scheme.couplings.size());
    for (const auto& c : scheme.couplings) {
        out.push_back({c.ground, c.excited, c.q, c.amplitude});
    }
    return out;
}

double cooperativity(const CavityConfig& cavity, double gamma)
{
    return cavity.g_eff * cavity.g_eff / (2.0 * cavity.kappa * gamma);
}

double g_for_cooperativity(double C, double kappa, double gamma)
{
    return std::sqrt(C * 2.0 * kappa * gamma);
}

double g_max_from_effective(const AtomicScheme& scheme, const CavityConfig& cavity)
{
    const int e = scheme.index_of(ManifoldKind::Excited, cavity.target_Fprime, 0.0);
    const double d = std::abs(scheme.coupling(scheme.g1_plus(), e, -1));
    if (d == 0.0) {
        throw std::invalid_argument("g_max_from_effective: reference sigma transition absent");
    }
    return cavity.g_eff / d;
}

std::vector<Operator> cavity_interaction(const AtomicScheme& scheme,
                                         const CavityConfig& cavity,
                                         const SpaceLayout& layout)
{
    cavity.validate();
    if (!layout.has("cavH")) {
        throw std::invalid_argument("cavity_interaction: layout lacks 'cavH'");
    }
    const double g_max = g_max_from_effective(scheme, cavity);
    const int n_atom = scheme.num_states();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    struct Mode {
        std::string label;
        double pol[3];  // components on (q=-1, q=0, q=+1)
    };
    std::vector<Mode> modes;
    modes.push_back({"cavH", {inv_sqrt2, 0.0, inv_sqrt2}});
    if (layout.has("cavPi")) modes.push_back({"cavPi", {0.0, 1.0, 0.0}});

    std::vector<Operator> terms;
    for (const auto& mode : modes) {
        Matrix atom_part = Matrix::Zero(n_atom, n_atom);  // |g><e| weighted sum
        for (const auto& c : scheme.couplings) {
            const auto& gs = scheme.states[static_cast<std::size_t>(c.ground)];
            if (gs.F != scheme.lower_F_) continue;  // cavity addresses the lower manifold
            const double w = mode.pol[c.q + 1];
            if (w == 0.0) continue;
            atom_part(c.ground, c.excited) += g_max * w * c.amplitude;
        }
        if (atom_part.isZero(0.0)) continue;
        const int fock = layout.dim_of(mode.label);
        Operator a_dag = embed(fock_lowering(fock, mode.label).adjoint(), mode.label, layout);
        Operator lower = embed(Operator(single_space("atom", n_atom), atom_part),
                               "atom", layout);
        Operator half = a_dag * lower;
        terms.push_back(Operator(layout, half.elements() + half.elements().adjoint()));
    }
    return terms;
}

double coupling_for_mode_volume(double volume, Line line,
                                const ModeVolumeCalibration& calib)
{
    if (volume <= 0.0) throw std::invalid_argument("coupling_for_mode_volume: V must be > 0");
    if (calib.V0 <= 0.0 || calib.g0 <= 0.0) {
        throw std::invalid_argument("coupling_for_mode_volume: invalid calibration");
    }
    const double g = calib.g0 * std::sqrt(calib.V0 / volume);
    return line == Line::D2 ? 2.3 * g : g;
}

std::string scheme_to_json(const AtomicScheme& scheme)
{
    nlohmann::ordered_json j;
    switch (scheme.kind) {
        case SchemeKind::Ideal: j["kind"] = "ideal"; break;
        case SchemeKind::RbD1: j["kind"] = "rb-d1"; break;
        case SchemeKind::RbD2: j["kind"] = "rb-d2"; break;
    }
    j["gamma_rad_per_us"] = scheme.gamma;
    j["excited_F"] = scheme.excited_F_values;
    j["excited_offsets_rad_per_us"] = scheme.excited_offsets;
    j["states"] = nlohmann::ordered_json::array();
    for (const auto& s : scheme.states) {
        j["states"].push_back({
            {"manifold", s.manifold == ManifoldKind::Ground ? "ground" : "excited"},
            {"F", s.F},
            {"mF", s.mF},
            {"energy_shift_rad_per_us", s.energy_shift},
        });
    }
    j["couplings"] = nlohmann::ordered_json::array();
    for (const auto& c : scheme.couplings) {
        j["couplings"].push_back({
            {"ground", c.ground},
            {"excited", c.excited},
            {"q", c.q},
            {"amplitude", c.amplitude},
        });
    }
    return j.dump(2);
}

} // namespace polburst
