#include "polburst/protocol.hpp"

#include <algorithm>
#include <cmath>

namespace polburst {

namespace {
RunDiagnostics run_diagnostics(const Trajectory& traj)
{
    return {traj.max_trace_error, traj.hermiticity_error, traj.min_eigenvalue};
}
} // namespace


namespace {

// diagonal atomic operator from a per-state value, embedded into the layout
Operator atom_diagonal(const AtomicScheme& scheme, const SpaceLayout& layout,
                       const std::function<double(const AtomicState&)>& value)
{
    const int n = scheme.num_states();
    Matrix d = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        d(i, i) = value(scheme.states[static_cast<std::size_t>(i)]);
    }
    return embed(Operator(scheme.atom_layout(), std::move(d)), "atom", layout);
}

Operator zeeman_diagonal(const AtomicScheme& scheme, const SpaceLayout& layout)
{
    return atom_diagonal(scheme, layout, [](const AtomicState& s) {
        return s.manifold == ManifoldKind::Ground ? s.energy_shift : 0.0;
    });
}

Operator number_operator(const SpaceLayout& layout, const std::string& label)
{
    Operator a = fock_lowering(layout.dim_of(label), label);
    return embed(a.adjoint() * a, label, layout);
}

Operator top_fock_projector(const SpaceLayout& layout, const std::string& label)
{
    const int dim = layout.dim_of(label);
    Matrix p = Matrix::Zero(dim, dim);
    p(dim - 1, dim - 1) = 1.0;
    return embed(Operator(single_space(label, dim), std::move(p)), label, layout);
}

void add_atomic_decay(const AtomicScheme& scheme, const SpaceLayout& layout,
                      GeneratorSpec& gen)
{
    const int n = scheme.num_states();
    for (const auto& c : decay_channels(scheme)) {
        Matrix m = Matrix::Zero(n, n);
        m(c.ground, c.excited) = c.amplitude;
        gen.collapse_ops.emplace_back(
            embed(Operator(scheme.atom_layout(), std::move(m)), "atom", layout),
            2.0 * scheme.gamma);
    }
}

void add_drive(const AtomicScheme& scheme, const SpaceLayout& layout,
               const PulseSpec& spec, GeneratorSpec& gen)
{
    Operator coupling = drive_coupling_operator(scheme, spec, layout);
    gen.driven_terms.emplace_back(std::move(coupling),
                                  [spec](double t) { return pulse_envelope(spec, t); });
}

// shared rotating frame for several drive fields: the first field is the
// reference fixing the excited diagonal; every other field addressing a
// different ground manifold contributes that manifold's frame offset
void add_field_frame(const AtomicScheme& scheme, const SpaceLayout& layout,
                     const std::vector<PulseSpec>& fields, GeneratorSpec& gen)
{
    if (fields.empty()) throw std::invalid_argument("add_field_frame: no fields");
    const PulseSpec& ref = fields.front();
    gen.static_terms.push_back(drive_detuning_diagonal(scheme, ref, layout));
    const double ref_shift = ref.detuning + scheme.excited_offset(ref.target_Fprime);
    for (std::size_t i = 1; i < fields.size(); ++i) {
        const PulseSpec& f = fields[i];
        if (f.ground_F == ref.ground_F) {
            const double shift = f.detuning + scheme.excited_offset(f.target_Fprime);
            if (std::abs(shift - ref_shift) > 1e-12) {
                throw std::invalid_argument(
                    "add_field_frame: conflicting frames on one ground manifold");
            }
            continue;
        }
        const double offset =
            f.detuning + scheme.excited_offset(f.target_Fprime) - ref_shift;
        if (offset != 0.0) {
            gen.static_terms.push_back(
                atom_diagonal(scheme, layout, [&](const AtomicState& s) {
                    return (s.manifold == ManifoldKind::Ground && s.F == f.ground_F)
                               ? offset
                               : 0.0;
                }));
        }
    }
    for (const auto& f : fields) add_drive(scheme, layout, f, gen);
}

EvolveOptions base_options(const ScenarioTolerances& tol)
{
    EvolveOptions opt;
    opt.rtol = tol.rtol;
    opt.atol = tol.atol;
    opt.n_output = tol.n_output;
    return opt;
}

std::map<std::pair<double, double>, double> ground_population_map(
    const DensityMatrix& atom_rho, const AtomicScheme& scheme)
{
    std::map<std::pair<double, double>, double> out;
    for (int i = 0; i < scheme.num_states(); ++i) {
        const auto& s = scheme.states[static_cast<std::size_t>(i)];
        if (s.manifold != ManifoldKind::Ground) continue;
        out[{s.F, s.mF}] = atom_rho.elements()(i, i).real();
    }
    return out;
}

Operator ground_projector(const AtomicScheme& scheme, const SpaceLayout& layout,
                          double F, double mF)
{
    const int idx = scheme.index_of(ManifoldKind::Ground, F, mF);
    const int n = scheme.num_states();
    Matrix p = Matrix::Zero(n, n);
    p(idx, idx) = 1.0;
    return embed(Operator(scheme.atom_layout(), std::move(p)), "atom", layout);
}

} // namespace

ScenarioTolerances relaxed_tolerances()
{
    return ScenarioTolerances{1e-6, 1e-9, 51};
}

StirapParams stirap_preset(SchemeKind kind)
{
    StirapParams p;
    p.omega = kind == SchemeKind::RbD2 ? kTwoPi * 49.0 : kTwoPi * 41.0;
    if (kind == SchemeKind::Ideal) {
        p.mask_a = 14.0;
        p.mask_c = 0.0;  // duration/3
    }
    return p;
}

PumpingParams pumping_preset(SchemeKind kind)
{
    PumpingParams p;
    if (kind == SchemeKind::RbD2) {
        p.omega1 = kTwoPi * 57.5;
        p.omega2 = kTwoPi * 25.5;
    }
    return p;
}

CavityConfig c10_cavity(SchemeKind kind)
{
    const double gamma = build_scheme(kind, BFieldConfig{}).gamma;
    CavityConfig cav;
    cav.kappa = kTwoPi * 2.0;
    cav.g_eff = g_for_cooperativity(10.0, cav.kappa, gamma);
    cav.detuning = 0.0;
    cav.target_Fprime = 1.0;
    cav.fock_dim = 3;
    return cav;
}

SpaceLayout production_layout(const AtomicScheme& scheme, const CavityConfig& cavity)
{
    cavity.validate();
    bool has_pi = false;
    for (const auto& c : scheme.couplings) {
        const auto& g = scheme.states[static_cast<std::size_t>(c.ground)];
        if (g.F == scheme.lower_F() && c.q == 0) {
            has_pi = true;
            break;
        }
    }
    std::vector<Subsystem> subs{{"atom", scheme.num_states()}, {"cavH", cavity.fock_dim}};
    if (has_pi) subs.push_back({"cavPi", cavity.fock_dim});
    return SpaceLayout::compose(std::move(subs));
}

DensityMatrix atom_ground_state(const AtomicScheme& scheme, double F, double mF)
{
    Vector ket = Vector::Zero(scheme.num_states());
    ket(scheme.index_of(ManifoldKind::Ground, F, mF)) = 1.0;
    return DensityMatrix::pure(scheme.atom_layout(), ket);
}

DensityMatrix atom_phi_state(const AtomicScheme& scheme, double phi)
{
    Vector ket = Vector::Zero(scheme.num_states());
    const double s = 1.0 / std::sqrt(2.0);
    ket(scheme.g1_plus()) = s;
    ket(scheme.g1_minus()) = std::exp(Complex(0.0, phi)) * s;
    return DensityMatrix::pure(scheme.atom_layout(), ket);
}

DensityMatrix atom_mixed_manifold(const AtomicScheme& scheme, double F)
{
    const auto idx = scheme.states_in(ManifoldKind::Ground, F);
    if (idx.empty()) throw std::invalid_argument("atom_mixed_manifold: empty manifold");
    Matrix m = Matrix::Zero(scheme.num_states(), scheme.num_states());
    for (int i : idx) m(i, i) = 1.0 / static_cast<double>(idx.size());
    return DensityMatrix(scheme.atom_layout(), std::move(m));
}

DensityMatrix embed_with_vacuum(const DensityMatrix& atom_rho, const SpaceLayout& layout)
{
    if (layout.index_of("atom") != 0) {
        throw std::invalid_argument("embed_with_vacuum: atom must be the first subsystem");
    }
    Matrix m = atom_rho.elements();
    for (const auto& sub : layout.subsystems()) {
        if (sub.label == "atom") continue;
        Matrix vac = Matrix::Zero(sub.dim, sub.dim);
        vac(0, 0) = 1.0;
        m = kron(m, vac);
    }
    return DensityMatrix(layout, std::move(m));
}

DensityMatrix reduce_to_atom(const DensityMatrix& full_rho)
{
    std::vector<std::string> traced;
    for (const auto& sub : full_rho.layout().subsystems()) {
        if (sub.label != "atom") traced.push_back(sub.label);
    }
    if (traced.empty()) return full_rho;
    return partial_trace(full_rho, traced);
}

double ground_population(const DensityMatrix& atom_rho, const AtomicScheme& scheme,
                         double F, double mF)
{
    const int idx = scheme.index_of(ManifoldKind::Ground, F, mF);
    return atom_rho.elements()(idx, idx).real();
}

DensityMatrix transfer_scheme(const DensityMatrix& atom_rho,
                              const AtomicScheme& from, const AtomicScheme& to)
{
    if (atom_rho.dim() != from.num_states()) {
        throw std::invalid_argument("transfer_scheme: state does not match source scheme");
    }
    const int n_to = to.num_states();
    Matrix out = Matrix::Zero(n_to, n_to);
    std::vector<int> ground_map(static_cast<std::size_t>(from.num_states()), -1);
    for (int i = 0; i < from.num_states(); ++i) {
        const auto& s = from.states[static_cast<std::size_t>(i)];
        if (s.manifold == ManifoldKind::Ground) {
            ground_map[static_cast<std::size_t>(i)] =
                to.index_of(ManifoldKind::Ground, s.F, s.mF);
        }
    }
    const Matrix& r = atom_rho.elements();
    for (int i = 0; i < from.num_states(); ++i) {
        for (int j = 0; j < from.num_states(); ++j) {
            if (ground_map[static_cast<std::size_t>(i)] >= 0 &&
                ground_map[static_cast<std::size_t>(j)] >= 0) {
                out(ground_map[static_cast<std::size_t>(i)],
                    ground_map[static_cast<std::size_t>(j)]) = r(i, j);
            }
        }
    }
    for (int e = 0; e < from.num_states(); ++e) {
        if (from.states[static_cast<std::size_t>(e)].manifold != ManifoldKind::Excited)
            continue;
        const double p = r(e, e).real();
        if (p <= 0.0) continue;
        for (const auto& c : from.couplings) {
            if (c.excited != e) continue;
            const int g = ground_map[static_cast<std::size_t>(c.ground)];
            out(g, g) += c.amplitude * c.amplitude * p;
        }
    }
    return DensityMatrix(to.atom_layout(), std::move(out));
}

double coherence_phase(const DensityMatrix& rho, const AtomicScheme& scheme)
{
    DensityMatrix atom_rho = rho.layout().has("cavH") ? reduce_to_atom(rho) : rho;
    const Complex c = atom_rho.elements()(scheme.g1_minus(), scheme.g1_plus());
    if (std::abs(c) < 1e-6) {
        throw std::runtime_error("coherence_phase: coherence magnitude below 1e-6");
    }
    return std::arg(c);
}

CycleResult run_vstirap(const SystemSpec& sys, const VstirapParams& pulse,
                        const DensityMatrix& rho0, const ScenarioTolerances& tol)
{
    const AtomicScheme scheme = sys.scheme();
    const SpaceLayout layout = production_layout(scheme, sys.cavity);
    if (rho0.layout() != layout) {
        throw std::invalid_argument("run_vstirap: state layout does not match the system");
    }

    PulseSpec drive;
    drive.shape = PulseShape::Sin2;
    drive.omega_max = pulse.omega;
    drive.duration = pulse.duration;
    drive.detuning = pulse.detuning;
    drive.polarization = pi_polarization();
    drive.ground_F = scheme.upper_F();
    drive.target_Fprime = pulse.target_Fprime;

    GeneratorSpec gen;
    gen.static_terms.push_back(zeeman_diagonal(scheme, layout));
    gen.static_terms.push_back(drive_detuning_diagonal(scheme, drive, layout));
    // two-photon mismatch between cavity and drive sits on the photon number
    const double mismatch = sys.cavity.detuning - pulse.detuning +
                            scheme.excited_offset(sys.cavity.target_Fprime) -
                            scheme.excited_offset(pulse.target_Fprime);
    for (auto& term : cavity_interaction(scheme, sys.cavity, layout)) {
        gen.static_terms.push_back(std::move(term));
    }
    add_drive(scheme, layout, drive, gen);
    add_atomic_decay(scheme, layout, gen);

    EvolveOptions opt = base_options(tol);
    for (const auto& sub : layout.subsystems()) {
        if (sub.label == "atom") continue;
        Operator num = number_operator(layout, sub.label);
        if (mismatch != 0.0) {
            gen.static_terms.push_back(num * Complex(mismatch, 0.0));
        }
        gen.collapse_ops.emplace_back(
            embed(fock_lowering(sub.dim, sub.label), sub.label, layout),
            2.0 * sys.cavity.kappa);
        opt.flux_ops.emplace_back(sub.label, num);
        opt.leakage_ops.push_back(top_fock_projector(layout, sub.label));
    }

    Trajectory traj = evolve(rho0, gen, 0.0, pulse.duration, opt);

    CycleResult result;
    result.diagnostics = run_diagnostics(traj);
    result.p_H = emission_efficiency(traj, "cavH", sys.cavity.kappa);
    result.p_pi = layout.has("cavPi")
                      ? emission_efficiency(traj, "cavPi", sys.cavity.kappa)
                      : 0.0;
    if (result.p_H + result.p_pi > 1.0 + 1e-6) {
        throw std::runtime_error("run_vstirap: emission probabilities exceed unity");
    }
    const double total = result.p_H + result.p_pi;
    result.purity = total > 0.0 ? result.p_H / total : 0.0;
    result.leakage = traj.leakage;

    DensityMatrix atom_rho = reduce_to_atom(traj.final_rho);
    result.ground_populations = ground_population_map(atom_rho, scheme);
    result.post_rho = embed_with_vacuum(atom_rho, layout);
    return result;
}

ReprepResult run_stirap_reprep(const AtomicScheme& scheme, const StirapParams& params,
                               const DensityMatrix& rho0_atom,
                               const ScenarioTolerances& tol)
{
    const SpaceLayout layout = scheme.atom_layout();
    if (rho0_atom.layout() != layout) {
        throw std::invalid_argument("run_stirap_reprep: expected an atom-only state");
    }

    // the field coupling the transfer target (upper manifold, pi polarised)
    // takes the early cosine component; the field emptying the lower-manifold
    // superposition takes the late sine component
    PulseSpec stokes;
    stokes.shape = PulseShape::MaskedStirapPair;
    stokes.component = StirapComponent::CosEarly;
    stokes.omega_max = params.omega;
    stokes.duration = params.duration;
    stokes.mask_n = params.mask_n;
    stokes.mask_a = params.mask_a;
    stokes.mask_c = params.mask_c;
    stokes.detuning = params.detuning;
    stokes.polarization = pi_polarization();
    stokes.ground_F = scheme.upper_F();
    stokes.target_Fprime = params.target_Fprime;

    PulseSpec pump = stokes;
    pump.component = StirapComponent::SinLate;
    pump.polarization = sigma_superposition(params.phi);
    pump.ground_F = scheme.lower_F();

    GeneratorSpec gen;
    gen.static_terms.push_back(zeeman_diagonal(scheme, layout));
    add_field_frame(scheme, layout, {stokes, pump}, gen);
    add_atomic_decay(scheme, layout, gen);

    Trajectory traj = evolve(rho0_atom, gen, 0.0, params.duration, base_options(tol));

    ReprepResult result;
    result.diagnostics = run_diagnostics(traj);
    result.post_rho = traj.final_rho;
    result.target_population =
        ground_population(result.post_rho, scheme, scheme.upper_F(), 0.0);
    return result;
}

PumpingResult run_optical_pumping(const AtomicScheme& scheme, const PumpingParams& params,
                                  const DensityMatrix& rho0_atom,
                                  const ScenarioTolerances& tol)
{
    const SpaceLayout layout = scheme.atom_layout();
    if (rho0_atom.layout() != layout) {
        throw std::invalid_argument("run_optical_pumping: expected an atom-only state");
    }

    PulseSpec laser1;
    laser1.shape = PulseShape::TopHat;
    laser1.omega_max = params.omega1;
    laser1.t_on = 0.0;
    laser1.duration = params.duration;
    laser1.detuning = params.delta1;
    laser1.polarization = pi_polarization();
    laser1.ground_F = scheme.lower_F();
    laser1.target_Fprime = params.target_Fprime;
    laser1.norm = PulseSpec::Norm::Bare;

    PulseSpec laser2 = laser1;
    laser2.omega_max = params.omega2;
    laser2.detuning = params.delta2;
    laser2.ground_F = scheme.upper_F();

    GeneratorSpec gen;
    gen.static_terms.push_back(zeeman_diagonal(scheme, layout));
    add_field_frame(scheme, layout, {laser1, laser2}, gen);
    add_atomic_decay(scheme, layout, gen);

    EvolveOptions opt = base_options(tol);
    opt.trace_ops.emplace_back("target",
                               ground_projector(scheme, layout, scheme.upper_F(), 0.0));
    Trajectory traj = evolve(rho0_atom, gen, 0.0, params.duration, opt);

    PumpingResult result;
    result.diagnostics = run_diagnostics(traj);
    result.times = traj.times;
    result.target_trace = traj.traces.at("target");
    result.post_rho = traj.final_rho;
    return result;
}

double time_to_threshold(const PumpingResult& result, double threshold)
{
    for (std::size_t i = 0; i < result.times.size(); ++i) {
        if (result.target_trace[i] >= threshold) return result.times[i];
    }
    return -1.0;
}

std::vector<BfieldPoint> bfield_scan(const SystemSpec& base, const VstirapParams& pulse,
                                     const std::vector<double>& splittings,
                                     const ScenarioTolerances& tol)
{
    std::vector<BfieldPoint> out;
    out.reserve(splittings.size());
    for (double split : splittings) {
        SystemSpec sys = base;
        sys.bfield.splitting = split;
        const AtomicScheme scheme = sys.scheme();
        const SpaceLayout layout = production_layout(scheme, sys.cavity);
        const DensityMatrix rho0 =
            embed_with_vacuum(atom_ground_state(scheme, scheme.upper_F(), 0.0), layout);
        CycleResult cycle = run_vstirap(sys, pulse, rho0, tol);
        const double phi = coherence_phase(cycle.post_rho, scheme);
        out.push_back({split, phi, cycle.p_H});
    }
    return out;
}

BurstReport run_burst(const BurstConfig& config, const ScenarioTolerances& tol)
{
    if (config.n_photons < 1) throw std::invalid_argument("run_burst: n_photons >= 1");
    const AtomicScheme prod_scheme = config.production.scheme();
    SystemSpec reprep_sys = config.production;
    reprep_sys.kind = config.reprep_kind;
    reprep_sys.overrides = SchemeOverrides{};
    const AtomicScheme reprep_scheme = reprep_sys.scheme();
    const SpaceLayout layout = production_layout(prod_scheme, config.production.cavity);

    const double reprep_duration = config.mode == BurstMode::Coherent
                                       ? config.stirap.duration
                                       : config.pumping.duration;
    BurstReport report;
    report.mode = config.mode;
    report.repetition_rate = 1e6 / (config.vstirap.duration + reprep_duration);

    DensityMatrix atom_rho =
        atom_ground_state(prod_scheme, prod_scheme.upper_F(), 0.0);
    double cumulative = 1.0;
    for (int cycle = 1; cycle <= config.n_photons; ++cycle) {
        CycleResult cr = run_vstirap(config.production, config.vstirap,
                                     embed_with_vacuum(atom_rho, layout), tol);
        cumulative *= cr.p_H;
        report.per_cycle.push_back(cr);
        report.cumulative_eff.push_back(cumulative);
        report.coincidence_rate.push_back(cumulative * report.repetition_rate / cycle);

        atom_rho = reduce_to_atom(cr.post_rho);
        const bool cross_line = config.reprep_kind != config.production.kind;
        if (cross_line) atom_rho = transfer_scheme(atom_rho, prod_scheme, reprep_scheme);
        if (config.mode == BurstMode::Coherent) {
            atom_rho = run_stirap_reprep(reprep_scheme, config.stirap, atom_rho, tol)
                           .post_rho;
        } else {
            atom_rho = run_optical_pumping(reprep_scheme, config.pumping, atom_rho, tol)
                           .post_rho;
        }
        if (cross_line) atom_rho = transfer_scheme(atom_rho, reprep_scheme, prod_scheme);
        report.populations_after_reprep.push_back(
            ground_population_map(atom_rho, prod_scheme));
    }
    return report;
}

OptimResult optimize_vstirap(const SystemSpec& sys, double duration,
                             std::pair<double, double> omega_bounds,
                             std::pair<double, double> detuning_bounds,
                             const SweepSettings& settings)
{
    const AtomicScheme scheme = sys.scheme();
    const SpaceLayout layout = production_layout(scheme, sys.cavity);
    const DensityMatrix rho0 =
        embed_with_vacuum(atom_ground_state(scheme, scheme.upper_F(), 0.0), layout);

    OptimProblem problem;
    problem.bounds = {omega_bounds, detuning_bounds};
    problem.seeds_per_dim = settings.seeds_per_dim;
    problem.budget = settings.budget;
    problem.objective = [&](const Eigen::VectorXd& x) {
        VstirapParams pulse;
        pulse.duration = duration;
        pulse.omega = x(0);
        pulse.detuning = x(1);
        pulse.target_Fprime = sys.cavity.target_Fprime;
        return run_vstirap(sys, pulse, rho0, settings.tol).p_H;
    };
    return maximize(problem);
}

StirapOptResult optimize_stirap(const AtomicScheme& scheme, double duration,
                                std::pair<double, double> a_bounds,
                                std::pair<double, double> omega_bounds,
                                const std::vector<int>& n_values,
                                const SweepSettings& settings)
{
    if (n_values.empty()) throw std::invalid_argument("optimize_stirap: empty n grid");
    const DensityMatrix rho0 = atom_phi_state(scheme, M_PI);

    StirapOptResult best;
    best.result.best_value = -1.0;
    for (int n : n_values) {
        OptimProblem problem;
        problem.bounds = {a_bounds, omega_bounds};
        problem.seeds_per_dim = settings.seeds_per_dim;
        problem.budget = settings.budget;
        problem.objective = [&](const Eigen::VectorXd& x) {
            StirapParams params = stirap_preset(scheme.kind);
            params.duration = duration;
            params.mask_a = x(0);
            params.omega = x(1);
            params.mask_n = n;
            return run_stirap_reprep(scheme, params, rho0, settings.tol)
                .target_population;
        };
        OptimResult r = maximize(problem);
        if (r.best_value > best.result.best_value) {
            best.result = std::move(r);
            best.n = n;
        }
    }
    return best;
}

OptimResult optimize_pumping(const AtomicScheme& scheme, double duration,
                             std::pair<double, double> delta1_bounds,
                             std::pair<double, double> delta2_bounds,
                             std::pair<double, double> omega1_bounds,
                             std::pair<double, double> omega2_bounds,
                             const SweepSettings& settings)
{
    // start from an even mixture over all ground states (initialisation case)
    Matrix m = Matrix::Zero(scheme.num_states(), scheme.num_states());
    std::vector<int> ground;
    for (int i = 0; i < scheme.num_states(); ++i) {
        if (scheme.states[static_cast<std::size_t>(i)].manifold == ManifoldKind::Ground) {
            ground.push_back(i);
        }
    }
    for (int i : ground) m(i, i) = 1.0 / static_cast<double>(ground.size());
    const DensityMatrix rho0(scheme.atom_layout(), std::move(m));

    OptimProblem problem;
    problem.bounds = {delta1_bounds, delta2_bounds, omega1_bounds, omega2_bounds};
    problem.seeds_per_dim = settings.seeds_per_dim;
    problem.budget = settings.budget;
    problem.objective = [&](const Eigen::VectorXd& x) {
        PumpingParams params = pumping_preset(scheme.kind);
        params.duration = duration;
        params.delta1 = x(0);
        params.delta2 = x(1);
        params.omega1 = x(2);
        params.omega2 = x(3);
        PumpingResult r = run_optical_pumping(scheme, params, rho0, settings.tol);
        return r.target_trace.back();
    };
    return maximize(problem);
}

} // namespace polburst
