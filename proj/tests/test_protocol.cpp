#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "polburst/protocol.hpp"

using namespace polburst;

namespace {

SystemSpec ideal_system(double g_over_gamma, double kappa_over_gamma)
{
    SystemSpec sys;
    sys.kind = SchemeKind::Ideal;
    sys.cavity = CavityConfig{g_over_gamma, kappa_over_gamma, 0.0, 1.0, 3};
    return sys;
}

double angle_difference(double a, double b)
{
    return std::abs(std::remainder(a - b, kTwoPi));
}

} // namespace

TEST_CASE("phi state round-trips through coherence_phase")
{
    const AtomicScheme scheme = build_scheme(SchemeKind::Ideal, {});
    for (double phi : {0.0, 0.5 * M_PI, M_PI, -2.0}) {
        const DensityMatrix rho = atom_phi_state(scheme, phi);
        CHECK(angle_difference(coherence_phase(rho, scheme), phi) < 1e-12);
    }
    // a bare mF = 0 ground state carries no g1+/g1- coherence
    const DensityMatrix flat = atom_ground_state(scheme, scheme.upper_F(), 0.0);
    CHECK_THROWS_AS(coherence_phase(flat, scheme), std::runtime_error);
}

TEST_CASE("embed with vacuum and reduce to atom round-trip")
{
    const AtomicScheme scheme = build_scheme(SchemeKind::Ideal, {});
    const SpaceLayout layout = production_layout(scheme, ideal_system(10.0, 2.0).cavity);
    const DensityMatrix rho = atom_phi_state(scheme, 1.3);
    const DensityMatrix back = reduce_to_atom(embed_with_vacuum(rho, layout));
    CHECK((back.elements() - rho.elements()).norm() < 1e-13);
}

TEST_CASE("mixed manifold state is the uniform mixture")
{
    const AtomicScheme scheme = build_scheme(SchemeKind::RbD2, {});
    const DensityMatrix rho = atom_mixed_manifold(scheme, 2.0);
    CHECK(rho.elements().trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    for (double mF = -2.0; mF <= 2.0; mF += 1.0) {
        CHECK(ground_population(rho, scheme, 2.0, mF) ==
              doctest::Approx(0.2).epsilon(1e-12));
    }
    CHECK(ground_population(rho, scheme, 1.0, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("scheme transfer round-trips ground states between lines")
{
    const AtomicScheme d2 = build_scheme(SchemeKind::RbD2, {});
    const AtomicScheme d1 = build_scheme(SchemeKind::RbD1, {});
    // mix of a coherent superposition and an upper-manifold mixture
    DensityMatrix rho = atom_phi_state(d2, 0.8);
    Matrix mixed = 0.6 * rho.elements() + 0.4 * atom_mixed_manifold(d2, 2.0).elements();
    rho = DensityMatrix(d2.atom_layout(), mixed);

    const DensityMatrix there = transfer_scheme(rho, d2, d1);
    CHECK(there.elements().trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    const DensityMatrix back = transfer_scheme(there, d1, d2);
    CHECK((back.elements() - rho.elements()).norm() < 1e-12);
    // the g1 coherence phase survives the line change
    CHECK(angle_difference(coherence_phase(there, d1), 0.8) < 1e-12);
}

TEST_CASE("production run is symmetric under mF sign flip")
{
    SystemSpec sys;
    sys.kind = SchemeKind::RbD2;
    sys.cavity = c10_cavity(SchemeKind::RbD2);
    const AtomicScheme scheme = sys.scheme();
    const SpaceLayout layout = production_layout(scheme, sys.cavity);
    VstirapParams pulse;
    pulse.duration = 0.3;
    pulse.omega = kTwoPi * 35.0;
    const ScenarioTolerances tol = relaxed_tolerances();

    const CycleResult plus = run_vstirap(
        sys, pulse, embed_with_vacuum(atom_ground_state(scheme, 2.0, 1.0), layout), tol);
    const CycleResult minus = run_vstirap(
        sys, pulse, embed_with_vacuum(atom_ground_state(scheme, 2.0, -1.0), layout), tol);

    CHECK(plus.p_H == doctest::Approx(minus.p_H).epsilon(1e-6));
    CHECK(plus.p_pi == doctest::Approx(minus.p_pi).epsilon(1e-6));
    for (const auto& [state, p] : plus.ground_populations) {
        CHECK(p == doctest::Approx(minus.ground_populations.at(
                                       {state.first, -state.second}))
                       .epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("flux efficiency agrees with the superposition-population value")
{
    const SystemSpec sys = ideal_system(10.0, 2.0);
    const AtomicScheme scheme = sys.scheme();
    const SpaceLayout layout = production_layout(scheme, sys.cavity);
    VstirapParams pulse;
    pulse.duration = 10.0;
    pulse.omega = 10.0;
    const DensityMatrix rho0 =
        embed_with_vacuum(atom_ground_state(scheme, 2.0, 0.0), layout);
    const CycleResult r = run_vstirap(sys, pulse, rho0, {});
    CHECK(r.p_H == doctest::Approx(eta2_ideal(r.post_rho, scheme)).epsilon(1e-3));
    CHECK(r.p_H + r.p_pi <= 1.0 + 1e-9);
}

TEST_CASE("halving the tolerances leaves the efficiency unchanged")
{
    const SystemSpec sys = ideal_system(10.0, 2.0);
    const AtomicScheme scheme = sys.scheme();
    const SpaceLayout layout = production_layout(scheme, sys.cavity);
    VstirapParams pulse;
    pulse.duration = 3.0;
    pulse.omega = 8.0;
    const DensityMatrix rho0 =
        embed_with_vacuum(atom_ground_state(scheme, 2.0, 0.0), layout);

    ScenarioTolerances tol = relaxed_tolerances();
    const double eta = run_vstirap(sys, pulse, rho0, tol).p_H;
    tol.rtol *= 0.5;
    tol.atol *= 0.5;
    const double eta_half = run_vstirap(sys, pulse, rho0, tol).p_H;
    CHECK(std::abs(eta - eta_half) < 1e-4);
}

TEST_CASE("burst chaining is consistent with a standalone cycle")
{
    BurstConfig cfg;
    cfg.production = ideal_system(10.0, 2.0);
    cfg.reprep_kind = SchemeKind::Ideal;
    cfg.mode = BurstMode::Coherent;
    cfg.n_photons = 3;
    cfg.vstirap = VstirapParams{3.0, 8.0, 0.0, 1.0};
    cfg.stirap = stirap_preset(SchemeKind::Ideal);
    const ScenarioTolerances tol = relaxed_tolerances();

    const BurstReport report = run_burst(cfg, tol);
    REQUIRE(report.per_cycle.size() == 3);

    const AtomicScheme scheme = cfg.production.scheme();
    const SpaceLayout layout = production_layout(scheme, cfg.production.cavity);
    const CycleResult standalone = run_vstirap(
        cfg.production, cfg.vstirap,
        embed_with_vacuum(atom_ground_state(scheme, 2.0, 0.0), layout), tol);
    CHECK(report.per_cycle[0].p_H ==
          doctest::Approx(standalone.p_H).epsilon(1e-12));

    double product = 1.0;
    for (std::size_t i = 0; i < report.per_cycle.size(); ++i) {
        product *= report.per_cycle[i].p_H;
        CHECK(report.cumulative_eff[i] == doctest::Approx(product).epsilon(1e-12));
        if (i > 0) CHECK(report.cumulative_eff[i] <= report.cumulative_eff[i - 1]);
        CHECK(report.coincidence_rate[i] > 0.0);
        for (const auto& [state, p] : report.populations_after_reprep[i]) {
            CHECK(p == doctest::Approx(report.populations_after_reprep[i].at(
                                           {state.first, -state.second}))
                           .epsilon(1e-6).scale(1.0));
        }
    }
    CHECK(report.repetition_rate ==
          doctest::Approx(1e6 / (cfg.vstirap.duration + cfg.stirap.duration)));
}

TEST_CASE("masked-pair re-preparation at 150 ns, both lines")
{
    const ScenarioTolerances tol = relaxed_tolerances();
    double eta_d1 = 0.0;
    for (SchemeKind kind : {SchemeKind::RbD1, SchemeKind::RbD2}) {
        const AtomicScheme scheme = build_scheme(kind, {});
        StirapParams p = stirap_preset(kind);
        p.duration = 0.15;
        const ReprepResult r =
            run_stirap_reprep(scheme, p, atom_phi_state(scheme, p.phi), tol);
        if (kind == SchemeKind::RbD1) {
            eta_d1 = r.target_population;
            CHECK(r.target_population == doctest::Approx(0.93389).epsilon(1e-3));
        } else {
            CHECK(r.target_population == doctest::Approx(0.80160).epsilon(1e-3));
            CHECK(eta_d1 > r.target_population);
        }
    }
}

TEST_CASE("optical pumping reaches its target and reports thresholds")
{
    const ScenarioTolerances tol = relaxed_tolerances();
    const AtomicScheme scheme = build_scheme(SchemeKind::RbD2, {});
    PumpingParams p = pumping_preset(SchemeKind::RbD2);
    p.duration = 7.5;
    const PumpingResult r =
        run_optical_pumping(scheme, p, atom_phi_state(scheme, M_PI), tol);
    CHECK(r.target_trace.back() > 0.95);
    const double t95 = time_to_threshold(r, 0.95);
    CHECK(t95 > 4.0);
    CHECK(t95 < 7.0);
    CHECK(time_to_threshold(r, 2.0) == -1.0);
}

TEST_CASE("optimizer wrappers respect their bounds")
{
    SweepSettings settings;
    settings.seeds_per_dim = 2;
    settings.budget = 6;
    OptimResult r = optimize_vstirap(ideal_system(10.0, 2.0), 2.0, {4.0, 12.0},
                                     {0.0, 0.0}, settings);
    CHECK(r.best_value > 0.0);
    CHECK(r.best_params(0) >= 4.0);
    CHECK(r.best_params(0) <= 12.0);
    CHECK(r.best_params(1) == 0.0);
    CHECK(r.evaluations >= 4);
}

TEST_CASE("production rejects a mismatched initial layout")
{
    const SystemSpec sys = ideal_system(10.0, 2.0);
    const AtomicScheme scheme = sys.scheme();
    VstirapParams pulse;
    pulse.duration = 1.0;
    pulse.omega = 8.0;
    CHECK_THROWS_AS(
        run_vstirap(sys, pulse, atom_ground_state(scheme, 2.0, 0.0), {}),
        std::invalid_argument);
}
