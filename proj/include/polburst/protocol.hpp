// protocol.hpp — scenario layer: single-photon production, coherent and
// incoherent re-preparation, magnetic-field phase scans, and chained
// photon-burst statistics, plus the per-scenario optimizers.

#pragma once

#include <map>
#include <utility>

#include "polburst/lindblad.hpp"
#include "polburst/optimize.hpp"
#include "polburst/pulses.hpp"

namespace polburst {

struct SystemSpec {
    SchemeKind kind{SchemeKind::RbD2};
    BFieldConfig bfield;
    CavityConfig cavity;
    SchemeOverrides overrides;

    AtomicScheme scheme() const { return build_scheme(kind, bfield, overrides); }
};

// integration settings per scenario; heavy Rb sweeps run at the relaxed preset
struct ScenarioTolerances {
    double rtol{1e-8};
    double atol{1e-10};
    int n_output{201};
};

ScenarioTolerances relaxed_tolerances();  // rtol 1e-6, atol 1e-9

// production drive: sin^2, pi-polarized, addressing the upper ground manifold
struct VstirapParams {
    double duration{0.5};          // us
    double omega{kTwoPi * 105.0};  // peak effective Rabi frequency, rad/us
    double detuning{0.0};          // laser detuning from the target transition
    double target_Fprime{1.0};
};

// masked-pair re-preparation: pi component on the upper manifold comes early,
// the sigma-superposition component on the lower manifold comes late
struct StirapParams {
    double duration{0.14};
    double omega{kTwoPi * 41.0};
    int mask_n{6};
    double mask_a{11.0};
    double mask_c{0.05};  // us; <= 0 selects duration/3
    double detuning{0.0};
    double phi{M_PI};  // pump polarization phase, matching the emitted photon
    double target_Fprime{1.0};
};

// two simultaneous top-hat pi drives with bare (Clebsch-Gordan-weighted)
// Rabi frequencies, both referenced to the F'=2 level
struct PumpingParams {
    double duration{2.5};
    double delta1{kTwoPi * 4.0};    // F=1 laser detuning
    double delta2{-kTwoPi * 7.5};   // F=2 laser detuning
    double omega1{kTwoPi * 34.0};
    double omega2{kTwoPi * 24.0};
    double target_Fprime{2.0};
};

StirapParams stirap_preset(SchemeKind kind);    // (6,11), 2pi*41 / 2pi*49
PumpingParams pumping_preset(SchemeKind kind);  // D1: 34/24, D2: 57.5/25.5

// kappa = 2pi*2 MHz and g chosen for cooperativity C = 10 on the given line
CavityConfig c10_cavity(SchemeKind kind);

// integration health of a finished run (raw state, before cleanup)
struct RunDiagnostics {
    double max_trace_error{0.0};
    double hermiticity_error{0.0};
    double min_eigenvalue{0.0};
};

struct CycleResult {
    double p_H{0.0};
    double p_pi{0.0};
    double purity{0.0};
    double leakage{0.0};
    RunDiagnostics diagnostics;
    DensityMatrix post_rho;  // production layout, cavity reset to vacuum
    std::map<std::pair<double, double>, double> ground_populations;  // (F,mF) -> p
};

struct ReprepResult {
    double target_population{0.0};
    RunDiagnostics diagnostics;
    DensityMatrix post_rho;  // atom-only layout
};

struct PumpingResult {
    std::vector<double> times;
    std::vector<double> target_trace;  // population of the pumping target state
    RunDiagnostics diagnostics;
    DensityMatrix post_rho;            // atom-only layout
};

// layout and state helpers
SpaceLayout production_layout(const AtomicScheme& scheme, const CavityConfig& cavity);
DensityMatrix atom_ground_state(const AtomicScheme& scheme, double F, double mF);
DensityMatrix atom_phi_state(const AtomicScheme& scheme, double phi);
DensityMatrix atom_mixed_manifold(const AtomicScheme& scheme, double F);
DensityMatrix embed_with_vacuum(const DensityMatrix& atom_rho, const SpaceLayout& layout);
DensityMatrix reduce_to_atom(const DensityMatrix& full_rho);
double ground_population(const DensityMatrix& atom_rho, const AtomicScheme& scheme,
                         double F, double mF);

// Carry an atomic state between line schemes: ground populations and
// coherences map one-to-one by (F, mF); residual excited population is
// redistributed onto the ground states via the source branching ratios.
DensityMatrix transfer_scheme(const DensityMatrix& atom_rho,
                              const AtomicScheme& from, const AtomicScheme& to);

// phase of the (mF=-1 | rho | mF=+1) coherence of the lower ground manifold;
// throws when the coherence magnitude is below 1e-6
double coherence_phase(const DensityMatrix& rho, const AtomicScheme& scheme);

CycleResult run_vstirap(const SystemSpec& sys, const VstirapParams& pulse,
                        const DensityMatrix& rho0,
                        const ScenarioTolerances& tol = {});

ReprepResult run_stirap_reprep(const AtomicScheme& scheme, const StirapParams& params,
                               const DensityMatrix& rho0_atom,
                               const ScenarioTolerances& tol = {});

PumpingResult run_optical_pumping(const AtomicScheme& scheme, const PumpingParams& params,
                                  const DensityMatrix& rho0_atom,
                                  const ScenarioTolerances& tol = {});

// first output-grid time at which the trace reaches the threshold; -1 if never
double time_to_threshold(const PumpingResult& result, double threshold);

struct BfieldPoint {
    double splitting;  // rad/us
    double phi;        // rad
    double eta;        // H-mode efficiency
};

std::vector<BfieldPoint> bfield_scan(const SystemSpec& base, const VstirapParams& pulse,
                                     const std::vector<double>& splittings,
                                     const ScenarioTolerances& tol = {});

enum class BurstMode { Coherent, Incoherent };

struct BurstConfig {
    SystemSpec production;                  // cavity-coupled line
    SchemeKind reprep_kind{SchemeKind::RbD1};
    BurstMode mode{BurstMode::Coherent};
    int n_photons{10};
    VstirapParams vstirap{0.36, kTwoPi * 105.0, 0.0, 1.0};
    StirapParams stirap{};    // coherent mode
    PumpingParams pumping{};  // incoherent mode
};

struct BurstReport {
    std::vector<CycleResult> per_cycle;
    std::vector<double> cumulative_eff;    // running product of p_H
    std::vector<double> coincidence_rate;  // cumulative * repetition_rate / n, Hz
    std::vector<std::map<std::pair<double, double>, double>> populations_after_reprep;
    double repetition_rate{0.0};  // Hz
    BurstMode mode{BurstMode::Coherent};
};

BurstReport run_burst(const BurstConfig& config, const ScenarioTolerances& tol = {});

// per-figure local optimizers
struct SweepSettings {
    int seeds_per_dim{3};
    long budget{40};
    ScenarioTolerances tol{relaxed_tolerances()};
};

OptimResult optimize_vstirap(const SystemSpec& sys, double duration,
                             std::pair<double, double> omega_bounds,
                             std::pair<double, double> detuning_bounds,
                             const SweepSettings& settings = {});

struct StirapOptResult {
    OptimResult result;  // params = (a, omega)
    int n{6};
};

StirapOptResult optimize_stirap(const AtomicScheme& scheme, double duration,
                                std::pair<double, double> a_bounds,
                                std::pair<double, double> omega_bounds,
                                const std::vector<int>& n_values,
                                const SweepSettings& settings = {});

OptimResult optimize_pumping(const AtomicScheme& scheme, double duration,
                             std::pair<double, double> delta1_bounds,
                             std::pair<double, double> delta2_bounds,
                             std::pair<double, double> omega1_bounds,
                             std::pair<double, double> omega2_bounds,
                             const SweepSettings& settings = {});

} // namespace polburst
