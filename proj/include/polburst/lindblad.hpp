// lindblad.hpp — time-dependent master-equation integration and the
// emission-efficiency functionals built on top of it.

#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "polburst/atomic.hpp"

namespace polburst {

using Envelope = std::function<double(double)>;

// H(t) = sum(static_terms) + sum_j envelope_j(t) * driven_terms[j];
// dissipator uses collapse_ops (C_k, w_k) with rate weight w_k.
struct GeneratorSpec {
    std::vector<Operator> static_terms;
    std::vector<std::pair<Operator, Envelope>> driven_terms;
    std::vector<std::pair<Operator, double>> collapse_ops;

    void validate(const SpaceLayout& layout) const;
};

struct EvolveOptions {
    double rtol{1e-8};
    double atol{1e-10};
    int n_output{201};
    long max_steps{20000000};

    // expectation values sampled on the output grid
    std::vector<std::pair<std::string, Operator>> trace_ops;
    // integrals of Tr[rho O] accumulated as extra ODE components
    std::vector<std::pair<std::string, Operator>> flux_ops;
    // projectors whose maximal population over the run is reported as leakage
    std::vector<Operator> leakage_ops;
    bool record_snapshots{false};
};

struct Trajectory {
    std::vector<double> times;
    std::map<std::string, std::vector<double>> traces;
    std::map<std::string, double> flux;  // integral of Tr[rho O] over the span
    DensityMatrix final_rho;
    std::vector<Matrix> snapshots;
    double leakage{0.0};
    double max_trace_error{0.0};
    double hermiticity_error{0.0};  // of the raw final state, before cleanup
    double min_eigenvalue{0.0};     // of the raw final state, before cleanup
    long steps{0};
    long rhs_evaluations{0};
};

// Dense reference evaluation of the master-equation right-hand side:
// -i[H(t), rho] + sum_k w_k (C_k rho C_k^dag - 1/2 {C_k^dag C_k, rho}).
Matrix lindblad_rhs(const GeneratorSpec& gen, const Matrix& rho, double t);

// Adaptive Dormand-Prince 5(4) integration over [t0, t1] with per-step
// re-hermitization and observables sampled on a uniform output grid.
Trajectory evolve(const DensityMatrix& rho0, const GeneratorSpec& gen,
                  double t0, double t1, const EvolveOptions& options = {});

// eta = 2*kappa * integral of the named flux trace (Tr[rho (P x n_mode)]).
double emission_efficiency(const Trajectory& traj, const std::string& flux_label,
                           double kappa);

// Population difference <Phi_pi,0|rho|Phi_pi,0> - <Phi_0,0|rho|Phi_0,0> with
// Phi_phi = (|g1+> + e^{i phi}|g1->)/sqrt(2) at cavity vacuum.
double eta2_ideal(const DensityMatrix& rho, const AtomicScheme& scheme);

} // namespace polburst
