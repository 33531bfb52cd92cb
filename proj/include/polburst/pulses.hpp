// pulses.hpp — time-dependent drive envelopes and their Hamiltonian terms

#pragma once

#include <utility>

#include "polburst/atomic.hpp"

namespace polburst {

enum class PulseShape { Sin2, MaskedStirapPair, TopHat };

// Which component of the masked STIRAP pair this drive takes. The sine
// component vanishes at t=0 and peaks late; the cosine component starts at
// the mask maximum and vanishes at t=T. For the counter-intuitive ordering
// the field coupling the transfer target gets the early (cosine) component.
enum class StirapComponent { SinLate, CosEarly };

struct PulseSpec {
    PulseShape shape{PulseShape::Sin2};
    double omega_max{0.0};   // peak Rabi frequency, rad/us
    double duration{1.0};    // T, us
    double t_on{0.0};        // top-hat switch-on time

    // masked pair controls; mask_c <= 0 selects the default c = T/3
    int mask_n{6};
    double mask_a{14.0};
    double mask_c{0.0};
    StirapComponent component{StirapComponent::SinLate};

    double detuning{0.0};            // from the target transition, rad/us
    Eigen::Vector3cd polarization{Eigen::Vector3cd(0.0, 1.0, 0.0)};  // (sigma-, pi, sigma+)
    double ground_F{2.0};            // addressed ground manifold
    double target_Fprime{1.0};       // excited level the detuning references

    // EffectiveBright: omega_max is the effective Rabi frequency on the
    // bright combination coupling to (target_Fprime, mF'=0).
    // Bare: omega_max multiplies the raw Clebsch-Gordan amplitudes.
    enum class Norm { EffectiveBright, Bare };
    Norm norm{Norm::EffectiveBright};

    void validate() const;
};

double sin2_envelope(const PulseSpec& spec, double t);

// (Omega_S, Omega_P) = Omega_max * M(t) * (sin, cos) of the sigmoid angle,
// with hyper-Gaussian mask M(t) = exp(-((t - T/2)/c)^{2n}).
std::pair<double, double> masked_stirap_pair(const PulseSpec& spec, double t);

double tophat_envelope(const PulseSpec& spec, double t);

// Dispatch on shape (and pair component for masked pairs).
double pulse_envelope(const PulseSpec& spec, double t);

// Coupling operator for unit envelope: (1/2N) sum_q pol_q d(g,e,q)|e><g| + h.c.
// Multiply by the envelope value to get the drive term at time t.
Operator drive_coupling_operator(const AtomicScheme& scheme, const PulseSpec& spec,
                                 const SpaceLayout& layout);

// Excited-manifold detuning diagonal for a single drive's rotating frame.
Operator drive_detuning_diagonal(const AtomicScheme& scheme, const PulseSpec& spec,
                                 const SpaceLayout& layout);

// Full rotating-frame drive term at time t (coupling + detuning diagonal).
Operator drive_hamiltonian(const AtomicScheme& scheme, const PulseSpec& spec,
                           const SpaceLayout& layout, double t);

// Polarisation helpers, components on (sigma-, pi, sigma+).
Eigen::Vector3cd pi_polarization();
Eigen::Vector3cd h_polarization();                 // (sigma+ + sigma-)/sqrt(2)
Eigen::Vector3cd sigma_superposition(double phi);  // (sigma+ + e^{i phi} sigma-)/sqrt(2)

} // namespace polburst
