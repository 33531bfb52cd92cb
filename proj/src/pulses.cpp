#include "polburst/pulses.hpp"

#include <cmath>

namespace polburst {

void PulseSpec::validate() const
{
    if (omega_max < 0.0) throw std::invalid_argument("PulseSpec: omega_max must be >= 0");
    if (duration <= 0.0) throw std::invalid_argument("PulseSpec: duration must be > 0");
    if (std::abs(polarization.norm() - 1.0) > 1e-12) {
        throw std::invalid_argument("PulseSpec: polarization must be unit norm");
    }
    if (shape == PulseShape::MaskedStirapPair) {
        if (mask_n < 1) throw std::invalid_argument("PulseSpec: mask_n must be >= 1");
        if (mask_a <= 0.0) throw std::invalid_argument("PulseSpec: mask_a must be > 0");
    }
}

double sin2_envelope(const PulseSpec& spec, double t)
{
    if (t < 0.0 || t > spec.duration) return 0.0;
    const double s = std::sin(M_PI * t / spec.duration);
    return spec.omega_max * s * s;
}

std::pair<double, double> masked_stirap_pair(const PulseSpec& spec, double t)
{
    if (t < 0.0 || t > spec.duration) return {0.0, 0.0};
    const double T = spec.duration;
    const double c = spec.mask_c > 0.0 ? spec.mask_c : T / 3.0;
    const double x = (t - T / 2.0) / c;
    const double mask = std::exp(-std::pow(x * x, spec.mask_n));
    const double theta =
        M_PI / (2.0 * (1.0 + std::exp(-spec.mask_a * (t - T / 2.0) / T)));
    return {spec.omega_max * mask * std::sin(theta),
            spec.omega_max * mask * std::cos(theta)};
}

double tophat_envelope(const PulseSpec& spec, double t)
{
    return (t >= spec.t_on && t <= spec.t_on + spec.duration) ? spec.omega_max : 0.0;
}

double pulse_envelope(const PulseSpec& spec, double t)
{
    switch (spec.shape) {
        case PulseShape::Sin2:
            return sin2_envelope(spec, t);
        case PulseShape::TopHat:
            return tophat_envelope(spec, t);
        case PulseShape::MaskedStirapPair: {
            const auto [s, p] = masked_stirap_pair(spec, t);
            return spec.component == StirapComponent::SinLate ? s : p;
        }
    }
    return 0.0;
}

namespace {

// coupling vector c_g = sum_q pol_q d(g, e_ref, q) onto the reference
// excited state (target_Fprime, mF'=0)
Eigen::VectorXcd bright_coupling_vector(const AtomicScheme& scheme, const PulseSpec& spec)
{
    const int e_ref = scheme.index_of(ManifoldKind::Excited, spec.target_Fprime, 0.0);
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(scheme.num_states());
    for (const auto& cp : scheme.couplings) {
        if (cp.excited != e_ref) continue;
        const auto& gs = scheme.states[static_cast<std::size_t>(cp.ground)];
        if (gs.F != spec.ground_F) continue;
        c(cp.ground) += spec.polarization(cp.q + 1) * cp.amplitude;
    }
    return c;
}

} // namespace

Operator drive_coupling_operator(const AtomicScheme& scheme, const PulseSpec& spec,
                                 const SpaceLayout& layout)
{
    spec.validate();
    if (!scheme.has_state(ManifoldKind::Excited, spec.target_Fprime, 0.0)) {
        throw std::invalid_argument("drive_coupling_operator: target excited manifold absent");
    }
    double norm = 1.0;
    if (spec.norm == PulseSpec::Norm::EffectiveBright) {
        norm = bright_coupling_vector(scheme, spec).norm();
        if (norm < 1e-15) {
            throw std::invalid_argument(
                "drive_coupling_operator: polarization does not couple the target transition");
        }
    }

    const int n = scheme.num_states();
    Matrix raise = Matrix::Zero(n, n);  // |e><g| parts
    for (const auto& cp : scheme.couplings) {
        const auto& gs = scheme.states[static_cast<std::size_t>(cp.ground)];
        if (gs.F != spec.ground_F) continue;
        const Complex w = spec.polarization(cp.q + 1) * cp.amplitude;
        if (w == Complex(0.0, 0.0)) continue;
        raise(cp.excited, cp.ground) += w / (2.0 * norm);
    }
    Matrix h = raise + raise.adjoint();
    return embed(Operator(scheme.atom_layout(), std::move(h)), "atom", layout);
}

Operator drive_detuning_diagonal(const AtomicScheme& scheme, const PulseSpec& spec,
                                 const SpaceLayout& layout)
{
    const int n = scheme.num_states();
    Matrix diag = Matrix::Zero(n, n);
    const double ref = scheme.excited_offset(spec.target_Fprime);
    for (int i = 0; i < n; ++i) {
        const auto& s = scheme.states[static_cast<std::size_t>(i)];
        if (s.manifold == ManifoldKind::Excited) {
            diag(i, i) = scheme.excited_offset(s.F) - ref - spec.detuning;
        }
    }
    return embed(Operator(scheme.atom_layout(), std::move(diag)), "atom", layout);
}

Operator drive_hamiltonian(const AtomicScheme& scheme, const PulseSpec& spec,
                           const SpaceLayout& layout, double t)
{
    Operator base = drive_coupling_operator(scheme, spec, layout);
    Operator diag = drive_detuning_diagonal(scheme, spec, layout);
    return Operator(layout,
                    pulse_envelope(spec, t) * base.elements() + diag.elements());
}

Eigen::Vector3cd pi_polarization()
{
    return Eigen::Vector3cd(0.0, 1.0, 0.0);
}

Eigen::Vector3cd h_polarization()
{
    const double s = 1.0 / std::sqrt(2.0);
    return Eigen::Vector3cd(s, 0.0, s);
}

Eigen::Vector3cd sigma_superposition(double phi)
{
    const double s = 1.0 / std::sqrt(2.0);
    return Eigen::Vector3cd(Complex(s, 0.0), Complex(0.0, 0.0),
                            -std::exp(Complex(0.0, -phi)) * s);
}

} // namespace polburst
