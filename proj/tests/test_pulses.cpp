#include <doctest.h>

#include "polburst/pulses.hpp"

using namespace polburst;

TEST_CASE("sin^2 envelope")
{
    PulseSpec p;
    p.shape = PulseShape::Sin2;
    p.omega_max = 3.0;
    p.duration = 2.0;
    CHECK(sin2_envelope(p, 1.0) == doctest::Approx(3.0));
    CHECK(sin2_envelope(p, 0.5) == doctest::Approx(1.5));
    CHECK(sin2_envelope(p, 0.0) == doctest::Approx(0.0));
    CHECK(sin2_envelope(p, -0.1) == 0.0);
    CHECK(sin2_envelope(p, 2.1) == 0.0);
}

TEST_CASE("masked pair envelope")
{
    PulseSpec p;
    p.shape = PulseShape::MaskedStirapPair;
    p.omega_max = 2.0;
    p.duration = 0.15;
    p.mask_n = 6;
    p.mask_a = 14.0;

    // midpoint: mask = 1, sigmoid angle = pi/4, equal components
    auto [s_mid, c_mid] = masked_stirap_pair(p, 0.075);
    CHECK(s_mid == doctest::Approx(2.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(c_mid == doctest::Approx(s_mid).epsilon(1e-12));

    // early: cosine component dominates (counter-intuitive ordering)
    auto [s_early, c_early] = masked_stirap_pair(p, 0.03);
    CHECK(c_early > s_early);
    auto [s_late, c_late] = masked_stirap_pair(p, 0.12);
    CHECK(s_late > c_late);

    // quadrature sum reproduces the mask
    const double t = 0.05;
    auto [s, c] = masked_stirap_pair(p, t);
    const double mask = std::exp(-std::pow((t - 0.075) / 0.05, 12.0));
    CHECK(s * s + c * c == doctest::Approx(4.0 * mask * mask).epsilon(1e-10));

    // edges vanish through the mask
    auto [s0, c0] = masked_stirap_pair(p, 0.0);
    CHECK(std::abs(s0) < 1e-3);
    CHECK(std::abs(c0) < 1e-3);
}

TEST_CASE("top-hat envelope")
{
    PulseSpec p;
    p.shape = PulseShape::TopHat;
    p.omega_max = 1.5;
    p.t_on = 1.0;
    p.duration = 2.0;
    CHECK(tophat_envelope(p, 0.5) == 0.0);
    CHECK(tophat_envelope(p, 1.5) == doctest::Approx(1.5));
    CHECK(tophat_envelope(p, 3.5) == 0.0);
    CHECK(pulse_envelope(p, 2.0) == doctest::Approx(1.5));
}

TEST_CASE("pulse dispatch picks the requested pair component")
{
    PulseSpec p;
    p.shape = PulseShape::MaskedStirapPair;
    p.omega_max = 1.0;
    p.duration = 1.0;
    p.component = StirapComponent::SinLate;
    const double late = pulse_envelope(p, 0.7);
    p.component = StirapComponent::CosEarly;
    const double early = pulse_envelope(p, 0.7);
    auto [s, c] = masked_stirap_pair(p, 0.7);
    CHECK(late == doctest::Approx(s));
    CHECK(early == doctest::Approx(c));
}

TEST_CASE("validation rejects bad pulse parameters")
{
    PulseSpec p;
    p.duration = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.duration = 1.0;
    p.polarization = Eigen::Vector3cd(1.0, 1.0, 0.0);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("effective-bright normalization yields the nominal Rabi frequency")
{
    AtomicScheme s = build_scheme(SchemeKind::Ideal, BFieldConfig{});
    SpaceLayout layout = s.atom_layout();

    // pi drive on the g2 state: single channel, bright norm = |d| = 1/sqrt(3)
    PulseSpec p;
    p.omega_max = 10.0;
    p.polarization = pi_polarization();
    p.ground_F = 2.0;
    p.target_Fprime = 1.0;
    Operator coupling = drive_coupling_operator(s, p, layout);
    CHECK(coupling.is_hermitian());
    const int g2 = s.index_of(ManifoldKind::Ground, 2.0, 0.0);
    const int x = s.index_of(ManifoldKind::Excited, 1.0, 0.0);
    // unit-envelope element = 1/(2N) * d = 1/2, so envelope * 2 gives Omega
    CHECK(coupling.elements()(x, g2).real() == doctest::Approx(0.5));

    // H-polarized drive on F=1: two channels with opposite sign
    PulseSpec h;
    h.polarization = h_polarization();
    h.ground_F = 1.0;
    h.target_Fprime = 1.0;
    Operator ch = drive_coupling_operator(s, h, layout);
    CHECK(ch.elements()(x, s.g1_plus()).real() ==
          doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))));
    CHECK(ch.elements()(x, s.g1_minus()).real() ==
          doctest::Approx(-1.0 / (2.0 * std::sqrt(2.0))));
}

TEST_CASE("bare normalization keeps raw amplitudes")
{
    AtomicScheme s = build_scheme(SchemeKind::RbD1, BFieldConfig{});
    SpaceLayout layout = s.atom_layout();
    PulseSpec p;
    p.polarization = pi_polarization();
    p.ground_F = 1.0;
    p.target_Fprime = 1.0;
    p.norm = PulseSpec::Norm::Bare;
    Operator op = drive_coupling_operator(s, p, layout);
    const int g = s.index_of(ManifoldKind::Ground, 1.0, 1.0);
    const int e = s.index_of(ManifoldKind::Excited, 1.0, 1.0);
    CHECK(op.elements()(e, g).real() ==
          doctest::Approx(0.5 * dipole_coupling(s, 1.0, 1.0, 1.0, 1.0, 0)));
}

TEST_CASE("detuning diagonal references the target manifold")
{
    AtomicScheme s = build_scheme(SchemeKind::RbD2, BFieldConfig{});
    SpaceLayout layout = s.atom_layout();
    PulseSpec p;
    p.detuning = 3.0;
    p.ground_F = 2.0;
    p.target_Fprime = 1.0;
    Operator diag = drive_detuning_diagonal(s, p, layout);
    const int e1 = s.index_of(ManifoldKind::Excited, 1.0, 0.0);
    const int e3 = s.index_of(ManifoldKind::Excited, 3.0, 0.0);
    const int g = s.index_of(ManifoldKind::Ground, 2.0, 0.0);
    CHECK(diag.elements()(e1, e1).real() == doctest::Approx(-3.0));
    CHECK(diag.elements()(e3, e3).real() ==
          doctest::Approx(kTwoPi * (499.0 - 72.0) - 3.0));
    CHECK(diag.elements()(g, g) == Complex(0.0, 0.0));
}

TEST_CASE("polarization helpers")
{
    CHECK(pi_polarization().norm() == doctest::Approx(1.0));
    CHECK(h_polarization().norm() == doctest::Approx(1.0));
    CHECK((sigma_superposition(M_PI) - h_polarization()).norm() < 1e-12);
    CHECK(sigma_superposition(0.0).norm() == doctest::Approx(1.0));
}
