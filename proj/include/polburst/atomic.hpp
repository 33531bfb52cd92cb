// atomic.hpp — level schemes, Zeeman shifts, dipole couplings, decay channels,
// and atom-cavity interaction operators.
//
// Frequencies are angular, in rad/us; times in us. A value quoted as
// "f MHz" in configuration enters here as 2*pi*f.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polburst/operators.hpp"

namespace polburst {

constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class SchemeKind { Ideal, RbD1, RbD2 };
enum class ManifoldKind { Ground, Excited };

struct AtomicState {
    ManifoldKind manifold;
    double F;
    double mF;
    double energy_shift;  // Zeeman shift, rad/us (ground states only)
};

// Relative dipole amplitude for the transition ground <-> excited driven by
// polarisation q = mF_excited - mF_ground. Normalised so that each excited
// state's outgoing |amplitude|^2 sums to 1.
struct Coupling {
    int ground;
    int excited;
    int q;
    double amplitude;
};

struct BFieldConfig {
    // Energy difference between mF=+1 and mF=-1 of ground F=1, rad/us.
    double splitting = 0.0;
    // The paper's conversion between splitting and field strength.
    static constexpr double gauss_conversion_MHz_per_G = 0.7;

    static BFieldConfig from_splitting_MHz(double mhz)
    {
        if (mhz < 0.0) throw std::invalid_argument("BFieldConfig: splitting must be >= 0");
        return BFieldConfig{kTwoPi * mhz};
    }
    double field_gauss() const
    {
        return (splitting / kTwoPi) / gauss_conversion_MHz_per_G;
    }
};

struct SchemeOverrides {
    std::optional<double> gamma;  // rad/us
    // excited hyperfine level offsets, keyed by F' in ascending order, rad/us
    std::optional<std::vector<double>> excited_offsets;
    double ideal_F = 1.0;
};

class AtomicScheme {
public:
    SchemeKind kind{SchemeKind::Ideal};
    double gamma{1.0};                     // atomic depolarisation rate, rad/us
    std::vector<AtomicState> states;
    std::vector<Coupling> couplings;
    std::vector<double> excited_F_values;  // ascending
    std::vector<double> excited_offsets;   // rad/us, relative to lowest F'

    int num_states() const { return static_cast<int>(states.size()); }
    int index_of(ManifoldKind manifold, double F, double mF) const;
    bool has_state(ManifoldKind manifold, double F, double mF) const;

    double coupling(int ground, int excited, int q) const;
    double excited_offset(double Fprime) const;

    // ground manifold F values present in the scheme (ascending)
    std::vector<double> ground_F_values() const;
    std::vector<int> states_in(ManifoldKind manifold, double F) const;

    // mF = +/-1 ground pair of the lower (cavity-coupled) manifold
    int g1_plus() const { return index_of(ManifoldKind::Ground, lower_F_, 1.0); }
    int g1_minus() const { return index_of(ManifoldKind::Ground, lower_F_, -1.0); }
    double lower_F() const { return lower_F_; }
    double upper_F() const { return upper_F_; }

    SpaceLayout atom_layout() const { return single_space("atom", num_states()); }

    double lower_F_{1.0};  // cavity/pump-addressed ground manifold
    double upper_F_{2.0};  // drive-addressed ground manifold (g2 lives here)
};

AtomicScheme build_scheme(SchemeKind kind, const BFieldConfig& bfield,
                          const SchemeOverrides& overrides = {});

double dipole_coupling(const AtomicScheme& scheme,
                       double F, double mF, double Fprime, double mFprime, int q);

struct CollapseSpec {
    int ground;
    int excited;
    int q;
    double amplitude;  // collapse operator sqrt(2*gamma)*amplitude*|g><e|
};

std::vector<CollapseSpec> decay_channels(const AtomicScheme& scheme);

struct CavityConfig {
    double g_eff{0.0};     // effective coupling on the g1+/- <-> x sigma transition, rad/us
    double kappa{0.0};     // field decay rate, rad/us
    double detuning{0.0};  // of both degenerate modes from the target transition, rad/us
    double target_Fprime{1.0};
    int fock_dim{3};

    void validate() const
    {
        if (kappa <= 0.0) throw std::invalid_argument("CavityConfig: kappa must be > 0");
        if (fock_dim < 2) throw std::invalid_argument("CavityConfig: fock_dim must be >= 2");
    }
};

// Cooperativity C = g^2 / (2 kappa gamma).
double cooperativity(const CavityConfig& cavity, double gamma);
double g_for_cooperativity(double C, double kappa, double gamma);

// Peak coupling before Clebsch-Gordan weighting, from the effective g.
double g_max_from_effective(const AtomicScheme& scheme, const CavityConfig& cavity);

// Hermitian atom-cavity interaction terms for the H and pi polarisation
// modes. The layout must contain "atom" and "cavH"; "cavPi" is optional
// (the ideal scheme has no pi-coupled cavity transition).
std::vector<Operator> cavity_interaction(const AtomicScheme& scheme,
                                         const CavityConfig& cavity,
                                         const SpaceLayout& layout);

// g = g0 * sqrt(V0/V); D2 couplings are 2.3x stronger than D1 at equal volume.
enum class Line { D1, D2 };
struct ModeVolumeCalibration {
    double V0{1.0};
    double g0{1.0};  // rad/us, referenced to the D1 line
};
double coupling_for_mode_volume(double volume, Line line,
                                const ModeVolumeCalibration& calib);

// JSON dump of states, shifts and coupling table (regression interface).
std::string scheme_to_json(const AtomicScheme& scheme);

} // namespace polburst
