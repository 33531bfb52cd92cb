// space.hpp — composed Hilbert-space layouts (ordered subsystems with dims)

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace polburst {

struct Subsystem {
    std::string label;
    int dim{0};
};

// Ordered tensor-product layout. The first subsystem varies slowest
// (row-major Kronecker convention).
class SpaceLayout {
public:
    SpaceLayout() = default;

    static SpaceLayout compose(std::vector<Subsystem> subsystems);

    int total_dim() const noexcept { return total_; }
    const std::vector<Subsystem>& subsystems() const noexcept { return subs_; }

    bool has(const std::string& label) const noexcept;
    int index_of(const std::string& label) const;   // position in subsystem order
    int dim_of(const std::string& label) const;

    // dim product of subsystems strictly before / after the given position
    int dim_before(int pos) const;
    int dim_after(int pos) const;

    bool operator==(const SpaceLayout& other) const noexcept;
    bool operator!=(const SpaceLayout& other) const noexcept { return !(*this == other); }

private:
    std::vector<Subsystem> subs_;
    int total_{1};
};

// Convenience for a single-subsystem space.
SpaceLayout single_space(const std::string& label, int dim);

} // namespace polburst
