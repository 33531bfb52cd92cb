// operators.hpp — dense complex operators and density matrices on composed spaces

#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polburst/space.hpp"

namespace polburst {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

class Operator {
public:
    Operator() = default;
    Operator(SpaceLayout layout, Matrix elements);

    const SpaceLayout& layout() const noexcept { return layout_; }
    const Matrix& elements() const noexcept { return elements_; }
    Matrix& elements() noexcept { return elements_; }
    int dim() const noexcept { return static_cast<int>(elements_.rows()); }

    Operator adjoint() const { return Operator(layout_, elements_.adjoint()); }
    bool is_hermitian(double rel_tol = 1e-12) const;

    Operator operator+(const Operator& rhs) const;
    Operator operator-(const Operator& rhs) const;
    Operator operator*(const Operator& rhs) const;
    Operator operator*(Complex scale) const;

private:
    SpaceLayout layout_;
    Matrix elements_;
};

class DensityMatrix {
public:
    DensityMatrix() = default;

    // Validates hermiticity (1e-10), unit trace (1e-8) and eigenvalue floor (-1e-8).
    DensityMatrix(SpaceLayout layout, Matrix elements);

    static DensityMatrix pure(const SpaceLayout& layout, const Vector& ket);

    const SpaceLayout& layout() const noexcept { return layout_; }
    const Matrix& elements() const noexcept { return elements_; }
    int dim() const noexcept { return static_cast<int>(elements_.rows()); }

private:
    SpaceLayout layout_;
    Matrix elements_;
};

Operator identity(const SpaceLayout& layout);

// Kronecker embedding of a single-subsystem operator into the full layout.
Operator embed(const Operator& op, const std::string& target, const SpaceLayout& layout);

// Truncated bosonic annihilation operator on a dim-level Fock space.
Operator fock_lowering(int dim, const std::string& label = "mode");

Complex expectation(const DensityMatrix& rho, const Operator& op);

// Trace out the listed subsystems; remaining subsystems keep their order.
Matrix partial_trace(const Matrix& rho, const SpaceLayout& layout,
                     const std::vector<std::string>& traced_out);
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<std::string>& traced_out);

// Kronecker product of two matrices (row-major subsystem order).
Matrix kron(const Matrix& a, const Matrix& b);

// Composite basis index from per-subsystem indices, in layout order.
int composite_index(const SpaceLayout& layout, const std::vector<int>& indices);

} // namespace polburst
