#include "polburst/operators.hpp"

#include <cmath>

namespace polburst {

Operator::Operator(SpaceLayout layout, Matrix elements)
    : layout_(std::move(layout)), elements_(std::move(elements))
{
    if (elements_.rows() != elements_.cols()) {
        throw std::invalid_argument("Operator: matrix must be square");
    }
    if (elements_.rows() != layout_.total_dim()) {
        throw std::invalid_argument("Operator: matrix dimension does not match layout");
    }
}

bool Operator::is_hermitian(double rel_tol) const
{
    const double norm = elements_.norm();
    const double dev = (elements_ - elements_.adjoint()).norm();
    return dev <= rel_tol * std::max(norm, 1.0);
}

Operator Operator::operator+(const Operator& rhs) const
{
    if (layout_ != rhs.layout_) throw std::invalid_argument("Operator+: layout mismatch");
    return Operator(layout_, elements_ + rhs.elements_);
}

Operator Operator::operator-(const Operator& rhs) const
{
    if (layout_ != rhs.layout_) throw std::invalid_argument("Operator-: layout mismatch");
    return Operator(layout_, elements_ - rhs.elements_);
}

Operator Operator::operator*(const Operator& rhs) const
{
    if (layout_ != rhs.layout_) throw std::invalid_argument("Operator*: layout mismatch");
    return Operator(layout_, elements_ * rhs.elements_);
}

Operator Operator::operator*(Complex scale) const
{
    return Operator(layout_, elements_ * scale);
}

DensityMatrix::DensityMatrix(SpaceLayout layout, Matrix elements)
    : layout_(std::move(layout)), elements_(std::move(elements))
{
    if (elements_.rows() != elements_.cols() ||
        elements_.rows() != layout_.total_dim()) {
        throw std::invalid_argument("DensityMatrix: matrix dimension does not match layout");
    }
    const double herm_dev = (elements_ - elements_.adjoint()).norm();
    if (herm_dev > 1e-10 * std::max(elements_.norm(), 1.0)) {
        throw std::invalid_argument("DensityMatrix: not Hermitian within tolerance");
    }
    const double tr_dev = std::abs(elements_.trace() - Complex(1.0, 0.0));
    if (tr_dev > 1e-8) {
        throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " +
                                    std::to_string(tr_dev));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(elements_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond tolerance");
    }
}

DensityMatrix DensityMatrix::pure(const SpaceLayout& layout, const Vector& ket)
{
    if (ket.size() != layout.total_dim()) {
        throw std::invalid_argument("DensityMatrix::pure: ket dimension mismatch");
    }
    Vector normalized = ket / ket.norm();
    return DensityMatrix(layout, normalized * normalized.adjoint());
}

Operator identity(const SpaceLayout& layout)
{
    return Operator(layout, Matrix::Identity(layout.total_dim(), layout.total_dim()));
}

Operator embed(const Operator& op, const std::string& target, const SpaceLayout& layout)
{
    const int pos = layout.index_of(target);
    const int d = layout.subsystems()[static_cast<std::size_t>(pos)].dim;
    if (op.dim() != d) {
        throw std::invalid_argument("embed: operator dim " + std::to_string(op.dim()) +
                                    " does not match subsystem '" + target + "' dim " +
                                    std::to_string(d));
    }
    const int left = layout.dim_before(pos);
    const int right = layout.dim_after(pos);
    const int n = layout.total_dim();

    Matrix out = Matrix::Zero(n, n);
    const Matrix& a = op.elements();
    for (int l = 0; l < left; ++l) {
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                const Complex v = a(i, j);
                if (v == Complex(0.0, 0.0)) continue;
                const int row0 = (l * d + i) * right;
                const int col0 = (l * d + j) * right;
                for (int r = 0; r < right; ++r) {
                    out(row0 + r, col0 + r) = v;
                }
            }
        }
    }
    return Operator(layout, std::move(out));
}

Operator fock_lowering(int dim, const std::string& label)
{
    if (dim < 2) throw std::invalid_argument("fock_lowering: dim must be >= 2");
    Matrix a = Matrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return Operator(single_space(label, dim), std::move(a));
}

Complex expectation(const DensityMatrix& rho, const Operator& op)
{
    if (rho.layout() != op.layout()) {
        throw std::invalid_argument("expectation: layout mismatch");
    }
    // Tr(rho * op) without forming the product
    return (rho.elements().transpose().cwiseProduct(op.elements())).sum();
}

Matrix partial_trace(const Matrix& rho, const SpaceLayout& layout,
                     const std::vector<std::string>& traced_out)
{
    const auto& subs = layout.subsystems();
    std::vector<bool> keep(subs.size(), true);
    for (const auto& label : traced_out) {
        keep[static_cast<std::size_t>(layout.index_of(label))] = false;
    }

    std::vector<int> dims(subs.size());
    int kept_dim = 1;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        dims[i] = subs[i].dim;
        if (keep[i]) kept_dim *= subs[i].dim;
    }

    // strides of each subsystem in the full index
    std::vector<int> stride(subs.size());
    int s = 1;
    for (int i = static_cast<int>(subs.size()) - 1; i >= 0; --i) {
        stride[static_cast<std::size_t>(i)] = s;
        s *= dims[static_cast<std::size_t>(i)];
    }
    // strides in the reduced index
    std::vector<int> rstride(subs.size(), 0);
    s = 1;
    for (int i = static_cast<int>(subs.size()) - 1; i >= 0; --i) {
        if (keep[static_cast<std::size_t>(i)]) {
            rstride[static_cast<std::size_t>(i)] = s;
            s *= dims[static_cast<std::size_t>(i)];
        }
    }

    const int n = layout.total_dim();
    Matrix out = Matrix::Zero(kept_dim, kept_dim);
    std::vector<int> idx(subs.size(), 0);
    // iterate over full row index, decompose, accumulate diagonal traced parts
    for (int row = 0; row < n; ++row) {
        int rem = row;
        int rrow = 0;
        for (std::size_t k = 0; k < subs.size(); ++k) {
            idx[k] = rem / stride[k];
            rem %= stride[k];
            if (keep[k]) rrow += idx[k] * rstride[k];
        }
        for (int col = 0; col < n; ++col) {
            // column must agree with row on traced-out subsystems
            int remc = col;
            int rcol = 0;
            bool diag = true;
            for (std::size_t k = 0; k < subs.size(); ++k) {
                const int ik = remc / stride[k];
                remc %= stride[k];
                if (keep[k]) {
                    rcol += ik * rstride[k];
                } else if (ik != idx[k]) {
                    diag = false;
                    break;
                }
            }
            if (diag) out(rrow, rcol) += rho(row, col);
        }
    }
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<std::string>& traced_out)
{
    Matrix reduced = partial_trace(rho.elements(), rho.layout(), traced_out);
    std::vector<Subsystem> kept;
    for (const auto& s : rho.layout().subsystems()) {
        bool traced = false;
        for (const auto& label : traced_out) {
            if (s.label == label) { traced = true; break; }
        }
        if (!traced) kept.push_back(s);
    }
    // numerical hermitization; partial trace of a valid state stays valid
    reduced = 0.5 * (reduced + Matrix(reduced.adjoint()));
    return DensityMatrix(SpaceLayout::compose(std::move(kept)), std::move(reduced));
}

Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

int composite_index(const SpaceLayout& layout, const std::vector<int>& indices)
{
    const auto& subs = layout.subsystems();
    if (indices.size() != subs.size()) {
        throw std::invalid_argument("composite_index: wrong number of indices");
    }
    int idx = 0;
    for (std::size_t k = 0; k < subs.size(); ++k) {
        if (indices[k] < 0 || indices[k] >= subs[k].dim) {
            throw std::invalid_argument("composite_index: index out of range for '" +
                                        subs[k].label + "'");
        }
        idx = idx * subs[k].dim + indices[k];
    }
    return idx;
}

} // namespace polburst
