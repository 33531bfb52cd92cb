#include "polburst/lindblad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/SparseCore>

namespace polburst {

namespace {

using Sparse = Eigen::SparseMatrix<Complex>;
constexpr Complex kI{0.0, 1.0};

Sparse to_sparse(const Matrix& m)
{
    return m.sparseView(1.0, 1e-300);
}

double sparse_expectation(const Sparse& op, const Matrix& rho)
{
    Complex sum{0.0, 0.0};
    for (int k = 0; k < op.outerSize(); ++k) {
        for (Sparse::InnerIterator it(op, k); it; ++it) {
            sum += it.value() * rho(it.col(), it.row());
        }
    }
    return sum.real();
}

using Triplet = Eigen::Triplet<Complex>;

// vec(rho) is column-major: rho(i,j) sits at index i + n*j.
// vec(A rho)      = (I (x) A)        vec(rho)
// vec(rho B)      = (B^T (x) I)      vec(rho)
// vec(C rho C^+)  = (conj(C) (x) C)  vec(rho)
void append_left_mult(std::vector<Triplet>& trip, const Sparse& a, int n, Complex scale)
{
    for (int k = 0; k < a.outerSize(); ++k) {
        for (Sparse::InnerIterator it(a, k); it; ++it) {
            for (int j = 0; j < n; ++j) {
                trip.emplace_back(static_cast<int>(it.row()) + n * j,
                                  static_cast<int>(it.col()) + n * j,
                                  scale * it.value());
            }
        }
    }
}

void append_right_mult(std::vector<Triplet>& trip, const Sparse& b, int n, Complex scale)
{
    for (int k = 0; k < b.outerSize(); ++k) {
        for (Sparse::InnerIterator it(b, k); it; ++it) {
            for (int i = 0; i < n; ++i) {
                trip.emplace_back(i + n * static_cast<int>(it.col()),
                                  i + n * static_cast<int>(it.row()),
                                  scale * it.value());
            }
        }
    }
}

void append_sandwich(std::vector<Triplet>& trip, const Sparse& c, int n, double weight)
{
    for (int k1 = 0; k1 < c.outerSize(); ++k1) {
        for (Sparse::InnerIterator it1(c, k1); it1; ++it1) {
            for (int k2 = 0; k2 < c.outerSize(); ++k2) {
                for (Sparse::InnerIterator it2(c, k2); it2; ++it2) {
                    trip.emplace_back(
                        static_cast<int>(it1.row()) + n * static_cast<int>(it2.row()),
                        static_cast<int>(it1.col()) + n * static_cast<int>(it2.col()),
                        weight * it1.value() * std::conj(it2.value()));
                }
            }
        }
    }
}

// Hermitian Hamiltonian piece -i[H, .]; H may carry an anti-Hermitian
// -i/2 sum w C^+C part, handled by -i H rho + i rho H^+.
void append_commutator(std::vector<Triplet>& trip, const Matrix& h, int n)
{
    const Sparse hs = to_sparse(h);
    const Sparse hadj = to_sparse(Matrix(h.adjoint()));
    append_left_mult(trip, hs, n, -kI);
    append_right_mult(trip, hadj, n, kI);
}

// Precompiled sparse superoperator. The ODE state is rho flattened
// column-major followed by one quadrature accumulator per flux observable;
// flux rows of the superoperator evaluate Tr[O rho].
struct CompiledGenerator {
    int n{0};
    int ny{0};
    Sparse l_static;  // Hamiltonian + dissipator + flux rows
    std::vector<Sparse> l_driven;
    std::vector<Envelope> envelopes;

    void rhs(double t, const Vector& y, Vector& dy) const
    {
        dy.noalias() = l_static * y;
        for (std::size_t j = 0; j < l_driven.size(); ++j) {
            const double env = envelopes[j](t);
            if (env != 0.0) dy.noalias() += env * (l_driven[j] * y);
        }
    }
};

CompiledGenerator compile(const GeneratorSpec& gen, const SpaceLayout& layout,
                          const EvolveOptions& options)
{
    gen.validate(layout);
    CompiledGenerator cg;
    cg.n = layout.total_dim();
    const int n = cg.n;
    const int nflux = static_cast<int>(options.flux_ops.size());
    cg.ny = n * n + nflux;

    Matrix h = Matrix::Zero(n, n);
    for (const auto& term : gen.static_terms) h += term.elements();

    std::vector<Triplet> trip;
    for (const auto& [op, weight] : gen.collapse_ops) {
        const Matrix& c = op.elements();
        h += Complex(0.0, -0.5 * weight) * (c.adjoint() * c);
        append_sandwich(trip, to_sparse(c), n, weight);
    }
    append_commutator(trip, h, n);
    int fi = 0;
    for (const auto& [label, op] : options.flux_ops) {
        (void)label;
        const Sparse o = to_sparse(op.elements());
        for (int k = 0; k < o.outerSize(); ++k) {
            for (Sparse::InnerIterator it(o, k); it; ++it) {
                trip.emplace_back(n * n + fi,
                                  static_cast<int>(it.col()) + n * static_cast<int>(it.row()),
                                  it.value());
            }
        }
        ++fi;
    }
    cg.l_static.resize(cg.ny, cg.ny);
    cg.l_static.setFromTriplets(trip.begin(), trip.end());
    cg.l_static.prune(1.0, 1e-300);

    for (const auto& [op, env] : gen.driven_terms) {
        std::vector<Triplet> dt;
        append_commutator(dt, op.elements(), n);
        Sparse l(cg.ny, cg.ny);
        l.setFromTriplets(dt.begin(), dt.end());
        l.prune(1.0, 1e-300);
        cg.l_driven.push_back(std::move(l));
        cg.envelopes.push_back(env);
    }
    return cg;
}

// Dormand-Prince 5(4) tableau
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kE[7] = {71.0 / 57600,    0.0,          -71.0 / 16695, 71.0 / 1920,
                          -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

void hermitize(Vector& y, int n)
{
    Eigen::Map<Matrix> rho(y.data(), n, n);
    rho = 0.5 * (rho + rho.adjoint()).eval();
}

} // namespace

void GeneratorSpec::validate(const SpaceLayout& layout) const
{
    auto check_dims = [&](const Operator& op, const char* what) {
        if (op.layout() != layout) {
            throw std::invalid_argument(std::string("GeneratorSpec: ") + what +
                                        " layout mismatch");
        }
    };
    for (const auto& term : static_terms) {
        check_dims(term, "static term");
        if (!term.is_hermitian(1e-9)) {
            throw std::invalid_argument("GeneratorSpec: static term not Hermitian");
        }
    }
    for (const auto& [op, env] : driven_terms) {
        check_dims(op, "driven term");
        if (!env) throw std::invalid_argument("GeneratorSpec: missing envelope");
        if (!op.is_hermitian(1e-9)) {
            throw std::invalid_argument("GeneratorSpec: driven term not Hermitian");
        }
    }
    for (const auto& [op, weight] : collapse_ops) {
        check_dims(op, "collapse operator");
        if (weight < 0.0) {
            throw std::invalid_argument("GeneratorSpec: negative collapse weight");
        }
    }
}

Matrix lindblad_rhs(const GeneratorSpec& gen, const Matrix& rho, double t)
{
    const int n = static_cast<int>(rho.rows());
    if (rho.cols() != n) throw std::invalid_argument("lindblad_rhs: rho not square");

    Matrix h = Matrix::Zero(n, n);
    for (const auto& term : gen.static_terms) {
        if (term.dim() != n) throw std::invalid_argument("lindblad_rhs: dimension mismatch");
        h += term.elements();
    }
    for (const auto& [op, env] : gen.driven_terms) {
        if (op.dim() != n) throw std::invalid_argument("lindblad_rhs: dimension mismatch");
        h += env(t) * op.elements();
    }
    Matrix d = -kI * (h * rho - rho * h);
    for (const auto& [op, weight] : gen.collapse_ops) {
        if (op.dim() != n) throw std::invalid_argument("lindblad_rhs: dimension mismatch");
        const Matrix& c = op.elements();
        const Matrix cdc = c.adjoint() * c;
        d += weight * (c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc));
    }
    return d;
}

Trajectory evolve(const DensityMatrix& rho0, const GeneratorSpec& gen,
                  double t0, double t1, const EvolveOptions& options)
{
    if (t1 <= t0) throw std::invalid_argument("evolve: t1 must exceed t0");
    if (options.n_output < 2) throw std::invalid_argument("evolve: n_output must be >= 2");
    const SpaceLayout& layout = rho0.layout();
    const CompiledGenerator cg = compile(gen, layout, options);
    const int n = cg.n;
    const int ny = cg.ny;

    std::vector<Sparse> trace_ops;
    trace_ops.reserve(options.trace_ops.size());
    for (const auto& [label, op] : options.trace_ops) {
        (void)label;
        trace_ops.push_back(to_sparse(op.elements()));
    }
    std::vector<Sparse> leak_ops;
    for (const auto& op : options.leakage_ops) leak_ops.push_back(to_sparse(op.elements()));

    Trajectory traj;
    traj.times.resize(static_cast<std::size_t>(options.n_output));
    for (auto& [label, op] : options.trace_ops) {
        (void)op;
        traj.traces[label].resize(static_cast<std::size_t>(options.n_output));
    }

    Vector y = Vector::Zero(ny);
    Eigen::Map<Matrix>(y.data(), n, n) = rho0.elements();

    auto record = [&](int idx, double t) {
        traj.times[static_cast<std::size_t>(idx)] = t;
        const Eigen::Map<const Matrix> rho(y.data(), n, n);
        int ti = 0;
        for (const auto& [label, op] : options.trace_ops) {
            (void)op;
            traj.traces[label][static_cast<std::size_t>(idx)] =
                sparse_expectation(trace_ops[static_cast<std::size_t>(ti)], rho);
            ++ti;
        }
        for (const auto& lop : leak_ops) {
            traj.leakage = std::max(traj.leakage, sparse_expectation(lop, rho));
        }
        traj.max_trace_error = std::max(traj.max_trace_error,
                                        std::abs(rho.trace().real() - 1.0));
        if (options.record_snapshots) traj.snapshots.push_back(rho);
    };
    record(0, t0);

    const double span = t1 - t0;
    double t = t0;
    double h = span * 1e-4;
    int out_idx = 1;
    double t_next = t0 + span * out_idx / (options.n_output - 1);

    std::array<Vector, 7> k;
    for (auto& ki : k) ki.resize(ny);
    Vector ytmp(ny), ynew(ny), yerr(ny);
    bool fsal_valid = false;

    cg.rhs(t, y, k[0]);
    ++traj.rhs_evaluations;

    while (t < t1 - 1e-14 * span) {
        if (traj.steps >= options.max_steps) {
            std::ostringstream os;
            os << "evolve: step budget exhausted at t = " << t;
            throw std::runtime_error(os.str());
        }
        bool clipped = false;
        double h_try = h;
        if (t + h_try >= t_next - 1e-14 * span) {
            h_try = t_next - t;
            clipped = true;
        }
        if (h_try < 1e-14 * span) {
            std::ostringstream os;
            os << "evolve: step size underflow at t = " << t;
            throw std::runtime_error(os.str());
        }

        if (!fsal_valid) {
            cg.rhs(t, y, k[0]);
            ++traj.rhs_evaluations;
        }
        for (int s = 1; s < 7; ++s) {
            ytmp = y;
            for (int j = 0; j < s; ++j) {
                if (kA[s][j] != 0.0) ytmp.noalias() += (h_try * kA[s][j]) * k[j];
            }
            if (s == 6) ynew = ytmp;  // 5th-order solution (b row = a[6])
            cg.rhs(t + kC[s] * h_try, ytmp, k[s]);
            ++traj.rhs_evaluations;
        }
        yerr.setZero();
        for (int s = 0; s < 7; ++s) {
            if (kE[s] != 0.0) yerr.noalias() += (h_try * kE[s]) * k[s];
        }

        double err_sq = 0.0;
        for (int i = 0; i < ny; ++i) {
            const double sc = options.atol +
                options.rtol * std::max(std::abs(y(i)), std::abs(ynew(i)));
            const double e = std::abs(yerr(i)) / sc;
            err_sq += e * e;
        }
        const double err = std::sqrt(err_sq / ny);
        ++traj.steps;

        if (err <= 1.0) {
            t += h_try;
            y.swap(ynew);
            hermitize(y, n);
            k[0] = k[6];
            fsal_valid = true;
            if (clipped && std::abs(t - t_next) <= 1e-12 * span) {
                record(out_idx, t_next);
                ++out_idx;
                t_next = (out_idx >= options.n_output)
                             ? t1 + span
                             : t0 + span * out_idx / (options.n_output - 1);
            }
            const double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
            const double grow = std::min(5.0, std::max(0.2, fac));
            h = clipped ? std::max(h, h_try * grow) : h_try * grow;
        } else {
            const double fac = std::max(0.1, 0.9 * std::pow(err, -0.2));
            h = h_try * fac;
            fsal_valid = false;
        }
    }
    while (out_idx < options.n_output) {
        record(out_idx, t0 + span * out_idx / (options.n_output - 1));
        ++out_idx;
    }

    Matrix rho_f = Eigen::Map<Matrix>(y.data(), n, n);
    traj.hermiticity_error = 0.5 * (rho_f - rho_f.adjoint()).cwiseAbs().maxCoeff();
    rho_f = 0.5 * (rho_f + rho_f.adjoint()).eval();
    // clip integration-noise negatives (within a tolerance-scaled floor) and
    // renormalize so the result satisfies the strict state invariants
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_f);
    traj.min_eigenvalue = es.eigenvalues().minCoeff();
    const double floor = std::max(1e-7, 100.0 * options.rtol);
    if (es.eigenvalues().minCoeff() < -floor) {
        std::ostringstream os;
        os << "evolve: final state eigenvalue " << es.eigenvalues().minCoeff()
           << " below the positivity floor";
        throw std::runtime_error(os.str());
    }
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    ev /= ev.sum();
    rho_f = es.eigenvectors() * ev.cast<Complex>().asDiagonal() *
            es.eigenvectors().adjoint();
    traj.final_rho = DensityMatrix(layout, rho_f);
    int fi = 0;
    for (const auto& [label, op] : options.flux_ops) {
        (void)op;
        traj.flux[label] = y(n * n + fi).real();
        ++fi;
    }
    return traj;
}

double emission_efficiency(const Trajectory& traj, const std::string& flux_label,
                           double kappa)
{
    const auto it = traj.flux.find(flux_label);
    if (it == traj.flux.end()) {
        throw std::invalid_argument("emission_efficiency: flux trace '" + flux_label +
                                    "' was not recorded");
    }
    return 2.0 * kappa * it->second;
}

double eta2_ideal(const DensityMatrix& rho, const AtomicScheme& scheme)
{
    if (scheme.kind != SchemeKind::Ideal) {
        throw std::invalid_argument("eta2_ideal: requires the ideal scheme");
    }
    const SpaceLayout& layout = rho.layout();
    const int atom_pos = layout.index_of("atom");
    std::vector<int> idx(layout.subsystems().size(), 0);

    auto vacuum_ket = [&](int atom_state, Complex amp, Vector& ket) {
        idx[static_cast<std::size_t>(atom_pos)] = atom_state;
        ket(composite_index(layout, idx)) += amp;
    };
    const double s = 1.0 / std::sqrt(2.0);
    Vector phi_pi = Vector::Zero(layout.total_dim());
    vacuum_ket(scheme.g1_plus(), Complex(s, 0.0), phi_pi);
    vacuum_ket(scheme.g1_minus(), Complex(-s, 0.0), phi_pi);
    Vector phi_0 = Vector::Zero(layout.total_dim());
    vacuum_ket(scheme.g1_plus(), Complex(s, 0.0), phi_0);
    vacuum_ket(scheme.g1_minus(), Complex(s, 0.0), phi_0);

    const Matrix& r = rho.elements();
    const double p_pi = (phi_pi.adjoint() * r * phi_pi)(0).real();
    const double p_0 = (phi_0.adjoint() * r * phi_0)(0).real();
    return p_pi - p_0;
}

} // namespace polburst
