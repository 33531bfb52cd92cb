#include "polburst/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace polburst {

void OptimProblem::validate() const
{
    if (!objective) throw std::invalid_argument("OptimProblem: missing objective");
    if (bounds.empty()) throw std::invalid_argument("OptimProblem: no parameters");
    long seeds = 1;
    for (const auto& [lo, hi] : bounds) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
            throw std::invalid_argument("OptimProblem: bounds must be finite with hi >= lo");
        }
        seeds *= seeds_per_dim;
    }
    if (seeds_per_dim < 1) throw std::invalid_argument("OptimProblem: seeds_per_dim must be >= 1");
    if (budget < seeds) throw std::invalid_argument("OptimProblem: budget below seed count");
}

namespace {

struct Evaluator {
    const OptimProblem& problem;
    OptimResult& result;

    double operator()(const Eigen::VectorXd& x)
    {
        Eigen::VectorXd clamped = x;
        for (int i = 0; i < clamped.size(); ++i) {
            clamped(i) = std::clamp(clamped(i), problem.bounds[static_cast<std::size_t>(i)].first,
                                    problem.bounds[static_cast<std::size_t>(i)].second);
        }
        const double v = problem.objective(clamped);
        ++result.evaluations;
        if (problem.keep_history) result.history.emplace_back(clamped, v);
        if (v > result.best_value ||
            (result.evaluations == 1 && result.best_params.size() == 0)) {
            result.best_value = v;
            result.best_params = clamped;
        }
        return v;
    }
};

} // namespace

OptimResult maximize(const OptimProblem& problem)
{
    problem.validate();
    const int dim = static_cast<int>(problem.bounds.size());
    OptimResult result;
    result.best_value = -std::numeric_limits<double>::infinity();
    Evaluator eval{problem, result};

    // coarse grid over the box, interior points only
    const int k = problem.seeds_per_dim;
    long n_seeds = 1;
    for (int i = 0; i < dim; ++i) n_seeds *= k;

    Eigen::VectorXd best_seed(dim);
    double best_seed_value = -std::numeric_limits<double>::infinity();
    double seed_min = std::numeric_limits<double>::infinity();
    for (long s = 0; s < n_seeds; ++s) {
        Eigen::VectorXd x(dim);
        long rem = s;
        for (int i = 0; i < dim; ++i) {
            const int gi = static_cast<int>(rem % k);
            rem /= k;
            const auto& [lo, hi] = problem.bounds[static_cast<std::size_t>(i)];
            x(i) = lo + (hi - lo) * (gi + 1.0) / (k + 1.0);
        }
        const double v = eval(x);
        seed_min = std::min(seed_min, v);
        if (v > best_seed_value) {
            best_seed_value = v;
            best_seed = x;
        }
    }
    if (best_seed_value - seed_min <= problem.ftol * std::max(1.0, std::abs(best_seed_value))) {
        result.zero_gradient = true;
    }

    // Nelder-Mead on the negated objective, seeded at the best grid point
    const int np = dim + 1;
    std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(np));
    std::vector<double> values(static_cast<std::size_t>(np));
    simplex[0] = best_seed;
    values[0] = best_seed_value;
    for (int i = 0; i < dim; ++i) {
        Eigen::VectorXd x = best_seed;
        const auto& [lo, hi] = problem.bounds[static_cast<std::size_t>(i)];
        const double step = 0.1 * (hi - lo);
        x(i) = (x(i) + step <= hi) ? x(i) + step : x(i) - step;
        if (result.evaluations >= problem.budget) {
            result.budget_exhausted = true;
            return result;
        }
        simplex[static_cast<std::size_t>(i + 1)] = x;
        values[static_cast<std::size_t>(i + 1)] = eval(x);
    }

    auto order = [&]() {
        std::vector<int> idx(static_cast<std::size_t>(np));
        for (int i = 0; i < np; ++i) idx[static_cast<std::size_t>(i)] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
            return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
        });
        std::vector<Eigen::VectorXd> s2(static_cast<std::size_t>(np));
        std::vector<double> v2(static_cast<std::size_t>(np));
        for (int i = 0; i < np; ++i) {
            s2[static_cast<std::size_t>(i)] = simplex[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
            v2[static_cast<std::size_t>(i)] = values[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        }
        simplex.swap(s2);
        values.swap(v2);
    };

    while (result.evaluations < problem.budget) {
        order();
        // convergence: parameter spread relative to box size, value spread
        double spread = 0.0;
        for (int i = 0; i < dim; ++i) {
            const auto& [lo, hi] = problem.bounds[static_cast<std::size_t>(i)];
            const double scale = std::max(hi - lo, 1e-12);
            double lo_i = simplex[0](i), hi_i = simplex[0](i);
            for (int p = 1; p < np; ++p) {
                lo_i = std::min(lo_i, simplex[static_cast<std::size_t>(p)](i));
                hi_i = std::max(hi_i, simplex[static_cast<std::size_t>(p)](i));
            }
            spread = std::max(spread, (hi_i - lo_i) / scale);
        }
        const double fspread = values.front() - values.back();
        if (spread < problem.xtol &&
            fspread < problem.ftol * std::max(1.0, std::abs(values.front()))) {
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (int p = 0; p < np - 1; ++p) centroid += simplex[static_cast<std::size_t>(p)];
        centroid /= static_cast<double>(np - 1);
        const Eigen::VectorXd& worst = simplex.back();

        const Eigen::VectorXd xr = centroid + (centroid - worst);
        const double fr = eval(xr);
        if (fr > values[0]) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - worst);
            if (result.evaluations >= problem.budget) {
                result.budget_exhausted = true;
                break;
            }
            const double fe = eval(xe);
            simplex.back() = (fe > fr) ? xe : xr;
            values.back() = std::max(fe, fr);
        } else if (fr > values[static_cast<std::size_t>(np - 2)]) {
            simplex.back() = xr;
            values.back() = fr;
        } else {
            const Eigen::VectorXd xc = centroid + 0.5 * (worst - centroid);
            if (result.evaluations >= problem.budget) {
                result.budget_exhausted = true;
                break;
            }
            const double fc = eval(xc);
            if (fc > values.back()) {
                simplex.back() = xc;
                values.back() = fc;
            } else {
                // shrink toward the best vertex
                for (int p = 1; p < np; ++p) {
                    if (result.evaluations >= problem.budget) {
                        result.budget_exhausted = true;
                        break;
                    }
                    simplex[static_cast<std::size_t>(p)] =
                        simplex[0] + 0.5 * (simplex[static_cast<std::size_t>(p)] - simplex[0]);
                    values[static_cast<std::size_t>(p)] = eval(simplex[static_cast<std::size_t>(p)]);
                }
                if (result.budget_exhausted) break;
            }
        }
    }
    if (result.evaluations >= problem.budget) result.budget_exhausted = true;
    return result;
}

} // namespace polburst
