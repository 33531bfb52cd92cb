// optimize.hpp — deterministic derivative-free maximization: coarse grid
// seeding followed by Nelder-Mead simplex refinement within bounds.

#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace polburst {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimProblem {
    Objective objective;                            // maximized
    std::vector<std::pair<double, double>> bounds;  // finite [lo, hi] per parameter
    int seeds_per_dim{8};
    long budget{400};
    bool keep_history{false};
    double xtol{1e-4};  // simplex convergence: relative parameter spread
    double ftol{1e-7};  // simplex convergence: value spread

    void validate() const;
};

struct OptimResult {
    Eigen::VectorXd best_params;
    double best_value{0.0};
    long evaluations{0};
    bool budget_exhausted{false};
    bool zero_gradient{false};
    std::vector<std::pair<Eigen::VectorXd, double>> history;
};

OptimResult maximize(const OptimProblem& problem);

} // namespace polburst
