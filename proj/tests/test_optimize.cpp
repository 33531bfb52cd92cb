#include <doctest.h>

#include "polburst/optimize.hpp"

using namespace polburst;

TEST_CASE("concave quadratic peak is located")
{
    OptimProblem p;
    p.objective = [](const Eigen::VectorXd& x) { return -(x(0) - 3.0) * (x(0) - 3.0); };
    p.bounds = {{0.0, 10.0}};
    p.xtol = 1e-6;
    p.ftol = 1e-12;
    OptimResult r = maximize(p);
    CHECK(r.best_params(0) == doctest::Approx(3.0).epsilon(1e-3));
    CHECK(r.best_value == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(!r.budget_exhausted);
}

TEST_CASE("constant objective is flagged zero gradient")
{
    OptimProblem p;
    p.objective = [](const Eigen::VectorXd&) { return 7.0; };
    p.bounds = {{-1.0, 1.0}};
    OptimResult r = maximize(p);
    CHECK(r.zero_gradient);
    CHECK(r.best_value == 7.0);
    CHECK(r.best_params(0) > -1.0);
    CHECK(r.best_params(0) < 1.0);
}

TEST_CASE("negated Rosenbrock reaches (1,1)")
{
    OptimProblem p;
    p.objective = [](const Eigen::VectorXd& x) {
        const double a = 1.0 - x(0);
        const double b = x(1) - x(0) * x(0);
        return -(a * a + 100.0 * b * b);
    };
    p.bounds = {{-2.0, 2.0}, {-2.0, 2.0}};
    p.budget = 400;
    p.xtol = 1e-8;
    p.ftol = 1e-14;
    OptimResult r = maximize(p);
    CHECK(r.best_params(0) == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(r.best_params(1) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("result never falls below the best grid seed")
{
    // adversarial objective with a sharp spike at one seed
    OptimProblem p;
    p.seeds_per_dim = 8;
    const double spike = -2.0 + 4.0 * 3.0 / 9.0;  // third of eight interior seeds
    p.objective = [spike](const Eigen::VectorXd& x) {
        const double near = std::abs(x(0) - spike) < 1e-6 ? 100.0 : 0.0;
        return near - x(0) * x(0);
    };
    p.bounds = {{-2.0, 2.0}};
    OptimResult r = maximize(p);
    CHECK(r.best_value >= 100.0 - spike * spike - 1e-12);
}

TEST_CASE("deterministic across repeated runs")
{
    auto run = []() {
        OptimProblem p;
        p.objective = [](const Eigen::VectorXd& x) {
            return std::sin(3.0 * x(0)) * std::cos(2.0 * x(1)) - 0.1 * x(0) * x(0);
        };
        p.bounds = {{-3.0, 3.0}, {-3.0, 3.0}};
        return maximize(p);
    };
    OptimResult a = run();
    OptimResult b = run();
    CHECK(a.best_value == b.best_value);
    CHECK(a.best_params == b.best_params);
    CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("validation rejects malformed problems")
{
    OptimProblem p;
    p.objective = [](const Eigen::VectorXd&) { return 0.0; };
    CHECK_THROWS_AS(maximize(p), std::invalid_argument);  // no bounds
    p.bounds = {{0.0, 1.0}};
    p.budget = 2;
    CHECK_THROWS_AS(maximize(p), std::invalid_argument);  // budget below seeds
}

TEST_CASE("history is recorded on request")
{
    OptimProblem p;
    p.objective = [](const Eigen::VectorXd& x) { return -x(0) * x(0); };
    p.bounds = {{-1.0, 1.0}};
    p.keep_history = true;
    OptimResult r = maximize(p);
    CHECK(static_cast<long>(r.history.size()) == r.evaluations);
}
