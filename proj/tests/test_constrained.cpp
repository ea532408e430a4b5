#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sbr/constrained.hpp"
#include "sbr/error.hpp"
#include "sbr/pde.hpp"

using namespace sbr;
using namespace sbr::constrained;

namespace {

constexpr double kPi = std::numbers::pi;

const char* kC6 = "6 6\n0 1\n1 2\n2 3\n3 4\n4 5\n5 0";

}  // namespace

TEST_SUITE("constrained") {

TEST_CASE("constraint parsing") {
    const auto c = parse_constraints("# two sides\n1: 0 2 4\n\n2: 1 3 5  # tail\n", 6, 0.2);
    REQUIRE(c.size() == 2);
    CHECK(c.targets[1] == 2);
    CHECK(c.families[0] == std::vector<int>{0, 2, 4});
    CHECK(c.epsilon == 0.2);

    auto line_of = [](const char* text) {
        try {
            parse_constraints(text, 6);
        } catch (const ParseError& e) {
            return e.line();
        }
        return std::size_t{0};
    };
    CHECK(line_of("1: 0 1\n0 1 2\n") == 2);
    CHECK(line_of("x: 0 1\n") == 1);
    CHECK(line_of("1: 0 9\n") == 1);
    CHECK(line_of("1: 0 0\n") == 1);
    CHECK(line_of("3: 0 1\n") == 1);
    CHECK(line_of("1: 0 q\n") == 1);
}

TEST_CASE("violations and the disjoint feasible point") {
    const auto c = parse_constraints("1: 0 2 4\n2: 1 3 5\n", 6);
    const Assignment s{1, 1, 0, 1, 0, 0};
    CHECK(violations(c, s) == std::vector<int>{0, 0});
    CHECK(max_violation(c, Assignment{1, 1, 1, 1, 0, 0}) == 1);
    CHECK(max_violation(c, Assignment{1, 1, 1, 1, 1, 1}) == 2);
    CHECK(max_violation(c, Assignment(6, 0)) == 2);

    const auto x = disjoint_feasible_point(c, 6);
    CHECK(x[0] == doctest::Approx(1.0 / 3));
    CHECK(x[1] == doctest::Approx(2.0 / 3));
    const auto partial = disjoint_feasible_point(parse_constraints("1: 0 1\n", 4), 4);
    CHECK(partial[3] == 0.5);
    CHECK_THROWS_AS(disjoint_feasible_point(parse_constraints("1: 0 1\n1: 1 2\n", 4), 4), DomainError);
}

TEST_CASE("default stopping time") {
    CHECK(default_tau(0.1) == doctest::Approx(std::log2(20 * std::sqrt(2.0))));
    CHECK(std::pow(2.0, -default_tau(0.25)) * 2 * std::sqrt(2.0) == doctest::Approx(0.25));
    CHECK_THROWS_AS(default_tau(0.0), DomainError);
}

TEST_CASE("baseline rescaling and cut probability") {
    const Eigen::Vector3d x(0.0, 0.4, 1.0);
    CHECK(rescale_marginals(x, 0.0) == x);
    const auto y = rescale_marginals(Eigen::Vector2d(1.0, 0.0), 0.5);
    CHECK(y[0] == doctest::Approx(0.75));
    CHECK(y[1] == doctest::Approx(0.25));
    CHECK(cut_probability(1.0, 0.0) == 1.0);
    CHECK(cut_probability(0.5, 0.5) == 0.5);
    CHECK(cut_probability(0.75, 0.25) == doctest::Approx(0.625));
}

TEST_CASE("baseline on a single edge") {
    const auto g = parse_graph("2 1\n0 1");
    const SideConstraints none;
    const Eigen::Vector2d x(1.0, 0.0);
    long cut = 0;
    const int runs = 20'000;
    for (int t = 0; t < runs; ++t) {
        Engine rng = make_engine(12, t);
        const auto r = baseline_round(x, g, none, 0.5, rng, 1);
        CHECK(r.attempts == 1);
        cut += r.cut == 1.0;
    }
    const double p = cut_probability(0.75, 0.25);
    CHECK(std::abs(static_cast<double>(cut) / runs - p) <= 3 * std::sqrt(p * (1 - p) / runs));

    Engine rng = make_engine(1, 0);
    CHECK_THROWS_AS(baseline_round(x, g, none, 0.8, rng), DomainError);
    const auto c = parse_constraints("1: 0 1\n", 2);
    CHECK_THROWS_AS(baseline_round(Eigen::Vector2d(0.2, 0.2), g, c, 0.2, rng), DomainError);
}

TEST_CASE("baseline meets its goals on the six-cycle") {
    const auto g = parse_graph(kC6);
    const auto c = parse_constraints("1: 0 2 4\n2: 1 3 5\n", 6);
    const auto x = disjoint_feasible_point(c, 6);
    Engine rng = make_engine(3, 0);
    const auto r = baseline_round(x, g, c, 0.2, rng);
    CHECK(r.success);
    CHECK(r.cut >= 0.1 * 6);
    CHECK(r.max_violation <= 0.2 * 6);
    CHECK(r.cut_pass_rate > 0.0);
    CHECK(r.violation_pass_rate > 0.0);
}

TEST_CASE("integral marginals round deterministically") {
    const auto g = parse_graph(kC6);
    const auto c = parse_constraints("3: 0 1 2 3 4 5\n", 6);
    Eigen::VectorXd x(6);
    x << 1, 0, 1, 0, 1, 0;
    diffusion::WalkParams p;
    for (int t = 0; t < 50; ++t) {
        Engine rng = make_engine(4, t);
        const auto r = constrained_round(x, Eigen::MatrixXd::Identity(6, 6), g, c, 3.0, p, rng);
        CHECK(r.max_violation == 0);
        CHECK(r.cut_value == 6.0);
        CHECK(r.stopped == x);
    }
}

TEST_CASE("stopped pair separation approaches the absorbed value") {
    const sdp::Configuration cfg{0.5, 0.5, 2.0, sdp::Problem::MaxCut};
    diffusion::WalkParams p;
    p.seed = 19;
    const auto e = stopped_pair_separation(cfg, 50.0, p, 20'000);
    pde::DirichletProblem pr;
    pr.rho = std::cos(cfg.theta);
    pr.boundary = pde::Boundary::MaxCut01;
    const double u = pde::solve_dirichlet(pr).query(0.5, 0.5);
    CHECK(std::abs(e.prob - u) <= std::max(3 * e.stderr_, 2e-3));

    // tau = 0 keeps the start point.
    const auto zero = stopped_pair_separation(cfg, 1e-12, p, 100);
    CHECK(zero.prob == doctest::Approx(0.5).epsilon(1e-3));
    CHECK_THROWS_AS(stopped_pair_separation({0.1, 0.1, kPi, sdp::Problem::MaxCut}, 1.0, p, 10), DomainError);
}

TEST_CASE("hitting profile") {
    diffusion::WalkParams p;
    p.seed = 8;
    const auto h = hitting_profile(20'000, 3, p);
    REQUIRE(h.survival.size() == 4);
    CHECK(h.survival[0] == 1.0);
    CHECK(h.survival[1] <= 0.275);
    for (std::size_t t = 1; t < h.survival.size(); ++t) CHECK(h.survival[t] <= h.survival[t - 1]);
    CHECK(h.within(0.3));
    CHECK(h.to_json()["profile"].size() == 4);
}

TEST_CASE("concentration of family sums") {
    diffusion::WalkParams p;
    p.seed = 14;
    const int n = 8;
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 0.5);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

    const auto empty = concentration_check(x, I, {}, 1.0, 200, p);
    CHECK(empty.mean_deviation == 0.0);
    CHECK(empty.variance_proxy == 0.0);

    const auto r = concentration_check(x, I, {0, 1, 2, 3}, 1.0, 4000, p);
    CHECK(r.variance_proxy == doctest::Approx(4.0));
    CHECK(std::abs(r.mean_deviation) <= 3 * r.deviation_stderr + 1e-12);
    CHECK(r.rungs.size() == 6);
    CHECK(r.pass);

    Engine rng = make_engine(2, 0);
    const auto W = synthetic_covariance(n, 4, rng);
    CHECK(W.diagonal().isOnes());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(W).eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("Bernoulli finish is unbiased") {
    const auto g = parse_graph(kC6);
    const SideConstraints none;
    Eigen::VectorXd x(6);
    x << 0.2, 0.5, 0.9, 0.3, 0.6, 0.5;
    diffusion::WalkParams p;
    const int runs = 20'000;
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(6);
    for (int t = 0; t < runs; ++t) {
        Engine rng = make_engine(23, t);
        const auto r = constrained_round(x, Eigen::MatrixXd::Identity(6, 6), g, none, 0.5, p, rng);
        for (int i = 0; i < 6; ++i) freq[i] += r.set[i];
    }
    for (int i = 0; i < 6; ++i) {
        const double m = freq[i] / runs;
        CHECK(std::abs(m - x[i]) <= 3 * std::sqrt(x[i] * (1 - x[i]) / runs));
    }
}

}  // TEST_SUITE
