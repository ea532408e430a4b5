#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sbr/maxprinciple.hpp"

using namespace sbr::maxprinciple;

namespace {

constexpr double kPi = std::numbers::pi;

GridSpec quick() {
    GridSpec s;
    s.grid_n = 101;
    s.theta_step = 0.02;
    return s;
}

}  // namespace

TEST_SUITE("maxprinciple") {

TEST_CASE("candidate values") {
    const Candidate g1(1), g2(2), g3(3);
    for (double y : {0.0, 0.3, 0.8}) {
        CHECK(eval_candidate(g1, 0.0, y, 0.7) == doctest::Approx(1.0));
        CHECK(eval_candidate(g3, 1.0, y, 2.9) == doctest::Approx(1.0 - y));
    }
    CHECK(eval_candidate(g2, 0.3, 0.6, kPi / 2) == doctest::Approx(1.0 - 0.18));
    CHECK(eval_candidate(g1, 0.4, 0.7, 1.1) == doctest::Approx(sdp_value(0.4, 0.7, 1.1)));
    CHECK(g1.cos_lo() == 0.0);
    CHECK(g2.cos_hi() == 0.0);
    CHECK(g3.cos_lo() == -1.0);
}

TEST_CASE("operator in closed form and by differences") {
    const Candidate g2(2);
    const double t = std::acos(-0.5);
    for (double x : {0.1, 0.5, 0.9})
        for (double y : {0.2, 0.6}) CHECK(apply_operator(g2, x, y, t) == doctest::Approx(2 * (x - y) * (x - y)));

    for (int i : {1, 2, 3})
        for (double th : {0.4, 1.9, 2.5, 3.0}) {
            const Candidate g(i);
            CHECK(std::abs(apply_operator(g, 0.3, 0.7, th) - apply_operator_fd(g, 0.3, 0.7, th)) <= 1e-6);
        }
}

TEST_CASE("each candidate is a subsolution on its range") {
    for (int i : {1, 2, 3}) {
        const auto r = verify_feasibility(Candidate(i), quick());
        CHECK(r.pass);
        CHECK(r.min >= -1e-8);
        CHECK(r.points > 0);
    }
    // Outside its range g_2 stops being one.
    const auto out = verify_feasibility(Candidate(2), -0.9, -0.9, quick());
    CHECK_FALSE(out.pass);
    CHECK(out.min < 0.0);
}

TEST_CASE("boundary data is reproduced exactly") {
    for (int i : {1, 2, 3}) {
        const auto b = verify_boundary(Candidate(i), 100, 0.05);
        CHECK(b.pass);
        CHECK(b.min == 0.0);
    }
}

TEST_CASE("ratio bounds") {
    const auto r1 = verify_ratio(Candidate(1), 1.0 - 1e-9, quick());
    CHECK(r1.min >= 1.0 - 1e-9);
    for (int i : {2, 3}) {
        const auto r = verify_ratio(Candidate(i), kRatioTarget, quick());
        CHECK(r.pass);
        CHECK(r.min >= kRatioTarget - 1e-4);
    }
    CHECK(combined_bound(kRatioTarget, quick()).pass);
    const auto w = warmup_three_quarters(quick());
    CHECK(w.pass);
    CHECK(w.min >= 0.75 - 1e-6);
}

TEST_CASE("a flipped correction is rejected") {
    // The flipped g_2 is still a subsolution; its ratio gives it away.
    CHECK(verify_feasibility(Candidate(2, -1.0), quick()).pass);
    CHECK_FALSE(verify_ratio(Candidate(2, -1.0), kRatioTarget, quick()).pass);

    const auto bad = verify_all(quick(), -1.0);
    CHECK_FALSE(bad.pass);
    bool named = false;
    for (const auto& f : bad.detail["failing"]) named = named || f == "g2.ratio";
    CHECK(named);
    CHECK(verify_all(quick()).pass);
}

}  // TEST_SUITE
