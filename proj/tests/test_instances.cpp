#include <doctest.h>

#include "sbr/error.hpp"
#include "sbr/instances.hpp"

using namespace sbr;

TEST_SUITE("instances") {

TEST_CASE("parse K2 and C5") {
    const auto k2 = parse_graph("2 1\n0 1 1.0");
    CHECK(k2.n == 2);
    REQUIRE(k2.edges.size() == 1);
    CHECK(k2.edges[0].weight == 1.0);

    const auto c5 = parse_graph("5 5\n0 1\n1 2\n2 3\n3 4\n4 0");
    CHECK(c5.n == 5);
    CHECK(c5.edges.size() == 5);
    CHECK(c5.total_weight() == 5.0);
}

TEST_CASE("graph errors carry line numbers") {
    try {
        parse_graph("2 1\n0 0 1.0");
        FAIL("self-loop accepted");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_graph("2 1\n0 2"), ParseError);
    CHECK_THROWS_AS(parse_graph("2 1\n0 1 -1"), ParseError);
    CHECK_THROWS_AS(parse_graph("2 2\n0 1"), ParseError);
    CHECK_THROWS_AS(parse_graph("0 1"), ParseError);
}

TEST_CASE("duplicate edges accumulate") {
    const auto g = parse_graph("# comment\n3 3\n0 1 1.5\n1 0 2\n1 2\n");
    REQUIRE(g.edges.size() == 2);
    CHECK(g.total_weight() == doctest::Approx(4.5));
    CHECK(evaluate_assignment(g, {0, 1, 1}) == doctest::Approx(3.5));
}

TEST_CASE("cnf parsing") {
    const auto one = parse_cnf2("p cnf 2 1\n1 2 0");
    REQUIRE(one.clauses.size() == 1);
    CHECK(one.clauses[0].lit1 == 1);
    CHECK(one.clauses[0].lit2 == 2);

    const auto two = parse_cnf2("c mixed\np cnf 2 2\n1 -2 0\n-1 2 0");
    REQUIRE(two.clauses.size() == 2);
    CHECK(two.clauses[0].lit2 == -2);
    CHECK(two.clauses[1].lit1 == -1);

    try {
        parse_cnf2("p cnf 1 1\n1 0");
        FAIL("unit clause accepted");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_cnf2("p cnf 2 1\n1 3 0"), ParseError);
}

TEST_CASE("clause coefficients") {
    const auto orc = clause_coeffs({false, true, true, true});
    CHECK(orc.c0 == 0.0);
    CHECK(orc.ci == 1.0);
    CHECK(orc.cj == 1.0);
    CHECK(orc.cij == -1.0);

    const auto x = clause_coeffs({false, true, true, false});
    CHECK(x.c0 == 0.0);
    CHECK(x.ci == 1.0);
    CHECK(x.cj == 1.0);
    CHECK(x.cij == -2.0);

    const auto t = clause_coeffs({true, true, true, true});
    CHECK(t.c0 == 1.0);
    CHECK(t.ci == 0.0);
    CHECK(t.cj == 0.0);
    CHECK(t.cij == 0.0);
}

TEST_CASE("evaluate assignments") {
    const auto k2 = parse_graph("2 1\n0 1 1.0");
    CHECK(evaluate_assignment(k2, {0, 1}) == 1.0);
    CHECK(evaluate_assignment(k2, {1, 1}) == 0.0);

    const auto c5 = parse_graph("5 5\n0 1\n1 2\n2 3\n3 4\n4 0");
    CHECK(evaluate_assignment(c5, {0, 1, 0, 1, 0}) == 4.0);
    CHECK(brute_force_optimum(ProblemInstance{c5}) == 4.0);

    const auto arc = parse_digraph("2 1\n0 1");
    CHECK(evaluate_assignment(arc, {1, 0}) == 1.0);
    CHECK(evaluate_assignment(arc, {0, 1}) == 0.0);

    const auto f = parse_cnf2("p cnf 2 2\n1 -2 0\n-1 -2 0");
    CHECK(evaluate_assignment(f, {1, 1}) == 1.0);
    CHECK(evaluate_assignment(f, {0, 0}) == 2.0);
    CHECK_THROWS_AS(evaluate_assignment(f, {1}), DomainError);
}

TEST_CASE("cut value is complement invariant, directed cut is not") {
    const auto g = parse_graph("4 5\n0 1 1\n1 2 2\n2 3 0.5\n3 0 1\n0 2 3");
    const auto tri = parse_digraph("3 3\n0 1 1\n1 2 2\n2 0 3");
    for (int mask = 0; mask < 16; ++mask) {
        Assignment a(4), b(4);
        for (int i = 0; i < 4; ++i) {
            a[i] = (mask >> i) & 1;
            b[i] = 1 - a[i];
        }
        CHECK(evaluate_assignment(g, a) == evaluate_assignment(g, b));
    }
    bool differs = false;
    for (int mask = 0; mask < 8; ++mask) {
        Assignment a(3), b(3);
        for (int i = 0; i < 3; ++i) {
            a[i] = (mask >> i) & 1;
            b[i] = 1 - a[i];
        }
        differs = differs || evaluate_assignment(tri, a) != evaluate_assignment(tri, b);
    }
    CHECK(differs);
}

}  // TEST_SUITE
