#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

namespace sbr {

struct Edge {
    int i = 0;
    int j = 0;
    double weight = 1.0;
};

/// Undirected weighted graph. Duplicate edges are merged by summing weights.
struct MaxCutInstance {
    int n = 0;
    std::vector<Edge> edges;

    double total_weight() const;
};

/// Directed weighted graph; `Edge{i, j, w}` is the arc i -> j.
struct DiCutInstance {
    int n = 0;
    std::vector<Edge> arcs;

    double total_weight() const;
};

/// Literal: +k is variable k (1-based), -k its negation.
struct Clause {
    int lit1 = 1;
    int lit2 = 1;
    double weight = 1.0;
};

struct Max2SatInstance {
    int n = 0;
    std::vector<Clause> clauses;

    double total_weight() const;
};

using ProblemInstance = std::variant<MaxCutInstance, Max2SatInstance, DiCutInstance>;

/// Multilinear expansion p(x, y) = c0 + ci x + cj y + cij x y of a binary predicate.
struct ClauseCoeffs {
    double c0 = 0.0;
    double ci = 0.0;
    double cj = 0.0;
    double cij = 0.0;

    double eval(double x, double y) const { return c0 + ci * x + cj * y + cij * x * y; }
};

/// Truth table indexed by (x, y) as table[2 * x + y].
ClauseCoeffs clause_coeffs(const std::array<bool, 4>& truth_table);

enum class GraphKind { Undirected, Directed };

/// Edge-list text: "n m" then m lines "i j [w]". Lines starting with '#' are comments.
MaxCutInstance parse_graph(std::string_view text);
DiCutInstance parse_digraph(std::string_view text);
std::variant<MaxCutInstance, DiCutInstance> parse_graph(std::string_view text, GraphKind kind);

/// DIMACS CNF restricted to two literals per clause.
Max2SatInstance parse_cnf2(std::string_view text);

using Assignment = std::vector<std::uint8_t>;

/// Max-Cut: weight of cut edges. DiCut: weight of arcs leaving S = {i : a_i = 1}.
/// Max-2SAT: weight of satisfied clauses, a_k = 1 meaning variable k+1 is true.
double evaluate_assignment(const MaxCutInstance& g, const Assignment& a);
double evaluate_assignment(const DiCutInstance& g, const Assignment& a);
double evaluate_assignment(const Max2SatInstance& f, const Assignment& a);
double evaluate_assignment(const ProblemInstance& inst, const Assignment& a);

int variable_count(const ProblemInstance& inst);

/// Exhaustive optimum for n <= 24.
double brute_force_optimum(const ProblemInstance& inst);

}  // namespace sbr
