#include "sbr/instances.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>

#include "sbr/error.hpp"

namespace sbr {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view tok) {
    T value{};
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

// Iterates over lines with 1-based numbering, skipping blanks and comments.
template <typename F>
void for_each_line(std::string_view text, char comment, F&& f) {
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string_view line = text.substr(pos, nl - pos);
        ++lineno;
        pos = nl + 1;
        auto toks = split_ws(line);
        if (toks.empty() || toks.front().front() == comment) continue;
        f(toks, lineno);
    }
}

struct EdgeList {
    int n = 0;
    std::vector<Edge> edges;
};

EdgeList parse_edge_list(std::string_view text, bool directed) {
    std::optional<long> declared_m;
    EdgeList out;
    std::map<std::pair<int, int>, std::size_t> seen;
    long lines = 0;
    for_each_line(text, '#', [&](const std::vector<std::string_view>& toks, std::size_t lineno) {
        if (!declared_m) {
            if (toks.size() != 2) throw ParseError("header must be \"n m\"", lineno);
            const auto n = parse_number<int>(toks[0]);
            const auto m = parse_number<long>(toks[1]);
            if (!n || !m || *n < 0 || *m < 0) throw ParseError("header must hold two non-negative integers", lineno);
            out.n = *n;
            declared_m = *m;
            return;
        }
        if (toks.size() != 2 && toks.size() != 3) throw ParseError("edge line must be \"i j [w]\"", lineno);
        const auto i = parse_number<int>(toks[0]);
        const auto j = parse_number<int>(toks[1]);
        if (!i || !j) throw ParseError("malformed vertex index", lineno);
        double w = 1.0;
        if (toks.size() == 3) {
            const auto pw = parse_number<double>(toks[2]);
            if (!pw || !std::isfinite(*pw)) throw ParseError("malformed weight", lineno);
            w = *pw;
        }
        if (*i < 0 || *j < 0 || *i >= out.n || *j >= out.n) {
            throw ParseError("vertex index out of range [0, " + std::to_string(out.n) + ")", lineno);
        }
        if (*i == *j) throw ParseError("self-loop on vertex " + std::to_string(*i), lineno);
        if (w < 0.0) throw ParseError("negative weight", lineno);
        ++lines;
        const auto key = directed ? std::pair{*i, *j} : std::pair{std::min(*i, *j), std::max(*i, *j)};
        if (auto it = seen.find(key); it != seen.end()) {
            out.edges[it->second].weight += w;
        } else {
            seen.emplace(key, out.edges.size());
            out.edges.push_back({*i, *j, w});
        }
    });
    if (!declared_m) throw ParseError("missing \"n m\" header", 0);
    if (lines != *declared_m) {
        throw ParseError("header declares " + std::to_string(*declared_m) + " edges but " + std::to_string(lines) +
                             " were given",
                         0);
    }
    return out;
}

double sum_weights(const std::vector<Edge>& es) {
    return std::accumulate(es.begin(), es.end(), 0.0, [](double s, const Edge& e) { return s + e.weight; });
}

void check_length(int n, const Assignment& a) {
    if (a.size() != static_cast<std::size_t>(n)) {
        throw DomainError("assignment has length " + std::to_string(a.size()) + ", expected " + std::to_string(n));
    }
}

bool literal_value(int lit, const Assignment& a) {
    const bool v = a[static_cast<std::size_t>(std::abs(lit) - 1)] != 0;
    return lit > 0 ? v : !v;
}

}  // namespace

double MaxCutInstance::total_weight() const { return sum_weights(edges); }
double DiCutInstance::total_weight() const { return sum_weights(arcs); }
double Max2SatInstance::total_weight() const {
    return std::accumulate(clauses.begin(), clauses.end(), 0.0,
                           [](double s, const Clause& c) { return s + c.weight; });
}

ClauseCoeffs clause_coeffs(const std::array<bool, 4>& t) {
    const double p00 = t[0], p01 = t[1], p10 = t[2], p11 = t[3];
    return {p00, p10 - p00, p01 - p00, p11 - p10 - p01 + p00};
}

MaxCutInstance parse_graph(std::string_view text) {
    auto el = parse_edge_list(text, false);
    return {el.n, std::move(el.edges)};
}

DiCutInstance parse_digraph(std::string_view text) {
    auto el = parse_edge_list(text, true);
    return {el.n, std::move(el.edges)};
}

std::variant<MaxCutInstance, DiCutInstance> parse_graph(std::string_view text, GraphKind kind) {
    if (kind == GraphKind::Directed) return parse_digraph(text);
    return parse_graph(text);
}

Max2SatInstance parse_cnf2(std::string_view text) {
    Max2SatInstance out;
    std::optional<long> declared_m;
    std::vector<int> pending;
    std::size_t pending_line = 0;
    for_each_line(text, 'c', [&](const std::vector<std::string_view>& toks, std::size_t lineno) {
        if (toks.front() == "%") return;  // some generators end with "%"
        if (!declared_m) {
            if (toks.size() != 4 || toks[0] != "p" || toks[1] != "cnf") {
                throw ParseError("header must be \"p cnf n m\"", lineno);
            }
            const auto n = parse_number<int>(toks[2]);
            const auto m = parse_number<long>(toks[3]);
            if (!n || !m || *n < 0 || *m < 0) throw ParseError("header must hold two non-negative integers", lineno);
            out.n = *n;
            declared_m = *m;
            return;
        }
        for (auto tok : toks) {
            const auto lit = parse_number<int>(tok);
            if (!lit) throw ParseError("malformed literal '" + std::string(tok) + "'", lineno);
            if (pending.empty()) pending_line = lineno;
            if (*lit == 0) {
                const auto index = out.clauses.size() + 1;
                if (pending.size() != 2) {
                    throw ParseError("clause " + std::to_string(index) + " has " + std::to_string(pending.size()) +
                                         " literals, expected 2",
                                     pending_line);
                }
                out.clauses.push_back({pending[0], pending[1], 1.0});
                pending.clear();
                continue;
            }
            if (std::abs(*lit) > out.n) {
                throw ParseError("literal " + std::to_string(*lit) + " exceeds variable count", lineno);
            }
            pending.push_back(*lit);
        }
    });
    if (!declared_m) throw ParseError("missing \"p cnf\" header", 0);
    if (!pending.empty()) {
        throw ParseError("clause " + std::to_string(out.clauses.size() + 1) + " is not terminated by 0", pending_line);
    }
    if (static_cast<long>(out.clauses.size()) != *declared_m) {
        throw ParseError("header declares " + std::to_string(*declared_m) + " clauses but " +
                             std::to_string(out.clauses.size()) + " were given",
                         0);
    }
    return out;
}

double evaluate_assignment(const MaxCutInstance& g, const Assignment& a) {
    check_length(g.n, a);
    double total = 0.0;
    for (const auto& e : g.edges) {
        if ((a[e.i] != 0) != (a[e.j] != 0)) total += e.weight;
    }
    return total;
}

double evaluate_assignment(const DiCutInstance& g, const Assignment& a) {
    check_length(g.n, a);
    double total = 0.0;
    for (const auto& e : g.arcs) {
        if (a[e.i] != 0 && a[e.j] == 0) total += e.weight;
    }
    return total;
}

double evaluate_assignment(const Max2SatInstance& f, const Assignment& a) {
    check_length(f.n, a);
    double total = 0.0;
    for (const auto& c : f.clauses) {
        if (literal_value(c.lit1, a) || literal_value(c.lit2, a)) total += c.weight;
    }
    return total;
}

double evaluate_assignment(const ProblemInstance& inst, const Assignment& a) {
    return std::visit([&a](const auto& x) { return evaluate_assignment(x, a); }, inst);
}

int variable_count(const ProblemInstance& inst) {
    return std::visit([](const auto& x) { return x.n; }, inst);
}

double brute_force_optimum(const ProblemInstance& inst) {
    const int n = variable_count(inst);
    if (n > 24) throw DomainError("brute_force_optimum: n must be at most 24");
    Assignment a(static_cast<std::size_t>(n), 0);
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        for (int k = 0; k < n; ++k) a[k] = static_cast<std::uint8_t>((mask >> k) & 1u);
        best = std::max(best, evaluate_assignment(inst, a));
    }
    return best;
}

}  // namespace sbr
