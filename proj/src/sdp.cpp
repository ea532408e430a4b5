#include "sbr/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <deque>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include <boost/random/normal_distribution.hpp>

#include "sbr/rng.hpp"

namespace sbr::sdp {

namespace {

void add_term(GramLinear& f, int p, int q, double coef) {
    if (p == q) {
        f.constant += coef;  // unit rows
        return;
    }
    if (p > q) std::swap(p, q);
    f.terms.push_back({p, q, coef});
}

// Merge duplicate (p, q) entries so evaluation cost tracks the distinct pairs.
void compact(GramLinear& f) {
    std::map<std::pair<int, int>, double> acc;
    for (const auto& t : f.terms) acc[{t.p, t.q}] += t.coef;
    f.terms.clear();
    for (const auto& [k, v] : acc) {
        if (v != 0.0) f.terms.push_back({k.first, k.second, v});
    }
}

// Pair inequalities 1 + s u0.ua + t u0.ub + s t ua.ub >= 0 for all signs,
// the l2^2 triangle inequalities of {u0, +-ua, +-ub}.
void add_pair_triangles(SdpModel& m, int a, int b) {
    for (int s : {1, -1}) {
        for (int t : {1, -1}) {
            GramLinear g;
            g.constant = 1.0;
            add_term(g, 0, a, s);
            add_term(g, 0, b, t);
            add_term(g, a, b, s * t);
            m.constraints.push_back(std::move(g));
        }
    }
}

double dot_rows(const Eigen::MatrixXd& u, int p, int q) { return u.row(p).dot(u.row(q)); }

struct Evaluation {
    double merit = 0.0;
    double objective = 0.0;
    double violation = 0.0;
};

class Augmented {
public:
    Augmented(const SdpModel& m) : model_(m), lambda_(m.constraints.size(), 0.0) {}

    double mu = 10.0;

    Evaluation evaluate(const Eigen::MatrixXd& u) const {
        Evaluation e;
        e.objective = model_.objective.eval(u);
        double pen = 0.0;
        for (std::size_t k = 0; k < model_.constraints.size(); ++k) {
            const double g = model_.constraints[k].eval(u);
            e.violation = std::max(e.violation, -g);
            const double s = std::max(0.0, lambda_[k] - mu * g);
            pen += (s * s - lambda_[k] * lambda_[k]) / (2.0 * mu);
        }
        e.merit = e.objective - pen;
        return e;
    }

    // Euclidean gradient of the merit.
    Eigen::MatrixXd gradient(const Eigen::MatrixXd& u) const {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(u.rows(), u.cols());
        accumulate(g, u, model_.objective, 1.0);
        for (std::size_t k = 0; k < model_.constraints.size(); ++k) {
            const double val = model_.constraints[k].eval(u);
            const double s = std::max(0.0, lambda_[k] - mu * val);
            if (s > 0.0) accumulate(g, u, model_.constraints[k], s);
        }
        return g;
    }

    void update_multipliers(const Eigen::MatrixXd& u) {
        for (std::size_t k = 0; k < model_.constraints.size(); ++k) {
            lambda_[k] = std::max(0.0, lambda_[k] - mu * model_.constraints[k].eval(u));
        }
    }

private:
    static void accumulate(Eigen::MatrixXd& g, const Eigen::MatrixXd& u, const GramLinear& f, double w) {
        for (const auto& t : f.terms) {
            g.row(t.p) += w * t.coef * u.row(t.q);
            g.row(t.q) += w * t.coef * u.row(t.p);
        }
    }

    const SdpModel& model_;
    std::vector<double> lambda_;
};

void normalize_rows(Eigen::MatrixXd& u) {
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        const double nrm = u.row(i).norm();
        if (nrm > 0.0) u.row(i) /= nrm;
        else {
            u.row(i).setZero();
            u(i, 0) = 1.0;
        }
    }
}

// Project the Euclidean gradient onto the tangent space of the sphere product.
Eigen::MatrixXd tangent(const Eigen::MatrixXd& u, const Eigen::MatrixXd& g) {
    Eigen::MatrixXd t = g;
    for (Eigen::Index i = 0; i < u.rows(); ++i) t.row(i) -= g.row(i).dot(u.row(i)) * u.row(i);
    return t;
}

struct Attempt {
    Eigen::MatrixXd u;
    Evaluation eval;
    double stationarity = 0.0;
};

Attempt run_once(const SdpModel& model, int rank, const SolveOptions& opts, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    boost::random::normal_distribution<double> normal;
    Eigen::MatrixXd u(model.n + 1, rank);
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        for (Eigen::Index j = 0; j < u.cols(); ++j) u(i, j) = normal(gen);
    }
    normalize_rows(u);

    Augmented al(model);
    double stationarity = std::numeric_limits<double>::infinity();
    double previous_violation = std::numeric_limits<double>::infinity();
    constexpr int kMemory = 10;
    for (int outer = 0; outer < opts.outer_rounds; ++outer) {
        // Riemannian L-BFGS on -merit; pairs are moved by tangent projection.
        std::deque<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> mem;
        Evaluation cur = al.evaluate(u);
        Eigen::MatrixXd g = -tangent(u, al.gradient(u));
        for (int it = 0; it < opts.max_iters; ++it) {
            stationarity = g.norm();
            if (stationarity < opts.tol) break;
            Eigen::MatrixXd q = g;
            std::vector<double> alpha(mem.size());
            for (std::size_t k = mem.size(); k-- > 0;) {
                const auto& [sk, yk] = mem[k];
                alpha[k] = sk.cwiseProduct(q).sum() / sk.cwiseProduct(yk).sum();
                q -= alpha[k] * yk;
            }
            if (!mem.empty()) {
                const auto& [sk, yk] = mem.back();
                q *= sk.cwiseProduct(yk).sum() / yk.squaredNorm();
            } else {
                q *= std::min(1.0, 1.0 / stationarity);
            }
            for (std::size_t k = 0; k < mem.size(); ++k) {
                const auto& [sk, yk] = mem[k];
                const double beta = yk.cwiseProduct(q).sum() / sk.cwiseProduct(yk).sum();
                q += (alpha[k] - beta) * sk;
            }
            Eigen::MatrixXd dir = tangent(u, -q);
            double slope = g.cwiseProduct(dir).sum();
            if (!(slope < 0.0)) {
                mem.clear();
                dir = -g * std::min(1.0, 1.0 / stationarity);
                slope = g.cwiseProduct(dir).sum();
            }
            bool accepted = false;
            double t = 1.0;
            Eigen::MatrixXd trial;
            Evaluation ev;
            for (int bt = 0; bt < 60; ++bt) {
                trial = u + t * dir;
                normalize_rows(trial);
                ev = al.evaluate(trial);
                if (-ev.merit <= -cur.merit + 1e-4 * t * slope) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) {
                if (mem.empty()) break;
                mem.clear();
                continue;
            }
            Eigen::MatrixXd g_new = -tangent(trial, al.gradient(trial));
            Eigen::MatrixXd sk = tangent(trial, t * dir);
            Eigen::MatrixXd yk = g_new - tangent(trial, g);
            if (sk.cwiseProduct(yk).sum() > 1e-12 * sk.norm() * yk.norm()) {
                mem.emplace_back(std::move(sk), std::move(yk));
                if (static_cast<int>(mem.size()) > kMemory) mem.pop_front();
            }
            u = std::move(trial);
            cur = ev;
            g = std::move(g_new);
        }
        const Evaluation e = al.evaluate(u);
        if (e.violation <= opts.tol && stationarity < std::max(opts.tol, 1e-6) * 10.0) break;
        if (e.violation > 0.25 * previous_violation) al.mu = std::min(al.mu * 4.0, 1e8);
        previous_violation = e.violation;
        al.update_multipliers(u);
    }
    Attempt out;
    out.eval = al.evaluate(u);
    out.u = std::move(u);
    out.stationarity = stationarity;
    return out;
}

}  // namespace

const char* problem_name(Problem p) {
    switch (p) {
        case Problem::MaxCut: return "maxcut";
        case Problem::Max2Sat: return "max2sat";
        case Problem::DiCut: return "dicut";
    }
    return "?";
}

double GramLinear::eval(const Eigen::MatrixXd& rows) const {
    double s = constant;
    for (const auto& t : terms) s += t.coef * dot_rows(rows, t.p, t.q);
    return s;
}

SdpModel build_relaxation(const MaxCutInstance& g) {
    SdpModel m;
    m.problem = Problem::MaxCut;
    m.n = g.n;
    for (const auto& e : g.edges) {
        m.objective.constant += e.weight / 2.0;
        add_term(m.objective, e.i + 1, e.j + 1, -e.weight / 2.0);
    }
    compact(m.objective);
    return m;
}

SdpModel build_relaxation(const Max2SatInstance& f) {
    SdpModel m;
    m.problem = Problem::Max2Sat;
    m.n = f.n;
    std::set<std::pair<int, int>> pairs;
    for (const auto& c : f.clauses) {
        // Falsity vector of literal +-k is (u_0 -+ u_k) / 2; the clause is
        // violated with weight |f_a . f_b|.
        const int a = std::abs(c.lit1);
        const int b = std::abs(c.lit2);
        const double sa = c.lit1 > 0 ? 1.0 : -1.0;
        const double sb = c.lit2 > 0 ? 1.0 : -1.0;
        const double w = c.weight;
        m.objective.constant += w * (1.0 - 0.25);
        add_term(m.objective, 0, a, w * 0.25 * sa);
        add_term(m.objective, 0, b, w * 0.25 * sb);
        add_term(m.objective, a, b, -w * 0.25 * sa * sb);
        if (a != b) pairs.insert({std::min(a, b), std::max(a, b)});
    }
    compact(m.objective);
    for (const auto& [a, b] : pairs) add_pair_triangles(m, a, b);
    return m;
}

SdpModel build_relaxation(const DiCutInstance& g) {
    SdpModel m;
    m.problem = Problem::DiCut;
    m.n = g.n;
    std::set<std::pair<int, int>> pairs;
    for (const auto& e : g.arcs) {
        const int i = e.i + 1;
        const int j = e.j + 1;
        // (u0 + ui) . (u0 - uj) / 4
        m.objective.constant += e.weight / 4.0;
        add_term(m.objective, 0, i, e.weight / 4.0);
        add_term(m.objective, 0, j, -e.weight / 4.0);
        add_term(m.objective, i, j, -e.weight / 4.0);
        pairs.insert({std::min(i, j), std::max(i, j)});
    }
    compact(m.objective);
    for (const auto& [a, b] : pairs) add_pair_triangles(m, a, b);
    return m;
}

SdpModel build_relaxation(const ProblemInstance& inst) {
    return std::visit([](const auto& x) { return build_relaxation(x); }, inst);
}

int default_rank(int n) {
    const int bm = static_cast<int>(std::ceil(std::sqrt(2.0 * n))) + 1;
    return std::max(2, std::min(n + 1, bm));
}

SdpSolution solve_low_rank(const SdpModel& model, int rank, const SolveOptions& opts) {
    if (rank < 2) throw DomainError("solve_low_rank: rank must be at least 2");
    if (opts.restarts < 1) throw DomainError("solve_low_rank: need at least one restart");
    std::optional<Attempt> best;
    std::optional<Attempt> best_infeasible;
    for (int r = 0; r < opts.restarts; ++r) {
        Attempt a = run_once(model, rank, opts, derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
        const bool feasible = a.eval.violation <= opts.tol;
        auto& slot = feasible ? best : best_infeasible;
        if (!slot || a.eval.objective > slot->eval.objective) slot = std::move(a);
    }

    auto to_solution = [&model](Attempt& a) {
        SdpSolution s;
        s.problem = model.problem;
        s.objective = a.eval.objective;
        s.max_violation = a.eval.violation;
        s.stationarity = a.stationarity;
        if (model.problem == Problem::MaxCut) {
            // Reference row unused by the objective: replace it by a fresh axis.
            Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(a.u.rows(), a.u.cols() + 1);
            rows.block(1, 0, a.u.rows() - 1, a.u.cols()) = a.u.bottomRows(a.u.rows() - 1);
            rows(0, a.u.cols()) = 1.0;
            s.rows = std::move(rows);
        } else {
            s.rows = std::move(a.u);
        }
        return s;
    };

    if (!best) {
        throw SdpNonConvergence("solve_low_rank: no restart reached the constraint tolerance",
                                to_solution(*best_infeasible));
    }
    return to_solution(*best);
}

SdpSolution solve_low_rank(const SdpModel& model, const SolveOptions& opts) {
    return solve_low_rank(model, default_rank(model.n), opts);
}

Eigen::MatrixXd SdpSolution::zero_one_vectors() const {
    Eigen::MatrixXd v = rows;
    for (Eigen::Index i = 1; i < v.rows(); ++i) v.row(i) = 0.5 * (rows.row(0) + rows.row(i));
    return v;
}

double Decomposition::theta(int i, int j) const {
    return std::acos(std::clamp(cosines(i, j), -1.0, 1.0));
}

Decomposition decompose(const SdpSolution& solution) {
    const int n = solution.n();
    Decomposition d;
    d.v0 = solution.rows.row(0).transpose();
    d.x.resize(static_cast<std::size_t>(n));
    d.directions.resize(static_cast<std::size_t>(n));
    d.cosines = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd u = solution.rows.row(i + 1).transpose();
        const double g = std::clamp(u.dot(d.v0), -1.0, 1.0);
        const double x = 0.5 * (1.0 + g);
        d.x[i] = x;
        if (x * (1.0 - x) < kFixedThreshold) {
            d.x[i] = x < 0.5 ? 0.0 : 1.0;
            continue;
        }
        Eigen::VectorXd w = u - g * d.v0;
        w /= w.norm();
        d.directions[i] = std::move(w);
    }
    for (int i = 0; i < n; ++i) {
        if (d.fixed(i)) continue;
        d.cosines(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            if (d.fixed(j)) continue;
            const double c = std::clamp(d.directions[i]->dot(*d.directions[j]), -1.0, 1.0);
            d.cosines(i, j) = c;
            d.cosines(j, i) = c;
        }
    }
    return d;
}

Eigen::MatrixXd walk_covariance(const Decomposition& d) { return d.cosines; }

namespace {

struct Bounds {
    double lower = -1.0;
    double upper = 1.0;
};

// sqrt(num / den) with den == 0 read as +infinity.
double ratio_sqrt(double num, double den) {
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

Bounds cos_bounds(double x, double y) {
    Bounds b;
    b.lower = std::max(-ratio_sqrt(x * y, (1.0 - x) * (1.0 - y)), -ratio_sqrt((1.0 - x) * (1.0 - y), x * y));
    b.upper = std::min(ratio_sqrt(x * (1.0 - y), (1.0 - x) * y), ratio_sqrt(y * (1.0 - x), (1.0 - y) * x));
    return b;
}

void check_config(const Configuration& c) {
    if (!(c.xi >= 0.0 && c.xi <= 1.0 && c.xj >= 0.0 && c.xj <= 1.0)) {
        throw DomainError("configuration marginals must lie in [0, 1]");
    }
    if (!(c.theta >= 0.0 && c.theta <= std::numbers::pi + 1e-12)) {
        throw DomainError("configuration angle must lie in [0, pi]");
    }
}

constexpr double kFeasSlack = 1e-12;

}  // namespace

bool check_triangle(const Configuration& c) {
    check_config(c);
    // A fixed marginal has no direction vector, so the angle is unconstrained.
    auto fixed = [](double x) { return x <= 1e-12 || x >= 1.0 - 1e-12; };
    if (fixed(c.xi) || fixed(c.xj)) return true;
    const double cs = std::cos(c.theta);
    return cs >= cos_bounds(c.xi, c.xj).lower - kFeasSlack;
}

bool check_triangle_full(const Configuration& c) {
    check_config(c);
    const double cs = std::cos(c.theta);
    const Bounds b = cos_bounds(c.xi, c.xj);
    return cs >= b.lower - kFeasSlack && cs <= b.upper + kFeasSlack;
}

double sdp_clause_value(const Configuration& c) {
    check_config(c);
    const double x = c.xi;
    const double y = c.xj;
    const double p = std::sqrt(std::max(0.0, (x - x * x) * (y - y * y)));
    const double cs = std::cos(c.theta);
    switch (c.problem) {
        case Problem::MaxCut: return x + y - 2.0 * x * y - 2.0 * p * cs;
        case Problem::Max2Sat: return x + y - x * y - p * cs;
        case Problem::DiCut: break;
    }
    throw DomainError("sdp_clause_value: DiCut values depend on three angles");
}

}  // namespace sbr::sdp
