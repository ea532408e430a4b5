#include "sbr/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "sbr/parallel.hpp"

namespace sbr::diffusion {

namespace {

using Normal = boost::random::normal_distribution<double>;

// 2 ln(8 / 1e-10) rounded up: reflection, two sides and two coordinates.
constexpr double kAggregateMargin = 52.0;

// Damping factor (1 - X^2)^(alpha/2) with X mapped to [-1, 1].
inline double damping(double x, double alpha, const Cube& cube) {
    if (alpha == 0.0) return 1.0;
    const double X = (2.0 * x - cube.lo - cube.hi) / (cube.hi - cube.lo);
    return std::pow(std::max(0.0, 1.0 - X * X), alpha / 2.0);
}

// One uniform per step, drawn on first use and shared by every coordinate,
// so coordinates moving in lockstep make the same snap decision.
class SnapDraw {
public:
    explicit SnapDraw(Engine& rng) : rng_(rng) {}
    double get() {
        if (u_ < 0.0) u_ = boost::random::uniform_01<double>()(rng_);
        return u_;
    }
    void next() { u_ = -1.0; }

private:
    Engine& rng_;
    double u_ = -1.0;
};

// Within tol of a face, at distance d: freeze on the face with probability
// 1 - d / (2 tol), otherwise move back to distance 2 tol. The expected
// position is unchanged. Overshoot freezes. Returns true if frozen.
inline bool try_freeze(double& x, double tol, const Cube& cube, SnapDraw& draw) {
    const double d_lo = x - cube.lo, d_hi = cube.hi - x;
    if (d_lo > tol && d_hi > tol) return false;
    const bool low = d_lo <= d_hi;
    const double d = low ? d_lo : d_hi;
    if (d > 0.0) {
        if (2.0 * tol * draw.get() < d) {
            x = low ? cube.lo + 2.0 * tol : cube.hi - 2.0 * tol;
            return false;
        }
    }
    x = low ? cube.lo : cube.hi;
    return true;
}

// Exit side of a one-dimensional martingale on [lo, hi].
inline double resolve_exit(double x, const Cube& cube, Engine& rng) {
    boost::random::uniform_01<double> uni;
    const double p_hi = std::clamp((x - cube.lo) / (cube.hi - cube.lo), 0.0, 1.0);
    return uni(rng) < p_hi ? cube.hi : cube.lo;
}

struct ActiveSet {
    std::vector<int> index;
    Eigen::MatrixXd root;
    Eigen::VectorXd g;
    Eigen::VectorXd inc;

    void rebuild(const Eigen::MatrixXd& cov, const std::vector<bool>& frozen) {
        index.clear();
        for (int i = 0; i < static_cast<int>(frozen.size()); ++i) {
            if (!frozen[i]) index.push_back(i);
        }
        const auto k = static_cast<Eigen::Index>(index.size());
        Eigen::MatrixXd sub(k, k);
        for (Eigen::Index a = 0; a < k; ++a) {
            for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = cov(index[a], index[b]);
        }
        root = k > 0 ? psd_sqrt(sub) : Eigen::MatrixXd();
        g.resize(k);
        inc.resize(k);
    }
};

void check_inputs(const Eigen::MatrixXd& cov, const Eigen::VectorXd& start, const Cube& cube) {
    if (cov.rows() != cov.cols() || cov.rows() != start.size()) {
        throw DomainError("walk: covariance and start dimensions disagree");
    }
    if (!(cube.hi > cube.lo)) throw DomainError("walk: empty cube");
    for (Eigen::Index i = 0; i < start.size(); ++i) {
        if (!(start[i] >= cube.lo - 1e-12 && start[i] <= cube.hi + 1e-12)) {
            throw DomainError("walk: start point outside the cube");
        }
    }
}

// Shared stepping loop. Stops when every coordinate is frozen or after
// `limit` steps; returns the number of steps taken.
long step_loop(const Eigen::MatrixXd& cov, Eigen::VectorXd& x, std::vector<bool>& frozen,
               std::vector<long>& absorbed, const WalkParams& params, Engine& rng, const Cube& cube, long limit,
               bool resolve_last) {
    const double gamma = params.step;
    const double tol = params.tolerance();
    const double alpha = params.damping_exponent();
    Normal normal;
    SnapDraw draw(rng);
    ActiveSet active;
    active.rebuild(cov, frozen);
    std::vector<double> damp;
    long step = 0;
    while (!active.index.empty()) {
        if (resolve_last && active.index.size() == 1) {
            const int i = active.index.front();
            x[i] = resolve_exit(x[i], cube, rng);
            frozen[i] = true;
            absorbed[i] = step;
            break;
        }
        if (step >= limit) break;
        ++step;
        draw.next();
        const auto k = static_cast<Eigen::Index>(active.index.size());
        for (Eigen::Index a = 0; a < k; ++a) active.g[a] = normal(rng);
        active.inc.noalias() = active.root * active.g;
        damp.resize(static_cast<std::size_t>(k));
        for (Eigen::Index a = 0; a < k; ++a) damp[a] = damping(x[active.index[a]], alpha, cube);
        bool changed = false;
        for (Eigen::Index a = 0; a < k; ++a) {
            const int i = active.index[a];
            x[i] += gamma * damp[a] * active.inc[a];
            if (try_freeze(x[i], tol, cube, draw)) {
                frozen[i] = true;
                absorbed[i] = step;
                changed = true;
            }
        }
        if (changed) active.rebuild(cov, frozen);
    }
    return step;
}

}  // namespace

void WalkParams::validate() const {
    if (!(step > 0.0)) throw DomainError("WalkParams: step must be positive");
    const double tol = tolerance();
    if (!(tol > 0.0 && tol < 0.5)) throw DomainError("WalkParams: stick_tol must lie in (0, 0.5)");
    if (max_steps < 1) throw DomainError("WalkParams: max_steps must be positive");
    if (!(alpha >= 0.0 && alpha < 2.0)) throw DomainError("WalkParams: alpha must lie in [0, 2)");
    if (kind == WalkKind::Stopped && !(tau >= 0.0)) throw DomainError("WalkParams: tau must be non-negative");
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw SolverError("psd_sqrt: eigen decomposition failed");
    const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

WalkOutcome run_walk(const Eigen::MatrixXd& cov, const Eigen::VectorXd& start, const WalkParams& params,
                     Engine& rng, Cube cube) {
    params.validate();
    check_inputs(cov, start, cube);
    const auto n = start.size();
    WalkOutcome out;
    out.final = start;
    out.absorption_steps.assign(static_cast<std::size_t>(n), 0);
    std::vector<bool> frozen(static_cast<std::size_t>(n), false);
    SnapDraw draw(rng);
    for (Eigen::Index i = 0; i < n; ++i) frozen[i] = try_freeze(out.final[i], params.tolerance(), cube, draw);

    out.steps = step_loop(cov, out.final, frozen, out.absorption_steps, params, rng, cube, params.max_steps,
                          params.resolve_last);
    if (std::find(frozen.begin(), frozen.end(), false) != frozen.end()) {
        throw WalkTimeout("run_walk: max_steps reached with active coordinates", out.final);
    }
    return out;
}

Eigen::VectorXd run_stopped_walk(const Eigen::MatrixXd& cov, const Eigen::VectorXd& start, double tau,
                                 const WalkParams& params, Engine& rng, Cube cube) {
    params.validate();
    check_inputs(cov, start, cube);
    if (!(tau >= 0.0)) throw DomainError("run_stopped_walk: tau must be non-negative");
    Eigen::VectorXd x = start;
    if (tau == 0.0) return x;
    const auto n = start.size();
    std::vector<bool> frozen(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i) {
        frozen[i] = x[i] <= cube.lo || x[i] >= cube.hi;
    }
    std::vector<long> absorbed(static_cast<std::size_t>(n), 0);
    const auto limit = static_cast<long>(std::ceil(tau / (params.step * params.step) - 1e-9));
    step_loop(cov, x, frozen, absorbed, params, rng, cube, limit, false);
    return x;
}

std::array<double, 2> run_pair_walk(double x, double y, double rho, const WalkParams& params, Engine& rng,
                                    Cube cube) {
    const double gamma = params.step;
    const double tol = params.tolerance();
    const double alpha = params.damping_exponent();
    rho = std::clamp(rho, -1.0, 1.0);
    // Symmetric square root of [[1, rho], [rho, 1]].
    const double half_theta = std::acos(rho) / 2.0;
    const double r2 = 1.0 / std::sqrt(2.0);
    const double d = r2 * (std::cos(half_theta) + std::sin(half_theta));
    const double o = r2 * (std::cos(half_theta) - std::sin(half_theta));

    Normal normal;
    SnapDraw draw(rng);
    bool fx = try_freeze(x, tol, cube, draw);
    bool fy = try_freeze(y, tol, cube, draw);
    long step = 0;
    while (!fx && !fy) {
        // k undamped steps sum to one Gaussian step of variance k gamma^2;
        // k is small enough that the skipped partial sums reach the snap zone
        // with probability below ~1e-10.
        long k = 1;
        if (alpha == 0.0 && params.aggregate_steps) {
            const double room = std::min({x - cube.lo, cube.hi - x, y - cube.lo, cube.hi - y}) - tol;
            if (room > 0.0) k = std::max(1L, static_cast<long>(room * room / (kAggregateMargin * gamma * gamma)));
        }
        step += k;
        if (step > params.max_steps) throw WalkTimeout("run_pair_walk: max_steps reached", Eigen::Vector2d(x, y));
        draw.next();
        const double g1 = normal(rng);
        const double g2 = normal(rng);
        const double scale = k == 1 ? gamma : gamma * std::sqrt(static_cast<double>(k));
        const double sx = scale * damping(x, alpha, cube);
        const double sy = scale * damping(y, alpha, cube);
        x += sx * (d * g1 + o * g2);
        y += sy * (o * g1 + d * g2);
        fx = try_freeze(x, tol, cube, draw);
        fy = try_freeze(y, tol, cube, draw);
    }
    double& rest = fx ? y : x;
    bool& rest_frozen = fx ? fy : fx;
    if (!rest_frozen) {
        if (params.resolve_last) {
            rest = resolve_exit(rest, cube, rng);
        } else {
            while (!try_freeze(rest, tol, cube, draw)) {
                if (++step > params.max_steps) {
                    throw WalkTimeout("run_pair_walk: max_steps reached", Eigen::Vector2d(x, y));
                }
                draw.next();
                rest += gamma * damping(rest, alpha, cube) * normal(rng);
            }
        }
    }
    return {x, y};
}

Estimate estimate_pair_separation(const sdp::Configuration& config, const WalkParams& params, long trials,
                                  unsigned threads) {
    params.validate();
    if (trials < 1) throw DomainError("estimate_pair_separation: trials must be positive");
    if (!sdp::check_triangle(config)) throw DomainError("estimate_pair_separation: infeasible configuration");
    const bool maxcut = config.problem == sdp::Problem::MaxCut;
    if (!maxcut && config.problem != sdp::Problem::Max2Sat) {
        throw DomainError("estimate_pair_separation: only Max-Cut and Max-2SAT pairs are supported");
    }
    const Cube cube = maxcut ? Cube::centered() : Cube::unit();
    const double x0 = maxcut ? 2.0 * config.xi - 1.0 : config.xi;
    const double y0 = maxcut ? 2.0 * config.xj - 1.0 : config.xj;
    const double rho = std::cos(config.theta);

    std::vector<std::uint8_t> hit(static_cast<std::size_t>(trials), 0);
    parallel_for(hit.size(), threads, [&](std::size_t t) {
        Engine rng = make_engine(params.seed, t);
        const auto end = run_pair_walk(x0, y0, rho, params, rng, cube);
        const bool event = maxcut ? end[0] != end[1] : (end[0] == cube.hi || end[1] == cube.hi);
        hit[t] = event ? 1 : 0;
    });
    long count = 0;
    for (auto h : hit) count += h;
    Estimate e;
    e.trials = trials;
    e.prob = static_cast<double>(count) / static_cast<double>(trials);
    e.stderr_ = std::sqrt(e.prob * (1.0 - e.prob) / static_cast<double>(trials));
    return e;
}

RoundResult round_instance(const ProblemInstance& instance, const sdp::SdpSolution& solution,
                           const WalkParams& params, Engine& rng) {
    const int n = variable_count(instance);
    if (solution.n() != n) throw DomainError("round_instance: solution does not match the instance");
    RoundResult out;
    out.assignment.assign(static_cast<std::size_t>(n), 0);
    if (std::holds_alternative<DiCutInstance>(instance)) {
        const Eigen::MatrixXd& u = solution.rows;
        const Eigen::MatrixXd gram = u * u.transpose();
        const auto w = run_walk(gram, Eigen::VectorXd::Zero(n + 1), params, rng, Cube::centered());
        for (int i = 0; i < n; ++i) out.assignment[i] = w.final[i + 1] == w.final[0] ? 1 : 0;
    } else {
        const sdp::Decomposition d = sdp::decompose(solution);
        const Eigen::MatrixXd cov = sdp::walk_covariance(d);
        if (std::holds_alternative<MaxCutInstance>(instance)) {
            const auto w = run_walk(cov, Eigen::VectorXd::Zero(n), params, rng, Cube::centered());
            for (int i = 0; i < n; ++i) out.assignment[i] = w.final[i] > 0.0 ? 1 : 0;
        } else {
            Eigen::VectorXd start(n);
            for (int i = 0; i < n; ++i) start[i] = d.x[i];
            const auto w = run_walk(cov, start, params, rng, Cube::unit());
            for (int i = 0; i < n; ++i) out.assignment[i] = w.final[i] > 0.5 ? 1 : 0;
        }
    }
    out.value = evaluate_assignment(instance, out.assignment);
    return out;
}

}  // namespace sbr::diffusion
