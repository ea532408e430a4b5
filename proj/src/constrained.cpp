#include "sbr/constrained.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "sbr/error.hpp"
#include "sbr/parallel.hpp"

namespace sbr::constrained {

namespace {

double total_weight(const MaxCutInstance& g) {
    double w = 0.0;
    for (const auto& e : g.edges) w += e.weight;
    return w;
}

Assignment bernoulli(const Eigen::VectorXd& p, Engine& rng) {
    boost::random::uniform_01<double> uni;
    Assignment s(static_cast<std::size_t>(p.size()), 0);
    for (Eigen::Index i = 0; i < p.size(); ++i) s[i] = uni(rng) < p[i] ? 1 : 0;
    return s;
}

void check_point(const Eigen::VectorXd& x, int n, const char* who) {
    if (x.size() != n) throw DomainError(std::string(who) + ": marginal vector has the wrong length");
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!(x[i] >= 0.0 && x[i] <= 1.0)) throw DomainError(std::string(who) + ": marginals must lie in [0,1]");
    }
}

}  // namespace

void SideConstraints::validate(int n) const {
    if (families.size() != targets.size()) throw DomainError("constraints: families and targets differ in count");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("constraints: epsilon must lie in (0, 1]");
    for (std::size_t i = 0; i < families.size(); ++i) {
        for (int v : families[i]) {
            if (v < 0 || v >= n) throw DomainError("constraints: vertex " + std::to_string(v) + " out of range");
        }
        if (targets[i] < 0 || targets[i] > static_cast<int>(families[i].size())) {
            throw DomainError("constraints: target of family " + std::to_string(i) + " outside [0, |F|]");
        }
    }
}

SideConstraints parse_constraints(std::string_view text, int n, double epsilon) {
    SideConstraints c;
    c.epsilon = epsilon;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("expected \"b: v1 v2 ...\"", lineno);
        std::istringstream head(line.substr(0, colon));
        long b = 0;
        std::string extra;
        if (!(head >> b) || (head >> extra)) throw ParseError("target is not an integer", lineno);
        std::istringstream body(line.substr(colon + 1));
        std::vector<int> fam;
        std::string tok;
        while (body >> tok) {
            std::size_t used = 0;
            long v = 0;
            try {
                v = std::stol(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size()) throw ParseError("bad vertex \"" + tok + "\"", lineno);
            if (v < 0 || v >= n) throw ParseError("vertex " + tok + " out of range", lineno);
            if (std::find(fam.begin(), fam.end(), v) != fam.end()) {
                throw ParseError("vertex " + tok + " repeated", lineno);
            }
            fam.push_back(static_cast<int>(v));
        }
        if (b < 0 || b > static_cast<long>(fam.size())) throw ParseError("target outside [0, |F|]", lineno);
        c.families.push_back(std::move(fam));
        c.targets.push_back(static_cast<int>(b));
    }
    return c;
}

std::vector<int> violations(const SideConstraints& c, const Assignment& s) {
    std::vector<int> out;
    out.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        int hit = 0;
        for (int v : c.families[i]) hit += s.at(static_cast<std::size_t>(v)) ? 1 : 0;
        out.push_back(hit - c.targets[i]);
    }
    return out;
}

int max_violation(const SideConstraints& c, const Assignment& s) {
    int worst = 0;
    for (int v : violations(c, s)) worst = std::max(worst, std::abs(v));
    return worst;
}

Eigen::VectorXd disjoint_feasible_point(const SideConstraints& c, int n) {
    c.validate(n);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 0.5);
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& fam = c.families[i];
        for (int v : fam) {
            if (seen[v]) throw DomainError("disjoint_feasible_point: families overlap at vertex " + std::to_string(v));
            seen[v] = true;
        }
        if (fam.empty()) continue;
        const double share = static_cast<double>(c.targets[i]) / static_cast<double>(fam.size());
        for (int v : fam) x[v] = share;
    }
    return x;
}

double default_tau(double eps) {
    if (!(eps > 0.0)) throw DomainError("default_tau: eps must be positive");
    return std::log2(2.0 * std::sqrt(2.0) / eps);
}

Eigen::VectorXd rescale_marginals(const Eigen::VectorXd& x, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("rescale_marginals: eps must lie in [0, 1]");
    return ((1.0 - eps) * x.array() + eps / 2.0).matrix();
}

double cut_probability(double yi, double yj) { return yi + yj - 2.0 * yi * yj; }

BaselineResult baseline_round(const Eigen::VectorXd& x, const MaxCutInstance& g, const SideConstraints& c,
                              double eps, Engine& rng, int retry_cap) {
    check_point(x, g.n, "baseline_round");
    c.validate(g.n);
    if (!(eps > 0.0 && eps <= 0.5)) throw DomainError("baseline_round: eps must lie in (0, 1/2]");
    if (retry_cap < 1) throw DomainError("baseline_round: retry cap must be positive");
    for (std::size_t i = 0; i < c.size(); ++i) {
        double sum = 0.0;
        for (int v : c.families[i]) sum += x[v];
        if (std::abs(sum - c.targets[i]) > 1e-9) {
            throw DomainError("baseline_round: fractional point misses constraint " + std::to_string(i));
        }
    }
    const Eigen::VectorXd y = rescale_marginals(x, eps);
    const double cut_goal = eps / 2.0 * total_weight(g);
    const double slack = eps * g.n;
    BaselineResult r;
    long cut_ok = 0, viol_ok = 0;
    double cut_sum = 0.0;
    while (r.attempts < retry_cap) {
        ++r.attempts;
        Assignment s = bernoulli(y, rng);
        const double cut = evaluate_assignment(g, s);
        const int viol = max_violation(c, s);
        cut_sum += cut;
        const bool a = cut >= cut_goal, b = viol <= slack;
        cut_ok += a;
        viol_ok += b;
        if (a && b) {
            r.set = std::move(s);
            r.cut = cut;
            r.max_violation = viol;
            r.success = true;
            break;
        }
    }
    r.mean_cut = cut_sum / r.attempts;
    r.cut_pass_rate = static_cast<double>(cut_ok) / r.attempts;
    r.violation_pass_rate = static_cast<double>(viol_ok) / r.attempts;
    return r;
}

ConstrainedResult constrained_round(const Eigen::VectorXd& x, const Eigen::MatrixXd& W, const MaxCutInstance& g,
                                    const SideConstraints& c, double tau, const diffusion::WalkParams& params,
                                    Engine& rng) {
    check_point(x, g.n, "constrained_round");
    c.validate(g.n);
    diffusion::WalkParams p = params;
    p.kind = diffusion::WalkKind::Stopped;
    p.tau = tau;
    ConstrainedResult r;
    r.stopped = diffusion::run_stopped_walk(W, x, tau, p, rng, diffusion::Cube::unit());
    r.set = bernoulli(r.stopped, rng);
    r.max_violation = max_violation(c, r.set);
    r.cut_value = evaluate_assignment(g, r.set);
    return r;
}

ConstrainedResult constrained_round(const sdp::Decomposition& d, const MaxCutInstance& g, const SideConstraints& c,
                                    double tau, const diffusion::WalkParams& params, Engine& rng) {
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(d.x.data(), static_cast<Eigen::Index>(d.x.size()));
    return constrained_round(x, d.cosines, g, c, tau, params, rng);
}

diffusion::Estimate stopped_pair_separation(const sdp::Configuration& config, double tau,
                                            const diffusion::WalkParams& params, long trials, unsigned threads) {
    if (trials < 1) throw DomainError("stopped_pair_separation: trials must be positive");
    if (!sdp::check_triangle(config)) throw DomainError("stopped_pair_separation: infeasible configuration");
    diffusion::WalkParams p = params;
    p.kind = diffusion::WalkKind::Stopped;
    p.tau = tau;
    p.validate();
    const double rho = std::cos(config.theta);
    Eigen::MatrixXd cov(2, 2);
    cov << 1.0, rho, rho, 1.0;
    const Eigen::Vector2d start(config.xi, config.xj);
    std::vector<double> val(static_cast<std::size_t>(trials));
    parallel_for(val.size(), threads, [&](std::size_t t) {
        Engine rng = make_engine(p.seed, t);
        const Eigen::VectorXd xt = diffusion::run_stopped_walk(cov, start, tau, p, rng, diffusion::Cube::unit());
        val[t] = cut_probability(xt[0], xt[1]);
    });
    double mean = 0.0, sq = 0.0;
    for (double v : val) mean += v;
    mean /= static_cast<double>(trials);
    for (double v : val) sq += (v - mean) * (v - mean);
    diffusion::Estimate e;
    e.trials = trials;
    e.prob = mean;
    e.stderr_ = trials > 1 ? std::sqrt(sq / static_cast<double>(trials - 1) / static_cast<double>(trials)) : 0.0;
    return e;
}

StoppedPairReport stopped_pair_ratio(const ratio::RatioOptions& opts, double tau) {
    if (!(tau > 0.0)) throw DomainError("stopped_pair_ratio: tau must be positive");
    StoppedPairReport r;
    r.tau = tau;
    // Two coordinates, each unfixed at time tau with probability at most 4^-tau.
    r.truncation = 2.0 * std::pow(4.0, -tau);
    r.ratio = ratio::approx_ratio(sdp::Problem::MaxCut, opts);
    return r;
}

bool HittingProfile::within(double slack) const {
    for (std::size_t t = 0; t < survival.size(); ++t) {
        if (survival[t] > bound[t] * (1.0 + slack)) return false;
    }
    return true;
}

nlohmann::json HittingProfile::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t t = 0; t < survival.size(); ++t) rows.push_back({{"t", t}, {"survival", survival[t]}, {"bound", bound[t]}});
    return {{"start", start}, {"trials", trials}, {"profile", rows}};
}

HittingProfile hitting_profile(long trials, int t_max, const diffusion::WalkParams& params, unsigned threads,
                               double start) {
    params.validate();
    if (trials < 1) throw DomainError("hitting_profile: trials must be positive");
    if (t_max < 0) throw DomainError("hitting_profile: t_max must be non-negative");
    if (!(start > 0.0 && start < 1.0)) throw DomainError("hitting_profile: start must lie in (0, 1)");
    const double gamma = params.step, tol = params.tolerance();
    const long steps_per_unit = std::lround(1.0 / (gamma * gamma));
    if (std::abs(steps_per_unit * gamma * gamma - 1.0) > 1e-9) {
        throw DomainError("hitting_profile: 1/step^2 must be an integer");
    }
    const long limit = steps_per_unit * t_max;
    // Exit step of each trial; limit + 1 when still inside at t_max.
    std::vector<long> exit(static_cast<std::size_t>(trials));
    parallel_for(exit.size(), threads, [&](std::size_t k) {
        Engine rng = make_engine(params.seed, k);
        boost::random::normal_distribution<double> normal;
        double x = start;
        long s = 0;
        if (x <= tol || x >= 1.0 - tol) {
            exit[k] = 0;
            return;
        }
        while (s < limit) {
            ++s;
            x += gamma * normal(rng);
            if (x <= tol || x >= 1.0 - tol) break;
        }
        exit[k] = (x <= tol || x >= 1.0 - tol) ? s : limit + 1;
    });
    HittingProfile h;
    h.start = start;
    h.trials = trials;
    for (int t = 0; t <= t_max; ++t) {
        const long cut = steps_per_unit * t;
        long alive = 0;
        for (long e : exit) alive += e > cut ? 1 : 0;
        h.survival.push_back(static_cast<double>(alive) / static_cast<double>(trials));
        h.bound.push_back(std::pow(4.0, -t));
    }
    return h;
}

nlohmann::json ConcentrationReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rungs) {
        rows.push_back({{"s", r.s}, {"empirical", r.empirical}, {"bound", r.bound}, {"pass", r.pass}});
    }
    return {{"tau", tau},
            {"variance_proxy", variance_proxy},
            {"mean_deviation", mean_deviation},
            {"deviation_stderr", deviation_stderr},
            {"trials", trials},
            {"rungs", rows},
            {"pass", pass}};
}

ConcentrationReport concentration_check(const Eigen::VectorXd& x, const Eigen::MatrixXd& W,
                                        const std::vector<int>& family, double tau, long trials,
                                        const diffusion::WalkParams& params, unsigned threads) {
    const auto n = x.size();
    if (W.rows() != n || W.cols() != n) throw DomainError("concentration_check: W has the wrong shape");
    if (trials < 2) throw DomainError("concentration_check: need at least two trials");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    for (int i : family) {
        if (i < 0 || i >= n) throw DomainError("concentration_check: family index out of range");
        y[i] = 1.0;
    }
    diffusion::WalkParams p = params;
    p.kind = diffusion::WalkKind::Stopped;
    p.tau = tau;
    const double base = y.dot(x);
    std::vector<double> dev(static_cast<std::size_t>(trials));
    parallel_for(dev.size(), threads, [&](std::size_t t) {
        Engine rng = make_engine(p.seed, t);
        const Eigen::VectorXd xt = diffusion::run_stopped_walk(W, x, tau, p, rng, diffusion::Cube::unit());
        dev[t] = y.dot(xt) - base;
    });

    ConcentrationReport r;
    r.tau = tau;
    r.trials = trials;
    r.variance_proxy = tau * y.dot(W * y);
    double mean = 0.0, sq = 0.0;
    for (double d : dev) mean += d;
    mean /= static_cast<double>(trials);
    for (double d : dev) sq += (d - mean) * (d - mean);
    r.mean_deviation = mean;
    r.deviation_stderr = std::sqrt(sq / static_cast<double>(trials - 1) / static_cast<double>(trials));

    const double scale = r.variance_proxy > 0.0 ? std::sqrt(r.variance_proxy) : 1.0;
    r.pass = true;
    for (double m : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
        TailRung rung;
        rung.s = m * scale;
        long hits = 0;
        for (double d : dev) hits += std::abs(d) >= rung.s - 1e-12 ? 1 : 0;
        rung.empirical = static_cast<double>(hits) / static_cast<double>(trials);
        rung.bound = r.variance_proxy > 0.0 ? 2.0 * std::exp(-rung.s * rung.s / (2.0 * r.variance_proxy)) : 0.0;
        rung.pass = rung.empirical <= rung.bound * 1.5;
        r.pass = r.pass && rung.pass;
        r.rungs.push_back(rung);
    }
    return r;
}

Eigen::MatrixXd synthetic_covariance(int n, int dim, Engine& rng) {
    if (n < 1 || dim < 1) throw DomainError("synthetic_covariance: n and dim must be positive");
    boost::random::normal_distribution<double> normal;
    Eigen::MatrixXd v(n, dim);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j) v(i, j) = normal(rng);
        v.row(i).normalize();
    }
    Eigen::MatrixXd w = v * v.transpose();
    w.diagonal().setOnes();
    return w;
}

}  // namespace sbr::constrained
