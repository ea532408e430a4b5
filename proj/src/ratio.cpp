#include "sbr/ratio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "sbr/diffusion.hpp"
#include "sbr/error.hpp"
#include "sbr/parallel.hpp"
#include "sbr/specfun.hpp"

namespace sbr::ratio {

namespace {

constexpr double kPi = std::numbers::pi;

int grid_count(double upper, double delta) { return static_cast<int>(std::floor(upper / delta + 1e-9)); }

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("grid step must lie in (0, 1)");
}

bool degenerate_angle(double theta) { return theta <= 0.0 || theta >= kPi; }

nlohmann::json row_json(const RatioRow& r) {
    if (r.angles) return {(*r.angles)[0], (*r.angles)[1], (*r.angles)[2], r.sdp, r.round, r.ratio};
    return {r.config.xi, r.config.xj, r.config.theta, r.sdp, r.round, r.ratio};
}

diffusion::WalkParams walk_params(const RatioOptions& opts) {
    diffusion::WalkParams p;
    p.step = opts.gamma;
    p.alpha = opts.alpha;
    p.kind = opts.alpha > 0.0 ? diffusion::WalkKind::Slowdown : diffusion::WalkKind::Basic;
    p.seed = opts.seed;
    return p;
}

void consider(RatioReport& rep, const RatioRow& row, bool& have) {
    ++rep.evaluated;
    if (!have || row.ratio < rep.min_ratio) {
        rep.min_ratio = row.ratio;
        rep.argmin = row;
        have = true;
    }
}

}  // namespace

Method parse_method(const std::string& name) {
    if (name == "pde") return Method::Pde;
    if (name == "mc" || name == "monte_carlo") return Method::MonteCarlo;
    if (name == "exact") return Method::Exact;
    throw DomainError("unknown method '" + name + "' (expected pde, mc or exact)");
}

const char* method_name(Method m) {
    switch (m) {
        case Method::Pde: return "pde";
        case Method::MonteCarlo: return "monte_carlo";
        case Method::Exact: return "exact";
    }
    return "?";
}

std::vector<sdp::Configuration> enumerate_configs(sdp::Problem problem, double delta, double sdp_cutoff) {
    check_delta(delta);
    if (problem == sdp::Problem::DiCut) throw DomainError("enumerate_configs: DiCut uses angle triples");
    const int nx = grid_count(1.0, delta);
    const int nt = grid_count(kPi, delta);
    std::vector<sdp::Configuration> out;
    for (int k = 0; k <= nt; ++k) {
        for (int i = 0; i <= nx; ++i) {
            for (int j = 0; j <= nx; ++j) {
                const sdp::Configuration c{std::min(1.0, i * delta), std::min(1.0, j * delta), k * delta, problem};
                if (!sdp::check_triangle(c)) continue;
                if (sdp_cutoff > 0.0 && sdp::sdp_clause_value(c) < sdp_cutoff) continue;
                out.push_back(c);
            }
        }
    }
    return out;
}

RoundingOracle::RoundingOracle(sdp::Problem problem, const RatioOptions& opts) : problem_(problem), opts_(opts) {
    if (problem == sdp::Problem::DiCut) throw DomainError("RoundingOracle: DiCut values come from dicut_ratio");
}

pde::Boundary RoundingOracle::boundary_for(bool centered) const {
    if (centered) return pde::Boundary::MaxCutPm;
    return problem_ == sdp::Problem::MaxCut ? pde::Boundary::MaxCut01 : pde::Boundary::Max2SatTrue1;
}

std::shared_ptr<const pde::PdeSolution> RoundingOracle::solve(double theta, bool centered) {
    const auto key = std::make_pair(theta, centered);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    pde::DirichletProblem p;
    p.rho = std::cos(theta);
    p.alpha = opts_.alpha;
    p.boundary = boundary_for(centered);
    p.grid_n = opts_.grid_n;
    auto sol = std::make_shared<const pde::PdeSolution>(pde::solve_dirichlet(p));
    std::lock_guard lock(mutex_);
    return cache_.emplace(key, std::move(sol)).first->second;
}

const pde::PdeSolution& RoundingOracle::solution(double theta) { return *solve(theta, false); }

double RoundingOracle::degenerate(double rho, bool centered, double x, double y) {
    try {
        return pde::degenerate_limit(rho, opts_.alpha, boundary_for(centered), x, y);
    } catch (const DomainError&) {
        // No closed form: the clamped solve is the best available answer.
        return solve(rho > 0.0 ? 0.0 : kPi, centered)->query(x, y);
    }
}

double RoundingOracle::value(const sdp::Configuration& c) {
    switch (opts_.method) {
        case Method::Exact:
            if (problem_ == sdp::Problem::MaxCut && c.xi == 0.5 && c.xj == 0.5 && opts_.alpha == 0.0) {
                return specfun::separation_prob(c.theta);
            }
            throw DomainError("exact method covers only basic Max-Cut at half marginals");
        case Method::MonteCarlo: {
            sdp::Configuration cc = c;
            cc.problem = problem_;
            return diffusion::estimate_pair_separation(cc, walk_params(opts_), opts_.mc_trials, 1).prob;
        }
        case Method::Pde: break;
    }
    if (degenerate_angle(c.theta)) return degenerate(c.theta <= 0.0 ? 1.0 : -1.0, false, c.xi, c.xj);
    return solve(c.theta, false)->query(c.xi, c.xj);
}

double RoundingOracle::center_value(double theta) {
    if (problem_ != sdp::Problem::MaxCut) throw DomainError("center_value: Max-Cut only");
    if (opts_.method == Method::Exact) {
        if (opts_.alpha != 0.0) throw DomainError("exact method covers only the basic walk");
        return specfun::separation_prob(theta);
    }
    if (opts_.method == Method::MonteCarlo) {
        const sdp::Configuration c{0.5, 0.5, theta, sdp::Problem::MaxCut};
        return diffusion::estimate_pair_separation(c, walk_params(opts_), opts_.mc_trials, 1).prob;
    }
    if (degenerate_angle(theta)) return degenerate(theta <= 0.0 ? 1.0 : -1.0, true, 0.0, 0.0);
    return solve(theta, true)->center();
}

double get_rounding_value(const sdp::Configuration& c, const RatioOptions& opts) {
    if (opts.method == Method::MonteCarlo) {
        return diffusion::estimate_pair_separation(c, walk_params(opts), opts.mc_trials, opts.threads).prob;
    }
    RoundingOracle oracle(c.problem, opts);
    return oracle.value(c);
}

RatioReport approx_ratio_over(sdp::Problem problem, const std::vector<sdp::Configuration>& configs,
                              const RatioOptions& opts) {
    if (!(opts.sdp_cutoff > 0.0)) throw DomainError("approx_ratio: sdp_cutoff must be positive");
    // Consecutive runs of equal theta form one slice sharing one PDE solve.
    std::vector<std::pair<std::size_t, std::size_t>> slices;
    for (std::size_t k = 0; k < configs.size();) {
        std::size_t e = k + 1;
        while (e < configs.size() && configs[e].theta == configs[k].theta) ++e;
        slices.emplace_back(k, e);
        k = e;
    }
    RoundingOracle oracle(problem, opts);
    std::vector<std::vector<RatioRow>> rows(slices.size());
    parallel_for(slices.size(), opts.threads, [&](std::size_t s) {
        for (std::size_t k = slices[s].first; k < slices[s].second; ++k) {
            sdp::Configuration c = configs[k];
            c.problem = problem;
            if (!sdp::check_triangle(c)) continue;
            const double sv = sdp::sdp_clause_value(c);
            if (sv < opts.sdp_cutoff) continue;
            const double rv = oracle.value(c);
            rows[s].push_back({c, std::nullopt, sv, rv, rv / sv});
        }
    });

    RatioReport rep;
    rep.problem = problem;
    rep.method = opts.method;
    rep.alpha = opts.alpha;
    rep.delta = opts.delta;
    bool have = false;
    for (auto& slice : rows) {
        for (auto& r : slice) {
            consider(rep, r, have);
            if (opts.keep_rows) rep.rows.push_back(r);
        }
    }
    if (!have) throw DomainError("approx_ratio: no feasible configuration above the SDP cutoff");
    return rep;
}

RatioReport approx_ratio(sdp::Problem problem, const RatioOptions& opts) {
    check_delta(opts.delta);
    return approx_ratio_over(problem, enumerate_configs(problem, opts.delta, opts.sdp_cutoff), opts);
}

RatioReport maxcut_half_sweep(const RatioOptions& opts, double theta_step) {
    if (!(theta_step > 0.0)) throw DomainError("maxcut_half_sweep: theta_step must be positive");
    const int nt = grid_count(kPi, theta_step);
    RoundingOracle oracle(sdp::Problem::MaxCut, opts);
    std::vector<RatioRow> rows(static_cast<std::size_t>(nt));
    std::vector<bool> used(rows.size(), false);
    parallel_for(rows.size(), opts.threads, [&](std::size_t k) {
        const double theta = static_cast<double>(k + 1) * theta_step;
        const sdp::Configuration c{0.5, 0.5, theta, sdp::Problem::MaxCut};
        const double sv = sdp::sdp_clause_value(c);
        if (sv < opts.sdp_cutoff) return;
        const double rv = oracle.center_value(theta);
        rows[k] = {c, std::nullopt, sv, rv, rv / sv};
        used[k] = true;
    });
    RatioReport rep;
    rep.problem = sdp::Problem::MaxCut;
    rep.method = opts.method;
    rep.alpha = opts.alpha;
    rep.delta = theta_step;
    bool have = false;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (!used[k]) continue;
        consider(rep, rows[k], have);
        if (opts.keep_rows) rep.rows.push_back(rows[k]);
    }
    if (!have) throw DomainError("maxcut_half_sweep: no angle above the SDP cutoff");
    return rep;
}

double triple_prob(double p_ij, double p_ik, double p_jk) {
    for (double p : {p_ij, p_ik, p_jk}) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("triple_prob: inputs must lie in [0, 1]");
    }
    return 0.5 * (p_ij + p_ik + p_jk - 0.5);
}

double forward_edge_prob(double p0i, double p0j, double pij) { return 0.5 * (p0j + pij - p0i); }

bool dicut_feasible(double t0i, double t0j, double tij) {
    constexpr double kSlack = 1e-12;
    const double a = std::cos(t0i);
    const double b = std::cos(t0j);
    const double c = std::cos(tij);
    // |u - v|^2 + |v - w|^2 >= |u - w|^2 with each vector in the middle.
    if (1.0 - a - c + b < -kSlack) return false;
    if (1.0 - b - c + a < -kSlack) return false;
    if (1.0 - a - b + c < -kSlack) return false;
    const double det = 1.0 + 2.0 * a * b * c - a * a - b * b - c * c;
    return det >= -kSlack;
}

RatioReport dicut_ratio(const RatioOptions& opts, double delta_theta) {
    if (!(delta_theta > 0.0)) throw DomainError("dicut_ratio: delta_theta must be positive");
    const int nt = grid_count(kPi, delta_theta);
    RatioOptions popts = opts;
    if (opts.alpha == 0.0 && opts.method != Method::MonteCarlo) popts.method = Method::Exact;
    RoundingOracle oracle(sdp::Problem::MaxCut, popts);
    std::vector<double> p(static_cast<std::size_t>(nt) + 1);
    std::vector<double> cs(p.size());
    parallel_for(p.size(), opts.threads, [&](std::size_t k) {
        const double theta = static_cast<double>(k) * delta_theta;
        cs[k] = std::cos(theta);
        p[k] = k == 0 ? 0.0 : oracle.center_value(theta);
    });

    RatioReport rep;
    rep.problem = sdp::Problem::DiCut;
    rep.method = popts.method;
    rep.alpha = opts.alpha;
    rep.delta = delta_theta;
    bool have = false;
    for (int i = 0; i <= nt; ++i) {
        for (int j = 0; j <= nt; ++j) {
            for (int l = 0; l <= nt; ++l) {
                const double t0i = i * delta_theta;
                const double t0j = j * delta_theta;
                const double tij = l * delta_theta;
                if (!dicut_feasible(t0i, t0j, tij)) continue;
                const double sv = 0.25 * (1.0 - cs[j] + cs[i] - cs[l]);
                if (sv < opts.sdp_cutoff) continue;
                const double rv = forward_edge_prob(p[i], p[j], p[l]);
                RatioRow row{{0.5, 0.5, 0.0, sdp::Problem::DiCut}, std::array<double, 3>{t0i, t0j, tij}, sv, rv,
                             rv / sv};
                consider(rep, row, have);
                if (opts.keep_rows) rep.rows.push_back(row);
            }
        }
    }
    if (!have) throw DomainError("dicut_ratio: empty feasible set");
    return rep;
}

nlohmann::json RatioReport::to_json() const {
    nlohmann::json j;
    j["problem"] = sdp::problem_name(problem);
    j["method"] = method_name(method);
    j["alpha"] = alpha;
    j["delta"] = delta;
    j["min_ratio"] = min_ratio;
    nlohmann::json arg;
    if (argmin.angles) {
        arg["theta_0i"] = (*argmin.angles)[0];
        arg["theta_0j"] = (*argmin.angles)[1];
        arg["theta_ij"] = (*argmin.angles)[2];
    } else {
        arg["x_i"] = argmin.config.xi;
        arg["x_j"] = argmin.config.xj;
        arg["theta"] = argmin.config.theta;
    }
    arg["sdp"] = argmin.sdp;
    arg["round"] = argmin.round;
    arg["ratio"] = argmin.ratio;
    j["argmin"] = arg;
    j["evaluated"] = evaluated;
    j["columns"] = problem == sdp::Problem::DiCut
                       ? nlohmann::json{"theta_0i", "theta_0j", "theta_ij", "sdp", "round", "ratio"}
                       : nlohmann::json{"x_i", "x_j", "theta", "sdp", "round", "ratio"};
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows) rs.push_back(row_json(r));
    j["rows"] = std::move(rs);
    return j;
}

void RatioReport::write_csv(std::ostream& os) const {
    os << (problem == sdp::Problem::DiCut ? "theta_0i,theta_0j,theta_ij" : "x_i,x_j,theta") << ",sdp,round,ratio\n";
    os.precision(17);
    for (const auto& r : rows) {
        if (r.angles) os << (*r.angles)[0] << ',' << (*r.angles)[1] << ',' << (*r.angles)[2];
        else os << r.config.xi << ',' << r.config.xj << ',' << r.config.theta;
        os << ',' << r.sdp << ',' << r.round << ',' << r.ratio << '\n';
    }
}

}  // namespace sbr::ratio
