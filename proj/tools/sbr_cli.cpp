// sbr: command-line front end for the sticky Brownian rounding library.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbr/constrained.hpp"
#include "sbr/diffusion.hpp"
#include "sbr/error.hpp"
#include "sbr/instances.hpp"
#include "sbr/maxprinciple.hpp"
#include "sbr/parallel.hpp"
#include "sbr/pde.hpp"
#include "sbr/ratio.hpp"
#include "sbr/sdp.hpp"
#include "sbr/specfun.hpp"

using nlohmann::json;
using namespace sbr;

namespace {

constexpr const char* kSeedEnv = "SBR_SEED";

struct Common {
    unsigned threads = 1;
    std::uint64_t seed = 1;
    std::string output;
    std::string format = "json";
    std::string config;
    bool no_meta = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        std::size_t used = 0;
        out.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw DomainError("bad number \"" + tok + "\"");
    }
    return out;
}

// "lo:hi:step", inclusive of hi up to rounding.
std::vector<double> parse_sweep(const std::string& text) {
    auto parts = parse_list([&] {
        std::string t = text;
        for (char& c : t) if (c == ':') c = ',';
        return t;
    }());
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) throw DomainError("sweep must be lo:hi:step");
    std::vector<double> out;
    const long n = std::lround(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(parts[0] + k * parts[2]);
    return out;
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

class Output {
public:
    explicit Output(const Common& c) : common_(c) {
        if (!c.output.empty()) {
            file_.open(c.output);
            if (!file_) throw Error("cannot write " + c.output);
        }
    }
    std::ostream& stream() { return common_.output.empty() ? std::cout : file_; }

private:
    const Common& common_;
    std::ofstream file_;
};

void emit_json(const Common& c, const std::string& command, const json& config, const json& result,
               double runtime) {
    json doc = {{"command", command}, {"config", config}, {"result", result}};
    if (!c.no_meta) doc["meta"] = {{"timestamp", timestamp()}, {"runtime_s", runtime}};
    Output out(c);
    out.stream() << doc.dump(2) << "\n";
}

void csv_value(std::ostream& os, double v) {
    os << std::setprecision(17) << v;
}

// key,value rows for commands without a natural table.
void emit_flat_csv(const Common& c, const json& result) {
    Output out(c);
    auto& os = out.stream();
    os << "key,value\n";
    const json flat = result.flatten();
    for (const auto& item : flat.items()) {
        os << item.key() << ',';
        const auto& v = item.value();
        if (v.is_number_float()) {
            csv_value(os, v.get<double>());
        } else if (v.is_string()) {
            os << v.get<std::string>();
        } else {
            os << v.dump();
        }
        os << '\n';
    }
}

void check_format(const Common& c) {
    if (c.format != "json" && c.format != "csv") throw DomainError("format must be json or csv");
}

diffusion::WalkParams walk_params(const std::string& kind, double alpha, double gamma, std::uint64_t seed) {
    diffusion::WalkParams p;
    p.step = gamma;
    p.seed = seed;
    if (kind == "basic") {
        p.kind = diffusion::WalkKind::Basic;
    } else if (kind == "slowdown") {
        p.kind = diffusion::WalkKind::Slowdown;
        p.alpha = alpha;
    } else {
        throw DomainError("kind must be basic or slowdown");
    }
    p.validate();
    return p;
}

double kind_alpha(const std::string& kind, double alpha) {
    if (kind == "basic") return 0.0;
    if (kind == "slowdown") return alpha;
    throw DomainError("kind must be basic or slowdown");
}

sdp::Problem parse_problem(const std::string& name) {
    if (name == "maxcut") return sdp::Problem::MaxCut;
    if (name == "max2sat") return sdp::Problem::Max2Sat;
    if (name == "dicut") return sdp::Problem::DiCut;
    throw DomainError("problem must be maxcut, max2sat or dicut");
}

ProblemInstance load_instance(const std::string& path, const std::string& problem) {
    const std::string text = read_file(path);
    std::string p = problem;
    if (p == "auto") p = path.size() >= 4 && path.substr(path.size() - 4) == ".cnf" ? "max2sat" : "maxcut";
    switch (parse_problem(p)) {
        case sdp::Problem::MaxCut: return parse_graph(text);
        case sdp::Problem::DiCut: return parse_digraph(text);
        case sdp::Problem::Max2Sat: return parse_cnf2(text);
    }
    throw DomainError("unknown problem");
}

json assignment_json(const Assignment& a) {
    json out = json::array();
    for (auto v : a) out.push_back(static_cast<int>(v));
    return out;
}

// Fills options left unset on the command line from key=value lines.
void apply_config(const std::string& path, CLI::App& app, CLI::App* sub) {
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key=value", lineno);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        CLI::Option* opt = sub ? sub->get_option_no_throw("--" + key) : nullptr;
        if (!opt) opt = app.get_option_no_throw("--" + key);
        if (!opt) throw ParseError("unknown key \"" + key + "\"", lineno);
        if (opt->count() > 0) continue;  // flags win
        opt->add_result(value);
        opt->run_callback();
    }
}

// ---- prob -----------------------------------------------------------------

struct ProbArgs {
    std::string thetas;
    std::string sweep;
    std::string routes = "exact,quadrature";
    long trials = 100'000;
    double gamma = 1e-2;
    int grid_n = 199;
};

int cmd_prob(const Common& c, const ProbArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> thetas = a.sweep.empty() ? parse_list(a.thetas) : parse_sweep(a.sweep);
    if (thetas.empty()) throw DomainError("prob: give --theta or --sweep");
    std::map<std::string, bool> use;
    {
        std::stringstream ss(a.routes);
        std::string r;
        while (std::getline(ss, r, ',')) {
            if (r != "exact" && r != "quadrature" && r != "mc" && r != "pde") {
                throw DomainError("unknown route \"" + r + "\"");
            }
            use[r] = true;
        }
    }
    json rows = json::array();
    for (double t : thetas) {
        if (!(t > 0.0 && t < M_PI)) throw DomainError("prob: theta must lie in (0, pi)");
        json row = {{"theta", t}};
        std::optional<double> ref;
        if (use["exact"] || use["quadrature"]) {
            const auto sp = specfun::separation_prob_exact(t);
            if (use["exact"]) row["exact"] = sp.closed_form;
            if (use["quadrature"]) row["quadrature"] = sp.probability;
            if (use["exact"] && use["quadrature"]) row["exact_quadrature_disagree"] = !sp.routes_agree;
            ref = sp.probability;
        }
        if (use["mc"]) {
            auto p = walk_params("basic", 0.0, a.gamma, c.seed);
            const auto e = diffusion::estimate_pair_separation({0.5, 0.5, t, sdp::Problem::MaxCut}, p, a.trials,
                                                              c.threads);
            row["mc"] = e.prob;
            row["mc_stderr"] = e.stderr_;
            if (ref) row["mc_disagree"] = std::abs(e.prob - *ref) > 3.0 * e.stderr_;
        }
        if (use["pde"]) {
            pde::DirichletProblem pr;
            pr.rho = std::cos(t);
            pr.boundary = pde::Boundary::MaxCutPm;
            pr.grid_n = a.grid_n;
            const double v = pde::solve_dirichlet(pr).center();
            row["pde"] = v;
            if (ref) row["pde_disagree"] = std::abs(v - *ref) > 2e-3;
        }
        rows.push_back(row);
    }
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.format == "csv") {
        Output out(c);
        auto& os = out.stream();
        std::vector<std::string> cols = {"theta"};
        for (const char* k : {"exact", "quadrature", "mc", "mc_stderr", "pde"}) {
            if (rows.front().contains(k)) cols.emplace_back(k);
        }
        for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < cols.size(); ++i) {
                if (i) os << ',';
                csv_value(os, r[cols[i]].get<double>());
            }
            os << '\n';
        }
    } else {
        json cfg = {{"routes", a.routes}, {"trials", a.trials}, {"gamma", a.gamma}, {"grid_n", a.grid_n},
                    {"seed", c.seed}};
        emit_json(c, "prob", cfg, {{"rows", rows}}, runtime);
    }
    return 0;
}

// ---- ratio ----------------------------------------------------------------

struct RatioArgs {
    std::string problem = "maxcut";
    std::string kind = "basic";
    double alpha = 1.61;
    double delta = 0.02;
    std::string method = "pde";
    bool half_sweep = false;
    double theta_step = 0.01;
    int grid_n = 199;
    long trials = 100'000;
    double gamma = 1e-2;
    double sdp_cutoff = 1e-3;
    bool rows = false;
};

int cmd_ratio(const Common& c, const RatioArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    ratio::RatioOptions o;
    o.delta = a.delta;
    o.method = ratio::parse_method(a.method);
    o.alpha = kind_alpha(a.kind, a.alpha);
    o.sdp_cutoff = a.sdp_cutoff;
    o.grid_n = a.grid_n;
    o.mc_trials = a.trials;
    o.gamma = a.gamma;
    o.seed = c.seed;
    o.threads = c.threads;
    o.keep_rows = a.rows || c.format == "csv";
    const sdp::Problem prob = parse_problem(a.problem);
    ratio::RatioReport rep;
    if (a.half_sweep) {
        if (prob != sdp::Problem::MaxCut) throw DomainError("ratio: --half-sweep applies to maxcut only");
        rep = ratio::maxcut_half_sweep(o, a.theta_step);
    } else if (prob == sdp::Problem::DiCut) {
        rep = ratio::dicut_ratio(o, a.delta);
    } else {
        rep = ratio::approx_ratio(prob, o);
    }
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "ratio: " << a.problem << " " << a.kind << " min " << rep.min_ratio << " in " << runtime << " s\n";
    if (c.format == "csv") {
        Output out(c);
        rep.write_csv(out.stream());
    } else {
        json result = rep.to_json();
        if (!a.rows) result.erase("rows");
        json cfg = {{"problem", a.problem}, {"kind", a.kind},       {"alpha", o.alpha},
                    {"delta", a.delta},     {"method", a.method},   {"half_sweep", a.half_sweep},
                    {"theta_step", a.theta_step}, {"grid_n", a.grid_n}, {"trials", a.trials},
                    {"gamma", a.gamma},     {"sdp_cutoff", a.sdp_cutoff}, {"seed", c.seed}};
        emit_json(c, "ratio", cfg, result, runtime);
    }
    return 0;
}

// ---- round ----------------------------------------------------------------

struct RoundArgs {
    std::string instance;
    std::string problem = "auto";
    std::string kind = "basic";
    double alpha = 1.61;
    double gamma = 1e-2;
    long trials = 100;
};

int cmd_round(const Common& c, const RoundArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    const ProblemInstance inst = load_instance(a.instance, a.problem);
    const auto model = sdp::build_relaxation(inst);
    sdp::SolveOptions so;
    so.seed = c.seed;
    sdp::SdpSolution sol;
    bool converged = true;
    try {
        sol = sdp::solve_low_rank(model, so);
    } catch (const sdp::SdpNonConvergence& e) {
        std::cerr << "round: " << e.what() << "; using the best iterate\n";
        sol = e.best();
        converged = false;
    }
    if (a.trials < 1) throw DomainError("round: trials must be positive");
    const auto params = walk_params(a.kind, a.alpha, a.gamma, c.seed);
    std::vector<diffusion::RoundResult> results(static_cast<std::size_t>(a.trials));
    parallel_for(results.size(), c.threads, [&](std::size_t t) {
        Engine rng = make_engine(c.seed, t);
        results[t] = diffusion::round_instance(inst, sol, params, rng);
    });
    std::size_t best = 0;
    double mean = 0.0;
    for (std::size_t t = 0; t < results.size(); ++t) {
        mean += results[t].value;
        if (results[t].value > results[best].value) best = t;
    }
    mean /= static_cast<double>(results.size());
    json result = {{"problem", sdp::problem_name(sol.problem)},
                   {"n", variable_count(inst)},
                   {"sdp_objective", sol.objective},
                   {"sdp_converged", converged},
                   {"sdp_max_violation", sol.max_violation},
                   {"best_value", results[best].value},
                   {"best_assignment", assignment_json(results[best].assignment)},
                   {"mean_value", mean},
                   {"ratio", sol.objective > 0.0 ? results[best].value / sol.objective : 1.0},
                   {"trials", a.trials}};
    if (variable_count(inst) <= 20) result["optimum"] = brute_force_optimum(inst);
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.format == "csv") {
        emit_flat_csv(c, result);
    } else {
        json cfg = {{"instance", a.instance}, {"problem", a.problem}, {"kind", a.kind},
                    {"alpha", kind_alpha(a.kind, a.alpha)}, {"gamma", a.gamma}, {"trials", a.trials},
                    {"seed", c.seed}};
        emit_json(c, "round", cfg, result, runtime);
    }
    return 0;
}

// ---- pde ------------------------------------------------------------------

struct PdeArgs {
    std::optional<double> theta;
    std::optional<double> rho;
    double alpha = 0.0;
    std::string boundary = "maxcut_pm";
    int grid_n = 199;
    std::string query;
};

int cmd_pde(const Common& c, const PdeArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    if (a.theta.has_value() == a.rho.has_value()) throw DomainError("pde: give exactly one of --theta and --rho");
    pde::DirichletProblem p;
    p.rho = a.rho ? *a.rho : std::cos(*a.theta);
    p.alpha = a.alpha;
    p.boundary = pde::parse_boundary(a.boundary);
    p.grid_n = a.grid_n;
    const pde::PdeSolution sol = pde::solve_dirichlet(p);
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.format == "csv") {
        Output out(c);
        sol.write_csv(out.stream());
        return 0;
    }
    json result = {{"rho", p.rho},
                   {"alpha", p.alpha},
                   {"boundary", std::string(pde::boundary_name(p.boundary))},
                   {"grid_n", p.grid_n},
                   {"domain", p.domain() == pde::Domain::Unit ? "unit" : "centered"},
                   {"center", sol.center()},
                   {"residual", sol.residual()}};
    if (!a.query.empty()) {
        const auto q = parse_list(a.query);
        if (q.size() != 2) throw DomainError("pde: --query takes x,y");
        result["query"] = {{"x", q[0]}, {"y", q[1]}, {"value", sol.query(q[0], q[1])}};
    }
    json cfg = {{"rho", p.rho}, {"alpha", p.alpha}, {"boundary", a.boundary}, {"grid_n", a.grid_n}};
    emit_json(c, "pde", cfg, result, runtime);
    return 0;
}

// ---- verify ---------------------------------------------------------------

struct VerifyArgs {
    bool quick = false;
    bool inject_g2_sign = false;
};

json invariant_suite(std::uint64_t seed, bool quick) {
    json checks = json::array();
    auto add = [&](const std::string& name, bool pass, json detail = json::object()) {
        checks.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
    };

    // Every {0,1} truth table survives the multilinear round trip.
    bool rt = true;
    for (int mask = 0; mask < 16; ++mask) {
        std::array<bool, 4> tt{};
        for (int k = 0; k < 4; ++k) tt[k] = (mask >> k) & 1;
        const auto cc = clause_coeffs(tt);
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) rt = rt && cc.eval(x, y) == (tt[2 * x + y] ? 1.0 : 0.0);
    }
    add("clause_coeffs_round_trip", rt);

    // W^(1/2) squares back to W and inverts cleanly.
    double worst = 0.0;
    for (double t = 0.05; t < M_PI; t += 0.05) {
        const auto s = specfun::sqrt_correlation_2x2(t);
        const double w[2][2] = {{1.0, std::cos(t)}, {std::cos(t), 1.0}};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double sq = 0.0, id = 0.0;
                for (int k = 0; k < 2; ++k) {
                    sq += s.half[i][k] * s.half[k][j];
                    id += s.half[i][k] * s.half_inv[k][j];
                }
                worst = std::max({worst, std::abs(sq - w[i][j]), std::abs(id - (i == j ? 1.0 : 0.0))});
            }
    }
    add("sqrt_correlation_identity", worst <= 1e-10, {{"max_error", worst}});

    // Interior values within the boundary range.
    bool dmp = true;
    for (auto b : {pde::Boundary::MaxCut01, pde::Boundary::MaxCutPm, pde::Boundary::Max2SatTrue1}) {
        for (double rho : {-0.9, 0.0, 0.7}) {
            pde::DirichletProblem p;
            p.rho = rho;
            p.boundary = b;
            p.grid_n = 31;
            const auto sol = pde::solve_dirichlet(p);
            double lo = 1e300, hi = -1e300;
            const int n = sol.nodes_per_axis();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (i == 0 || j == 0 || i == n - 1 || j == n - 1) {
                        lo = std::min(lo, sol.node(i, j));
                        hi = std::max(hi, sol.node(i, j));
                    }
                }
            for (int i = 1; i < n - 1; ++i)
                for (int j = 1; j < n - 1; ++j) dmp = dmp && sol.node(i, j) >= lo - 1e-12 && sol.node(i, j) <= hi + 1e-12;
        }
    }
    add("discrete_maximum_principle", dmp);

    bool agree = true;
    for (double t = 0.3; t < 3.05; t += 0.3) agree = agree && specfun::separation_prob_exact(t).routes_agree;
    add("separation_routes_agree", agree);

    // Same seed, same walk.
    diffusion::WalkParams p;
    p.seed = seed;
    Engine r1 = make_engine(seed, 0), r2 = make_engine(seed, 0);
    bool same = true;
    for (int k = 0; k < (quick ? 20 : 200); ++k) {
        same = same && diffusion::run_pair_walk(0.3, -0.2, -0.4, p, r1, diffusion::Cube::centered()) ==
                           diffusion::run_pair_walk(0.3, -0.2, -0.4, p, r2, diffusion::Cube::centered());
    }
    add("deterministic_replay", same);

    // Martingale: mean endpoint equals the start.
    const long trials = quick ? 4000 : 40000;
    double sum = 0.0, sq = 0.0;
    for (long t = 0; t < trials; ++t) {
        Engine rng = make_engine(seed, 1000 + t);
        const auto e = diffusion::run_pair_walk(0.3, 0.7, -0.5, p, rng, diffusion::Cube::unit());
        sum += e[0];
        sq += e[0] * e[0];
    }
    const double mean = sum / trials, se = std::sqrt((sq / trials - mean * mean) / trials);
    add("martingale_mean", std::abs(mean - 0.3) <= 3.0 * se, {{"mean", mean}, {"stderr", se}});
    return checks;
}

int cmd_verify(const Common& c, const VerifyArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    maxprinciple::GridSpec spec;
    if (a.quick) {
        spec.grid_n = 101;
        spec.theta_step = 0.02;
    }
    const auto mp = maxprinciple::verify_all(spec, a.inject_g2_sign ? -1.0 : 1.0);
    const json inv = invariant_suite(c.seed, a.quick);
    std::vector<std::string> failing = mp.detail["failing"].get<std::vector<std::string>>();
    for (auto& f : failing) f = "maxprinciple." + f;
    for (const auto& ch : inv) {
        if (!ch["pass"].get<bool>()) failing.push_back("invariants." + ch["name"].get<std::string>());
    }
    const bool pass = failing.empty();
    json result = {{"pass", pass}, {"failing", failing}, {"maxprinciple", mp.detail}, {"invariants", inv}};
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.format == "csv") {
        emit_flat_csv(c, result);
    } else {
        json cfg = {{"quick", a.quick}, {"inject_g2_sign", a.inject_g2_sign}, {"seed", c.seed}};
        emit_json(c, "verify", cfg, result, runtime);
    }
    std::cerr << "verify: " << (pass ? "PASS" : "FAIL");
    for (const auto& f : failing) std::cerr << " " << f;
    std::cerr << "\n";
    return pass ? 0 : 1;
}

// ---- constrained ----------------------------------------------------------

struct ConstrainedArgs {
    std::string instance;
    std::string constraints;
    double eps = 0.1;
    std::optional<double> tau;
    long trials = 100;
    std::string mode = "walk";
    std::string covariance = "sdp";
    double gamma = 1e-2;
    int retry_cap = 1000;
};

int cmd_constrained(const Common& c, const ConstrainedArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    const MaxCutInstance g = parse_graph(read_file(a.instance));
    const auto sc = constrained::parse_constraints(read_file(a.constraints), g.n, a.eps);
    const Eigen::VectorXd x = constrained::disjoint_feasible_point(sc, g.n);
    json result = {{"n", g.n}, {"constraints", sc.size()}, {"marginals", std::vector<double>(x.data(), x.data() + x.size())}};
    json cfg = {{"instance", a.instance}, {"constraints", a.constraints}, {"eps", a.eps}, {"mode", a.mode},
                {"trials", a.trials}, {"seed", c.seed}};

    if (a.mode == "baseline") {
        Engine rng = make_engine(c.seed, 0);
        const auto r = constrained::baseline_round(x, g, sc, a.eps, rng, a.retry_cap);
        result["success"] = r.success;
        result["attempts"] = r.attempts;
        result["mean_cut"] = r.mean_cut;
        result["cut_pass_rate"] = r.cut_pass_rate;
        result["violation_pass_rate"] = r.violation_pass_rate;
        if (r.success) {
            result["cut_value"] = r.cut;
            result["max_violation"] = r.max_violation;
            result["assignment"] = assignment_json(r.set);
        }
        cfg["retry_cap"] = a.retry_cap;
    } else if (a.mode == "walk") {
        Eigen::MatrixXd W;
        if (a.covariance == "identity") {
            W = Eigen::MatrixXd::Identity(g.n, g.n);
        } else if (a.covariance == "sdp") {
            sdp::SolveOptions so;
            so.seed = c.seed;
            sdp::SdpSolution sol;
            try {
                sol = sdp::solve_low_rank(sdp::build_relaxation(g), so);
            } catch (const sdp::SdpNonConvergence& e) {
                sol = e.best();
            }
            const Eigen::MatrixXd u = sol.rows.bottomRows(g.n);
            W = u * u.transpose();
            W.diagonal().setOnes();
            result["sdp_objective"] = sol.objective;
        } else {
            throw DomainError("covariance must be sdp or identity");
        }
        const double tau = a.tau ? *a.tau : constrained::default_tau(a.eps);
        diffusion::WalkParams p;
        p.step = a.gamma;
        p.seed = c.seed;
        std::vector<constrained::ConstrainedResult> runs(static_cast<std::size_t>(a.trials));
        parallel_for(runs.size(), c.threads, [&](std::size_t t) {
            Engine rng = make_engine(c.seed, t);
            runs[t] = constrained::constrained_round(x, W, g, sc, tau, p, rng);
        });
        const double slack = a.eps * g.n;
        std::optional<std::size_t> best;
        double mean_cut = 0.0, mean_viol = 0.0;
        long within = 0;
        for (std::size_t t = 0; t < runs.size(); ++t) {
            mean_cut += runs[t].cut_value;
            mean_viol += runs[t].max_violation;
            if (runs[t].max_violation <= slack) {
                ++within;
                if (!best || runs[t].cut_value > runs[*best].cut_value) best = t;
            }
        }
        result["tau"] = tau;
        result["mean_cut"] = mean_cut / a.trials;
        result["mean_max_violation"] = mean_viol / a.trials;
        result["within_budget_rate"] = static_cast<double>(within) / a.trials;
        result["success"] = best.has_value();
        if (best) {
            result["cut_value"] = runs[*best].cut_value;
            result["max_violation"] = runs[*best].max_violation;
            result["assignment"] = assignment_json(runs[*best].set);
        }
        cfg["tau"] = tau;
        cfg["covariance"] = a.covariance;
        cfg["gamma"] = a.gamma;
    } else {
        throw DomainError("mode must be walk or baseline");
    }
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.format == "csv") {
        emit_flat_csv(c, result);
    } else {
        emit_json(c, "constrained", cfg, result, runtime);
    }
    return result["success"].get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sticky Brownian rounding experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->always_capture_default();

    Common common;
    if (const char* env = std::getenv(kSeedEnv)) {
        try {
            common.seed = std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "error: " << kSeedEnv << " is not an unsigned integer\n";
            return 2;
        }
    }
    app.add_option("--threads", common.threads, "worker threads (0 = all cores)");
    app.add_option("--seed", common.seed, std::string("master seed (default from ") + kSeedEnv + ")");
    app.add_option("-o,--output", common.output, "output file (default stdout)");
    app.add_option("--format", common.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--config", common.config, "key=value file; command-line flags take precedence");
    app.add_flag("--no-meta", common.no_meta, "omit the timestamp/runtime block from JSON");

    ProbArgs pa;
    auto* prob = app.add_subcommand("prob", "separation probability of the basic walk at half marginals");
    prob->add_option("--theta", pa.thetas, "comma-separated angles");
    prob->add_option("--sweep", pa.sweep, "lo:hi:step");
    prob->add_option("--routes", pa.routes, "subset of exact,quadrature,mc,pde");
    prob->add_option("--trials", pa.trials);
    prob->add_option("--gamma", pa.gamma);
    prob->add_option("--grid-n", pa.grid_n);

    RatioArgs ra;
    auto* rat = app.add_subcommand("ratio", "worst-case approximation ratio search");
    rat->add_option("--problem", ra.problem)->check(CLI::IsMember({"maxcut", "max2sat", "dicut"}));
    rat->add_option("--kind", ra.kind)->check(CLI::IsMember({"basic", "slowdown"}));
    rat->add_option("--alpha", ra.alpha, "slowdown exponent");
    rat->add_option("--delta", ra.delta, "grid step (marginals; angles for dicut)");
    rat->add_option("--method", ra.method)->check(CLI::IsMember({"pde", "mc", "monte_carlo", "exact"}));
    rat->add_flag("--half-sweep", ra.half_sweep, "maxcut with both marginals 1/2");
    rat->add_option("--theta-step", ra.theta_step);
    rat->add_option("--grid-n", ra.grid_n);
    rat->add_option("--trials", ra.trials);
    rat->add_option("--gamma", ra.gamma);
    rat->add_option("--sdp-cutoff", ra.sdp_cutoff);
    rat->add_flag("--rows", ra.rows, "include every evaluated configuration");

    RoundArgs rd;
    auto* rnd = app.add_subcommand("round", "solve the relaxation and round an instance");
    rnd->add_option("instance", rd.instance)->required();
    rnd->add_option("--problem", rd.problem)->check(CLI::IsMember({"auto", "maxcut", "max2sat", "dicut"}));
    rnd->add_option("--kind", rd.kind)->check(CLI::IsMember({"basic", "slowdown"}));
    rnd->add_option("--alpha", rd.alpha);
    rnd->add_option("--gamma", rd.gamma);
    rnd->add_option("--trials", rd.trials);

    PdeArgs pd;
    auto* pdc = app.add_subcommand("pde", "solve one Dirichlet problem");
    pdc->add_option("--theta", pd.theta);
    pdc->add_option("--rho", pd.rho);
    pdc->add_option("--alpha", pd.alpha);
    pdc->add_option("--boundary", pd.boundary, "maxcut01, maxcut_pm, max2sat_false1 or max2sat_true1");
    pdc->add_option("--grid-n", pd.grid_n);
    pdc->add_option("--query", pd.query, "x,y");

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "maximum-principle and invariant checks");
    ver->add_flag("--quick", va.quick, "reduced grids");
    ver->add_flag("--inject-g2-sign", va.inject_g2_sign, "flip the g2 correction term (mutation check)");

    ConstrainedArgs ca;
    auto* con = app.add_subcommand("constrained", "Max-Cut rounding under cardinality constraints");
    con->add_option("instance", ca.instance)->required();
    con->add_option("constraints", ca.constraints)->required();
    con->add_option("--eps", ca.eps);
    con->add_option("--tau", ca.tau);
    con->add_option("--trials", ca.trials);
    con->add_option("--mode", ca.mode)->check(CLI::IsMember({"walk", "baseline"}));
    con->add_option("--covariance", ca.covariance)->check(CLI::IsMember({"sdp", "identity"}));
    con->add_option("--gamma", ca.gamma);
    con->add_option("--retry-cap", ca.retry_cap);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!common.config.empty()) apply_config(common.config, app, sub);
        check_format(common);
        if (sub == prob) return cmd_prob(common, pa);
        if (sub == rat) return cmd_ratio(common, ra);
        if (sub == rnd) return cmd_round(common, rd);
        if (sub == pdc) return cmd_pde(common, pd);
        if (sub == ver) return cmd_verify(common, va);
        if (sub == con) return cmd_constrained(common, ca);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
