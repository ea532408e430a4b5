// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion ...]   (no arguments runs all ten)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sbr/constrained.hpp"
#include "sbr/diffusion.hpp"
#include "sbr/instances.hpp"
#include "sbr/maxprinciple.hpp"
#include "sbr/pde.hpp"
#include "sbr/ratio.hpp"
#include "sbr/sdp.hpp"
#include "sbr/specfun.hpp"

using namespace sbr;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [miss: " << what << "]";
        }
    }
};

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Outcome&)> run;
};

bool in(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::string fmt(double v, int digits = 5) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

unsigned threads() {
    if (const char* t = std::getenv("SBR_THREADS")) return static_cast<unsigned>(std::max(1, std::atoi(t)));
    return 1;
}

// ---- 1 ----------------------------------------------------------------------

void route_consistency(Outcome& o) {
    double worst_pde = 0.0, worst_z = 0.0;
    for (int k = 1; k <= 10; ++k) {
        const double theta = 0.3 * k;
        const double exact = specfun::separation_prob(theta);
        pde::DirichletProblem pr;
        pr.rho = std::cos(theta);
        pr.boundary = pde::Boundary::MaxCutPm;
        pr.grid_n = 199;
        const double u = pde::solve_dirichlet(pr).center();

        diffusion::WalkParams p;
        p.step = 1e-2;
        p.seed = 1000 + static_cast<std::uint64_t>(k);
        const auto mc = diffusion::estimate_pair_separation({0.5, 0.5, theta, sdp::Problem::MaxCut}, p, 100'000,
                                                            threads());
        const double z = std::max(std::abs(mc.prob - exact), std::abs(mc.prob - u)) / mc.stderr_;
        worst_pde = std::max(worst_pde, std::abs(u - exact));
        worst_z = std::max(worst_z, z);
        o.require(std::abs(u - exact) <= 2e-3, "pde theta=" + fmt(theta, 1));
        o.require(z <= 3.0, "mc theta=" + fmt(theta, 1));
    }
    o.detail << "max|pde-exact|=" << fmt(worst_pde, 6) << " (<=2e-3) max mc z=" << fmt(worst_z, 2) << " (<=3)";
}

// ---- 2, 3 ---------------------------------------------------------------------

double half_sweep_min(double alpha) {
    ratio::RatioOptions o;
    o.alpha = alpha;
    o.grid_n = 199;
    o.keep_rows = false;
    o.threads = threads();
    return ratio::maxcut_half_sweep(o, 0.01).min_ratio;
}

void maxcut_basic(Outcome& o) {
    const double m = half_sweep_min(0.0);
    o.detail << "min=" << fmt(m) << " band [0.84, 0.86]";
    o.require(in(m, 0.84, 0.86), "basic");
}

void maxcut_slowdown(Outcome& o) {
    const double a1 = half_sweep_min(1.0), a161 = half_sweep_min(1.61);
    o.detail << "alpha=1 min=" << fmt(a1) << " band [0.85, 0.87]; alpha=1.61 min=" << fmt(a161)
             << " band [0.8765, 0.8795]";
    o.require(in(a1, 0.85, 0.87), "alpha=1");
    o.require(in(a161, 0.8765, 0.8795), "alpha=1.61");
}

// ---- 4 ----------------------------------------------------------------------

void max2sat(Outcome& o) {
    const double alphas[3] = {0.0, 1.0, 1.61};
    const double targets[3] = {0.921, 0.927, 0.929};
    for (int k = 0; k < 3; ++k) {
        ratio::RatioOptions opt;
        opt.alpha = alphas[k];
        opt.delta = 0.02;
        opt.keep_rows = false;
        opt.threads = threads();
        const auto rep = ratio::approx_ratio(sdp::Problem::Max2Sat, opt);
        o.detail << "alpha=" << alphas[k] << " min=" << fmt(rep.min_ratio) << " (" << targets[k] << "+-0.004) ";
        o.require(std::abs(rep.min_ratio - targets[k]) <= 0.004, "alpha=" + fmt(alphas[k], 2));
        if (k == 0) {
            const double xi = rep.argmin.config.xi, xj = rep.argmin.config.xj;
            const double lo = std::min(xi, xj), hi = std::max(xi, xj);
            o.detail << "argmin=(" << fmt(xi, 2) << "," << fmt(xj, 2) << "," << fmt(rep.argmin.config.theta, 2) << ") ";
            o.require(std::abs(lo - 0.38) <= 0.02 && std::abs(hi - 0.40) <= 0.02, "argmin marginals");
        }
    }
}

// ---- 5 ----------------------------------------------------------------------

void dicut(Outcome& o) {
    ratio::RatioOptions opt;
    opt.alpha = 1.61;
    opt.keep_rows = false;
    opt.threads = threads();
    const double m = ratio::dicut_ratio(opt, 0.02).min_ratio;
    o.detail << "min=" << fmt(m) << " band [0.78, 0.80]";
    o.require(in(m, 0.78, 0.80), "dicut");
}

// ---- 6 ----------------------------------------------------------------------

void asymptotics(Outcome& o) {
    for (double eps : {0.01, 0.005}) {
        const double r = (1.0 - specfun::separation_prob((1.0 - eps) * kPi)) / specfun::nonseparation_asymptotic(eps);
        o.detail << "eps=" << eps << " ratio=" << fmt(r, 6) << " ";
        o.require(in(r, 0.85, 1.15), "eps=" + fmt(eps, 3));
    }
    o.detail << "band [0.85, 1.15]";
}

// ---- 7 ----------------------------------------------------------------------

void maxprinciple_suite(Outcome& o) {
    using namespace maxprinciple;
    const GridSpec spec;
    const double targets[3] = {1.0, kRatioTarget, kRatioTarget};
    for (int i = 1; i <= 3; ++i) {
        const Candidate g(i);
        const auto b = verify_boundary(g);
        const auto f = verify_feasibility(g, spec);
        const auto r = verify_ratio(g, targets[i - 1], spec);
        o.detail << "g" << i << ": boundary=" << b.min << " Lmin=" << fmt(f.min, 9) << " ratio=" << fmt(r.min, 5)
                 << "; ";
        o.require(b.pass, "g" + std::to_string(i) + " boundary");
        o.require(f.pass, "g" + std::to_string(i) + " feasibility");
        o.require(r.min >= targets[i - 1] - 1e-4, "g" + std::to_string(i) + " ratio");
    }
    const auto w = warmup_three_quarters(spec);
    o.detail << "warm-up=" << fmt(w.min, 5);
    o.require(w.pass, "warm-up");
}

// ---- 8 ----------------------------------------------------------------------

void constrained_suite(Outcome& o) {
    diffusion::WalkParams p;
    p.seed = 808;
    const auto h = constrained::hitting_profile(100'000, 5, p, threads());
    o.require(h.within(0.3), "hitting profile");
    o.detail << "survival t=1.." << h.survival.size() - 1 << ":";
    for (std::size_t t = 1; t < h.survival.size(); ++t) o.detail << " " << h.survival[t];

    const int n = 16;
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 0.5);
    const std::vector<int> family{0, 1, 2, 3, 4, 5, 6, 7};
    Eigen::MatrixXd strong = Eigen::MatrixXd::Constant(n, n, 0.9);
    strong.diagonal().setOnes();
    Engine rng = make_engine(809, 0);
    const std::pair<const char*, Eigen::MatrixXd> regimes[3] = {
        {"identity", Eigen::MatrixXd::Identity(n, n)},
        {"all-0.9", strong},
        {"random-dim4", constrained::synthetic_covariance(n, 4, rng)}};
    o.detail << "; concentration:";
    for (const auto& [name, W] : regimes) {
        const auto c = constrained::concentration_check(x, W, family, 1.0, 10'000, p, threads());
        o.detail << " " << name << "=" << (c.pass ? "PASS" : "FAIL");
        o.require(c.pass, std::string("concentration ") + name);
    }

    ratio::RatioOptions opt;
    opt.keep_rows = false;
    opt.threads = threads();
    const auto s = constrained::stopped_pair_ratio(opt, 50.0);
    o.detail << "; stopped ratio=" << fmt(s.ratio.min_ratio) << " (+-" << s.truncation << ") band [0.838, 0.848]";
    o.require(in(s.ratio.min_ratio, 0.838, 0.848), "stopped ratio");
}

// ---- 9 ----------------------------------------------------------------------

ProblemInstance random_instance(int k, Engine& rng) {
    std::uniform_int_distribution<int> size(4, 12);
    const int n = size(rng);
    std::bernoulli_distribution keep(0.4), sgn(0.5);
    std::uniform_real_distribution<double> w(0.5, 2.0);
    if (k % 3 == 1) {
        Max2SatInstance f;
        f.n = n;
        std::uniform_int_distribution<int> var(1, n);
        for (int c = 0; c < 2 * n; ++c) {
            int a = var(rng), b = var(rng);
            if (a == b) b = a % n + 1;
            f.clauses.push_back({sgn(rng) ? a : -a, sgn(rng) ? b : -b, w(rng)});
        }
        return f;
    }
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && (k % 3 == 2 || i < j) && keep(rng)) edges.push_back({i, j, w(rng)});
    if (edges.empty()) edges.push_back({0, 1, 1.0});
    if (k % 3 == 2) {
        DiCutInstance g;
        g.n = n;
        g.arcs = edges;
        return g;
    }
    MaxCutInstance g;
    g.n = n;
    g.edges = edges;
    return g;
}

void sdp_solver(Outcome& o) {
    const double k2 = sdp::solve_low_rank(sdp::build_relaxation(parse_graph("2 1\n0 1"))).objective;
    const double c5 = sdp::solve_low_rank(sdp::build_relaxation(parse_graph("5 5\n0 1\n1 2\n2 3\n3 4\n4 0"))).objective;
    o.detail << "K2=" << fmt(k2, 8) << " C5=" << fmt(c5, 6);
    o.require(std::abs(k2 - 1.0) <= 1e-6, "K2");
    o.require(std::abs(c5 - 4.5225) <= 1e-3, "C5");
    Engine rng = make_engine(909, 0);
    double worst = 1e300;
    for (int k = 0; k < 20; ++k) {
        const auto inst = random_instance(k, rng);
        const double opt = brute_force_optimum(inst);
        const double rel = sdp::solve_low_rank(sdp::build_relaxation(inst)).objective;
        worst = std::min(worst, rel - opt);
        o.require(rel >= opt - 1e-6, "instance " + std::to_string(k));
    }
    o.detail << " min(relaxation-optimum) over 20 instances=" << fmt(worst, 6);
}

// ---- 10 ---------------------------------------------------------------------

void property_suite(Outcome& o) {
    int passed = 0, total = 0;
    auto check = [&](const char* name, bool ok) {
        ++total;
        passed += ok;
        o.require(ok, name);
    };

    diffusion::WalkParams p;
    p.seed = 1010;
    const long runs = 40'000;
    double sum = 0.0, sq = 0.0;
    for (long t = 0; t < runs; ++t) {
        Engine rng = make_engine(p.seed, t);
        const double v = diffusion::run_pair_walk(0.3, 0.7, -0.5, p, rng, diffusion::Cube::unit())[0];
        sum += v;
        sq += v * v;
    }
    const double mean = sum / runs, se = std::sqrt((sq / runs - mean * mean) / runs);
    check("martingale", std::abs(mean - 0.3) <= 3 * se);

    bool dmp = true;
    for (auto b : {pde::Boundary::MaxCut01, pde::Boundary::MaxCutPm, pde::Boundary::Max2SatTrue1})
        for (double rho : {-0.9, 0.0, 0.7})
            for (double alpha : {0.0, 1.61}) {
                pde::DirichletProblem pr;
                pr.rho = rho;
                pr.boundary = b;
                pr.alpha = alpha;
                pr.grid_n = 31;
                const auto s = pde::solve_dirichlet(pr);
                const int m = s.nodes_per_axis();
                double lo = 1e300, hi = -1e300;
                for (int k = 0; k < m; ++k)
                    for (double v : {s.node(k, 0), s.node(k, m - 1), s.node(0, k), s.node(m - 1, k)}) {
                        lo = std::min(lo, v);
                        hi = std::max(hi, v);
                    }
                for (int i = 1; i < m - 1; ++i)
                    for (int j = 1; j < m - 1; ++j) dmp = dmp && s.node(i, j) >= lo - 1e-12 && s.node(i, j) <= hi + 1e-12;
            }
    check("discrete maximum principle", dmp);

    bool conv = true;
    for (double rho : {0.0, 0.5, -0.5, 0.9, -0.9}) {
        pde::DirichletProblem pr;
        pr.rho = rho;
        pr.boundary = pde::Boundary::MaxCutPm;
        double c[3];
        int k = 0;
        for (int g : {99, 199, 399}) {
            pr.grid_n = g;
            c[k++] = pde::solve_dirichlet(pr).center();
        }
        conv = conv && std::abs(c[0] - c[1]) <= 4.0 * std::abs(c[1] - c[2]) + 1e-6;
    }
    check("grid convergence", conv);

    double worst = 0.0;
    for (double t = 0.05; t < kPi; t += 0.05) {
        const auto s = specfun::sqrt_correlation_2x2(t);
        const double w[2][2] = {{1.0, std::cos(t)}, {std::cos(t), 1.0}};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double a = 0.0, b = 0.0;
                for (int k = 0; k < 2; ++k) {
                    a += s.half[i][k] * s.half[k][j];
                    b += s.half[i][k] * s.half_inv[k][j];
                }
                worst = std::max({worst, std::abs(a - w[i][j]), std::abs(b - (i == j ? 1.0 : 0.0))});
            }
    }
    check("square-root identities", worst <= 1e-10);

    bool rt = true;
    for (int mask = 0; mask < 16; ++mask) {
        std::array<bool, 4> tt{};
        for (int k = 0; k < 4; ++k) tt[k] = (mask >> k) & 1;
        const auto cc = clause_coeffs(tt);
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) rt = rt && cc.eval(x, y) == (tt[2 * x + y] ? 1.0 : 0.0);
    }
    check("clause round trip", rt);

    const auto e1 = diffusion::estimate_pair_separation({0.4, 0.6, 2.0, sdp::Problem::MaxCut}, p, 2000, 1);
    const auto e2 = diffusion::estimate_pair_separation({0.4, 0.6, 2.0, sdp::Problem::MaxCut}, p, 2000, threads());
    check("deterministic replay", e1.prob == e2.prob && e1.stderr_ == e2.stderr_);

    o.detail << passed << "/" << total << " properties hold";
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "route consistency", 120, route_consistency},
        {2, "max-cut basic ratio", 60, maxcut_basic},
        {3, "max-cut slowdown ratios", 180, maxcut_slowdown},
        {4, "max-2sat ratios", 1200, max2sat},
        {5, "dicut slowdown ratio", 900, dicut},
        {6, "near-antipodal asymptotics", 0, asymptotics},
        {7, "maximum-principle suite", 120, maxprinciple_suite},
        {8, "constrained suite", 600, constrained_suite},
        {9, "sdp solver", 0, sdp_solver},
        {10, "property suite", 0, property_suite},
    };
    std::vector<int> want;
    for (int i = 1; i < argc; ++i) want.push_back(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : all) {
        if (!want.empty() && std::find(want.begin(), want.end(), c.id) == want.end()) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0) o.require(secs <= c.budget_s, "runtime over " + fmt(c.budget_s, 0) + " s");
        failed += !o.pass;
        std::printf("%s  criterion %2d  %-28s %8.1f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    o.detail.str().c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
