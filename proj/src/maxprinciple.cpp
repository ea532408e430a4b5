#include "sbr/maxprinciple.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "sbr/error.hpp"
#include "sbr/sdp.hpp"

namespace sbr::maxprinciple {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCosSlack = 1e-12;

// Value and partials of a function of (x, y).
struct Jet {
    double v = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
};

double p(double t) { return t - t * t; }

// Correction term h with g = 1 - xy - sign * h.
Jet correction(int index, double x, double y, double c) {
    Jet j;
    switch (index) {
    case 1: {
        double s = std::sqrt(p(x)), t = std::sqrt(p(y));
        j.v = c * s * t;
        if (s == 0.0 || t == 0.0) {
            // Second partials blow up on the boundary; callers stay interior.
            j.xx = j.yy = j.xy = std::numeric_limits<double>::quiet_NaN();
            return j;
        }
        double s1 = (1.0 - 2.0 * x) / (2.0 * s), t1 = (1.0 - 2.0 * y) / (2.0 * t);
        double s2 = -1.0 / (4.0 * s * s * s), t2 = -1.0 / (4.0 * t * t * t);
        j.xx = c * s2 * t;
        j.yy = c * s * t2;
        j.xy = c * s1 * t1;
        return j;
    }
    case 2: {
        double P = p(x), Q = p(y);
        j.v = 2.0 * c * P * Q;
        j.xx = 2.0 * c * (-2.0) * Q;
        j.yy = 2.0 * c * P * (-2.0);
        j.xy = 2.0 * c * (1.0 - 2.0 * x) * (1.0 - 2.0 * y);
        return j;
    }
    case 3: {
        double k = 0.5 * (1.0 + 5.0 * c);
        double P = p(x), Q = p(y), P1 = 1.0 - 2.0 * x, Q1 = 1.0 - 2.0 * y;
        double s = x + y;
        double R = s * (2.0 - s), R1 = 2.0 - 2.0 * s, R2 = -2.0;
        j.v = k * P * Q * R;
        j.xx = k * (-2.0 * Q * R + 2.0 * P1 * Q * R1 + P * Q * R2);
        j.yy = k * (-2.0 * P * R + 2.0 * P * Q1 * R1 + P * Q * R2);
        j.xy = k * (P1 * Q1 * R + P1 * Q * R1 + P * Q1 * R1 + P * Q * R2);
        return j;
    }
    default:
        throw DomainError("candidate index must be 1, 2 or 3");
    }
}

std::vector<double> angles(double cos_lo, double cos_hi, double step) {
    if (!(step > 0.0)) throw DomainError("theta step must be positive");
    std::vector<double> out;
    auto keep = [&](double t) {
        double c = std::cos(t);
        if (c >= cos_lo - kCosSlack && c <= cos_hi + kCosSlack) out.push_back(t);
    };
    long n = static_cast<long>(std::floor(kPi / step));
    for (long k = 0; k <= n; ++k) keep(k * step);
    keep(kPi);
    keep(std::acos(std::clamp(cos_lo, -1.0, 1.0)));
    keep(std::acos(std::clamp(cos_hi, -1.0, 1.0)));
    return out;
}

void check_grid(const GridSpec& spec) {
    if (spec.grid_n < 3) throw DomainError("grid_n must be at least 3");
}

void record(GridCheck& r, double v, double x, double y, double t) {
    if (r.points == 0 || v < r.min) {
        r.min = v;
        r.x = x;
        r.y = y;
        r.theta = t;
    }
    ++r.points;
}

}  // namespace

Candidate::Candidate(int i, double s) : index(i), sign(s) {
    if (i < 1 || i > 3) throw DomainError("candidate index must be 1, 2 or 3");
}

double Candidate::cos_lo() const { return index == 1 ? 0.0 : index == 2 ? -0.5 : -1.0; }
double Candidate::cos_hi() const { return index == 1 ? 1.0 : index == 2 ? 0.0 : -0.5; }

double eval_candidate(const Candidate& g, double x, double y, double theta) {
    return 1.0 - x * y - g.sign * correction(g.index, x, y, std::cos(theta)).v;
}

double apply_operator(const Candidate& g, double x, double y, double theta) {
    double c = std::cos(theta);
    Jet h = correction(g.index, x, y, c);
    double gxx = -g.sign * h.xx, gyy = -g.sign * h.yy, gxy = -1.0 - g.sign * h.xy;
    return gxx + gyy + 2.0 * c * gxy;
}

double apply_operator_fd(const Candidate& g, double x, double y, double theta, double h) {
    auto f = [&](double a, double b) { return eval_candidate(g, a, b, theta); };
    double c = std::cos(theta);
    double f0 = f(x, y);
    double fxx = (f(x + h, y) - 2.0 * f0 + f(x - h, y)) / (h * h);
    double fyy = (f(x, y + h) - 2.0 * f0 + f(x, y - h)) / (h * h);
    double fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
    return fxx + fyy + 2.0 * c * fxy;
}

double sdp_value(double x, double y, double theta) {
    return 1.0 - x * y - std::cos(theta) * std::sqrt(p(x)) * std::sqrt(p(y));
}

nlohmann::json GridCheck::to_json() const {
    return {{"min", min}, {"x", x}, {"y", y}, {"theta", theta}, {"points", points}, {"pass", pass}};
}

GridCheck verify_feasibility(const Candidate& g, double cos_lo, double cos_hi, const GridSpec& spec) {
    check_grid(spec);
    GridCheck r;
    double d = 1.0 / (spec.grid_n - 1);
    for (double t : angles(cos_lo, cos_hi, spec.theta_step))
        for (int i = 1; i < spec.grid_n - 1; ++i)
            for (int j = 1; j < spec.grid_n - 1; ++j) {
                double x = i * d, y = j * d;
                record(r, apply_operator(g, x, y, t), x, y, t);
            }
    r.pass = r.points > 0 && r.min >= -1e-8;
    return r;
}

GridCheck verify_feasibility(const Candidate& g, const GridSpec& spec) {
    return verify_feasibility(g, g.cos_lo(), g.cos_hi(), spec);
}

GridCheck verify_boundary(const Candidate& g, int samples, double theta_step) {
    if (samples < 2) throw DomainError("need at least 2 boundary samples");
    GridCheck r;
    double worst = 0.0;
    for (double t : angles(g.cos_lo(), g.cos_hi(), theta_step))
        for (int k = 0; k < samples; ++k) {
            double s = static_cast<double>(k) / (samples - 1);
            const double pts[4][2] = {{s, 0.0}, {s, 1.0}, {0.0, s}, {1.0, s}};
            for (const auto& q : pts) {
                double dev = std::abs(eval_candidate(g, q[0], q[1], t) - (1.0 - q[0] * q[1]));
                ++r.points;
                if (dev > worst || r.points == 1) {
                    worst = dev;
                    r.x = q[0];
                    r.y = q[1];
                    r.theta = t;
                }
            }
        }
    r.min = worst;  // reported as the largest deviation
    r.pass = worst == 0.0;
    return r;
}

GridCheck verify_ratio(const Candidate& g, double target, const GridSpec& spec) {
    check_grid(spec);
    GridCheck r;
    double d = 1.0 / (spec.grid_n - 1);
    for (double t : angles(g.cos_lo(), g.cos_hi(), spec.theta_step))
        for (int i = 0; i < spec.grid_n; ++i)
            for (int j = 0; j < spec.grid_n; ++j) {
                double x = i * d, y = j * d;
                if (!sdp::check_triangle({x, y, t, sdp::Problem::Max2Sat})) continue;
                double s = sdp_value(x, y, t);
                if (s < 1e-3) continue;
                record(r, eval_candidate(g, x, y, t) / s, x, y, t);
            }
    r.pass = r.points > 0 && r.min >= target - 1e-4;
    return r;
}

GridCheck combined_bound(double target, const GridSpec& spec) {
    GridCheck r;
    for (int idx = 1; idx <= 3; ++idx) {
        GridCheck part = verify_ratio(Candidate(idx), target, spec);
        if (part.points == 0) continue;
        long n = r.points;
        if (n == 0 || part.min < r.min) r = part;
        r.points = n + part.points;
    }
    r.pass = r.points > 0 && r.min >= target - 1e-4;
    return r;
}

GridCheck warmup_three_quarters(const GridSpec& spec) {
    check_grid(spec);
    GridCheck r;
    bool harmonic = true;
    double d = 1.0 / (spec.grid_n - 1);
    for (double t : angles(-1.0, 0.0, spec.theta_step)) {
        // L(1 - xy) = -2 cos(theta), constant in (x, y).
        if (-2.0 * std::cos(t) < -1e-12) harmonic = false;
        for (int i = 0; i < spec.grid_n; ++i)
            for (int j = 0; j < spec.grid_n; ++j) {
                double x = i * d, y = j * d;
                if (!sdp::check_triangle({x, y, t, sdp::Problem::Max2Sat})) continue;
                double s = sdp_value(x, y, t);
                if (s < 1e-3) continue;
                record(r, (1.0 - x * y) / s, x, y, t);
            }
    }
    r.pass = harmonic && r.points > 0 && r.min >= 0.75 - 1e-6;
    return r;
}

Verification verify_all(const GridSpec& spec, double g2_sign) {
    Verification v;
    const double targets[3] = {1.0, kRatioTarget, kRatioTarget};
    nlohmann::json cands = nlohmann::json::array();
    std::vector<std::string> failing;
    for (int idx = 1; idx <= 3; ++idx) {
        Candidate g(idx, idx == 2 ? g2_sign : 1.0);
        GridCheck feas = verify_feasibility(g, spec);
        GridCheck bnd = verify_boundary(g, 400, spec.theta_step);
        GridCheck rat = verify_ratio(g, targets[idx - 1], spec);
        bool ok = feas.pass && bnd.pass && rat.pass;
        v.pass = v.pass && ok;
        std::string tag = "g" + std::to_string(idx);
        if (!feas.pass) failing.push_back(tag + ".operator");
        if (!bnd.pass) failing.push_back(tag + ".boundary");
        if (!rat.pass) failing.push_back(tag + ".ratio");
        cands.push_back({{"index", idx},
                         {"cos_range", {g.cos_lo(), g.cos_hi()}},
                         {"sign", g.sign},
                         {"operator", feas.to_json()},
                         {"boundary", bnd.to_json()},
                         {"ratio", rat.to_json()},
                         {"ratio_target", targets[idx - 1]},
                         {"pass", ok}});
    }
    GridCheck comb = combined_bound(kRatioTarget, spec);
    GridCheck warm = warmup_three_quarters(spec);
    v.pass = v.pass && comb.pass && warm.pass;
    if (!comb.pass) failing.push_back("combined");
    if (!warm.pass) failing.push_back("warmup");
    v.detail = {{"grid_n", spec.grid_n},
                {"theta_step", spec.theta_step},
                {"candidates", cands},
                {"combined", comb.to_json()},
                {"combined_target", kRatioTarget},
                {"warmup", warm.to_json()},
                {"failing", failing},
                {"pass", v.pass}};
    return v;
}

}  // namespace sbr::maxprinciple
