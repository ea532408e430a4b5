#include "sbr/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "sbr/error.hpp"

namespace sbr::specfun {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos coefficients for g = 7, n = 9.
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double x, double a, double b) {
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw PrecisionError("incomplete beta: continued fraction did not converge");
}

void require_positive(double a, double b, const char* who) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw DomainError(std::string(who) + ": parameters must be positive");
    }
}

// Kahan-compensated long double accumulator.
struct KahanSum {
    long double sum = 0.0L;
    long double comp = 0.0L;
    void add(long double v) {
        const long double y = v - comp;
        const long double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

AngleParam::AngleParam(double theta) {
    if (!(theta > 0.0 && theta < kPi)) {
        throw DomainError("AngleParam: theta must lie in (0, pi)");
    }
    a_ = theta / kPi;
}

AngleParam AngleParam::from_fraction(double a) {
    if (!(a > 0.0 && a < 1.0)) {
        throw DomainError("AngleParam: a must lie in (0, 1)");
    }
    AngleParam p;
    p.a_ = a;
    return p;
}

double AngleParam::theta() const noexcept { return a_ * kPi; }

double log_gamma(double z) {
    if (!(z > 0.0)) throw DomainError("log_gamma: z must be positive");
    if (z < 0.5) return log_gamma(z + 1.0) - std::log(z);
    const double zm = z - 1.0;
    double acc = kLanczos[0];
    for (std::size_t k = 1; k < kLanczos.size(); ++k) acc += kLanczos[k] / (zm + static_cast<double>(k));
    const double t = zm + 7.5;
    return 0.5 * std::log(2.0 * kPi) + (zm + 0.5) * std::log(t) - t + std::log(acc);
}

double beta(double a, double b) {
    require_positive(a, b, "beta");
    return std::exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

double incomplete_beta_regularized(double x, double a, double b) {
    require_positive(a, b, "incomplete_beta");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete_beta: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) +
                             b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
    return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double incomplete_beta(double x, double a, double b) {
    require_positive(a, b, "incomplete_beta");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete_beta: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        const double front = std::exp(a * std::log(x) + b * std::log1p(-x));
        return front * beta_continued_fraction(x, a, b) / a;
    }
    const double front = std::exp(b * std::log1p(-x) + a * std::log(x));
    return beta(a, b) - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double hyp2f1(double a, double b, double c, double x) {
    if (!(x >= 0.0 && x < 1.0)) throw DomainError("hyp2f1: x must lie in [0, 1)");
    if (c <= 0.0 && std::floor(c) == c) throw DomainError("hyp2f1: c must not be a non-positive integer");
    constexpr long kMaxTerms = 1'000'000;
    KahanSum sum;
    long double term = 1.0L;
    sum.add(term);
    for (long n = 0; n < kMaxTerms; ++n) {
        const long double ratio = (a + n) * (b + n) / ((c + n) * (n + 1.0L)) * x;
        term *= ratio;
        sum.add(term);
        if (term == 0.0L) return static_cast<double>(sum.sum);
        const long double r = std::max(std::abs(ratio), static_cast<long double>(x));
        if (r < 1.0L) {
            const long double tail = std::abs(term) * r / (1.0L - r);
            if (tail <= 1e-12L * std::abs(sum.sum)) return static_cast<double>(sum.sum);
        }
    }
    throw PrecisionError("hyp2f1: term cap exceeded");
}

double hyp3f2_at1(double a1, double a2, double a3, double b1, double b2) {
    for (double bk : {b1, b2}) {
        if (bk <= 0.0 && std::floor(bk) == bk) {
            throw DomainError("hyp3f2_at1: lower parameters must not be non-positive integers");
        }
    }
    const double excess = b1 + b2 - a1 - a2 - a3;
    if (!(excess > 0.0)) throw DomainError("hyp3f2_at1: series diverges (b1 + b2 - a1 - a2 - a3 <= 0)");

    // Matched comparison series u_n = Gamma(n + alpha) / Gamma(n + alpha + p).
    const double p = 1.0 + excess;
    const double sq_a = a1 * a1 + a2 * a2 + a3 * a3;
    const double sq_b = b1 * b1 + b2 * b2 + 1.0;
    const double q = -(sq_a - sq_b) / 2.0;
    const double alpha = (q - p * p / 2.0) / p;

    constexpr long kMaxTerms = 1'000'000;
    const double scale = std::max({std::abs(a1), std::abs(a2), std::abs(a3), std::abs(b1), std::abs(b2), 1.0});
    long checkpoint = std::max(1000L, static_cast<long>(50.0 * scale));

    KahanSum sum;
    long double term = 1.0L;
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (long n = 0; n < kMaxTerms; ++n) {
        if (n == checkpoint) {
            const long double tail = term * (n + alpha + p - 1.0L) / (p - 1.0L);
            const double estimate = static_cast<double>(sum.sum + tail);
            if (std::abs(estimate - previous) <= 1e-12 * std::abs(estimate)) return estimate;
            previous = estimate;
            checkpoint *= 2;
        }
        sum.add(term);
        term *= (a1 + n) * (a2 + n) * (a3 + n) / ((b1 + n) * (b2 + n) * (n + 1.0L));
        if (term == 0.0L) return static_cast<double>(sum.sum);
    }
    throw PrecisionError("hyp3f2_at1: term cap exceeded");
}

double r_phi(double phi, const AngleParam& param) {
    if (!(phi >= 0.0 && phi <= kPi / 2.0 + 1e-15)) throw DomainError("r_phi: phi must lie in [0, pi/2]");
    const double s = std::sin(std::min(phi, kPi / 2.0));
    return 0.25 * incomplete_beta(std::min(s * s, 1.0), param.a() / 2.0, param.b() / 2.0);
}

double r_phi_quadrature(double phi, const AngleParam& param) {
    if (!(phi >= 0.0 && phi <= kPi / 2.0 + 1e-15)) throw DomainError("r_phi: phi must lie in [0, pi/2]");
    if (phi == 0.0) return 0.0;
    const double a = param.a();
    const double b = param.b();
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto integrand = [a, b](double psi) {
        return 0.5 * std::pow(std::sin(psi), a - 1.0) * std::pow(std::cos(psi), b - 1.0);
    };
    return integrator.integrate(integrand, 0.0, std::min(phi, kPi / 2.0), 1e-13);
}

double separation_prob_closed_form(double theta) {
    const AngleParam param(theta);
    const double a = param.a();
    const double log_front = log_gamma((a + 1.0) / 2.0) - log_gamma((1.0 - a) / 2.0) -
                             2.0 * log_gamma(a / 2.0 + 1.0);
    const double series = hyp3f2_at1((1.0 + a) / 2.0, (1.0 + a) / 2.0, a / 2.0, a / 2.0 + 1.0, a / 2.0 + 1.0);
    return 1.0 - std::exp(log_front) * series;
}

SeparationProb separation_prob_exact(double theta) {
    if (!(theta >= 0.0 && theta <= kPi)) throw DomainError("separation_prob: theta must lie in [0, pi]");
    if (theta == 0.0) return {0.0, 0.0, true};
    if (theta == kPi) return {1.0, 1.0, true};
    const AngleParam param(theta);
    const double ha = param.a() / 2.0;
    const double hb = param.b() / 2.0;
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto kept_fraction = [ha, hb](double phi) {
        // 1 - I_{sin^2}(a, b) = I_{cos^2}(b, a); use whichever argument stays away from 1.
        const double s = std::sin(phi), c = std::cos(phi);
        if (s * s <= 0.5) return 1.0 - incomplete_beta_regularized(s * s, ha, hb);
        return incomplete_beta_regularized(c * c, hb, ha);
    };
    const double integral = integrator.integrate(kept_fraction, 0.0, kPi / 2.0, 1e-13);
    SeparationProb out;
    out.probability = std::clamp(2.0 / kPi * integral, 0.0, 1.0);
    out.closed_form = separation_prob_closed_form(theta);
    out.routes_agree = std::abs(out.probability - out.closed_form) <= 1e-6;
    return out;
}

double separation_prob(double theta) { return separation_prob_exact(theta).probability; }

double nonseparation_asymptotic(double eps) {
    if (eps == 0.0) return 0.0;
    if (!(eps > 0.0 && eps <= 0.1)) throw DomainError("nonseparation_asymptotic: eps must lie in (0, 0.1]");
    return 4.0 / kPi * eps;
}

SqrtCorrelation sqrt_correlation_2x2(double theta) {
    constexpr double kMargin = 1e-8;
    if (!(theta > kMargin && theta < kPi - kMargin)) {
        throw DomainError("sqrt_correlation_2x2: correlation matrix is singular at theta in {0, pi}");
    }
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    const double k = 1.0 / std::sqrt(2.0);
    const double sec = 1.0 / c;
    const double csc = 1.0 / s;
    const double ki = 1.0 / std::sqrt(8.0);
    SqrtCorrelation out;
    out.half = {{{k * (c + s), k * (c - s)}, {k * (c - s), k * (c + s)}}};
    out.half_inv = {{{ki * (sec + csc), ki * (sec - csc)}, {ki * (sec - csc), ki * (sec + csc)}}};
    return out;
}

}  // namespace sbr::specfun
