#pragma once

#include <array>

namespace sbr::specfun {

/// Angle between two unit vectors expressed as a fraction of pi.
/// `a = theta / pi` and `b = 1 - a`, with theta strictly inside (0, pi).
class AngleParam {
public:
    explicit AngleParam(double theta);
    static AngleParam from_fraction(double a);

    double a() const noexcept { return a_; }
    double b() const noexcept { return 1.0 - a_; }
    double theta() const noexcept;

private:
    AngleParam() = default;
    double a_ = 0.5;
};

/// ln Gamma(z) for z > 0 (Lanczos, g = 7).
double log_gamma(double z);

/// Complete beta function B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b).
double beta(double a, double b);

/// Regularized incomplete beta I_x(a, b) in [0, 1].
double incomplete_beta_regularized(double x, double a, double b);

/// Unregularized incomplete beta integral B_x(a, b) = int_0^x t^(a-1) (1-t)^(b-1) dt.
double incomplete_beta(double x, double a, double b);

/// Gauss hypergeometric 2F1(a, b; c; x) by direct summation, 0 <= x < 1.
double hyp2f1(double a, double b, double c, double x);

/// 3F2(a1, a2, a3; b1, b2; 1). Requires b1 + b2 - a1 - a2 - a3 > 0.
///
/// The series converges like n^-(1+s) with s the parameter excess, so the
/// partial sum is completed with the tail of a matched gamma-ratio series
/// whose sum telescopes; the remaining error is O(N^-2) relative to the tail.
double hyp3f2_at1(double a1, double a2, double a3, double b1, double b2);

/// Side-arc length r(phi) = 1/4 B_{sin^2 phi}(a/2, b/2) of the rhombus image,
/// phi in [0, pi/2].
double r_phi(double phi, const AngleParam& param);

/// Same quantity by tanh-sinh quadrature of 1/2 sin^(a-1) cos^(b-1) on [0, phi].
double r_phi_quadrature(double phi, const AngleParam& param);

/// Separation probability of the basic sticky walk started at the centre of
/// [-1,1]^2 with correlation cos(theta).
struct SeparationProb {
    double probability = 0.0;  ///< integral route (authoritative)
    double closed_form = 0.0;  ///< gamma / 3F2 route
    bool routes_agree = true;  ///< |probability - closed_form| <= 1e-6
};

SeparationProb separation_prob_exact(double theta);

/// Convenience: the integral-route value only.
double separation_prob(double theta);

/// The gamma / 3F2 closed form alone, theta in (0, pi).
double separation_prob_closed_form(double theta);

/// Leading-order non-separation probability (4 / pi) eps for theta = (1 - eps) pi.
double nonseparation_asymptotic(double eps);

using Matrix2 = std::array<std::array<double, 2>, 2>;

struct SqrtCorrelation {
    Matrix2 half;      ///< W^(1/2)
    Matrix2 half_inv;  ///< W^(-1/2)
};

/// Explicit principal square root of [[1, cos t], [cos t, 1]] and its inverse.
SqrtCorrelation sqrt_correlation_2x2(double theta);

}  // namespace sbr::specfun
