#pragma once

#include <string>

#include <json.hpp>

namespace sbr::maxprinciple {

// Coordinates follow the clause convention where 1 means "false": the
// boundary data is 1 - xy and the pair value is
// SDP(x, y, theta) = 1 - xy - cos(theta) sqrt(x - x^2) sqrt(y - y^2).

/// Lower-bound candidate g_1, g_2 or g_3. `sign` scales the correction term
/// (the part that vanishes on the boundary); tests flip it to check that the
/// verifier notices.
struct Candidate {
    int index = 1;
    double sign = 1.0;

    Candidate(int i = 1, double s = 1.0);
    /// Closed interval of cos(theta) the candidate is meant for.
    double cos_lo() const;
    double cos_hi() const;
};

double eval_candidate(const Candidate& g, double x, double y, double theta);

/// u_xx + u_yy + 2 cos(theta) u_xy of the candidate, from analytic second partials.
double apply_operator(const Candidate& g, double x, double y, double theta);

/// Same operator by central differences with step h.
double apply_operator_fd(const Candidate& g, double x, double y, double theta, double h = 1e-4);

double sdp_value(double x, double y, double theta);

struct GridCheck {
    double min = 0.0;
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    long points = 0;
    bool pass = false;

    nlohmann::json to_json() const;
};

struct GridSpec {
    int grid_n = 201;          ///< points per axis including the boundary
    double theta_step = 0.01;
};

/// Minimum of L g over interior grid points and sampled angles whose cosine
/// lies in [cos_lo, cos_hi] (defaults: the candidate's own range). Passes when
/// the minimum is at least -1e-8.
GridCheck verify_feasibility(const Candidate& g, const GridSpec& spec = {});
GridCheck verify_feasibility(const Candidate& g, double cos_lo, double cos_hi, const GridSpec& spec = {});

/// Largest |g - (1 - xy)| over `samples` boundary points and a sweep of angles.
/// Passes when it is exactly zero.
GridCheck verify_boundary(const Candidate& g, int samples = 400, double theta_step = 0.01);

/// Minimum of g / SDP over feasible grid configurations with SDP >= 1e-3 and
/// cos(theta) in the candidate's range; passes at target - 1e-4.
GridCheck verify_ratio(const Candidate& g, double target, const GridSpec& spec = {});

/// Applicable-candidate bound over all feasible configurations.
GridCheck combined_bound(double target, const GridSpec& spec = {});

/// f = 1 - xy with cos(theta) <= 0: L f >= 0 and f / SDP >= 3/4 - 1e-6.
GridCheck warmup_three_quarters(const GridSpec& spec = {});

constexpr double kRatioTarget = 0.8749;

struct Verification {
    bool pass = true;
    nlohmann::json detail;
};

/// Runs every check above. `g2_sign` is forwarded to the g_2 candidate.
Verification verify_all(const GridSpec& spec = {}, double g2_sign = 1.0);

}  // namespace sbr::maxprinciple
