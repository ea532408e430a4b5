#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sbr/diffusion.hpp"
#include "sbr/instances.hpp"
#include "sbr/ratio.hpp"
#include "sbr/rng.hpp"
#include "sbr/sdp.hpp"

namespace sbr::constrained {

/// Cardinality constraints |S ∩ F_i| = b_i with violation budget epsilon.
struct SideConstraints {
    std::vector<std::vector<int>> families;
    std::vector<int> targets;
    double epsilon = 0.1;

    std::size_t size() const { return families.size(); }
    /// Throws DomainError unless every family lies in [0, n) and 0 <= b_i <= |F_i|.
    void validate(int n) const;
};

/// One constraint per non-comment line: "b: v1 v2 ...". '#' starts a comment.
SideConstraints parse_constraints(std::string_view text, int n, double epsilon = 0.1);

/// |S ∩ F_i| - b_i for every family.
std::vector<int> violations(const SideConstraints& c, const Assignment& s);
int max_violation(const SideConstraints& c, const Assignment& s);

/// Fractional point meeting disjoint families exactly: b_i / |F_i| on F_i,
/// 1/2 elsewhere. Throws DomainError when families overlap.
Eigen::VectorXd disjoint_feasible_point(const SideConstraints& c, int n);

/// log2(2 sqrt(2) / eps).
double default_tau(double eps);

// ---- baseline ------------------------------------------------------------

Eigen::VectorXd rescale_marginals(const Eigen::VectorXd& x, double eps);

/// Probability that independent rounding with marginals yi, yj cuts the edge.
double cut_probability(double yi, double yj);

struct BaselineResult {
    Assignment set;
    double cut = 0.0;
    int max_violation = 0;
    int attempts = 0;
    bool success = false;
    // Statistics over all attempts, reported on failure too.
    double mean_cut = 0.0;
    double violation_pass_rate = 0.0;
    double cut_pass_rate = 0.0;
};

/// Independent rounding of the rescaled point, repeated until the cut is at
/// least (eps/2) a(E) and every violation is at most eps n, or the cap is hit.
BaselineResult baseline_round(const Eigen::VectorXd& x, const MaxCutInstance& g, const SideConstraints& c,
                              double eps, Engine& rng, int retry_cap = 1000);

// ---- stopped walk with Bernoulli finish ----------------------------------

struct ConstrainedResult {
    Assignment set;
    int max_violation = 0;
    double cut_value = 0.0;
    Eigen::VectorXd stopped;  ///< X_tau
};

/// Walk on [0,1]^n from x with increment covariance W, stopped at tau, then
/// each vertex joins S independently with probability (X_tau)_i. Uses
/// params.step, params.stick_tol and params.alpha.
ConstrainedResult constrained_round(const Eigen::VectorXd& x, const Eigen::MatrixXd& W, const MaxCutInstance& g,
                                    const SideConstraints& c, double tau, const diffusion::WalkParams& params,
                                    Engine& rng);
ConstrainedResult constrained_round(const sdp::Decomposition& d, const MaxCutInstance& g, const SideConstraints& c,
                                    double tau, const diffusion::WalkParams& params, Engine& rng);

/// Separation probability of a pair under the stopped walk and Bernoulli
/// finish, using the exact conditional expectation given X_tau.
diffusion::Estimate stopped_pair_separation(const sdp::Configuration& config, double tau,
                                            const diffusion::WalkParams& params, long trials, unsigned threads = 1);

struct StoppedPairReport {
    ratio::RatioReport ratio;
    double tau = 0.0;
    /// Upper bound on the change from stopping at tau instead of absorption.
    double truncation = 0.0;
};

/// Worst separation ratio over feasible [0,1] configurations. The absorbed
/// value comes from the PDE route; finite tau adds at most `truncation`.
StoppedPairReport stopped_pair_ratio(const ratio::RatioOptions& opts, double tau = 50.0);

// ---- lemma validators ----------------------------------------------------

struct HittingProfile {
    double start = 0.5;
    long trials = 0;
    std::vector<double> survival;  ///< index t: P[coordinate still inside at time t]
    std::vector<double> bound;     ///< 4^-t

    /// survival[t] <= bound[t] * (1 + slack) for every t.
    bool within(double slack) const;
    nlohmann::json to_json() const;
};

HittingProfile hitting_profile(long trials, int t_max, const diffusion::WalkParams& params, unsigned threads = 1,
                               double start = 0.5);

struct TailRung {
    double s = 0.0;
    double empirical = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct ConcentrationReport {
    double tau = 0.0;
    double variance_proxy = 0.0;  ///< tau * y^T W y
    double mean_deviation = 0.0;  ///< empirical mean of sum_F (X_tau)_i - x_i
    double deviation_stderr = 0.0;
    long trials = 0;
    std::vector<TailRung> rungs;
    bool pass = false;

    nlohmann::json to_json() const;
};

/// Tail of sum_{i in F} (X_tau)_i - x_i against 2 exp(-s^2 / (2 tau y^T W y)),
/// PASS when every rung is within 1.5 times the bound.
ConcentrationReport concentration_check(const Eigen::VectorXd& x, const Eigen::MatrixXd& W,
                                        const std::vector<int>& family, double tau, long trials,
                                        const diffusion::WalkParams& params, unsigned threads = 1);

/// Gram matrix of n random unit vectors in R^dim (unit diagonal, off-diagonal
/// entries of order 1/sqrt(dim)).
Eigen::MatrixXd synthetic_covariance(int n, int dim, Engine& rng);

}  // namespace sbr::constrained
