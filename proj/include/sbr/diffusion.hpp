#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sbr/error.hpp"
#include "sbr/instances.hpp"
#include "sbr/rng.hpp"
#include "sbr/sdp.hpp"

namespace sbr::diffusion {

enum class WalkKind { Basic, Slowdown, DiCutPlusOne, Stopped };

/// Coordinate range of the cube the walk lives in.
struct Cube {
    double lo = -1.0;
    double hi = 1.0;

    static Cube centered() { return {-1.0, 1.0}; }
    static Cube unit() { return {0.0, 1.0}; }
};

struct WalkParams {
    double step = 1e-2;        ///< gamma; one step advances time by gamma^2
    double stick_tol = -1.0;   ///< negative means "equal to step"
    long max_steps = 10'000'000;
    WalkKind kind = WalkKind::Basic;
    double alpha = 0.0;        ///< slowdown exponent, used by Slowdown (and Stopped when > 0)
    double tau = 0.0;          ///< stopping time for Stopped
    std::uint64_t seed = 1;
    /// Once a single coordinate is left active its exit side is drawn with the
    /// exact martingale odds instead of being simulated.
    bool resolve_last = true;
    /// Pair walks only: far from the faces, merge undamped steps into one
    /// Gaussian step of the same total variance.
    bool aggregate_steps = true;

    double tolerance() const { return stick_tol < 0.0 ? step : stick_tol; }
    double damping_exponent() const {
        return (kind == WalkKind::Slowdown || kind == WalkKind::Stopped) ? alpha : 0.0;
    }
    void validate() const;
};

struct WalkOutcome {
    Eigen::VectorXd final;               ///< cube vertex
    std::vector<long> absorption_steps;  ///< step at which each coordinate froze (0 if frozen at start)
    long steps = 0;
};

class WalkTimeout : public Error {
public:
    WalkTimeout(const std::string& what, Eigen::VectorXd state) : Error(what), state_(std::move(state)) {}
    const Eigen::VectorXd& state() const noexcept { return state_; }

private:
    Eigen::VectorXd state_;
};

/// Sticky walk from `start` with increment covariance `cov` (unit diagonal on
/// active coordinates) until every coordinate is frozen at an endpoint.
WalkOutcome run_walk(const Eigen::MatrixXd& cov, const Eigen::VectorXd& start, const WalkParams& params,
                     Engine& rng, Cube cube = Cube::centered());

/// Same dynamics stopped at continuous time tau (ceil(tau / gamma^2) steps).
Eigen::VectorXd run_stopped_walk(const Eigen::MatrixXd& cov, const Eigen::VectorXd& start, double tau,
                                 const WalkParams& params, Engine& rng, Cube cube = Cube::unit());

/// Symmetric square root of a PSD matrix, negative eigenvalues clamped to 0.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

struct RoundResult {
    Assignment assignment;
    double value = 0.0;
};

/// One rounding of `instance` from its SDP solution.
/// Max-Cut: walk in [-1,1]^n from 0, S = {i : X_i = 1}.
/// Max-2SAT: walk in [0,1]^n from the marginals, variable i true iff X_i = 1.
/// DiCut: (n+1)-dimensional walk from 0, S = {i : X_i = X_0}.
RoundResult round_instance(const ProblemInstance& instance, const sdp::SdpSolution& solution,
                           const WalkParams& params, Engine& rng);

struct Estimate {
    double prob = 0.0;
    double stderr_ = 0.0;
    long trials = 0;
};

/// Empirical probability of the pair event for a configuration: endpoints
/// differ (Max-Cut) or the clause is satisfied (Max-2SAT, marginals are
/// probabilities of the literals being true). Trials use independent streams
/// derived from params.seed and run on up to `threads` workers.
Estimate estimate_pair_separation(const sdp::Configuration& config, const WalkParams& params, long trials,
                                  unsigned threads = 1);

/// One two-coordinate walk on [lo, hi]^2 with correlation rho; returns the
/// final corner. Exposed for tests of the fast path.
std::array<double, 2> run_pair_walk(double x, double y, double rho, const WalkParams& params, Engine& rng,
                                    Cube cube);

}  // namespace sbr::diffusion
