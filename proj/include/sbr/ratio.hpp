#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbr/pde.hpp"
#include "sbr/sdp.hpp"

namespace sbr::ratio {

enum class Method { Pde, MonteCarlo, Exact };

Method parse_method(const std::string& name);
const char* method_name(Method m);

struct RatioOptions {
    double delta = 0.02;
    Method method = Method::Pde;
    double alpha = 0.0;        ///< 0 is the basic walk
    double sdp_cutoff = 1e-3;
    int grid_n = 199;
    long mc_trials = 100'000;
    double gamma = 1e-2;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    bool keep_rows = true;
};

struct RatioRow {
    sdp::Configuration config;
    std::optional<std::array<double, 3>> angles;  ///< (theta_0i, theta_0j, theta_ij) for DiCut rows
    double sdp = 0.0;
    double round = 0.0;
    double ratio = 0.0;
};

struct RatioReport {
    sdp::Problem problem = sdp::Problem::MaxCut;
    Method method = Method::Pde;
    double alpha = 0.0;
    double delta = 0.0;
    double min_ratio = 1.0;
    RatioRow argmin;
    std::size_t evaluated = 0;
    std::vector<RatioRow> rows;

    nlohmann::json to_json() const;
    void write_csv(std::ostream& os) const;
};

/// Feasible grid configurations x, y in {k delta}, theta in {k delta <= pi},
/// ordered by theta, then x, then y. With a positive cutoff, configurations
/// whose SDP value is below it are dropped.
std::vector<sdp::Configuration> enumerate_configs(sdp::Problem problem, double delta, double sdp_cutoff = 0.0);

/// Absorption value of the pair walk for configurations on [0,1]^2. PDE
/// solutions are cached per angle and shared by every marginal pair.
class RoundingOracle {
public:
    RoundingOracle(sdp::Problem problem, const RatioOptions& opts);

    double value(const sdp::Configuration& c);
    /// Half-marginal value for the centered Max-Cut problem.
    double center_value(double theta);

    const pde::PdeSolution& solution(double theta);

private:
    pde::Boundary boundary_for(bool centered) const;
    std::shared_ptr<const pde::PdeSolution> solve(double theta, bool centered);
    double degenerate(double rho, bool centered, double x, double y);

    sdp::Problem problem_;
    RatioOptions opts_;
    std::mutex mutex_;
    std::map<std::pair<double, bool>, std::shared_ptr<const pde::PdeSolution>> cache_;
};

double get_rounding_value(const sdp::Configuration& c, const RatioOptions& opts);

RatioReport approx_ratio(sdp::Problem problem, const RatioOptions& opts);

/// Same search restricted to a caller-supplied configuration list.
RatioReport approx_ratio_over(sdp::Problem problem, const std::vector<sdp::Configuration>& configs,
                              const RatioOptions& opts);

/// Max-Cut with both marginals at 1/2: theta = k * theta_step, 0 < theta <= pi.
RatioReport maxcut_half_sweep(const RatioOptions& opts, double theta_step);

/// Probability of a fixed sign pattern on three coordinates from the three
/// pairwise pattern probabilities (inclusion-exclusion with symmetric marginals).
double triple_prob(double p_ij, double p_ik, double p_jk);

/// Probability that arc i -> j is cut from pairwise separation probabilities.
double forward_edge_prob(double p0i, double p0j, double pij);

/// Angle triple realizable by three unit vectors and satisfying the l2^2
/// triangle inequalities among them.
bool dicut_feasible(double t0i, double t0j, double tij);

RatioReport dicut_ratio(const RatioOptions& opts, double delta_theta);

}  // namespace sbr::ratio
