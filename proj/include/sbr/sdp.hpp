#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sbr/error.hpp"
#include "sbr/instances.hpp"

namespace sbr::sdp {

enum class Problem { MaxCut, Max2Sat, DiCut };

const char* problem_name(Problem p);

/// const + coef * <u_p, u_q>; p < q.
struct GramTerm {
    int p = 0;
    int q = 1;
    double coef = 0.0;
};

/// Linear function of the Gram matrix of unit rows u_0..u_n.
struct GramLinear {
    double constant = 0.0;
    std::vector<GramTerm> terms;

    double eval(const Eigen::MatrixXd& rows) const;
};

/// Relaxation over unit vectors u_0..u_n (row 0 is the reference vector).
///
/// The {0,1}-convention vectors are v_0 = u_0 and v_i = (u_0 + u_i) / 2, so
/// v_0 . v_i = |v_i|^2 holds by construction and a negated literal is -u_i.
/// For Max-2SAT v_i is the indicator of variable i being true; for DiCut it
/// is the indicator of i landing on the side of u_0. For Max-Cut row 0 does
/// not appear in the objective and is made orthogonal after solving.
struct SdpModel {
    Problem problem = Problem::MaxCut;
    int n = 0;  ///< variables; the model has n + 1 rows
    GramLinear objective;
    std::vector<GramLinear> constraints;  ///< each required >= 0
};

SdpModel build_relaxation(const MaxCutInstance& g);
SdpModel build_relaxation(const Max2SatInstance& f);
SdpModel build_relaxation(const DiCutInstance& g);
SdpModel build_relaxation(const ProblemInstance& inst);

struct SolveOptions {
    int max_iters = 4000;       ///< inner iterations per outer round
    double tol = 1e-7;          ///< constraint violation and stationarity tolerance
    int restarts = 5;
    std::uint64_t seed = 1;
    int outer_rounds = 40;
};

struct SdpSolution {
    Problem problem = Problem::MaxCut;
    Eigen::MatrixXd rows;  ///< (n + 1) x r unit vectors u_0..u_n
    double objective = 0.0;
    double max_violation = 0.0;
    double stationarity = 0.0;

    int n() const { return static_cast<int>(rows.rows()) - 1; }
    /// {0,1}-convention vectors v_0..v_n.
    Eigen::MatrixXd zero_one_vectors() const;
};

class SdpNonConvergence : public SolverError {
public:
    SdpNonConvergence(const std::string& what, SdpSolution best)
        : SolverError(what), best_(std::move(best)) {}
    const SdpSolution& best() const noexcept { return best_; }

private:
    SdpSolution best_;
};

int default_rank(int n);

/// Burer-Monteiro style ascent over products of spheres with an augmented
/// Lagrangian for the inequalities. Deterministic for a fixed seed.
SdpSolution solve_low_rank(const SdpModel& model, int rank, const SolveOptions& opts = {});
SdpSolution solve_low_rank(const SdpModel& model, const SolveOptions& opts = {});

struct Decomposition {
    std::vector<double> x;                       ///< marginals in [0, 1]
    std::vector<std::optional<Eigen::VectorXd>> directions;  ///< unit, orthogonal to v_0; empty when fixed
    Eigen::MatrixXd cosines;                     ///< n x n, cos of angle between directions (0 if fixed)
    Eigen::VectorXd v0;

    bool fixed(int i) const { return !directions[static_cast<std::size_t>(i)].has_value(); }
    double theta(int i, int j) const;
};

constexpr double kFixedThreshold = 1e-12;

Decomposition decompose(const SdpSolution& solution);

/// Walk covariance over the non-fixed coordinates, indexed by variable
/// (rows/columns of fixed coordinates are zero).
Eigen::MatrixXd walk_covariance(const Decomposition& d);

struct Configuration {
    double xi = 0.5;
    double xj = 0.5;
    double theta = 0.0;
    Problem problem = Problem::MaxCut;
};

/// Lower bounds on cos(theta) implied by the relaxation's triangle inequalities.
bool check_triangle(const Configuration& c);

/// Both-sided version: also enforces the upper bounds
/// cos(theta) <= sqrt(x(1-y)/((1-x)y)) and its mirror. Used where the
/// relaxation contains all four sign patterns of the pair inequalities.
bool check_triangle_full(const Configuration& c);

/// Per-pair SDP value. Max-Cut: x+y-2xy-2 sqrt((x-x^2)(y-y^2)) cos t.
/// Max-2SAT (x, y = probabilities of the literals being true): x+y-xy-sqrt(...) cos t.
double sdp_clause_value(const Configuration& c);

}  // namespace sbr::sdp
