#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sbr::pde {

enum class Domain { Unit, Centered };

/// Boundary data for the two-coordinate absorption problems.
enum class Boundary {
    MaxCut01,      ///< x + y - 2xy on [0,1]^2 (probability the pair is split)
    MaxCutPm,      ///< (1 - xy) / 2 on [-1,1]^2
    Max2SatFalse1, ///< 1 - xy on [0,1]^2, coordinate value 1 means "false"
    Max2SatTrue1,  ///< min(1, max(x, y)) on [0,1]^2, coordinate value 1 means "true"
};

Boundary parse_boundary(std::string_view name);
std::string_view boundary_name(Boundary b);
Domain natural_domain(Boundary b);

/// Exact boundary value. The formulas are affine along every side of the
/// square, so they equal the absorption probability of the one-dimensional
/// walk that continues along the side.
double boundary_fn(Boundary b, double x, double y);
double boundary_fn(std::string_view name, double x, double y);

struct DirichletProblem {
    double rho = 0.0;    ///< correlation cos(theta)
    double alpha = 0.0;  ///< slowdown exponent; 0 is the basic walk
    Boundary boundary = Boundary::MaxCutPm;
    int grid_n = 199;    ///< interior nodes per axis, odd, >= 15

    Domain domain() const { return natural_domain(boundary); }
    void validate() const;
};

/// Solution on the closed (grid_n + 2)^2 node grid, row-major in y.
class PdeSolution {
public:
    PdeSolution(DirichletProblem problem, std::vector<double> values, double residual);

    const DirichletProblem& problem() const noexcept { return problem_; }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double spacing() const noexcept { return h_; }
    int nodes_per_axis() const noexcept { return problem_.grid_n + 2; }
    double residual() const noexcept { return residual_; }

    double node(int i, int j) const { return values_[static_cast<std::size_t>(j) * nodes_per_axis() + i]; }
    double coordinate(int i) const { return lo_ + h_ * i; }

    /// Bilinear interpolation; exact at nodes. Throws DomainError outside the square.
    double query(double x, double y) const;
    double center() const;

    /// Writes "x,y,u" rows with a header line.
    void write_csv(std::ostream& os) const;

private:
    DirichletProblem problem_;
    std::vector<double> values_;
    double residual_;
    double lo_;
    double hi_;
    double h_;
};

/// Solves the second-order Dirichlet problem
///   a(x) u_xx + 2 rho sqrt(a(x) b(y)) u_xy + b(y) u_yy = 0,
///   a(x) = (1 - X^2)^alpha with X the coordinate mapped to [-1, 1],
/// on a uniform grid with a nine-point stencil. The cross derivative uses the
/// diagonal pair matching sign(rho).
PdeSolution solve_dirichlet(const DirichletProblem& problem);

/// Second-derivative coefficient (1 - X^2)^alpha along one axis at node k of
/// the solver grid (k = 0 and k = grid_n + 1 are the boundary).
double axis_coefficient(const DirichletProblem& problem, int k);

/// Exact absorption value at the singular correlations rho = +-1. The basic
/// walk moves on a straight line; the damped walk has a closed form only on
/// the line y = rho x (centered coordinates) and throws DomainError elsewhere.
double degenerate_limit(double rho, double alpha, Boundary boundary, double x, double y);

}  // namespace sbr::pde
