#include "sbr/pde.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <ostream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "sbr/error.hpp"

namespace sbr::pde {

namespace {

constexpr double kRhoClamp = 1.0 - 1e-9;
constexpr int kDirectLimit = 399;

// Nonnegative decomposition D = sum_k w_k e_k e_k^T of the tensor
// D = [[a, c], [c, b]] over integer offsets, from an obtuse superbase
// (Selling's reduction). For |c| <= min(a, b) the offsets are (1,0), (0,1)
// and (1, sign c), i.e. the usual nine-point pattern.
struct Offsets {
    std::array<std::array<int, 2>, 3> e{};
    std::array<double, 3> w{};
};

Offsets selling(double a, double c, double b) {
    using V = std::array<long, 2>;
    auto dot = [&](const V& u, const V& v) {
        return a * u[0] * v[0] + c * (u[0] * v[1] + u[1] * v[0]) + b * u[1] * v[1];
    };
    std::array<V, 3> sb = {V{1, 0}, V{0, 1}, V{-1, -1}};
    const double tol = 1e-15 * (a + b);
    for (int it = 0; it < 100000; ++it) {
        bool changed = false;
        for (int i = 0; i < 3 && !changed; ++i) {
            for (int j = i + 1; j < 3 && !changed; ++j) {
                if (dot(sb[i], sb[j]) > tol) {
                    const int k = 3 - i - j;
                    sb[k] = {sb[i][0] - sb[j][0], sb[i][1] - sb[j][1]};
                    sb[i] = {-sb[i][0], -sb[i][1]};
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }
    Offsets o;
    for (int k = 0; k < 3; ++k) {
        const int i = (k + 1) % 3, j = (k + 2) % 3;
        o.w[k] = std::max(0.0, -dot(sb[i], sb[j]));
        o.e[k] = {static_cast<int>(-sb[k][1]), static_cast<int>(sb[k][0])};
    }
    return o;
}

// Nested-dissection order of the n x n interior grid; separators are `sep` lines wide.
Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> dissection(int n, int sep) {
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm(n * n);
    int next = 0;
    auto place = [&](int i, int j) { perm.indices()[j * n + i] = next++; };
    std::function<void(int, int, int, int)> split = [&](int i0, int i1, int j0, int j1) {
        const int w = i1 - i0, h = j1 - j0;
        if (w <= 0 || h <= 0) return;
        if (w <= 2 * sep + 2 || h <= 2 * sep + 2) {
            for (int j = j0; j < j1; ++j)
                for (int i = i0; i < i1; ++i) place(i, j);
            return;
        }
        if (w >= h) {
            const int s = i0 + (w - sep) / 2;
            split(i0, s, j0, j1);
            split(s + sep, i1, j0, j1);
            for (int j = j0; j < j1; ++j)
                for (int i = s; i < s + sep; ++i) place(i, j);
        } else {
            const int s = j0 + (h - sep) / 2;
            split(i0, i1, j0, s);
            split(i0, i1, s + sep, j1);
            for (int j = s; j < s + sep; ++j)
                for (int i = i0; i < i1; ++i) place(i, j);
        }
    };
    split(0, n, 0, n);
    return perm;
}

double to_centered(Domain d, double x) { return d == Domain::Unit ? 2.0 * x - 1.0 : x; }
double from_centered(Domain d, double X) { return d == Domain::Unit ? 0.5 * (X + 1.0) : X; }

}  // namespace

Boundary parse_boundary(std::string_view name) {
    if (name == "maxcut01") return Boundary::MaxCut01;
    if (name == "maxcut_pm") return Boundary::MaxCutPm;
    if (name == "max2sat_false1") return Boundary::Max2SatFalse1;
    if (name == "max2sat_true1") return Boundary::Max2SatTrue1;
    throw DomainError("unknown boundary function '" + std::string(name) + "'");
}

std::string_view boundary_name(Boundary b) {
    switch (b) {
        case Boundary::MaxCut01: return "maxcut01";
        case Boundary::MaxCutPm: return "maxcut_pm";
        case Boundary::Max2SatFalse1: return "max2sat_false1";
        case Boundary::Max2SatTrue1: return "max2sat_true1";
    }
    return "?";
}

Domain natural_domain(Boundary b) { return b == Boundary::MaxCutPm ? Domain::Centered : Domain::Unit; }

double boundary_fn(Boundary b, double x, double y) {
    switch (b) {
        case Boundary::MaxCut01: return x + y - 2.0 * x * y;
        case Boundary::MaxCutPm: return 0.5 * (1.0 - x * y);
        case Boundary::Max2SatFalse1: return 1.0 - x * y;
        case Boundary::Max2SatTrue1: return std::min(1.0, std::max(x, y));
    }
    return 0.0;
}

double boundary_fn(std::string_view name, double x, double y) { return boundary_fn(parse_boundary(name), x, y); }

void DirichletProblem::validate() const {
    if (!(std::abs(rho) <= 1.0)) throw DomainError("DirichletProblem: rho must lie in [-1, 1]");
    if (!(alpha >= 0.0 && alpha < 2.0)) throw DomainError("DirichletProblem: alpha must lie in [0, 2)");
    if (grid_n < 15 || grid_n % 2 == 0) throw DomainError("DirichletProblem: grid_n must be odd and >= 15");
}

PdeSolution::PdeSolution(DirichletProblem problem, std::vector<double> values, double residual)
    : problem_(problem), values_(std::move(values)), residual_(residual) {
    const bool unit = problem_.domain() == Domain::Unit;
    lo_ = unit ? 0.0 : -1.0;
    hi_ = 1.0;
    h_ = (hi_ - lo_) / (problem_.grid_n + 1);
    const auto m = static_cast<std::size_t>(nodes_per_axis());
    if (values_.size() != m * m) throw DomainError("PdeSolution: value grid has the wrong size");
}

double PdeSolution::query(double x, double y) const {
    constexpr double kSlack = 1e-12;
    if (!(x >= lo_ - kSlack && x <= hi_ + kSlack && y >= lo_ - kSlack && y <= hi_ + kSlack)) {
        throw DomainError("PdeSolution::query: point outside the domain");
    }
    const int last = nodes_per_axis() - 1;
    const double fx = std::clamp((x - lo_) / h_, 0.0, static_cast<double>(last));
    const double fy = std::clamp((y - lo_) / h_, 0.0, static_cast<double>(last));
    // Snap to a node when within rounding distance so node queries are exact.
    const double rx = std::round(fx);
    const double ry = std::round(fy);
    const bool on_x = std::abs(fx - rx) < 1e-9;
    const bool on_y = std::abs(fy - ry) < 1e-9;
    if (on_x && on_y) return node(static_cast<int>(rx), static_cast<int>(ry));
    const int i = std::min(static_cast<int>(on_x ? rx : std::floor(fx)), last - 1);
    const int j = std::min(static_cast<int>(on_y ? ry : std::floor(fy)), last - 1);
    const double tx = on_x ? rx - i : fx - i;
    const double ty = on_y ? ry - j : fy - j;
    return (1.0 - tx) * (1.0 - ty) * node(i, j) + tx * (1.0 - ty) * node(i + 1, j) +
           (1.0 - tx) * ty * node(i, j + 1) + tx * ty * node(i + 1, j + 1);
}

double PdeSolution::center() const {
    const int c = (problem_.grid_n + 1) / 2;
    return node(c, c);
}

void PdeSolution::write_csv(std::ostream& os) const {
    os << "x,y,u\n";
    const int m = nodes_per_axis();
    os.precision(17);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) os << coordinate(i) << ',' << coordinate(j) << ',' << node(i, j) << '\n';
    }
}

double axis_coefficient(const DirichletProblem& problem, int k) {
    problem.validate();
    const int m = problem.grid_n + 2;
    if (k < 0 || k >= m) throw DomainError("axis_coefficient: node index out of range");
    if (problem.alpha == 0.0) return 1.0;
    const Domain domain = problem.domain();
    const double lo = domain == Domain::Unit ? 0.0 : -1.0;
    const double h = (1.0 - lo) / (problem.grid_n + 1);
    const double X = to_centered(domain, lo + h * k);
    return std::pow(std::max(1.0 - X * X, 0.0), problem.alpha);
}

PdeSolution solve_dirichlet(const DirichletProblem& input) {
    input.validate();
    DirichletProblem problem = input;
    problem.rho = std::clamp(problem.rho, -kRhoClamp, kRhoClamp);

    const int n = problem.grid_n;
    const int m = n + 2;
    const Domain domain = problem.domain();
    const double lo = domain == Domain::Unit ? 0.0 : -1.0;
    const double h = (1.0 - lo) / (n + 1);
    const double alpha = problem.alpha;
    const double rho = problem.rho;

    std::vector<double> values(static_cast<std::size_t>(m) * m, 0.0);
    auto at = [m](int i, int j) { return static_cast<std::size_t>(j) * m + i; };
    for (int k = 0; k < m; ++k) {
        const double t = lo + h * k;
        values[at(k, 0)] = boundary_fn(problem.boundary, t, lo);
        values[at(k, m - 1)] = boundary_fn(problem.boundary, t, 1.0);
        values[at(0, k)] = boundary_fn(problem.boundary, lo, t);
        values[at(m - 1, k)] = boundary_fn(problem.boundary, 1.0, t);
    }

    // Diffusion factor sqrt((1 - X^2)^alpha) at each node coordinate.
    std::vector<double> damp(static_cast<std::size_t>(m), 1.0);
    if (alpha > 0.0) {
        for (int k = 1; k < m - 1; ++k) damp[k] = std::sqrt(axis_coefficient(problem, k));
    }

    const auto unknowns = static_cast<Eigen::Index>(n) * n;
    auto index = [n](int i, int j) { return static_cast<Eigen::Index>(j - 1) * n + (i - 1); };
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(unknowns) * 9);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns);

    for (int j = 1; j <= n; ++j) {
        for (int i = 1; i <= n; ++i) {
            const double a = damp[i] * damp[i];
            const double b = damp[j] * damp[j];
            const double c = rho * damp[i] * damp[j];
            const Eigen::Index row = index(i, j);
            double diag = 0.0;
            auto add = [&](int ii, int jj, double w) {
                if (ii == 0 || jj == 0 || ii == m - 1 || jj == m - 1) rhs[row] -= w * values[at(ii, jj)];
                else triplets.emplace_back(row, index(ii, jj), w);
            };
            // Second difference along e with arms t+ and t- (in units of e h).
            // Arms shorter than 1 end on the boundary, where the data is exact.
            auto arm = [&](int p, int q, double& t, double& value, int& ii, int& jj) {
                ii = i + p;
                jj = j + q;
                if (ii >= 0 && ii < m && jj >= 0 && jj < m) {
                    t = 1.0;
                    return false;
                }
                t = 1.0;
                if (p > 0) t = std::min(t, static_cast<double>(m - 1 - i) / p);
                if (p < 0) t = std::min(t, static_cast<double>(i) / -p);
                if (q > 0) t = std::min(t, static_cast<double>(m - 1 - j) / q);
                if (q < 0) t = std::min(t, static_cast<double>(j) / -q);
                const double X = std::clamp(lo + h * (i + t * p), lo, 1.0);
                const double Y = std::clamp(lo + h * (j + t * q), lo, 1.0);
                value = boundary_fn(problem.boundary, X, Y);
                return true;
            };
            const Offsets off = selling(a, c, b);
            for (int k = 0; k < 3; ++k) {
                if (off.w[k] <= 0.0) continue;
                const int p = off.e[k][0], q = off.e[k][1];
                double tp, tm, vp = 0.0, vm = 0.0;
                int ip, jp, im, jm;
                const bool cut_p = arm(p, q, tp, vp, ip, jp);
                const bool cut_m = arm(-p, -q, tm, vm, im, jm);
                const double scale = 2.0 * off.w[k] / (tp + tm);
                const double wp = scale / tp, wm = scale / tm;
                if (cut_p) rhs[row] -= wp * vp;
                else add(ip, jp, wp);
                if (cut_m) rhs[row] -= wm * vm;
                else add(im, jm, wm);
                diag -= wp + wm;
            }
            triplets.emplace_back(row, row, diag);
        }
    }

    Eigen::SparseMatrix<double> A(unknowns, unknowns);
    A.setFromTriplets(triplets.begin(), triplets.end());
    A.makeCompressed();

    Eigen::VectorXd u;
    if (n <= kDirectLimit && alpha == 0.0) {
        // Constant coefficients: -A is symmetric positive definite with a one-cell stencil.
        const auto perm = dissection(n, 1);
        Eigen::SparseMatrix<double> B;
        B = (-A).twistedBy(perm);
        const Eigen::VectorXd prhs = perm * rhs;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::NaturalOrdering<int>> ldlt;
        ldlt.compute(B);
        if (ldlt.info() != Eigen::Success) throw SolverError("solve_dirichlet: sparse factorization failed");
        Eigen::VectorXd v = -ldlt.solve(prhs);
        v -= ldlt.solve(prhs + B * v);
        u = perm.transpose() * v;
    } else if (n <= kDirectLimit) {
        // Selling offsets can be long near the corners, which defeats nested dissection.
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(A);
        if (lu.info() != Eigen::Success) throw SolverError("solve_dirichlet: sparse factorization failed");
        u = lu.solve(rhs);
        // One round of iterative refinement.
        u += lu.solve(rhs - A * u);
    } else {
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
        solver.setTolerance(1e-12);
        solver.setMaxIterations(20000);
        solver.compute(A);
        if (solver.info() != Eigen::Success) throw SolverError("solve_dirichlet: preconditioner setup failed");
        u = solver.solve(rhs);
        if (solver.info() != Eigen::Success) throw SolverError("solve_dirichlet: iterative solve did not converge");
    }
    const double rnorm = std::max(rhs.norm(), 1e-300);
    const double residual = (A * u - rhs).norm() / rnorm;
    if (!std::isfinite(residual) || residual > 1e-10) {
        throw SolverError("solve_dirichlet: relative residual " + std::to_string(residual) + " above 1e-10");
    }
    for (int j = 1; j <= n; ++j) {
        for (int i = 1; i <= n; ++i) values[at(i, j)] = u[index(i, j)];
    }
    return PdeSolution(input, std::move(values), residual);
}

double degenerate_limit(double rho, double alpha, Boundary boundary, double x, double y) {
    if (!(std::abs(rho) == 1.0)) throw DomainError("degenerate_limit: rho must be +1 or -1");
    if (!(alpha >= 0.0 && alpha < 2.0)) throw DomainError("degenerate_limit: alpha must lie in [0, 2)");
    const Domain domain = natural_domain(boundary);
    const double X = to_centered(domain, x);
    const double Y = to_centered(domain, y);
    if (!(std::abs(X) <= 1.0 + 1e-12 && std::abs(Y) <= 1.0 + 1e-12)) {
        throw DomainError("degenerate_limit: point outside the domain");
    }
    auto value = [&](double px, double py) {
        return boundary_fn(boundary, from_centered(domain, px), from_centered(domain, py));
    };
    if (std::abs(X) >= 1.0 || std::abs(Y) >= 1.0) return value(std::clamp(X, -1.0, 1.0), std::clamp(Y, -1.0, 1.0));

    const double s = rho > 0.0 ? 1.0 : -1.0;
    if (alpha > 0.0 && std::abs(Y - s * X) > 1e-12) {
        // Off the symmetric line the damping differs between the coordinates
        // and the pair no longer moves on a fixed line.
        throw DomainError("degenerate_limit: no closed form for the damped walk off the line y = rho x");
    }
    // Both coordinates receive the same increment up to sign, so the pair
    // moves on the line Y = c + s X. X is a martingale, which fixes the odds
    // of the two exit ends.
    const double c = Y - s * X;
    double upper = 1.0;
    double lower = -1.0;
    if (s > 0.0) {
        if (c > 0.0) upper = 1.0 - c;
        if (c < 0.0) lower = -1.0 - c;
    } else {
        if (c > 0.0) lower = c - 1.0;
        if (c < 0.0) upper = c + 1.0;
    }
    if (upper - lower <= 0.0) return value(X, Y);
    const double p_up = std::clamp((X - lower) / (upper - lower), 0.0, 1.0);
    const double y_up = std::clamp(c + s * upper, -1.0, 1.0);
    const double y_lo = std::clamp(c + s * lower, -1.0, 1.0);
    return p_up * value(upper, y_up) + (1.0 - p_up) * value(lower, y_lo);
}

}  // namespace sbr::pde
