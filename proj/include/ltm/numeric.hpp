#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace ltm::numeric {

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

// Root of f on [lo, hi] where f(lo) and f(hi) have opposite signs (or one is
// zero). Secant steps, falling back to bisection whenever the secant leaves
// the bracket or the bracket fails to halve over two steps.
RootResult bracketed_root(const std::function<double(double)>& f, double lo,
                          double hi, double f_lo, double f_hi,
                          double xtol_abs, double xtol_rel,
                          int max_iterations = 300);

struct MinResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

// Golden-section minimisation on [lo, hi], starting from an interior seed.
MinResult golden_section(const std::function<double(double)>& f, double lo,
                         double seed, double hi, double xtol_abs,
                         int max_iterations = 500);

// Sample f on n uniform points of [lo, hi], then golden-refine between the
// neighbours of the best sample.
MinResult scan_then_golden(const std::function<double(double)>& f, double lo,
                           double hi, int n_scan, double xtol_abs);

struct SimplexResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Nelder-Mead with standard coefficients. Stops when the simplex diameter
// falls below xtol_rel (relative to the best vertex) or the spread of values
// below ftol_rel (relative to the best value).
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& start,
                          const Eigen::VectorXd& initial_step, double ftol_rel,
                          double xtol_rel, int max_iterations = 2000);

using ResidualFn =
    std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& out)>;

struct LeastSquaresOptions {
  int max_iterations = 500;
  double step_tol_rel = 1e-8;
  double cost_tol_rel = 1e-12;
  double fd_step_rel = 1e-7;
  double initial_damping = 1e-3;
};

struct LeastSquaresResult {
  Eigen::VectorXd x;
  double cost = 0.0;  // 0.5 * |r|^2
  int iterations = 0;
  bool converged = false;
  Eigen::MatrixXd jacobian;  // at x
};

// Forward-difference Jacobian.
Eigen::MatrixXd numeric_jacobian(const ResidualFn& residuals,
                                 const Eigen::VectorXd& x, int n_residuals,
                                 double step_rel);

// Damped Gauss-Newton (Levenberg-Marquardt, Marquardt diagonal scaling).
LeastSquaresResult levenberg_marquardt(const ResidualFn& residuals,
                                       const Eigen::VectorXd& start,
                                       int n_residuals,
                                       const LeastSquaresOptions& options = {});

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> values);

}  // namespace ltm::numeric
