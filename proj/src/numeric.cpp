#include "ltm/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ltm/error.hpp"

namespace ltm::numeric {

namespace {

bool same_sign(double a, double b) { return (a < 0.0) == (b < 0.0); }

}  // namespace

RootResult bracketed_root(const std::function<double(double)>& f, double lo,
                          double hi, double f_lo, double f_hi,
                          double xtol_abs, double xtol_rel,
                          int max_iterations) {
  if (f_lo == 0.0) return {lo, 0.0, 0};
  if (f_hi == 0.0) return {hi, 0.0, 0};
  if (same_sign(f_lo, f_hi))
    throw SolverError("bracketed_root: no sign change on the bracket");

  double a = lo, b = hi, fa = f_lo, fb = f_hi;
  double width_before_last = std::abs(b - a);
  double width_last = width_before_last;
  int retained_side = 0;  // +1: a kept twice in a row, -1: b kept twice
  bool force_bisect = false;
  int it = 0;
  for (; it < max_iterations; ++it) {
    const double width = std::abs(b - a);
    if (width <= xtol_abs + xtol_rel * std::max(std::abs(a), std::abs(b)))
      break;

    double x = b - fb * (b - a) / (fb - fa);
    const double lo_x = std::min(a, b), hi_x = std::max(a, b);
    if (force_bisect || !(x > lo_x && x < hi_x)) x = 0.5 * (a + b);
    force_bisect = false;

    const double fx = f(x);
    if (fx == 0.0) return {x, 0.0, it + 1};
    if (same_sign(fx, fa)) {
      a = x;
      fa = fx;
      // Illinois: b survived again, damp its weight.
      if (retained_side == -1) fb *= 0.5;
      retained_side = -1;
    } else {
      b = x;
      fb = fx;
      if (retained_side == 1) fa *= 0.5;
      retained_side = 1;
    }

    const double new_width = std::abs(b - a);
    if (new_width > 0.5 * width_before_last) force_bisect = true;
    width_before_last = width_last;
    width_last = new_width;
  }
  // fa/fb may carry Illinois scaling; re-evaluating costs an extra call, so
  // report the midpoint of the final bracket.
  const double x = 0.5 * (a + b);
  return {x, f(x), it};
}

MinResult golden_section(const std::function<double(double)>& f, double lo,
                         double seed, double hi, double xtol_abs,
                         int max_iterations) {
  constexpr double R = 0.61803398874989490;
  constexpr double C = 1.0 - R;
  if (hi < lo) std::swap(lo, hi);
  if (!(seed > lo && seed < hi)) seed = lo + R * (hi - lo);
  double x0 = lo, x3 = hi, x1, x2;
  if (std::abs(hi - seed) > std::abs(seed - lo)) {
    x1 = seed;
    x2 = seed + C * (hi - seed);
  } else {
    x2 = seed;
    x1 = seed - C * (seed - lo);
  }
  double f1 = f(x1), f2 = f(x2);
  int it = 0;
  while (std::abs(x3 - x0) > xtol_abs && it < max_iterations) {
    if (f2 < f1) {
      x0 = x1;
      x1 = x2;
      x2 = R * x2 + C * x3;
      f1 = f2;
      f2 = f(x2);
    } else {
      x3 = x2;
      x2 = x1;
      x1 = R * x1 + C * x0;
      f2 = f1;
      f1 = f(x1);
    }
    ++it;
  }
  if (f1 < f2) return {x1, f1, it};
  return {x2, f2, it};
}

MinResult scan_then_golden(const std::function<double(double)>& f, double lo,
                           double hi, int n_scan, double xtol_abs) {
  n_scan = std::max(n_scan, 3);
  std::vector<double> xs(n_scan), fs(n_scan);
  for (int i = 0; i < n_scan; ++i) {
    xs[i] = lo + (hi - lo) * i / (n_scan - 1);
    fs[i] = f(xs[i]);
  }
  const auto best = static_cast<int>(
      std::min_element(fs.begin(), fs.end()) - fs.begin());
  const double a = xs[std::max(best - 1, 0)];
  const double c = xs[std::min(best + 1, n_scan - 1)];
  auto refined = golden_section(f, a, xs[best], c, xtol_abs);
  refined.iterations += n_scan;
  if (fs[best] < refined.fx) return {xs[best], fs[best], refined.iterations};
  return refined;
}

SimplexResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& start, const Eigen::VectorXd& initial_step,
    double ftol_rel, double xtol_rel, int max_iterations) {
  const auto n = start.size();
  std::vector<Eigen::VectorXd> pts(n + 1, start);
  std::vector<double> vals(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) pts[i + 1][i] += initial_step[i];
  for (Eigen::Index i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  std::vector<std::size_t> order(n + 1);
  SimplexResult result;
  int it = 0;
  for (; it < max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t l, std::size_t r) { return vals[l] < vals[r]; });
    const auto best = order.front(), worst = order.back();
    const auto second_worst = order[n - 1];

    double diameter = 0.0;
    for (Eigen::Index i = 0; i <= n; ++i)
      diameter = std::max(diameter, (pts[i] - pts[best]).lpNorm<Eigen::Infinity>());
    const double scale = pts[best].lpNorm<Eigen::Infinity>() + 1e-300;
    const double spread = std::abs(vals[worst] - vals[best]);
    if (diameter <= xtol_rel * scale ||
        spread <= ftol_rel * std::abs(vals[best]) || spread == 0.0) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i <= n; ++i)
      if (static_cast<std::size_t>(i) != worst) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
    const double f_r = f(reflected);
    if (f_r < vals[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double f_e = f(expanded);
      if (f_e < f_r) {
        pts[worst] = expanded;
        vals[worst] = f_e;
      } else {
        pts[worst] = reflected;
        vals[worst] = f_r;
      }
      continue;
    }
    if (f_r < vals[second_worst]) {
      pts[worst] = reflected;
      vals[worst] = f_r;
      continue;
    }
    const bool outside = f_r < vals[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double f_c = f(contracted);
    if (f_c < (outside ? f_r : vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = f_c;
      continue;
    }
    for (Eigen::Index i = 0; i <= n; ++i) {
      if (static_cast<std::size_t>(i) == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = f(pts[i]);
    }
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(vals.begin(), vals.end()) - vals.begin());
  result.x = pts[best];
  result.fx = vals[best];
  result.iterations = it;
  return result;
}

Eigen::MatrixXd numeric_jacobian(const ResidualFn& residuals,
                                 const Eigen::VectorXd& x, int n_residuals,
                                 double step_rel) {
  Eigen::VectorXd r0(n_residuals), r1(n_residuals);
  residuals(x, r0);
  Eigen::MatrixXd jac(n_residuals, x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = step_rel * std::max(std::abs(x[j]), 1.0);
    xp[j] = x[j] + h;
    residuals(xp, r1);
    jac.col(j) = (r1 - r0) / (xp[j] - x[j]);
    xp[j] = x[j];
  }
  return jac;
}

LeastSquaresResult levenberg_marquardt(const ResidualFn& residuals,
                                       const Eigen::VectorXd& start,
                                       int n_residuals,
                                       const LeastSquaresOptions& options) {
  LeastSquaresResult out;
  Eigen::VectorXd x = start;
  Eigen::VectorXd r(n_residuals), r_new(n_residuals);
  residuals(x, r);
  double cost = 0.5 * r.squaredNorm();
  double lambda = options.initial_damping;

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (cost == 0.0) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd jac =
        numeric_jacobian(residuals, x, n_residuals, options.fd_step_rel);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12 * jtj.diagonal().maxCoeff() + 1e-300);

    bool accepted = false;
    Eigen::VectorXd step;
    double cost_new = cost;
    while (lambda < 1e16) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * diag;
      step = a.ldlt().solve(-grad);
      if (!step.allFinite()) {
        lambda *= 4.0;
        continue;
      }
      residuals(x + step, r_new);
      cost_new = 0.5 * r_new.squaredNorm();
      if (std::isfinite(cost_new) && cost_new < cost) {
        accepted = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) {
      // No descent direction left at machine precision.
      out.converged = true;
      break;
    }
    const double rel_cost = (cost - cost_new) / cost;
    const double rel_step = step.norm() / (x.norm() + options.step_tol_rel);
    x += step;
    r = r_new;
    cost = cost_new;
    lambda = std::max(lambda / 3.0, 1e-12);
    if (rel_step < options.step_tol_rel || rel_cost < options.cost_tol_rel) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.x = x;
  out.cost = cost;
  out.iterations = it;
  out.jacobian = numeric_jacobian(residuals, x, n_residuals, options.fd_step_rel);
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = x.size();
  if (n < 2 || y.size() != n) throw Error("fit_line needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error("fit_line: all x values identical");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += e * e;
  }
  fit.rms = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(values.begin(), values.begin() + mid));
  }
  return m;
}

}  // namespace ltm::numeric
