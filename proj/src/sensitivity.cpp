#include "ltm/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ltm/error.hpp"
#include "ltm/numeric.hpp"

namespace ltm {

namespace {

const double kSqrt3 = std::sqrt(3.0);

void check_contrast(double contrast) {
  if (!(contrast > 0.0 && contrast <= 1.0))
    throw Error("contrast must lie in (0, 1], got " + std::to_string(contrast));
}

void check_inputs(double fwhm, double contrast, double baseline) {
  if (!(fwhm > 0.0)) throw Error("linewidth must be positive");
  check_contrast(contrast);
  if (!(baseline > 0.0)) throw Error("baseline photon rate must be positive");
}

// S_C^2 written with eps = 1 - C so that it stays accurate as C -> 1:
// C^2 - 5C + 4 = eps (3 + eps).
double shift_factor_squared(double contrast) {
  const double eps = 1.0 - contrast;
  return std::sqrt(eps * (3.0 + eps)) - eps;
}

}  // namespace

double psnl_pointwise(const LorentzianFit& fit, double nu,
                      const PhysicalConstants& constants) {
  const double slope = std::abs(fit.derivative(nu));
  if (slope == 0.0) return std::numeric_limits<double>::infinity();
  const double rate = std::max(fit.evaluate(nu), 0.0);
  return constants.tesla_per_hertz() * std::sqrt(rate) / slope;
}

std::vector<double> psnl_curve(const LorentzianFit& fit,
                               const std::vector<double>& grid_hz,
                               const PhysicalConstants& constants,
                               Execution execution) {
  return kernels::map_indices(
      grid_hz.size(),
      [&](std::size_t i) { return psnl_pointwise(fit, grid_hz[i], constants); },
      execution);
}

double shift_factor(double contrast) {
  check_contrast(contrast);
  return std::sqrt(shift_factor_squared(contrast));
}

double psnl_correction_factor(double contrast) {
  check_contrast(contrast);
  const double s2 = shift_factor_squared(contrast);
  const double eps = 1.0 - contrast;
  // (3 + S^2 - 3C) / S^2 = 1 + 3 eps / S^2, which tends to 1 as C -> 1.
  const double ratio = s2 > 0.0 ? 1.0 + 3.0 * eps / s2 : 1.0;
  const double general_over_approx =
      std::pow(3.0 + s2, 1.5) * std::sqrt(ratio) / 16.0;
  return 1.0 / general_over_approx;
}

double psnl_approx(double fwhm, double contrast, double baseline,
                   const PhysicalConstants& constants) {
  check_inputs(fwhm, contrast, baseline);
  return 4.0 / (3.0 * kSqrt3) * constants.tesla_per_hertz() * fwhm /
         (contrast * std::sqrt(baseline));
}

double psnl_general(double fwhm, double contrast, double baseline,
                    const PhysicalConstants& constants) {
  return psnl_approx(fwhm, contrast, baseline, constants) /
         psnl_correction_factor(contrast);
}

double optimal_operating_point(double fwhm, double contrast) {
  return fwhm / (2.0 * kSqrt3) * shift_factor(contrast);
}

double dynamic_range(double fwhm, const PhysicalConstants& constants) {
  if (!(fwhm >= 0.0)) throw Error("linewidth must be non-negative");
  return fwhm / constants.gyromagnetic_ratio();
}

SensitivityReport analyze_report(const LorentzianFit& fit,
                                 const PhysicalConstants& constants,
                                 int resonance_index) {
  if (fit.resonances.empty()) throw Error("fit has no resonances");
  std::size_t idx = 0;
  if (resonance_index >= 0) {
    if (static_cast<std::size_t>(resonance_index) >= fit.resonances.size())
      throw Error("resonance index out of range");
    idx = static_cast<std::size_t>(resonance_index);
  } else {
    for (std::size_t i = 1; i < fit.resonances.size(); ++i)
      if (fit.resonances[i].contrast > fit.resonances[idx].contrast) idx = i;
  }
  const Resonance& res = fit.resonances[idx];

  SensitivityReport rep;
  rep.fwhm = res.fwhm_hz;
  rep.contrast = res.contrast;
  rep.baseline = fit.baseline;
  rep.resonance_center = res.center_hz;
  rep.shift_factor = shift_factor(res.contrast);
  rep.nu_opt = optimal_operating_point(res.fwhm_hz, res.contrast);
  rep.eta_approx = psnl_approx(res.fwhm_hz, res.contrast, fit.baseline, constants);
  rep.eta_general = psnl_general(res.fwhm_hz, res.contrast, fit.baseline, constants);
  rep.dynamic_range = dynamic_range(res.fwhm_hz, constants);

  const double tol = 1e-6 * res.fwhm_hz;
  double best = std::numeric_limits<double>::infinity();
  double best_offset = 0.0;
  for (double side : {+1.0, -1.0}) {
    auto eta = [&](double offset) {
      return psnl_pointwise(fit, res.center_hz + side * offset, constants);
    };
    const auto m = numeric::golden_section(eta, 0.0, rep.nu_opt, res.fwhm_hz, tol);
    if (m.fx < best) {
      best = m.fx;
      best_offset = m.x;
    }
  }
  // At unit contrast the optimum sits on the dip itself, where the pointwise
  // expression is 0/0; report the closed-form limit there.
  if (res.contrast >= 1.0 - 1e-12 && best_offset <= 4.0 * tol)
    best = rep.eta_general;
  rep.eta_pointwise_min = best;
  return rep;
}

TradeoffAnalysis sensor_tradeoff_analysis(const std::vector<SensorPoint>& points,
                                          const SensorPoint& reference) {
  auto log_ratio = [](const SensorPoint& p) {
    if (!(p.sensitivity > 0.0 && p.dynamic_range > 0.0))
      throw Error("sensor '" + p.name +
                  "' needs positive sensitivity and dynamic range");
    return std::log10(p.dynamic_range / p.sensitivity);
  };
  double sum = 0.0;
  int n = 0;
  for (const auto& p : points) {
    if (p.flux_concentrator || p.closed_loop || p.name == reference.name)
      continue;
    sum += log_ratio(p);
    ++n;
  }
  if (n == 0) throw Error("all sensor points are flagged; nothing to fit");
  if (n < 2) throw Error("trade-off fit needs at least two unflagged points");

  TradeoffAnalysis out;
  out.n_points_fitted = n;
  out.intercept = sum / n;
  for (const auto& p : points)
    out.deviation_factors.push_back(std::pow(10.0, log_ratio(p) - out.intercept));
  out.reference_deviation = std::pow(10.0, log_ratio(reference) - out.intercept);
  return out;
}

}  // namespace ltm
