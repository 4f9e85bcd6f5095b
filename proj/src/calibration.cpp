#include "ltm/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ltm/config.hpp"
#include "ltm/csv_io.hpp"
#include "ltm/error.hpp"
#include "ltm/numeric.hpp"
#include "ltm/steady_state.hpp"

namespace ltm {

namespace {

std::vector<double> pumps_of(const PowerCurve& curve) {
  std::vector<double> x;
  x.reserve(curve.points.size());
  for (const auto& p : curve.points) x.push_back(p.pump_w);
  return x;
}

int count_lasing(const PowerCurve& curve) {
  return static_cast<int>(std::count_if(
      curve.points.begin(), curve.points.end(),
      [](const PowerPoint& p) { return p.output_w > kLasingFloorW; }));
}

// Returns +inf when the model cannot be evaluated, so optimisers back off.
double safe_sse(const PowerCurve& data, const ModelParams& params) {
  try {
    return calibration_sse(data, params);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

// One free rate on [0, upper]: coarse scan, golden refinement, then a
// standard error from the curvature of the SSE at the optimum.
CalibrationResult fit_one_rate(const PowerCurve& curve, const ModelParams& params,
                               CalibrationStage stage, const char* key,
                               double upper, const char* no_effect_flag) {
  if (count_lasing(curve) < 5)
    throw FitError(std::string("calibration of ") + key +
                   " needs at least 5 lasing points");
  auto objective = [&](double value) {
    ModelParams p = params;
    set_param(p, key, value);
    return safe_sse(curve, p);
  };
  const auto best = numeric::scan_then_golden(objective, 0.0, upper, 25,
                                              1e-7 * upper);
  if (!std::isfinite(best.fx))
    throw FitError(std::string("calibration of ") + key + " did not converge");

  CalibrationResult out;
  out.stage = stage;
  out.params = params;
  set_param(out.params, key, best.x);
  out.sse = best.fx;
  out.iterations = best.iterations;
  out.n_residuals = static_cast<int>(calibration_residuals(curve, out.params).size());
  out.dataset_hash = dataset_hash(curve);

  const double h = std::max(1e-3 * best.x, 1e-4 * upper);
  const double lo = std::max(best.x - h, 0.0), hi = best.x + h;
  const double f_lo = objective(lo), f_hi = objective(hi);
  // Quadratic through the three samples.
  const double d1 = (f_hi - best.fx) / (hi - best.x);
  const double d0 = (best.fx - f_lo) / (best.x - lo);
  const double curvature = 2.0 * (d1 - d0) / (hi - lo);
  const int dof = std::max(out.n_residuals - 1, 1);
  const double sigma2 = best.fx / dof;
  const double std_error =
      curvature > 0.0 ? std::sqrt(2.0 * sigma2 / curvature) : 0.0;
  out.fitted[key] = {best.x, std_error};

  const double sse_at_zero = objective(0.0);
  if (best.x <= 1e-4 * upper || sse_at_zero <= best.fx * (1.0 + 1e-6) + 1e-30)
    out.flags.emplace_back(no_effect_flag);
  out.flags.emplace_back("loss: unweighted SSE on lasing points plus hinge");
  return out;
}

}  // namespace

const char* to_string(CalibrationStage stage) {
  switch (stage) {
    case CalibrationStage::mecsel:
      return "mecsel";
    case CalibrationStage::singlet:
      return "singlet";
    case CalibrationStage::rabi:
      return "rabi";
  }
  return "?";
}

std::vector<double> calibration_residuals(const PowerCurve& data,
                                          const ModelParams& params,
                                          Execution execution) {
  const auto model = sweep_pump(params, data.swept_axis, pumps_of(data), execution);
  std::vector<double> r;
  r.reserve(data.points.size());
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const double m = model.points[i].output_w;
    const double d = data.points[i].output_w;
    if (d > kLasingFloorW)
      r.push_back(m - d);
    else if (m > kLasingFloorW)
      r.push_back(m);
  }
  return r;
}

double calibration_sse(const PowerCurve& data, const ModelParams& params) {
  double sse = 0.0;
  for (double r : calibration_residuals(data, params, Execution::parallel))
    sse += r * r;
  return sse;
}

MecselSeed mecsel_seed_from_line(const PowerCurve& curve,
                                 const ModelParams& params) {
  std::vector<double> pump, out;
  for (const auto& p : curve.points)
    if (p.output_w > kLasingFloorW) {
      pump.push_back(p.pump_w);
      out.push_back(p.output_w);
    }
  if (pump.size() < 5) throw FitError("MECSEL calibration needs >= 5 lasing points");
  const auto line = numeric::fit_line(pump, out);
  if (!(line.slope > 0.0)) throw FitError("MECSEL curve does not rise with pump");

  const double kappa = params.cavity.loss_rate;
  const double n2m = params.mecsel.ensemble_size;
  const double watts_per_photon =
      photon_energy(params.cavity.wavelength, params.constants) *
      params.cavity.mirror_loss_rate;
  // Photons per Hz of pump rate, and the threshold pump rate.
  const double a = line.slope / (watts_per_photon * params.mecsel.pump_rate_per_watt);
  const double threshold_rate =
      -line.intercept / line.slope * params.mecsel.pump_rate_per_watt;
  const double den = n2m - 2.0 * kappa * a;
  if (!(den > 0.0)) throw FitError("slope too steep for the cavity loss rate");
  MecselSeed seed;
  seed.gain_coupling = kappa * n2m / den;
  const double b = (seed.gain_coupling + kappa) * n2m / (2.0 * kappa * seed.gain_coupling);
  seed.decay = a * threshold_rate / b;
  if (!(seed.decay > 0.0)) throw FitError("curve implies a non-positive decay rate");
  return seed;
}

CalibrationResult fit_mecsel_params(const PowerCurve& curve,
                                    const ModelParams& params) {
  // The stage is defined on an NV-unpumped curve, whatever the caller's NV
  // pump setting is.
  ModelParams unpumped = params;
  unpumped.nv.pump_rate = 0.0;
  const MecselSeed seed = mecsel_seed_from_line(curve, params);
  auto at = [&](const Eigen::VectorXd& x) {
    ModelParams p = unpumped;
    p.mecsel.decay = seed.decay * x[0];
    p.mecsel.gain_coupling = seed.gain_coupling * x[1];
    return p;
  };
  auto objective = [&](const Eigen::VectorXd& x) {
    if (x[0] <= 0.0 || x[1] <= 0.0) return std::numeric_limits<double>::infinity();
    return safe_sse(curve, at(x));
  };
  const auto nm = numeric::nelder_mead(objective, Eigen::Vector2d(1.0, 1.0),
                                       Eigen::Vector2d(0.02, 0.02), 1e-15, 1e-6);
  if (!nm.converged || !std::isfinite(nm.fx))
    throw FitError("MECSEL calibration did not converge");

  CalibrationResult out;
  out.stage = CalibrationStage::mecsel;
  out.params = params;
  out.params.mecsel = at(nm.x).mecsel;
  if (!(out.params.mecsel.gain_coupling > params.cavity.loss_rate))
    throw FitError("fitted gain coupling does not exceed cavity loss (unphysical)");
  out.sse = nm.fx;
  out.iterations = nm.iterations;
  out.n_residuals = static_cast<int>(calibration_residuals(curve, at(nm.x)).size());
  out.dataset_hash = dataset_hash(curve);

  // Hessian of the SSE in natural units by central differences.
  const Eigen::Vector2d x0(out.params.mecsel.decay, out.params.mecsel.gain_coupling);
  const Eigen::Vector2d h = 1e-3 * x0;
  auto sse_at = [&](double dl, double dg) {
    ModelParams p = at(nm.x);
    p.mecsel.decay = x0[0] + dl;
    p.mecsel.gain_coupling = x0[1] + dg;
    return safe_sse(curve, p);
  };
  Eigen::Matrix2d hess;
  hess(0, 0) = (sse_at(h[0], 0) - 2 * nm.fx + sse_at(-h[0], 0)) / (h[0] * h[0]);
  hess(1, 1) = (sse_at(0, h[1]) - 2 * nm.fx + sse_at(0, -h[1])) / (h[1] * h[1]);
  hess(0, 1) = hess(1, 0) = (sse_at(h[0], h[1]) - sse_at(h[0], -h[1]) -
                             sse_at(-h[0], h[1]) + sse_at(-h[0], -h[1])) /
                            (4 * h[0] * h[1]);
  const double sigma2 = nm.fx / std::max(out.n_residuals - 2, 1);
  Eigen::Vector2d std_err = Eigen::Vector2d::Zero();
  if (hess.determinant() > 0.0 && hess(0, 0) > 0.0) {
    const Eigen::Matrix2d cov = 2.0 * sigma2 * hess.inverse();
    std_err = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  }
  out.fitted["mecsel.L_eg"] = {x0[0], std_err[0]};
  out.fitted["mecsel.G_eg"] = {x0[1], std_err[1]};
  out.flags.emplace_back("loss: unweighted SSE on lasing points plus hinge");
  return out;
}

CalibrationResult fit_singlet_coupling(const PowerCurve& curve,
                                       const ModelParams& params) {
  return fit_one_rate(curve, params, CalibrationStage::singlet, "nv.G_S",
                      10.0 * params.cavity.loss_rate, "no NV absorption detected");
}

CalibrationResult fit_rabi(const PowerCurve& curve, const ModelParams& params) {
  const double upper = 4.0 * (params.nv.dephasing_13 + params.nv.pump_rate);
  return fit_one_rate(curve, params, CalibrationStage::rabi, "nv.Omega", upper,
                      "resonance has no effect");
}

ThresholdShift predict_threshold_shift(const ModelParams& params, PumpAxis axis,
                                       double off_resonant_detuning) {
  auto threshold_of = [&](double detuning) {
    ModelParams p = params;
    p.nv.detuning = detuning;
    const double exact = exact_threshold(p, axis);
    if (axis == PumpAxis::mecsel_pump) {
      const auto grid = uniform_grid(0.95 * exact, 1.25 * exact, 101);
      return extract_threshold(sweep_pump(p, axis, grid)).threshold_w;
    }
    const auto grid = uniform_grid(0.0, 1.05 * exact, 101);
    return extract_turn_off(sweep_pump(p, axis, grid)).threshold_w;
  };
  return {threshold_of(off_resonant_detuning), threshold_of(0.0)};
}

}  // namespace ltm
