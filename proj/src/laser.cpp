#include "ltm/laser.hpp"

#include <cmath>
#include <limits>

#include "ltm/error.hpp"
#include "ltm/numeric.hpp"
#include "ltm/steady_state.hpp"

namespace ltm {

namespace {

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw Error("pump grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) throw Error("pump grid values must be non-negative");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw Error("pump grid must be strictly ascending");
  }
}

ThresholdFit fit_points(const std::vector<double>& pump,
                        const std::vector<double>& out) {
  const auto line = numeric::fit_line(pump, out);
  ThresholdFit fit;
  fit.slope_efficiency = line.slope;
  fit.threshold_w = -line.intercept / line.slope;
  fit.n_points_used = static_cast<int>(pump.size());
  fit.fit_rms_w = line.rms;
  return fit;
}

}  // namespace

const char* to_string(PumpAxis axis) {
  return axis == PumpAxis::mecsel_pump ? "mecsel_pump" : "nv_pump";
}

PumpAxis pump_axis_from_string(const std::string& name) {
  if (name == "mecsel_pump" || name == "mecsel") return PumpAxis::mecsel_pump;
  if (name == "nv_pump" || name == "nv") return PumpAxis::nv_pump;
  throw Error("unknown pump axis '" + name + "'");
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 2) throw Error("grid needs at least two points");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  g.back() = hi;
  return g;
}

ModelParams with_pump_power(const ModelParams& params, PumpAxis axis,
                            double power_w) {
  ModelParams p = params;
  if (axis == PumpAxis::mecsel_pump)
    p.mecsel.pump_rate = pump_power_to_rate(power_w, p.mecsel.pump_rate_per_watt);
  else
    p.nv.pump_rate = pump_power_to_rate(power_w, p.nv.pump_rate_per_watt);
  return p;
}

PowerCurve sweep_pump(const ModelParams& params, PumpAxis axis,
                      const std::vector<double>& grid_w, Execution execution) {
  check_grid(grid_w);
  validate(params);
  auto point = [&](std::size_t i) {
    try {
      const ModelParams p = with_pump_power(params, axis, grid_w[i]);
      return output_power(solve_photon_number(p).n_photons, p);
    } catch (const Error& e) {
      throw SolverError("at pump " + std::to_string(grid_w[i]) + " W (" +
                        to_string(axis) + "): " + e.what());
    }
  };
  const auto outputs = kernels::map_indices(grid_w.size(), point, execution);
  PowerCurve curve;
  curve.swept_axis = axis;
  curve.fixed_params = params;
  curve.points.reserve(grid_w.size());
  for (std::size_t i = 0; i < grid_w.size(); ++i)
    curve.points.push_back({grid_w[i], outputs[i]});
  return curve;
}

PowerCurve sweep_mecsel_pump(const ModelParams& params,
                             const std::vector<double>& grid_w,
                             Execution execution) {
  return sweep_pump(params, PumpAxis::mecsel_pump, grid_w, execution);
}

PowerCurve sweep_nv_pump(const ModelParams& params,
                         const std::vector<double>& grid_w,
                         Execution execution) {
  return sweep_pump(params, PumpAxis::nv_pump, grid_w, execution);
}

ThresholdFit extract_threshold(const PowerCurve& curve, int n_points) {
  if (n_points < 2) throw FitError("threshold fit needs n_points >= 2");
  std::vector<double> pump, out;
  for (const auto& pt : curve.points) {
    if (pt.output_w > kLasingFloorW) {
      pump.push_back(pt.pump_w);
      out.push_back(pt.output_w);
      if (static_cast<int>(pump.size()) == n_points) break;
    }
  }
  if (static_cast<int>(pump.size()) < n_points)
    throw FitError("fewer than " + std::to_string(n_points) +
                   " lasing points (found " + std::to_string(pump.size()) + ")");
  ThresholdFit fit = fit_points(pump, out);
  if (!(fit.slope_efficiency > 0.0))
    throw FitError("negative fitted slope; not a rising laser curve");
  if (fit.threshold_w < 0.0) throw FitError("fitted threshold is negative");
  return fit;
}

ThresholdFit extract_turn_off(const PowerCurve& curve, int n_points) {
  if (n_points < 2) throw FitError("turn-off fit needs n_points >= 2");
  const auto& pts = curve.points;
  std::ptrdiff_t last = -1;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i].output_w > kLasingFloorW) last = static_cast<std::ptrdiff_t>(i);
  std::vector<double> pump, out;
  for (std::ptrdiff_t i = last; i >= 0; --i) {
    if (pts[i].output_w <= kLasingFloorW) continue;
    pump.insert(pump.begin(), pts[i].pump_w);
    out.insert(out.begin(), pts[i].output_w);
    if (static_cast<int>(pump.size()) == n_points) break;
  }
  if (static_cast<int>(pump.size()) < n_points)
    throw FitError("fewer than " + std::to_string(n_points) +
                   " lasing points before turn-off");
  ThresholdFit fit = fit_points(pump, out);
  if (!(fit.slope_efficiency < 0.0))
    throw FitError("positive fitted slope; not a falling laser curve");
  return fit;
}

double exact_threshold(const ModelParams& params, PumpAxis axis,
                       double max_power_w) {
  auto small_signal = [&](double power) {
    return net_gain(with_pump_power(params, axis, power), 0.0);
  };
  const double g0 = small_signal(0.0);
  if (axis == PumpAxis::mecsel_pump && g0 > 0.0) return 0.0;
  if (axis == PumpAxis::nv_pump && g0 <= 0.0)
    throw Error("laser is off even without NV pump; no turn-off point");
  double lo = 0.0, g_lo = g0;
  double hi = 1e-3, g_hi = small_signal(hi);
  while ((g_hi > 0.0) == (g0 > 0.0) && g_hi != 0.0) {
    lo = hi;
    g_lo = g_hi;
    hi *= 2.0;
    if (hi > max_power_w)
      throw Error(std::string("no threshold on ") + to_string(axis) +
                  " below " + std::to_string(max_power_w) + " W");
    g_hi = small_signal(hi);
  }
  return numeric::bracketed_root(small_signal, lo, hi, g_lo, g_hi, 1e-15, 1e-14)
      .x;
}

ClosedFormResult closed_form_photon_number(const ModelParams& params,
                                           double mecsel_pump_rate) {
  const double g = params.mecsel.gain_coupling;
  const double k = params.cavity.loss_rate;
  const double n2m = params.mecsel.ensemble_size;
  if (!(g > k)) return {0.0, false};
  const double a = (g - k) * n2m / (2.0 * k * g);
  const double b = (g + k) * n2m / (2.0 * k * g);
  return {std::max(0.0, a * mecsel_pump_rate - b * params.mecsel.decay), true};
}

double closed_form_threshold_rate(const ModelParams& params) {
  const double g = params.mecsel.gain_coupling;
  const double k = params.cavity.loss_rate;
  if (!(g > k)) return std::numeric_limits<double>::infinity();
  return params.mecsel.decay * (g + k) / (g - k);
}

}  // namespace ltm
