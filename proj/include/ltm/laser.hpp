#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ltm/parallel.hpp"
#include "ltm/params.hpp"

namespace ltm {

enum class PumpAxis { mecsel_pump, nv_pump };

const char* to_string(PumpAxis axis);
PumpAxis pump_axis_from_string(const std::string& name);

struct PowerPoint {
  double pump_w = 0.0;
  double output_w = 0.0;
};

struct PowerCurve {
  PumpAxis swept_axis = PumpAxis::mecsel_pump;
  std::vector<PowerPoint> points;
  ModelParams fixed_params;
  std::string label;
};

struct ThresholdFit {
  double threshold_w = 0.0;
  double slope_efficiency = 0.0;  // W/W; negative for turn-off fits
  int n_points_used = 0;
  double fit_rms_w = 0.0;
};

// Outputs at or below this are "not lasing".
inline constexpr double kLasingFloorW = 1e-9;

// n uniform points on [lo, hi].
std::vector<double> uniform_grid(double lo, double hi, int n = 101);

// Copy of params with the pump rate on `axis` set from a power.
ModelParams with_pump_power(const ModelParams& params, PumpAxis axis,
                            double power_w);

PowerCurve sweep_mecsel_pump(const ModelParams& params,
                             const std::vector<double>& grid_w,
                             Execution execution = Execution::parallel);
PowerCurve sweep_nv_pump(const ModelParams& params,
                         const std::vector<double>& grid_w,
                         Execution execution = Execution::parallel);
PowerCurve sweep_pump(const ModelParams& params, PumpAxis axis,
                      const std::vector<double>& grid_w,
                      Execution execution = Execution::parallel);

// Least-squares line through the first n lasing points; threshold is its
// x-intercept. For rising (MECSEL-pump) curves.
ThresholdFit extract_threshold(const PowerCurve& curve, int n_points = 10);

// Same, using the last n lasing points before the laser switches off. For
// falling (NV-pump) curves; slope_efficiency comes out negative.
ThresholdFit extract_turn_off(const PowerCurve& curve, int n_points = 10);

// Pump power at which the small-signal gain g(0) crosses zero on `axis`,
// found directly on the gain function rather than from a sampled curve.
double exact_threshold(const ModelParams& params, PumpAxis axis,
                       double max_power_w = 1e3);

// Photon number of the NV-free laser, linear in the pump rate.
struct ClosedFormResult {
  double n_photons = 0.0;
  bool lasing_possible = true;  // false when gain coupling <= cavity loss
};
ClosedFormResult closed_form_photon_number(const ModelParams& params,
                                           double mecsel_pump_rate);
// Hz; infinity when gain coupling <= cavity loss.
double closed_form_threshold_rate(const ModelParams& params);

}  // namespace ltm
