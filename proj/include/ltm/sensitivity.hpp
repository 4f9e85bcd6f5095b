#pragma once

#include <string>
#include <vector>

#include "ltm/odmr.hpp"
#include "ltm/parallel.hpp"
#include "ltm/params.hpp"

namespace ltm {

struct SensitivityReport {
  double eta_pointwise_min = 0.0;  // T/sqrt(Hz)
  double eta_general = 0.0;
  double eta_approx = 0.0;
  double nu_opt = 0.0;  // Hz offset from the resonance centre
  double shift_factor = 0.0;
  double dynamic_range = 0.0;  // +-T
  double fwhm = 0.0;
  double contrast = 0.0;
  double baseline = 0.0;  // photons/s
  double resonance_center = 0.0;
};

// Shot-noise-limited sensitivity at one frequency of the fitted curve.
// Infinite where the curve is flat.
double psnl_pointwise(const LorentzianFit& fit, double nu,
                      const PhysicalConstants& constants = {});

// psnl_pointwise over a frequency grid.
std::vector<double> psnl_curve(const LorentzianFit& fit,
                               const std::vector<double>& grid_hz,
                               const PhysicalConstants& constants = {},
                               Execution execution = Execution::parallel);

double shift_factor(double contrast);
double psnl_general(double fwhm, double contrast, double baseline,
                    const PhysicalConstants& constants = {});
double psnl_approx(double fwhm, double contrast, double baseline,
                   const PhysicalConstants& constants = {});
// approx / general
double psnl_correction_factor(double contrast);
double optimal_operating_point(double fwhm, double contrast);
double dynamic_range(double fwhm, const PhysicalConstants& constants = {});

// Uses the deepest resonance unless `resonance_index` selects another
// (index into fit.resonances).
SensitivityReport analyze_report(const LorentzianFit& fit,
                                 const PhysicalConstants& constants = {},
                                 int resonance_index = -1);

struct SensorPoint {
  std::string name;
  double sensitivity = 0.0;    // T/sqrt(Hz)
  double dynamic_range = 0.0;  // T
  bool flux_concentrator = false;
  bool closed_loop = false;
};

struct TradeoffAnalysis {
  // log10(DR / eta) of the trend line
  double intercept = 0.0;
  std::vector<double> deviation_factors;  // per input point
  double reference_deviation = 0.0;
  int n_points_fitted = 0;
};

// Trade-off line of slope -1 against log(1/eta), fitted over unflagged points
// other than the reference.
TradeoffAnalysis sensor_tradeoff_analysis(const std::vector<SensorPoint>& points,
                                          const SensorPoint& reference);

}  // namespace ltm
