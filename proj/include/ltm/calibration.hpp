#pragma once

#include <map>
#include <string>
#include <vector>

#include "ltm/laser.hpp"
#include "ltm/params.hpp"

namespace ltm {

enum class CalibrationStage { mecsel, singlet, rabi };
const char* to_string(CalibrationStage stage);

struct FittedValue {
  double value = 0.0;      // Hz
  double std_error = 0.0;  // Hz
};

struct CalibrationResult {
  CalibrationStage stage = CalibrationStage::mecsel;
  // Keyed by config key, e.g. "mecsel.L_eg".
  std::map<std::string, FittedValue> fitted;
  double sse = 0.0;  // W^2
  int iterations = 0;
  int n_residuals = 0;
  std::vector<std::string> flags;
  ModelParams params;  // input params with the fitted values written in
  std::string dataset_hash;
};

// Residuals of the model against a measured curve: every point where the data
// lases, plus a hinge term m_i wherever only the model lases.
std::vector<double> calibration_residuals(const PowerCurve& data,
                                          const ModelParams& params,
                                          Execution execution = Execution::serial);
double calibration_sse(const PowerCurve& data, const ModelParams& params);

// Gain-medium decay and coupling from an NV-unpumped MECSEL-pump sweep.
CalibrationResult fit_mecsel_params(const PowerCurve& curve,
                                    const ModelParams& params);

// Seed for fit_mecsel_params: (decay, gain coupling) from a straight-line fit
// of the lasing points, inverted through the NV-free closed form.
struct MecselSeed {
  double decay = 0.0;
  double gain_coupling = 0.0;
};
MecselSeed mecsel_seed_from_line(const PowerCurve& curve,
                                 const ModelParams& params);

// Singlet absorption coupling from an off-resonant, NV-pumped sweep.
CalibrationResult fit_singlet_coupling(const PowerCurve& curve,
                                       const ModelParams& params);

// Rabi frequency from a resonant sweep.
CalibrationResult fit_rabi(const PowerCurve& curve, const ModelParams& params);

struct ThresholdShift {
  double off_resonant = 0.0;  // W
  double resonant = 0.0;      // W
};

// Synthesises the off-resonant and resonant curves on `axis` around their
// thresholds and extracts both from the first 10 lasing points.
ThresholdShift predict_threshold_shift(const ModelParams& params,
                                       PumpAxis axis = PumpAxis::mecsel_pump,
                                       double off_resonant_detuning = 0.87e9);

}  // namespace ltm
