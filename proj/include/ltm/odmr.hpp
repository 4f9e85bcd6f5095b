#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ltm/parallel.hpp"
#include "ltm/params.hpp"
#include "ltm/steady_state.hpp"

namespace ltm {

struct OdmrPoint {
  double frequency_hz = 0.0;
  double output_w = 0.0;
};

struct OdmrSpectrum {
  std::vector<OdmrPoint> points;
  std::optional<ModelParams> params_snapshot;
  std::string label;
};

// A spin transition at `center_hz` addressing `weight` of the NV ensemble.
// Weights of all lines must not exceed 1; the remainder is undriven.
struct OdmrLine {
  double center_hz = 0.0;
  double weight = 1.0;
};

struct Resonance {
  double center_hz = 0.0;
  double fwhm_hz = 0.0;
  double contrast = 0.0;
};

struct LorentzianFit {
  double baseline = 0.0;  // photons/s
  std::vector<Resonance> resonances;
  double residual_rms = 0.0;  // photons/s
  // Parameter order: baseline, then (center, fwhm, contrast) per resonance.
  Eigen::MatrixXd covariance;
  int iterations = 0;
  std::vector<std::string> flags;

  // Photon rate and its derivative d/dnu.
  double evaluate(double nu) const;
  double derivative(double nu) const;
};

// Families seen by the microwave at absolute frequency f.
std::vector<NvFamily> families_at(double frequency_hz,
                                  const std::vector<OdmrLine>& lines);

OdmrSpectrum synthesize_odmr(const ModelParams& params,
                             const std::vector<double>& freq_grid_hz,
                             const std::vector<OdmrLine>& lines,
                             Execution execution = Execution::parallel);

// Photon rates of a spectrum, converted once with the photon energy.
std::vector<double> to_photon_rates(const OdmrSpectrum& spectrum,
                                    double wavelength_m,
                                    const PhysicalConstants& constants = {});

// Local minima with prominence above min_depth * baseline. Baseline is the
// median of the top quartile. Sorted by centre.
std::vector<Resonance> detect_peaks(const std::vector<double>& frequency_hz,
                                    const std::vector<double>& signal,
                                    double min_depth);
std::vector<Resonance> detect_peaks(const OdmrSpectrum& spectrum,
                                    double min_depth);

struct LorentzianFitOptions {
  double wavelength_m = 1042e-9;  // overridden by the spectrum snapshot
  double min_depth = 0.05;        // for automatic guesses
  int max_iterations = 500;
};

// Fits I0 * (1 - sum C_k w_k^2 / (w_k^2 + 4 (nu - nu_k)^2)) to photon rates.
LorentzianFit fit_lorentzians(const std::vector<double>& frequency_hz,
                              const std::vector<double>& photon_rate, int k,
                              const std::vector<Resonance>& guesses = {},
                              int max_iterations = 500);
LorentzianFit fit_lorentzians(const OdmrSpectrum& spectrum, int k,
                              const std::vector<Resonance>& guesses = {},
                              const LorentzianFitOptions& options = {});

// Deepest first.
std::vector<Resonance> contrast_report(const LorentzianFit& fit);

}  // namespace ltm
