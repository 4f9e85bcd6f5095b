#include "ltm/odmr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ltm/error.hpp"
#include "ltm/numeric.hpp"

namespace ltm {

namespace {

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

double lorentz(double nu, const Resonance& r) {
  const double w2 = r.fwhm_hz * r.fwhm_hz;
  const double d = nu - r.center_hz;
  return w2 / (w2 + 4.0 * d * d);
}

double baseline_estimate(const std::vector<double>& signal) {
  std::vector<double> sorted = signal;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t top = std::max<std::size_t>(1, sorted.size() / 4);
  sorted.resize(top);
  return numeric::median(sorted);
}

// Bounds for the transformed parameters of one resonance.
struct ResonanceBounds {
  double center_lo, center_hi, fwhm_max;
};

}  // namespace

double LorentzianFit::evaluate(double nu) const {
  double dip = 0.0;
  for (const auto& r : resonances) dip += r.contrast * lorentz(nu, r);
  return baseline * (1.0 - dip);
}

double LorentzianFit::derivative(double nu) const {
  double slope = 0.0;
  for (const auto& r : resonances) {
    const double w2 = r.fwhm_hz * r.fwhm_hz;
    const double d = nu - r.center_hz;
    const double den = w2 + 4.0 * d * d;
    slope += r.contrast * 8.0 * d * w2 / (den * den);
  }
  return baseline * slope;
}

std::vector<NvFamily> families_at(double frequency_hz,
                                  const std::vector<OdmrLine>& lines) {
  std::vector<NvFamily> families;
  double total = 0.0;
  for (const auto& line : lines) {
    if (!(line.weight >= 0.0)) throw Error("ODMR line weight must be >= 0");
    total += line.weight;
    families.push_back({line.weight, frequency_hz - line.center_hz});
  }
  if (total > 1.0 + 1e-9) throw Error("ODMR line weights exceed 1");
  const double rest = 1.0 - total;
  if (rest > 1e-12) families.push_back({rest, std::nullopt});
  if (!families.empty() && rest > 0.0 && rest <= 1e-12)
    families.front().weight += rest;
  return families;
}

OdmrSpectrum synthesize_odmr(const ModelParams& params,
                             const std::vector<double>& freq_grid_hz,
                             const std::vector<OdmrLine>& lines,
                             Execution execution) {
  if (freq_grid_hz.empty()) throw Error("frequency grid is empty");
  for (std::size_t i = 1; i < freq_grid_hz.size(); ++i)
    if (!(freq_grid_hz[i] > freq_grid_hz[i - 1]))
      throw Error("frequency grid must be strictly ascending");
  validate(params);
  auto point = [&](std::size_t i) {
    const auto families = families_at(freq_grid_hz[i], lines);
    try {
      return output_power(
          multi_family_steady_state(params, families).n_photons, params);
    } catch (const Error& e) {
      throw SolverError("at frequency " + std::to_string(freq_grid_hz[i]) +
                        " Hz: " + e.what());
    }
  };
  const auto out = kernels::map_indices(freq_grid_hz.size(), point, execution);
  OdmrSpectrum s;
  s.params_snapshot = params;
  s.points.reserve(out.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    s.points.push_back({freq_grid_hz[i], out[i]});
  return s;
}

std::vector<double> to_photon_rates(const OdmrSpectrum& spectrum,
                                    double wavelength_m,
                                    const PhysicalConstants& constants) {
  const double e = photon_energy(wavelength_m, constants);
  std::vector<double> rates;
  rates.reserve(spectrum.points.size());
  for (const auto& p : spectrum.points) rates.push_back(p.output_w / e);
  return rates;
}

std::vector<Resonance> detect_peaks(const std::vector<double>& f,
                                    const std::vector<double>& y,
                                    double min_depth) {
  const auto n = y.size();
  if (n < 5 || f.size() != n)
    throw Error("peak detection needs at least 5 points");
  const double base = baseline_estimate(y);
  std::vector<Resonance> found;
  std::size_t i = 1;
  while (i + 1 < n) {
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    const bool is_min = y[i - 1] > y[i] && j + 1 < n && y[j + 1] > y[i];
    if (!is_min) {
      i = j + 1;
      continue;
    }
    const double y_min = y[i];
    double left_ref = y_min, right_ref = y_min;
    for (std::size_t l = i; l-- > 0;) {
      if (y[l] < y_min) break;
      left_ref = std::max(left_ref, y[l]);
    }
    for (std::size_t r = j + 1; r < n; ++r) {
      if (y[r] < y_min) break;
      right_ref = std::max(right_ref, y[r]);
    }
    const double prominence = std::min(left_ref, right_ref) - y_min;
    if (prominence >= min_depth * base && base > 0.0) {
      Resonance res;
      res.center_hz = 0.5 * (f[i] + f[j]);
      res.contrast = std::clamp((base - y_min) / base, 0.0, 1.0);
      const double half = y_min + 0.5 * (base - y_min);
      double left = NAN, right = NAN;
      for (std::size_t l = i; l-- > 0;) {
        if (y[l] >= half) {
          left = f[l] + (half - y[l]) * (f[l + 1] - f[l]) / (y[l + 1] - y[l]);
          break;
        }
      }
      for (std::size_t r = j + 1; r < n; ++r) {
        if (y[r] >= half) {
          right = f[r - 1] +
                  (half - y[r - 1]) * (f[r] - f[r - 1]) / (y[r] - y[r - 1]);
          break;
        }
      }
      if (std::isfinite(left) && std::isfinite(right))
        res.fwhm_hz = right - left;
      else if (std::isfinite(left))
        res.fwhm_hz = 2.0 * (res.center_hz - left);
      else if (std::isfinite(right))
        res.fwhm_hz = 2.0 * (right - res.center_hz);
      else
        res.fwhm_hz = (f.back() - f.front()) / 10.0;
      found.push_back(res);
    }
    i = j + 1;
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    return a.center_hz < b.center_hz;
  });
  return found;
}

std::vector<Resonance> detect_peaks(const OdmrSpectrum& spectrum,
                                    double min_depth) {
  std::vector<double> f, y;
  for (const auto& p : spectrum.points) {
    f.push_back(p.frequency_hz);
    y.push_back(p.output_w);
  }
  return detect_peaks(f, y, min_depth);
}

LorentzianFit fit_lorentzians(const std::vector<double>& f,
                              const std::vector<double>& data, int k,
                              const std::vector<Resonance>& guesses_in,
                              int max_iterations) {
  if (k < 1) throw FitError("need at least one resonance");
  const auto m = static_cast<int>(data.size());
  if (static_cast<int>(f.size()) != m || m < 3 * k + 2)
    throw FitError("too few points for the requested number of resonances");

  std::vector<Resonance> guesses =
      guesses_in.empty() ? detect_peaks(f, data, 0.05) : guesses_in;
  if (static_cast<int>(guesses.size()) < k)
    throw FitError("requested " + std::to_string(k) + " resonances but only " +
                   std::to_string(guesses.size()) +
                   (guesses_in.empty() ? " detected; supply explicit guesses"
                                       : " guesses given"));
  if (static_cast<int>(guesses.size()) > k) {
    std::stable_sort(guesses.begin(), guesses.end(),
                     [](const auto& a, const auto& b) {
                       return a.contrast > b.contrast;
                     });
    guesses.resize(static_cast<std::size_t>(k));
    std::sort(guesses.begin(), guesses.end(), [](const auto& a, const auto& b) {
      return a.center_hz < b.center_hz;
    });
  }

  const double span = f.back() - f.front();
  const double scale = std::max(*std::max_element(data.begin(), data.end()), 1e-300);
  std::vector<ResonanceBounds> bounds;
  Eigen::VectorXd x0(1 + 3 * k);
  x0[0] = std::log(std::max(baseline_estimate(data), 1e-300) / scale);
  for (int r = 0; r < k; ++r) {
    const auto& g = guesses[r];
    const double fwhm0 = std::clamp(g.fwhm_hz, 1e-6 * span, 0.999 * span);
    ResonanceBounds b{f.front() - fwhm0, f.back() + fwhm0, span};
    bounds.push_back(b);
    const double c_frac = std::clamp(
        (g.center_hz - b.center_lo) / (b.center_hi - b.center_lo), 1e-6, 1 - 1e-6);
    x0[1 + 3 * r] = logit(c_frac);
    x0[2 + 3 * r] = logit(fwhm0 / span);
    x0[3 + 3 * r] = logit(std::clamp(g.contrast, 1e-3, 1.0 - 1e-3));
  }

  auto unpack = [&](const Eigen::VectorXd& x) {
    LorentzianFit fit;
    fit.baseline = scale * std::exp(x[0]);
    for (int r = 0; r < k; ++r) {
      const auto& b = bounds[r];
      fit.resonances.push_back(
          {b.center_lo + (b.center_hi - b.center_lo) * logistic(x[1 + 3 * r]),
           b.fwhm_max * logistic(x[2 + 3 * r]), logistic(x[3 + 3 * r])});
    }
    return fit;
  };
  numeric::ResidualFn residuals = [&](const Eigen::VectorXd& x,
                                      Eigen::VectorXd& out) {
    const LorentzianFit fit = unpack(x);
    for (int i = 0; i < m; ++i) out[i] = (fit.evaluate(f[i]) - data[i]) / scale;
  };

  numeric::LeastSquaresOptions opts;
  opts.max_iterations = max_iterations;
  const auto ls = numeric::levenberg_marquardt(residuals, x0, m, opts);
  if (!ls.converged)
    throw FitError("Lorentzian fit did not converge after " +
                   std::to_string(ls.iterations) + " iterations");

  LorentzianFit fit = unpack(ls.x);
  fit.iterations = ls.iterations;
  const double sse = 2.0 * ls.cost * scale * scale;
  fit.residual_rms = std::sqrt(sse / m);

  // Covariance in natural parameters.
  const int p = 1 + 3 * k;
  Eigen::VectorXd natural(p);
  natural[0] = fit.baseline;
  for (int r = 0; r < k; ++r) {
    natural[1 + 3 * r] = fit.resonances[r].center_hz;
    natural[2 + 3 * r] = fit.resonances[r].fwhm_hz;
    natural[3 + 3 * r] = fit.resonances[r].contrast;
  }
  numeric::ResidualFn model = [&](const Eigen::VectorXd& q, Eigen::VectorXd& out) {
    LorentzianFit tmp;
    tmp.baseline = q[0];
    for (int r = 0; r < k; ++r)
      tmp.resonances.push_back({q[1 + 3 * r], q[2 + 3 * r], q[3 + 3 * r]});
    for (int i = 0; i < m; ++i) out[i] = tmp.evaluate(f[i]);
  };
  Eigen::MatrixXd jac(m, p);
  {
    Eigen::VectorXd r0(m), r1(m);
    model(natural, r0);
    Eigen::VectorXd q = natural;
    for (int j = 0; j < p; ++j) {
      const double h = 1e-7 * std::max(std::abs(natural[j]), j == 0 ? 1.0 : 1e-3);
      q[j] = natural[j] + h;
      model(q, r1);
      jac.col(j) = (r1 - r0) / h;
      q[j] = natural[j];
    }
  }
  const double dof = std::max(m - p, 1);
  fit.covariance = (sse / dof) *
                   (jac.transpose() * jac).completeOrthogonalDecomposition().pseudoInverse();

  for (int r = 0; r < k; ++r)
    if (fit.resonances[r].contrast > 1.0 - 1e-6)
      fit.flags.push_back("contrast of resonance " + std::to_string(r) +
                          " pinned at upper bound 1");
  return fit;
}

LorentzianFit fit_lorentzians(const OdmrSpectrum& spectrum, int k,
                              const std::vector<Resonance>& guesses,
                              const LorentzianFitOptions& options) {
  const double wavelength = spectrum.params_snapshot
                                ? spectrum.params_snapshot->cavity.wavelength
                                : options.wavelength_m;
  const PhysicalConstants constants =
      spectrum.params_snapshot ? spectrum.params_snapshot->constants
                               : PhysicalConstants{};
  const auto rates = to_photon_rates(spectrum, wavelength, constants);
  std::vector<double> f;
  for (const auto& p : spectrum.points) f.push_back(p.frequency_hz);
  std::vector<Resonance> seeds = guesses;
  if (seeds.empty()) seeds = detect_peaks(f, rates, options.min_depth);
  if (static_cast<int>(seeds.size()) < k)
    throw FitError("requested " + std::to_string(k) + " resonances but only " +
                   std::to_string(seeds.size()) +
                   " detected; supply explicit guesses");
  return fit_lorentzians(f, rates, k, seeds, options.max_iterations);
}

std::vector<Resonance> contrast_report(const LorentzianFit& fit) {
  auto rows = fit.resonances;
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.contrast > b.contrast;
  });
  return rows;
}

}  // namespace ltm
