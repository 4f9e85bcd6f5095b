#include "ltm/cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "ltm/calibration.hpp"
#include "ltm/config.hpp"
#include "ltm/csv_io.hpp"
#include "ltm/error.hpp"
#include "ltm/laser.hpp"
#include "ltm/odmr.hpp"
#include "ltm/sensitivity.hpp"

namespace ltm::cli {

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_path;
  std::string plot_path;
  bool no_meta = false;
  bool dry_run = false;
};

struct Range {
  double lo = 0.0, hi = 0.0;
  int n = 0;
};

Range parse_range(const std::string& text) {
  std::stringstream ss(text);
  std::string a, b, c;
  Range r;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c) ||
      !parse_double(a, r.lo) || !parse_double(b, r.hi))
    throw CLI::ValidationError("--range", "expected lo:hi:n");
  try {
    r.n = std::stoi(c);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--range", "expected lo:hi:n");
  }
  if (r.n < 2 || !(r.hi > r.lo)) throw CLI::ValidationError("--range", "need lo < hi and n >= 2");
  return r;
}

void add_common(CLI::App* sub, Common& c, bool with_params = true) {
  if (with_params) {
    sub->add_option("--config", c.config_path, "key = value parameter file");
    sub->add_option("--set", c.overrides, "override key=value (repeatable)");
  }
  sub->add_option("-o,--output", c.output_path, "output file (default stdout)");
  sub->add_option("--plot-data", c.plot_path, "also write whitespace columns here");
  sub->add_flag("--no-meta", c.no_meta, "omit # metadata lines from CSV output");
  sub->add_flag("--dry-run", c.dry_run, "validate inputs, print resolved parameters, stop");
}

ModelParams resolve_params(const Common& c) {
  if (!c.config_path.empty()) return load_config(c.config_path, c.overrides);
  ModelParams p;
  for (const auto& o : c.overrides) apply_override(p, o);
  return validate(p);
}

// Writes to the output path or to `out`.
void emit(const Common& c, std::ostream& out,
          const std::function<void(std::ostream&)>& writer) {
  if (c.output_path.empty()) {
    writer(out);
    return;
  }
  std::ofstream f(c.output_path);
  if (!f) throw Error("cannot write " + c.output_path);
  writer(f);
  if (!f) throw Error("write failed: " + c.output_path);
}

void emit_plot(const Common& c, const std::vector<std::string>& names,
               const std::vector<std::vector<double>>& columns) {
  if (c.plot_path.empty()) return;
  std::ofstream f(c.plot_path);
  if (!f) throw Error("cannot write " + c.plot_path);
  write_columns(f, names, columns);
  if (!f) throw Error("write failed: " + c.plot_path);
}

void emit_json(const Common& c, std::ostream& out, const nlohmann::json& j) {
  emit(c, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

// Multiplicative Gaussian noise, reproducible from the seed.
void add_noise(std::vector<double*> values, double level, std::uint64_t seed) {
  if (level <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, level);
  for (double* v : values) *v *= 1.0 + gauss(rng);
}

std::vector<OdmrLine> parse_lines(const std::vector<std::string>& specs) {
  std::vector<OdmrLine> lines;
  for (const auto& s : specs) {
    OdmrLine line;
    const auto colon = s.find(':');
    const bool ok = colon == std::string::npos
                        ? parse_double(s, line.center_hz)
                        : parse_double(s.substr(0, colon), line.center_hz) &&
                              parse_double(s.substr(colon + 1), line.weight);
    if (!ok) throw CLI::ValidationError("--line", "expected center_hz[:weight]");
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Laser threshold magnetometry toolkit"};
  app.require_subcommand(1, 1);

  // simulate-power
  Common sp;
  std::string sp_axis = "mecsel_pump", sp_range = "0:2.5:101", sp_label;
  double sp_noise = 0.0;
  std::uint64_t sp_seed = 1;
  auto* simulate_power = app.add_subcommand(
      "simulate-power",
      "Output power vs pump power. CSV pump_w,output_w; --plot-data columns: pump_w output_w");
  add_common(simulate_power, sp);
  simulate_power->add_option("--axis", sp_axis, "mecsel_pump or nv_pump")
      ->check(CLI::IsMember({"mecsel_pump", "nv_pump"}));
  simulate_power->add_option("--range", sp_range, "pump grid lo:hi:n in W");
  simulate_power->add_option("--label", sp_label, "curve label");
  simulate_power->add_option("--noise", sp_noise, "relative Gaussian noise")
      ->check(CLI::NonNegativeNumber);
  simulate_power->add_option("--seed", sp_seed, "noise seed");

  // simulate-odmr
  Common so;
  std::string so_range = "2.83e9:2.91e9:401", so_label;
  std::vector<std::string> so_lines;
  double so_noise = 0.0;
  std::uint64_t so_seed = 1;
  auto* simulate_odmr = app.add_subcommand(
      "simulate-odmr",
      "Output power vs microwave frequency. CSV frequency_hz,output_w; "
      "--plot-data columns: frequency_hz output_w");
  add_common(simulate_odmr, so);
  simulate_odmr->add_option("--range", so_range, "frequency grid lo:hi:n in Hz");
  simulate_odmr->add_option("--line", so_lines,
                            "resonance center_hz[:weight] (repeatable; default 2.87e9:1)");
  simulate_odmr->add_option("--label", so_label, "spectrum label");
  simulate_odmr->add_option("--noise", so_noise, "relative Gaussian noise")
      ->check(CLI::NonNegativeNumber);
  simulate_odmr->add_option("--seed", so_seed, "noise seed");

  // fit-threshold
  Common ft;
  std::string ft_input;
  int ft_points = 10;
  bool ft_turn_off = false;
  auto* fit_threshold = app.add_subcommand(
      "fit-threshold",
      "Threshold and slope efficiency from a power curve CSV. JSON report; "
      "--plot-data columns: pump_w output_w line_w");
  add_common(fit_threshold, ft, false);
  fit_threshold->add_option("input", ft_input, "power curve CSV")->required();
  fit_threshold->add_option("--points", ft_points, "lasing points used")
      ->check(CLI::Range(2, 100000));
  fit_threshold->add_flag("--turn-off", ft_turn_off,
                          "fit the last lasing points (default for nv_pump curves)");

  // calibrate
  Common ca;
  std::string ca_input, ca_stage, ca_write_config;
  auto* calibrate = app.add_subcommand(
      "calibrate",
      "Fit one calibration stage to a power curve CSV. JSON report; "
      "--plot-data columns: pump_w data_w model_w");
  add_common(calibrate, ca);
  calibrate->add_option("input", ca_input, "power curve CSV")->required();
  calibrate->add_option("--stage", ca_stage, "mecsel, singlet or rabi")
      ->required()
      ->check(CLI::IsMember({"mecsel", "singlet", "rabi"}));
  calibrate->add_option("--write-config", ca_write_config,
                        "write the parameters with fitted values to this file");

  // fit-odmr
  Common fo;
  std::string fo_input;
  int fo_k = 1;
  double fo_min_depth = 0.05;
  std::optional<double> fo_wavelength;
  auto* fit_odmr = app.add_subcommand(
      "fit-odmr",
      "Lorentzian fit of an ODMR CSV. JSON report; "
      "--plot-data columns: frequency_hz data_w model_w");
  add_common(fit_odmr, fo);
  fit_odmr->add_option("input", fo_input, "ODMR CSV")->required();
  fit_odmr->add_option("-k,--resonances", fo_k, "number of resonances")
      ->check(CLI::PositiveNumber);
  fit_odmr->add_option("--min-depth", fo_min_depth, "peak-detection depth fraction");
  fit_odmr->add_option("--wavelength", fo_wavelength, "m; overrides file and config");

  // sensitivity
  Common se;
  std::optional<double> se_fwhm, se_contrast, se_baseline, se_baseline_w, se_wavelength;
  std::string se_fit;
  int se_index = -1;
  auto* sensitivity = app.add_subcommand(
      "sensitivity",
      "Shot-noise-limited sensitivity and dynamic range. JSON report; "
      "--plot-data columns: frequency_hz eta_t_sqrthz");
  add_common(sensitivity, se);
  sensitivity->add_option("--fwhm", se_fwhm, "Hz");
  sensitivity->add_option("--contrast", se_contrast, "0 < C <= 1");
  auto* base_opt = sensitivity->add_option("--baseline", se_baseline, "photons/s");
  auto* base_w_opt =
      sensitivity->add_option("--baseline-watts", se_baseline_w, "W");
  base_opt->excludes(base_w_opt);
  sensitivity->add_option("--wavelength", se_wavelength, "m, for --baseline-watts");
  sensitivity->add_option("--fit", se_fit, "fit-odmr JSON report");
  sensitivity->add_option("--resonance", se_index, "index into the fit's resonances");

  // compare-sensors
  Common cs;
  std::string cs_input, cs_reference;
  auto* compare = app.add_subcommand(
      "compare-sensors",
      "Deviation from the dynamic-range/sensitivity trade-off line. JSON report; "
      "--plot-data columns: inverse_eta dynamic_range_t deviation");
  add_common(compare, cs, false);
  compare->add_option("registry", cs_input, "sensor registry CSV")->required();
  compare->add_option("--reference", cs_reference, "name of the reference entry")
      ->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate_power->parsed()) {
      const Range r = parse_range(sp_range);
      const ModelParams params = resolve_params(sp);
      if (sp.dry_run) {
        out << emit_config(params);
        return kExitOk;
      }
      auto curve = sweep_pump(params, pump_axis_from_string(sp_axis),
                              uniform_grid(r.lo, r.hi, r.n));
      curve.label = sp_label;
      std::vector<double*> ys;
      for (auto& p : curve.points) ys.push_back(&p.output_w);
      add_noise(ys, sp_noise, sp_seed);
      emit(sp, out, [&](std::ostream& os) { write_power_curve_csv(os, curve, !sp.no_meta); });
      std::vector<double> x, y;
      for (const auto& p : curve.points) {
        x.push_back(p.pump_w);
        y.push_back(p.output_w);
      }
      emit_plot(sp, {"pump_w", "output_w"}, {x, y});
    } else if (simulate_odmr->parsed()) {
      const Range r = parse_range(so_range);
      const auto lines = so_lines.empty() ? std::vector<OdmrLine>{{2.87e9, 1.0}}
                                          : parse_lines(so_lines);
      const ModelParams params = resolve_params(so);
      if (so.dry_run) {
        out << emit_config(params);
        return kExitOk;
      }
      auto spectrum = synthesize_odmr(params, uniform_grid(r.lo, r.hi, r.n), lines);
      spectrum.label = so_label;
      std::vector<double*> ys;
      for (auto& p : spectrum.points) ys.push_back(&p.output_w);
      add_noise(ys, so_noise, so_seed);
      emit(so, out, [&](std::ostream& os) { write_odmr_csv(os, spectrum, !so.no_meta); });
      std::vector<double> x, y;
      for (const auto& p : spectrum.points) {
        x.push_back(p.frequency_hz);
        y.push_back(p.output_w);
      }
      emit_plot(so, {"frequency_hz", "output_w"}, {x, y});
    } else if (fit_threshold->parsed()) {
      const PowerCurve curve = read_power_curve_csv(ft_input);
      if (ft.dry_run) {
        out << "# " << curve.points.size() << " points, axis "
            << to_string(curve.swept_axis) << '\n';
        return kExitOk;
      }
      const bool turn_off = ft_turn_off || curve.swept_axis == PumpAxis::nv_pump;
      const ThresholdFit fit = turn_off ? extract_turn_off(curve, ft_points)
                                        : extract_threshold(curve, ft_points);
      auto j = to_json(fit);
      j["kind"] = turn_off ? "turn_off" : "threshold";
      emit_json(ft, out, j);
      std::vector<double> x, y, line;
      for (const auto& p : curve.points) {
        x.push_back(p.pump_w);
        y.push_back(p.output_w);
        line.push_back(fit.slope_efficiency * (p.pump_w - fit.threshold_w));
      }
      emit_plot(ft, {"pump_w", "output_w", "line_w"}, {x, y, line});
    } else if (calibrate->parsed()) {
      PowerCurve curve = read_power_curve_csv(ca_input);
      const ModelParams params = resolve_params(ca);
      if (ca.dry_run) {
        out << emit_config(params);
        return kExitOk;
      }
      CalibrationResult result;
      if (ca_stage == "mecsel")
        result = fit_mecsel_params(curve, params);
      else if (ca_stage == "singlet")
        result = fit_singlet_coupling(curve, params);
      else
        result = fit_rabi(curve, params);
      emit_json(ca, out, to_json(result));
      if (!ca_write_config.empty()) {
        std::ofstream f(ca_write_config);
        if (!f) throw Error("cannot write " + ca_write_config);
        f << emit_config(result.params);
      }
      if (!ca.plot_path.empty()) {
        std::vector<double> x, y;
        for (const auto& p : curve.points) {
          x.push_back(p.pump_w);
          y.push_back(p.output_w);
        }
        const auto model = sweep_pump(result.params, curve.swept_axis, x);
        std::vector<double> m;
        for (const auto& p : model.points) m.push_back(p.output_w);
        emit_plot(ca, {"pump_w", "data_w", "model_w"}, {x, y, m});
      }
    } else if (fit_odmr->parsed()) {
      const OdmrSpectrum spectrum = read_odmr_csv(fo_input);
      const ModelParams params = resolve_params(fo);
      if (fo.dry_run) {
        out << emit_config(params);
        return kExitOk;
      }
      LorentzianFitOptions options;
      options.min_depth = fo_min_depth;
      options.wavelength_m = params.cavity.wavelength;
      OdmrSpectrum input = spectrum;
      if (fo_wavelength) {
        ModelParams snap = params;
        snap.cavity.wavelength = *fo_wavelength;
        input.params_snapshot = snap;
      } else if (!fo.config_path.empty() || !fo.overrides.empty()) {
        input.params_snapshot = params;
      }
      const LorentzianFit fit = fit_lorentzians(input, fo_k, {}, options);
      emit_json(fo, out, to_json(fit));
      if (!fo.plot_path.empty()) {
        const double wavelength = input.params_snapshot
                                      ? input.params_snapshot->cavity.wavelength
                                      : options.wavelength_m;
        const double watts_per_photon = photon_energy(wavelength, params.constants);
        std::vector<double> x, y, m;
        for (const auto& p : input.points) {
          x.push_back(p.frequency_hz);
          y.push_back(p.output_w);
          m.push_back(fit.evaluate(p.frequency_hz) * watts_per_photon);
        }
        emit_plot(fo, {"frequency_hz", "data_w", "model_w"}, {x, y, m});
      }
    } else if (sensitivity->parsed()) {
      const ModelParams params = resolve_params(se);
      LorentzianFit fit;
      if (!se_fit.empty()) {
        if (se_fwhm || se_contrast || se_baseline || se_baseline_w)
          throw CLI::ValidationError("--fit", "cannot be combined with explicit resonance values");
        std::ifstream f(se_fit);
        if (!f) throw Error("cannot open " + se_fit);
        nlohmann::json j;
        try {
          f >> j;
        } catch (const nlohmann::json::exception& e) {
          throw Error(std::string("malformed fit report: ") + e.what());
        }
        fit = lorentzian_fit_from_json(j);
      } else {
        if (!se_fwhm || !se_contrast || !(se_baseline || se_baseline_w))
          throw CLI::ValidationError(
              "sensitivity", "need --fit, or --fwhm, --contrast and a baseline");
        double baseline = se_baseline.value_or(0.0);
        if (se_baseline_w) {
          const double wavelength = se_wavelength.value_or(params.cavity.wavelength);
          baseline = *se_baseline_w / photon_energy(wavelength, params.constants);
        }
        fit.baseline = baseline;
        fit.resonances.push_back({0.0, *se_fwhm, *se_contrast});
      }
      if (se.dry_run) {
        out << emit_config(params);
        return kExitOk;
      }
      const SensitivityReport report = analyze_report(fit, params.constants, se_index);
      emit_json(se, out, to_json(report));
      if (!se.plot_path.empty()) {
        const auto grid = uniform_grid(report.resonance_center - 2.0 * report.fwhm,
                                       report.resonance_center + 2.0 * report.fwhm, 801);
        emit_plot(se, {"frequency_hz", "eta_t_sqrthz"},
                  {grid, psnl_curve(fit, grid, params.constants)});
      }
    } else if (compare->parsed()) {
      const auto sensors = read_sensor_registry(cs_input);
      const auto ref = std::find_if(sensors.begin(), sensors.end(),
                                    [&](const SensorPoint& p) { return p.name == cs_reference; });
      if (ref == sensors.end()) throw Error("reference '" + cs_reference + "' not in registry");
      if (cs.dry_run) {
        out << "# " << sensors.size() << " sensors, reference " << cs_reference << '\n';
        return kExitOk;
      }
      const TradeoffAnalysis a = sensor_tradeoff_analysis(sensors, *ref);
      nlohmann::json j;
      j["intercept_log10_dr_over_eta"] = a.intercept;
      j["n_points_fitted"] = a.n_points_fitted;
      j["reference"] = cs_reference;
      j["reference_deviation"] = a.reference_deviation;
      j["sensors"] = nlohmann::json::array();
      std::vector<double> inv, dr, dev;
      for (std::size_t i = 0; i < sensors.size(); ++i) {
        const auto& p = sensors[i];
        j["sensors"].push_back({{"name", p.name},
                                {"deviation_factor", a.deviation_factors[i]},
                                {"flagged", p.flux_concentrator || p.closed_loop}});
        inv.push_back(1.0 / p.sensitivity);
        dr.push_back(p.dynamic_range);
        dev.push_back(a.deviation_factors[i]);
      }
      emit_json(cs, out, j);
      emit_plot(cs, {"inverse_eta", "dynamic_range_t", "deviation"}, {inv, dr, dev});
    }
  } catch (const CLI::Error& e) {
    err << "usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace ltm::cli
