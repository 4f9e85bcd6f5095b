#include "ltm/csv_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ltm/config.hpp"
#include "ltm/error.hpp"

namespace ltm {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;
};

CsvTable read_table(std::istream& is, const std::string& expected_header) {
  CsvTable t;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos)
        t.meta[trim(line.substr(1, colon - 1))] = trim(line.substr(colon + 1));
      continue;
    }
    if (t.header.empty()) {
      if (line != expected_header)
        throw ConfigError(line_no, "expected header '" + expected_header + "'");
      t.header = split(line, ',');
      continue;
    }
    auto cells = split(line, ',');
    if (cells.size() != t.header.size())
      throw ConfigError(line_no, "expected " + std::to_string(t.header.size()) +
                                     " columns");
    t.rows.push_back(std::move(cells));
    t.row_lines.push_back(line_no);
  }
  if (t.header.empty()) throw ConfigError(line_no, "missing header '" + expected_header + "'");
  return t;
}

double cell_number(const std::string& cell, int line) {
  double v = 0.0;
  if (!parse_double(cell, v)) throw ConfigError(line, "not a number: '" + cell + "'");
  return v;
}

bool cell_bool(const std::string& cell, int line) {
  if (cell == "1" || cell == "true" || cell == "yes") return true;
  if (cell == "0" || cell == "false" || cell == "no" || cell.empty()) return false;
  throw ConfigError(line, "not a boolean: '" + cell + "'");
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

nlohmann::json resonance_json(const Resonance& r) {
  return {{"center_hz", r.center_hz}, {"fwhm_hz", r.fwhm_hz}, {"contrast", r.contrast}};
}

}  // namespace

void write_power_curve_csv(std::ostream& os, const PowerCurve& curve,
                           bool with_meta) {
  if (with_meta) {
    if (!curve.label.empty()) os << "# label: " << curve.label << '\n';
    os << "# swept_axis: " << to_string(curve.swept_axis) << '\n';
    os << "# params_hash: " << params_hash(curve.fixed_params) << '\n';
  }
  os << "pump_w,output_w\n";
  for (const auto& p : curve.points)
    os << format_double(p.pump_w) << ',' << format_double(p.output_w) << '\n';
}

PowerCurve read_power_curve_csv(std::istream& is) {
  const CsvTable t = read_table(is, "pump_w,output_w");
  PowerCurve curve;
  if (auto it = t.meta.find("label"); it != t.meta.end()) curve.label = it->second;
  if (auto it = t.meta.find("swept_axis"); it != t.meta.end())
    curve.swept_axis = pump_axis_from_string(it->second);
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    curve.points.push_back({cell_number(t.rows[i][0], t.row_lines[i]),
                            cell_number(t.rows[i][1], t.row_lines[i])});
  return curve;
}

PowerCurve read_power_curve_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_power_curve_csv(in);
}

void write_odmr_csv(std::ostream& os, const OdmrSpectrum& spectrum,
                    bool with_meta) {
  if (with_meta) {
    if (!spectrum.label.empty()) os << "# label: " << spectrum.label << '\n';
    if (spectrum.params_snapshot) {
      os << "# params_hash: " << params_hash(*spectrum.params_snapshot) << '\n';
      os << "# wavelength_m: " << format_double(spectrum.params_snapshot->cavity.wavelength)
         << '\n';
    }
  }
  os << "frequency_hz,output_w\n";
  for (const auto& p : spectrum.points)
    os << format_double(p.frequency_hz) << ',' << format_double(p.output_w) << '\n';
}

OdmrSpectrum read_odmr_csv(std::istream& is) {
  const CsvTable t = read_table(is, "frequency_hz,output_w");
  OdmrSpectrum spectrum;
  if (auto it = t.meta.find("label"); it != t.meta.end()) spectrum.label = it->second;
  if (auto it = t.meta.find("wavelength_m"); it != t.meta.end()) {
    ModelParams p;
    if (!parse_double(it->second, p.cavity.wavelength))
      throw Error("bad wavelength_m metadata");
    spectrum.params_snapshot = p;
  }
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    spectrum.points.push_back({cell_number(t.rows[i][0], t.row_lines[i]),
                               cell_number(t.rows[i][1], t.row_lines[i])});
  return spectrum;
}

OdmrSpectrum read_odmr_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_odmr_csv(in);
}

std::vector<SensorPoint> read_sensor_registry(std::istream& is) {
  const CsvTable t = read_table(
      is, "name,sensitivity_t_sqrthz,dynamic_range_t,flux_concentrator,closed_loop");
  std::vector<SensorPoint> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const int line = t.row_lines[i];
    SensorPoint p;
    p.name = r[0];
    p.sensitivity = cell_number(r[1], line);
    p.dynamic_range = cell_number(r[2], line);
    p.flux_concentrator = cell_bool(r[3], line);
    p.closed_loop = cell_bool(r[4], line);
    if (!(p.sensitivity > 0.0) || !(p.dynamic_range > 0.0))
      throw ConfigError(line, "sensitivity and dynamic range must be positive");
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SensorPoint> read_sensor_registry(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_sensor_registry(in);
}

void write_columns(std::ostream& os, const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw Error("column name count mismatch");
  os << '#';
  for (const auto& n : names) os << ' ' << n;
  os << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw Error("columns differ in length");
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j)
      os << (j ? " " : "") << format_double(columns[j][i]);
    os << '\n';
  }
}

nlohmann::json to_json(const ThresholdFit& fit) {
  return {{"threshold_w", fit.threshold_w},
          {"slope_efficiency", fit.slope_efficiency},
          {"n_points_used", fit.n_points_used},
          {"fit_rms_w", fit.fit_rms_w}};
}

nlohmann::json to_json(const LorentzianFit& fit) {
  nlohmann::json j;
  j["baseline_photons_per_s"] = fit.baseline;
  j["resonances"] = nlohmann::json::array();
  for (const auto& r : fit.resonances) j["resonances"].push_back(resonance_json(r));
  j["residual_rms"] = fit.residual_rms;
  j["iterations"] = fit.iterations;
  j["flags"] = fit.flags;
  return j;
}

LorentzianFit lorentzian_fit_from_json(const nlohmann::json& j) {
  LorentzianFit fit;
  try {
    fit.baseline = j.at("baseline_photons_per_s").get<double>();
    for (const auto& r : j.at("resonances"))
      fit.resonances.push_back({r.at("center_hz").get<double>(),
                                r.at("fwhm_hz").get<double>(),
                                r.at("contrast").get<double>()});
    fit.residual_rms = j.value("residual_rms", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed fit report: ") + e.what());
  }
  if (fit.resonances.empty()) throw Error("fit report has no resonances");
  return fit;
}

nlohmann::json to_json(const SensitivityReport& r) {
  return {{"eta_pointwise_min_t_sqrthz", r.eta_pointwise_min},
          {"eta_general_t_sqrthz", r.eta_general},
          {"eta_approx_t_sqrthz", r.eta_approx},
          {"nu_opt_hz", r.nu_opt},
          {"shift_factor", r.shift_factor},
          {"dynamic_range_t", r.dynamic_range},
          {"fwhm_hz", r.fwhm},
          {"contrast", r.contrast},
          {"baseline_photons_per_s", r.baseline},
          {"resonance_center_hz", r.resonance_center}};
}

nlohmann::json to_json(const CalibrationResult& result) {
  nlohmann::json j;
  j["stage"] = to_string(result.stage);
  j["fitted"] = nlohmann::json::object();
  for (const auto& [key, v] : result.fitted)
    j["fitted"][key] = {{"value", v.value}, {"std_error", v.std_error}};
  j["sse_w2"] = result.sse;
  j["iterations"] = result.iterations;
  j["n_residuals"] = result.n_residuals;
  j["dataset_hash"] = result.dataset_hash;
  j["flags"] = result.flags;
  return j;
}

std::string dataset_hash(const PowerCurve& curve) {
  std::string bytes = to_string(curve.swept_axis);
  for (const auto& p : curve.points) {
    bytes += '|';
    bytes += format_double(p.pump_w);
    bytes += ',';
    bytes += format_double(p.output_w);
  }
  return hex64(fnv1a64(bytes));
}

}  // namespace ltm
