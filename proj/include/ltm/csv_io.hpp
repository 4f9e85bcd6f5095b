#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltm/calibration.hpp"
#include "ltm/laser.hpp"
#include "ltm/odmr.hpp"
#include "ltm/sensitivity.hpp"

namespace ltm {

// `#`-prefixed metadata lines precede the header unless with_meta is false.
void write_power_curve_csv(std::ostream& os, const PowerCurve& curve,
                           bool with_meta = true);
PowerCurve read_power_curve_csv(std::istream& is);
PowerCurve read_power_curve_csv(const std::filesystem::path& path);

void write_odmr_csv(std::ostream& os, const OdmrSpectrum& spectrum,
                    bool with_meta = true);
OdmrSpectrum read_odmr_csv(std::istream& is);
OdmrSpectrum read_odmr_csv(const std::filesystem::path& path);

std::vector<SensorPoint> read_sensor_registry(std::istream& is);
std::vector<SensorPoint> read_sensor_registry(const std::filesystem::path& path);

// Whitespace-separated columns for gnuplot.
void write_columns(std::ostream& os, const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns);

nlohmann::json to_json(const ThresholdFit& fit);
nlohmann::json to_json(const LorentzianFit& fit);
nlohmann::json to_json(const SensitivityReport& report);
nlohmann::json to_json(const CalibrationResult& result);
LorentzianFit lorentzian_fit_from_json(const nlohmann::json& j);

// FNV-1a over the numeric content of a curve.
std::string dataset_hash(const PowerCurve& curve);

}  // namespace ltm
