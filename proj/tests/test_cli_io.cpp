#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ltm/cli.hpp"
#include "ltm/csv_io.hpp"
#include "ltm/error.hpp"

namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = ltm::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ltm_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Cli, GrayCurveAndThreshold) {
  const auto csv = scratch("gray.csv");
  auto r = run({"simulate-power", "--set", "nv.Lambda_NV=0", "--set", "nv.Omega=0", "--range",
                "0:2.5:101", "-o", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = slurp(csv);
  EXPECT_NE(text.find("\npump_w,output_w\n"), std::string::npos);
  EXPECT_NE(text.find("# params_hash: "), std::string::npos);
  r = run({"fit-threshold", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["threshold_w"].get<double>(), 1.21, 0.01);
  EXPECT_EQ(j["n_points_used"].get<int>(), 10);
}

TEST(Cli, OutputIsDeterministic) {
  const std::vector<std::string> args{"simulate-power", "--range", "1:2:11", "--noise", "0.01",
                                      "--seed", "4"};
  const auto a = run(args), b = run(args);
  EXPECT_EQ(a.out, b.out);
  auto no_meta = args;
  no_meta.push_back("--no-meta");
  const auto c = run(no_meta);
  EXPECT_EQ(c.out.rfind("pump_w,output_w\n", 0), 0u);
  auto other_seed = args;
  other_seed[6] = "5";
  EXPECT_NE(run(other_seed).out, a.out);
}

TEST(Cli, SensitivityFromWatts) {
  const auto r = run({"sensitivity", "--fwhm", "7.85e6", "--contrast", "0.97", "--baseline-watts",
                      "16e-3", "--wavelength", "1042e-9"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["dynamic_range_t"].get<double>(), 2.8e-4, 0.014e-4);
  EXPECT_LT(j["eta_general_t_sqrthz"].get<double>(), j["eta_approx_t_sqrthz"].get<double>());
  EXPECT_NEAR(j["baseline_photons_per_s"].get<double>(), 8.39e16, 0.01e16);
}

TEST(Cli, OdmrPipelineWithPlotData) {
  const auto csv = scratch("odmr.csv"), plot = scratch("odmr.dat"), fit = scratch("fit.json"),
             eta = scratch("eta.dat");
  auto r = run({"simulate-odmr", "--set", "mecsel.Lambda_ge=20e6", "--range", "2.84e9:2.90e9:241",
                "--line", "2.87e9:1", "-o", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(csv).find("frequency_hz,output_w\n"), std::string::npos);
  r = run({"fit-odmr", csv.string(), "-k", "1", "-o", fit.string(), "--plot-data", plot.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(fit));
  EXPECT_TRUE(j.contains("baseline_photons_per_s"));
  EXPECT_TRUE(j.contains("residual_rms"));
  ASSERT_EQ(j["resonances"].size(), 1u);
  EXPECT_NEAR(j["resonances"][0]["center_hz"].get<double>(), 2.87e9, 1e5);

  std::istringstream lines(slurp(plot));
  std::string header, row;
  std::getline(lines, header);
  EXPECT_EQ(header, "# frequency_hz data_w model_w");
  std::getline(lines, row);
  std::istringstream cols(row);
  double a, b, c;
  EXPECT_TRUE(cols >> a >> b >> c);

  r = run({"sensitivity", "--fit", fit.string(), "--plot-data", eta.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(eta).find("# frequency_hz eta_t_sqrthz"), std::string::npos);
}

TEST(Cli, CalibrateWritesReport) {
  const auto csv = scratch("green.csv"), cfg = scratch("fitted.cfg");
  ASSERT_EQ(run({"simulate-power", "--set", "nv.Omega=0", "-o", csv.string()}).code, 0);
  const auto r = run({"calibrate", csv.string(), "--stage", "singlet", "--set", "nv.Omega=0",
                      "--set", "nv.G_S=100e6", "--write-config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["fitted"]["nv.G_S"]["value"].get<double>() / 463e6, 1.0, 1e-3);
  EXPECT_TRUE(j["fitted"]["nv.G_S"].contains("std_error"));
  EXPECT_TRUE(j.contains("sse_w2"));
  EXPECT_TRUE(j.contains("dataset_hash"));
  EXPECT_NE(slurp(cfg).find("nv.G_S = "), std::string::npos);
}

TEST(Cli, CompareSensors) {
  const auto reg = scratch("registry.csv");
  {
    std::ofstream(reg) << "name,sensitivity_t_sqrthz,dynamic_range_t,flux_concentrator,closed_loop\n"
                          "alpha,1e-12,1e-4,0,0\n"
                          "beta,1e-9,1e-1,0,0\n"
                          "gamma,1e-14,1e-9,1,0\n"
                          "ltm,1e-12,7.8e-2,0,0\n";
  }
  const auto r = run({"compare-sensors", reg.string(), "--reference", "ltm"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["reference_deviation"].get<double>(), 780.0, 1e-6);
  EXPECT_EQ(j["n_points_fitted"].get<int>(), 2);
  EXPECT_EQ(j["sensors"].size(), 4u);
  EXPECT_EQ(run({"compare-sensors", reg.string(), "--reference", "nobody"}).code, 1);
}

TEST(Cli, DryRunPrintsResolvedParams) {
  const auto out = scratch("never.csv");
  fs::remove(out);
  const auto r = run({"simulate-power", "--set", "nv.Omega=1e6", "--dry-run", "-o", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("nv.Omega = 1e+06"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run({"simulate-odmr", "--dry-run"}).code, 0);
  EXPECT_EQ(
      run({"sensitivity", "--dry-run", "--fwhm", "1e6", "--contrast", "0.5", "--baseline", "1e16"})
          .code,
      0);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"transmogrify"}).code, 2);
  EXPECT_EQ(run({"fit-threshold"}).code, 2);
  EXPECT_EQ(run({"simulate-power", "--range", "3:1:10"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);

  auto r = run({"simulate-power", "--set", "nv.Nothing=1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
  r = run({"simulate-power", "--set", "cavity.kappa_mirror=200e6"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("mirror loss exceeds total loss"), std::string::npos);
  r = run({"fit-threshold", scratch("missing.csv").string()});
  EXPECT_EQ(r.code, 1);
  r = run({"sensitivity", "--fwhm", "1e6", "--contrast", "1.5", "--baseline", "1e16"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
}

TEST(CsvIo, PowerCurveRoundTrip) {
  ltm::PowerCurve c;
  c.swept_axis = ltm::PumpAxis::nv_pump;
  c.label = "synthetic";
  c.points = {{0.0, 0.1}, {0.1, 0.0999999999999}, {0.2, 1.0 / 3.0}};
  std::stringstream ss;
  ltm::write_power_curve_csv(ss, c);
  const auto back = ltm::read_power_curve_csv(ss);
  EXPECT_EQ(back.swept_axis, c.swept_axis);
  EXPECT_EQ(back.label, c.label);
  ASSERT_EQ(back.points.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(back.points[i].output_w, c.points[i].output_w);
  EXPECT_EQ(ltm::dataset_hash(back), ltm::dataset_hash(c));
}

TEST(CsvIo, RejectsMalformedInput) {
  std::istringstream bad_header("pump,output\n1,2\n");
  EXPECT_THROW(ltm::read_power_curve_csv(bad_header), ltm::ConfigError);
  std::istringstream bad_cell("pump_w,output_w\n1,abc\n");
  try {
    ltm::read_power_curve_csv(bad_cell);
    FAIL();
  } catch (const ltm::ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  std::istringstream bad_flag(
      "name,sensitivity_t_sqrthz,dynamic_range_t,flux_concentrator,closed_loop\nx,1e-9,1e-3,maybe,0\n");
  EXPECT_THROW(ltm::read_sensor_registry(bad_flag), ltm::ConfigError);
}

TEST(CsvIo, FitJsonRoundTrip) {
  ltm::LorentzianFit fit;
  fit.baseline = 8e16;
  fit.resonances = {{2.86e9, 7e6, 0.97}, {2.88e9, 6e6, 0.5}};
  fit.residual_rms = 12.5;
  const auto back = ltm::lorentzian_fit_from_json(ltm::to_json(fit));
  EXPECT_EQ(back.baseline, fit.baseline);
  ASSERT_EQ(back.resonances.size(), 2u);
  EXPECT_EQ(back.resonances[1].contrast, 0.5);
  EXPECT_THROW(ltm::lorentzian_fit_from_json(nlohmann::json::object()), ltm::Error);
}

}  // namespace
