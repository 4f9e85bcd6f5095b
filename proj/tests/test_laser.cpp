#include <cmath>

#include <gtest/gtest.h>

#include "ltm/error.hpp"
#include "ltm/laser.hpp"
#include "ltm/steady_state.hpp"
#include "oracles/rate_equations.hpp"

namespace {

ltm::ModelParams gray() {
  ltm::ModelParams p;
  p.nv.pump_rate = 0.0;
  p.nv.rabi = 0.0;
  return p;
}
ltm::ModelParams green() { return {}; }
ltm::ModelParams blue() {
  ltm::ModelParams p;
  p.nv.detuning = 0.0;
  return p;
}

ltm::PowerCurve curve_of(const ltm::ModelParams& p) {
  return ltm::sweep_mecsel_pump(p, ltm::uniform_grid(0.0, 2.5, 101));
}

TEST(Sweep, GrayCurveFollowsLine) {
  const auto p = gray();
  const auto curve = curve_of(p);
  ASSERT_EQ(curve.points.size(), 101u);
  for (const auto& pt : curve.points) {
    const double n = oracle::nv_free_photon_number(
        pt.pump_w * p.mecsel.pump_rate_per_watt, p.mecsel.decay, p.mecsel.gain_coupling,
        p.cavity.loss_rate, p.mecsel.ensemble_size);
    const double ref = n * ltm::photon_energy(p.cavity.wavelength) * p.cavity.mirror_loss_rate;
    EXPECT_NEAR(pt.output_w, ref, 1e-6 * ref + 1e-15);
  }
  const auto fit = ltm::extract_threshold(curve);
  EXPECT_NEAR(fit.threshold_w, 1.21, 0.01);
}

TEST(Sweep, ThresholdAndSlopeOrdering) {
  const auto g = ltm::extract_threshold(curve_of(gray()));
  const auto n = ltm::extract_threshold(curve_of(green()));
  const auto b = ltm::extract_threshold(curve_of(blue()));
  EXPECT_LT(g.threshold_w, n.threshold_w);
  EXPECT_LT(n.threshold_w, b.threshold_w);
  EXPECT_GT(g.slope_efficiency, n.slope_efficiency);
  EXPECT_GT(n.slope_efficiency, b.slope_efficiency);
  EXPECT_NEAR(n.threshold_w, 1.53, 0.153);
  EXPECT_NEAR(b.threshold_w, 1.82, 0.182);
  EXPECT_NEAR(g.slope_efficiency, 0.274, 0.15 * 0.274);
  EXPECT_NEAR(b.slope_efficiency, 0.187, 0.15 * 0.187);
}

TEST(Sweep, AffineAboveThreshold) {
  for (const auto& p : {gray(), green(), blue()}) {
    const double t = ltm::exact_threshold(p, ltm::PumpAxis::mecsel_pump);
    const auto curve = ltm::sweep_mecsel_pump(p, ltm::uniform_grid(1.1 * t, 1.5 * t, 41));
    const auto& a = curve.points.front();
    const auto& b = curve.points.back();
    for (const auto& pt : curve.points) {
      const double line =
          a.output_w + (b.output_w - a.output_w) * (pt.pump_w - a.pump_w) / (b.pump_w - a.pump_w);
      EXPECT_LT(std::abs(pt.output_w - line), 0.005 * pt.output_w);
    }
  }
}

TEST(Sweep, NvPumpLowersOutput) {
  ltm::ModelParams p;
  p.mecsel.decay = 5.1e6;
  p.mecsel.gain_coupling = 354e6;
  p.mecsel.pump_rate = ltm::pump_power_to_rate(1.3, p.mecsel.pump_rate_per_watt);
  const auto curve = ltm::sweep_nv_pump(p, ltm::uniform_grid(0.0, 6.0, 61));
  for (std::size_t i = 1; i < curve.points.size(); ++i)
    EXPECT_LE(curve.points[i].output_w, curve.points[i - 1].output_w);

  auto unpumped = p;
  unpumped.nv.pump_rate = 0.0;
  EXPECT_NEAR(curve.points.front().output_w,
              ltm::output_power(ltm::solve_photon_number(unpumped).n_photons, p), 1e-15);

  const double off = ltm::extract_turn_off(curve).threshold_w;
  p.nv.detuning = 0.0;
  const double on = ltm::extract_turn_off(ltm::sweep_nv_pump(p, ltm::uniform_grid(0.0, 6.0, 61)))
                        .threshold_w;
  EXPECT_LT(on, off);
}

TEST(Sweep, ErrorsNameTheGridPoint) {
  auto p = gray();
  p.mecsel.ensemble_size = 1e20;
  try {
    ltm::sweep_mecsel_pump(p, {2.0});
    FAIL();
  } catch (const ltm::Error& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  EXPECT_THROW(ltm::sweep_mecsel_pump(p, {}), ltm::Error);
  EXPECT_THROW(ltm::sweep_mecsel_pump(gray(), {1.0, 0.5}), ltm::Error);
  EXPECT_THROW(ltm::sweep_mecsel_pump(gray(), {-1.0, 0.5}), ltm::Error);
}

TEST(Threshold, RecoversExactLine) {
  ltm::PowerCurve c;
  for (int i = 0; i <= 40; ++i) {
    const double x = 0.05 * i;
    c.points.push_back({x, x > 1.0 ? 0.25 * (x - 1.0) : 0.0});
  }
  const auto fit = ltm::extract_threshold(c);
  EXPECT_NEAR(fit.threshold_w, 1.0, 1e-12);
  EXPECT_NEAR(fit.slope_efficiency, 0.25, 1e-12);
  EXPECT_EQ(fit.n_points_used, 10);
  EXPECT_LT(fit.fit_rms_w, 1e-14);
}

TEST(Threshold, Errors) {
  ltm::PowerCurve c;
  for (int i = 0; i < 20; ++i) c.points.push_back({0.1 * i, i > 14 ? 0.1 * (i - 14) : 0.0});
  EXPECT_THROW(ltm::extract_threshold(c), ltm::FitError);
  ltm::PowerCurve falling;
  for (int i = 0; i < 20; ++i) falling.points.push_back({0.1 * i, 2.0 - 0.1 * i});
  EXPECT_THROW(ltm::extract_threshold(falling), ltm::FitError);
}

TEST(ClosedForm, LineProperties) {
  auto p = gray();
  const double lth = ltm::closed_form_threshold_rate(p);
  EXPECT_NEAR(ltm::closed_form_photon_number(p, lth).n_photons, 0.0, 1e-3);
  const auto at2 = ltm::closed_form_photon_number(p, 2.0 * p.mecsel.pump_rate_per_watt);
  EXPECT_TRUE(at2.lasing_possible);
  EXPECT_NEAR(at2.n_photons, 1.56e10, 0.01e10);

  p.mecsel.gain_coupling = 100e6;
  const auto none = ltm::closed_form_photon_number(p, 1e9);
  EXPECT_FALSE(none.lasing_possible);
  EXPECT_EQ(none.n_photons, 0.0);
}

TEST(Axis, NamesRoundTrip) {
  for (auto a : {ltm::PumpAxis::mecsel_pump, ltm::PumpAxis::nv_pump})
    EXPECT_EQ(ltm::pump_axis_from_string(ltm::to_string(a)), a);
  EXPECT_THROW(ltm::pump_axis_from_string("sideways"), ltm::Error);
}

}  // namespace
