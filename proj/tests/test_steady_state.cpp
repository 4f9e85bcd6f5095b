#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ltm/error.hpp"
#include "ltm/laser.hpp"
#include "ltm/steady_state.hpp"
#include "oracles/rate_equations.hpp"

namespace {

ltm::ModelParams gray_at(double mecsel_w) {
  ltm::ModelParams p;
  p.nv.pump_rate = 0.0;
  p.nv.rabi = 0.0;
  p.mecsel.pump_rate = ltm::pump_power_to_rate(mecsel_w, p.mecsel.pump_rate_per_watt);
  return p;
}

// Valid parameters around the tabulated point with the laser above threshold.
ltm::ModelParams random_lasing_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> scale(0.5, 2.0), unit(0.0, 1.0);
  while (true) {
    ltm::ModelParams p;
    p.nv.decay_21 *= scale(rng);
    p.nv.decay_43 *= scale(rng);
    p.nv.isc_25 *= scale(rng);
    p.nv.isc_45 *= scale(rng);
    p.nv.isc_61 *= scale(rng);
    p.nv.isc_63 *= scale(rng);
    p.nv.dephasing_13 *= scale(rng);
    p.nv.pump_rate = 0.1e6 + 1.4e6 * unit(rng);
    p.nv.rabi = 3e6 * unit(rng);
    p.nv.detuning = 2e9 * (unit(rng) - 0.5);
    p.nv.singlet_coupling = 600e6 * unit(rng);
    p.mecsel.pump_rate = 15e6 + 15e6 * unit(rng);
    if (ltm::net_gain(p, 0.0) > 1e6) return p;
  }
}

TEST(NvBlock, WeakDriveWithoutPumpEqualisesGroundStates) {
  ltm::ModelParams p;
  p.nv.pump_rate = 0.0;
  p.nv.rabi = 1e3;
  p.nv.detuning = 0.0;
  for (double n : {0.0, 1e8, 1e11}) {
    const auto s = ltm::nv_steady_state(p, n);
    EXPECT_NEAR(s.rho(1), 0.5, 1e-12);
    EXPECT_NEAR(s.rho(3), 0.5, 1e-12);
    for (int k : {2, 4, 5, 6}) EXPECT_NEAR(s.rho(k), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(s.coherence_13), 0.0, 1e-12);
  }
}

TEST(NvBlock, NoPumpNoDriveIsDegenerate) {
  ltm::ModelParams p;
  p.nv.pump_rate = 0.0;
  p.nv.rabi = 0.0;
  EXPECT_THROW(ltm::nv_steady_state(p, 0.0), ltm::DegenerateSteadyState);
}

TEST(NvBlock, MatchesTimeIntegration) {
  ltm::ModelParams p;
  p.nv.rabi = 0.0;
  const auto s = ltm::nv_steady_state(p, 0.0);
  const auto ref = oracle::relax(p, 0.0, true, 1e-6);
  for (int k = 0; k < 6; ++k)
    EXPECT_NEAR(s.populations[k], ref.populations[k], 1e-9 * std::max(1.0, ref.populations[k]))
        << "level " << k + 1;
  EXPECT_NEAR(s.rho(6) / ref.populations[5], 1.0, 1e-6);
}

TEST(NvBlock, ResidualsAndCoherenceClosure) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> logn(0.0, 12.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_lasing_params(rng);
    const double n = std::pow(10.0, logn(rng));
    const auto s = ltm::nv_steady_state(p, n);
    const std::complex<double> i(0, 1);
    const auto closure = (i * p.nv.detuning - p.nv.dephasing_13 - p.nv.pump_rate) *
                             s.coherence_13 +
                         i * p.nv.rabi * (s.rho(1) - s.rho(3));
    EXPECT_LT(std::abs(closure), 1e-9 * (p.nv.dephasing_13 + std::abs(p.nv.detuning)));
    EXPECT_NEAR(s.trace(), 1.0, 1e-10);
  }
}

TEST(GainMedium, ClosedFormCases) {
  ltm::ModelParams p;
  p.mecsel.pump_rate = 0.0;
  auto m = ltm::mecsel_steady_state(p, 0.0);
  EXPECT_EQ(m.excited, 0.0);
  EXPECT_EQ(m.ground, 1.0);
  m = ltm::mecsel_steady_state(p, 1e300);
  EXPECT_NEAR(m.excited, 0.5, 1e-12);
  p.mecsel.pump_rate = 12.57e6;
  m = ltm::mecsel_steady_state(p, 0.0);
  EXPECT_NEAR(m.inversion(), (12.57 - 1.26) / (12.57 + 1.26), 1e-12);
  EXPECT_NEAR(m.inversion(), 0.8178, 1e-4);
  p.mecsel.pump_rate = 0.0;
  p.mecsel.decay = 0.0;
  EXPECT_THROW(ltm::mecsel_steady_state(p, 0.0), ltm::SolverError);
}

TEST(NetGain, LossOnlyWithoutPumps) {
  // With neither pump the medium sits in its ground state, so at zero photons
  // the gain term is -G_eg on top of the cavity loss, tending to -kappa only
  // as N saturates the medium.
  ltm::ModelParams p;
  p.nv.pump_rate = 0.0;
  p.nv.rabi = 0.0;
  p.mecsel.pump_rate = 0.0;
  EXPECT_DOUBLE_EQ(ltm::net_gain(p, 0.0), -p.cavity.loss_rate - p.mecsel.gain_coupling);
  EXPECT_NEAR(ltm::net_gain(p, 1e30), -p.cavity.loss_rate, 1e-3);
}

TEST(NetGain, ZeroAtNvFreeThreshold) {
  const ltm::ModelParams p;
  const double lth = p.mecsel.decay * (p.mecsel.gain_coupling + p.cavity.loss_rate) /
                     (p.mecsel.gain_coupling - p.cavity.loss_rate);
  EXPECT_NEAR(lth / p.mecsel.pump_rate_per_watt, 1.21, 0.01);
  auto q = gray_at(lth / p.mecsel.pump_rate_per_watt);
  EXPECT_NEAR(ltm::net_gain(q, 0.0), 0.0, 1e-6 * p.cavity.loss_rate);
  q = gray_at(1.21);
  EXPECT_LT(std::abs(ltm::net_gain(q, 0.0)), 0.01 * p.cavity.loss_rate);
}

TEST(NetGain, NonIncreasingInPhotonNumber) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_lasing_params(rng);
    double prev = ltm::net_gain(p, 0.0);
    for (double e = 0; e <= 14; e += 0.25) {
      const double g = ltm::net_gain(p, std::pow(10.0, e));
      EXPECT_LE(g, prev + 1e-9 * p.cavity.loss_rate);
      prev = g;
    }
  }
}

TEST(PhotonNumber, NoPumpNoLasing) {
  auto p = gray_at(0.0);
  const auto s = ltm::solve_photon_number(p);
  EXPECT_FALSE(s.lasing);
  EXPECT_EQ(s.n_photons, 0.0);
  EXPECT_LE(ltm::net_gain(p, 0.0), 0.0);
}

TEST(PhotonNumber, NvFreeMatchesLine) {
  const auto p = gray_at(2.0);
  const auto s = ltm::solve_photon_number(p);
  const double ref = oracle::nv_free_photon_number(p.mecsel.pump_rate, p.mecsel.decay,
                                                   p.mecsel.gain_coupling,
                                                   p.cavity.loss_rate, p.mecsel.ensemble_size);
  EXPECT_NEAR(s.n_photons / ref, 1.0, 1e-6);
  EXPECT_NEAR(s.n_photons, 1.56e10, 0.01e10);
  EXPECT_TRUE(s.lasing);
  EXPECT_LT(s.stability_derivative, 0.0);
  EXPECT_LT(std::abs(ltm::net_gain(p, s.n_photons)), 1e-6 * p.cavity.loss_rate);
}

TEST(PhotonNumber, ResonantOnsetWindow) {
  ltm::ModelParams p;
  p.nv.detuning = 0.0;
  p.mecsel.pump_rate = ltm::pump_power_to_rate(1.7, p.mecsel.pump_rate_per_watt);
  EXPECT_FALSE(ltm::solve_photon_number(p).lasing);
  p.mecsel.pump_rate = ltm::pump_power_to_rate(1.95, p.mecsel.pump_rate_per_watt);
  EXPECT_TRUE(ltm::solve_photon_number(p).lasing);
}

TEST(PhotonNumber, RunawayGainIsReported) {
  auto p = gray_at(2.0);
  p.mecsel.ensemble_size = 1e20;
  EXPECT_THROW(ltm::solve_photon_number(p), ltm::SolverError);
}

TEST(PhotonNumber, MatchesJointTimeIntegration) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_lasing_params(rng);
    const auto s = ltm::solve_photon_number(p);
    ASSERT_TRUE(s.lasing);
    const auto ref = oracle::relax(p, 1.0, false);
    EXPECT_NEAR(s.n_photons / ref.n_photons, 1.0, 1e-3) << "trial " << trial;
    EXPECT_NEAR(s.nv.rho(6), ref.populations[5], 1e-3 * ref.populations[5] + 1e-15);
    EXPECT_NEAR(s.mecsel.excited, ref.rho_ee, 1e-6);
  }
}

TEST(PhotonNumber, ResonantDriveOnlyAddsLoss) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_lasing_params(rng);
    p.nv.detuning = 0.0;
    const double resonant = ltm::solve_photon_number(p).n_photons;
    p.nv.detuning = 1e12;
    EXPECT_LE(resonant, ltm::solve_photon_number(p).n_photons * (1 + 1e-12));
  }
}

TEST(PhotonNumber, TraceInvariants) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = ltm::solve_photon_number(random_lasing_params(rng));
    EXPECT_NEAR(s.nv.trace(), 1.0, 1e-10);
    EXPECT_NEAR(s.mecsel.ground + s.mecsel.excited, 1.0, 1e-12);
    for (double r : s.nv.populations) {
      EXPECT_GE(r, -1e-12);
      EXPECT_LE(r, 1 + 1e-12);
    }
  }
}

TEST(MultiFamily, ReducesToSingleFamily) {
  ltm::ModelParams p;
  p.mecsel.pump_rate = 20e6;
  p.nv.detuning = 0.0;
  const auto one = ltm::solve_photon_number(p);
  const std::vector<ltm::NvFamily> single{{1.0, 0.0}};
  EXPECT_NEAR(ltm::multi_family_steady_state(p, single).n_photons, one.n_photons,
              1e-9 * one.n_photons);
  const std::vector<ltm::NvFamily> four(4, {0.25, 0.0});
  EXPECT_NEAR(ltm::multi_family_steady_state(p, four).n_photons, one.n_photons,
              1e-9 * one.n_photons);
  const std::vector<ltm::NvFamily> bad{{0.5, 0.0}, {0.4, 0.0}};
  EXPECT_THROW(ltm::multi_family_steady_state(p, bad), ltm::Error);
}

TEST(MultiFamily, ResonantQuarterKillsLasingNearThreshold) {
  ltm::ModelParams p;
  p.nv.rabi = 5e6;
  p.nv.detuning = 1e12;
  const double off = ltm::exact_threshold(p, ltm::PumpAxis::mecsel_pump);
  p.mecsel.pump_rate = ltm::pump_power_to_rate(1.01 * off, p.mecsel.pump_rate_per_watt);
  const std::vector<ltm::NvFamily> fam{{0.25, 0.0}, {0.25, 50e6}, {0.25, -80e6}, {0.25, 120e6}};
  ASSERT_TRUE(ltm::solve_photon_number(p).lasing);
  EXPECT_FALSE(ltm::multi_family_steady_state(p, fam).lasing);
}

TEST(Output, PowerConversion) {
  const ltm::ModelParams p;
  EXPECT_EQ(ltm::output_power(0.0, p), 0.0);
  EXPECT_NEAR(ltm::output_power(1.56e10, p), 0.22, 0.005);
  EXPECT_DOUBLE_EQ(ltm::output_power(2e10, p), 2 * ltm::output_power(1e10, p));
}

}  // namespace
