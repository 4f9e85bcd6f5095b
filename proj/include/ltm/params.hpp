#pragma once

#include <string>
#include <vector>

namespace ltm {

// CODATA 2018. electron_g is the magnitude of the free-electron g-factor.
struct PhysicalConstants {
  double planck_h = 6.62607015e-34;    // J s
  double electron_g = 2.00231930436256;
  double bohr_magneton = 9.2740100783e-24;  // J/T
  double speed_of_light = 299792458.0;      // m/s

  // Hz/T
  double gyromagnetic_ratio() const {
    return electron_g * bohr_magneton / planck_h;
  }
  // h / (g_e mu_B), T/Hz; the field-per-frequency conversion.
  double tesla_per_hertz() const {
    return planck_h / (electron_g * bohr_magneton);
  }
};

// Six-level NV ensemble. Level labels: 1 = ground m_S=0, 3 = ground m_S=+-1,
// 2/4 = their triplet excited states, 5 = upper singlet, 6 = lower singlet.
// All rates in Hz (s^-1).
struct NVParams {
  double decay_21 = 66.16e6;
  double decay_43 = 66.16e6;
  double isc_25 = 11.1e6;
  double isc_45 = 91.8e6;
  double singlet_56 = 10e9;
  double isc_61 = 4.87e6;
  double isc_63 = 2.04e6;
  double dephasing_13 = 5e6;  // 1/T2*
  double pump_rate = 0.52e6;  // 5 W of NV pump
  double rabi = 0.83e6;
  double detuning = 0.87e9;
  double singlet_coupling = 463e6;  // absorptive cavity coupling of level 6
  double ensemble_size = 3.2e12;
  double pump_rate_per_watt = 0.104e6;  // Hz/W
};

// Two-level gain medium.
struct MecselParams {
  double decay = 1.26e6;
  double gain_coupling = 188.3e6;
  double pump_rate = 13.52e6;  // 1.3 W of MECSEL pump
  double ensemble_size = 3.2e12;
  double pump_rate_per_watt = 10.4e6;  // Hz/W
};

struct CavityParams {
  double loss_rate = 154e6;         // total, Hz
  double mirror_loss_rate = 75e6;   // output coupler, Hz
  double wavelength = 1042e-9;      // m
};

struct ModelParams {
  NVParams nv;
  MecselParams mecsel;
  CavityParams cavity;
  PhysicalConstants constants;
};

// Every violated invariant, in field order. Empty when valid.
std::vector<std::string> find_violations(const ModelParams& params);

// Returns params unchanged or throws ValidationError listing all violations.
const ModelParams& validate(const ModelParams& params);

// Hz. Throws ltm::Error on negative power.
double pump_power_to_rate(double power_w, double rate_per_watt);

// J. Throws ltm::Error on non-positive wavelength.
double photon_energy(double wavelength_m,
                     const PhysicalConstants& constants = {});

}  // namespace ltm
