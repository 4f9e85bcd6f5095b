#include "ltm/params.hpp"

#include <cmath>

#include "ltm/error.hpp"

namespace ltm {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

void check_rate(std::vector<std::string>& out, double value, const char* name) {
  if (!std::isfinite(value))
    out.push_back(std::string("non-finite value ") + name);
  else if (value < 0.0)
    out.push_back(std::string("negative rate ") + name);
}

void check_positive(std::vector<std::string>& out, double value,
                    const char* message) {
  if (!(std::isfinite(value) && value > 0.0)) out.emplace_back(message);
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error("invalid parameters: " + join(violations)),
      violations_(std::move(violations)) {}

std::vector<std::string> find_violations(const ModelParams& p) {
  std::vector<std::string> out;
  const auto& nv = p.nv;
  check_rate(out, nv.decay_21, "L21");
  check_rate(out, nv.decay_43, "L43");
  check_rate(out, nv.isc_25, "L25");
  check_rate(out, nv.isc_45, "L45");
  check_rate(out, nv.singlet_56, "L56");
  check_rate(out, nv.isc_61, "L61");
  check_rate(out, nv.isc_63, "L63");
  check_rate(out, nv.dephasing_13, "Gamma13");
  check_rate(out, nv.pump_rate, "Lambda_NV");
  check_rate(out, nv.rabi, "Omega");
  if (!std::isfinite(nv.detuning)) out.emplace_back("non-finite value Delta");
  check_rate(out, nv.singlet_coupling, "G_S");
  check_positive(out, nv.ensemble_size, "ensemble size must be positive (N_NV)");
  check_rate(out, nv.pump_rate_per_watt, "nv.pump_rate_per_watt");

  const auto& m = p.mecsel;
  check_rate(out, m.decay, "L_eg");
  check_rate(out, m.gain_coupling, "G_eg");
  check_rate(out, m.pump_rate, "Lambda_ge");
  check_positive(out, m.ensemble_size, "ensemble size must be positive (N_2M)");
  check_rate(out, m.pump_rate_per_watt, "mecsel.pump_rate_per_watt");

  const auto& c = p.cavity;
  check_positive(out, c.loss_rate, "cavity loss rate kappa must be positive");
  check_positive(out, c.mirror_loss_rate,
                 "mirror loss rate kappa_mirror must be positive");
  if (std::isfinite(c.loss_rate) && std::isfinite(c.mirror_loss_rate) &&
      c.mirror_loss_rate > c.loss_rate)
    out.emplace_back("mirror loss exceeds total loss");
  check_positive(out, c.wavelength, "wavelength must be positive");

  const auto& k = p.constants;
  check_positive(out, k.planck_h, "planck_h must be positive");
  check_positive(out, k.electron_g, "electron_g must be positive");
  check_positive(out, k.bohr_magneton, "bohr_magneton must be positive");
  check_positive(out, k.speed_of_light, "speed_of_light must be positive");
  return out;
}

const ModelParams& validate(const ModelParams& params) {
  auto violations = find_violations(params);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return params;
}

double pump_power_to_rate(double power_w, double rate_per_watt) {
  if (!(power_w >= 0.0))
    throw Error("pump power must be non-negative, got " +
                std::to_string(power_w) + " W");
  return power_w * rate_per_watt;
}

double photon_energy(double wavelength_m, const PhysicalConstants& constants) {
  if (!(wavelength_m > 0.0)) throw Error("wavelength must be positive");
  return constants.planck_h * constants.speed_of_light / wavelength_m;
}

}  // namespace ltm
