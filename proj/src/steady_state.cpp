#include "ltm/steady_state.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "ltm/error.hpp"
#include "ltm/numeric.hpp"

namespace ltm {

namespace {

using Matrix8 = Eigen::Matrix<double, 8, 8>;
using Vector8 = Eigen::Matrix<double, 8, 1>;

struct Drive {
  double rabi;
  double detuning;
};

Drive drive_of(const ModelParams& p, const NvFamily& family) {
  if (!family.detuning) return {0.0, 0.0};
  return {p.nv.rabi, *family.detuning};
}

// Unknowns: rho11..rho66, Re rho13, Im rho13. Rows 0..6 are the real and
// imaginary parts of the rho13 equation and the rho11..rho55 equations; row 7
// is the trace, replacing the redundant rho66 equation.
void assemble(const NVParams& nv, double n_photons, Drive drive, Matrix8& a) {
  const double dephase = nv.dephasing_13 + nv.pump_rate;
  const double omega = drive.rabi;
  const double delta = drive.detuning;
  const double absorb = nv.singlet_coupling * n_photons / nv.ensemble_size;
  const double pump = nv.pump_rate;
  a.setZero();
  // d rho13/dt = (i delta - dephase) rho13 + i omega (rho11 - rho33)
  a(0, 6) = -dephase;
  a(0, 7) = -delta;
  a(1, 6) = delta;
  a(1, 7) = -dephase;
  a(1, 0) = omega;
  a(1, 2) = -omega;
  // i omega (rho13 - rho31) = -2 omega Im rho13
  a(2, 7) = -2.0 * omega;
  a(2, 0) = -pump;
  a(2, 1) = nv.decay_21;
  a(2, 5) = nv.isc_61;
  a(3, 0) = pump;
  a(3, 1) = -(nv.decay_21 + nv.isc_25);
  a(4, 7) = 2.0 * omega;
  a(4, 2) = -pump;
  a(4, 3) = nv.decay_43;
  a(4, 5) = nv.isc_63;
  a(5, 2) = pump;
  a(5, 3) = -(nv.decay_43 + nv.isc_45);
  a(6, 1) = nv.isc_25;
  a(6, 3) = nv.isc_45;
  a(6, 4) = -nv.singlet_56;
  a(6, 5) = absorb;
  for (int j = 0; j < 6; ++j) a(7, j) = 1.0;
}

NVState unpumped_state() {
  // With no optical pump every stationary state has empty excited and singlet
  // levels; report the weak-drive limit, an equal ground-state mixture.
  NVState s;
  s.populations = {0.5, 0.0, 0.5, 0.0, 0.0, 0.0};
  return s;
}

NVState family_state(const ModelParams& p, double n, const NvFamily& family) {
  if (p.nv.pump_rate == 0.0) return unpumped_state();
  return nv_steady_state(p, n, family);
}

void check_families(std::span<const NvFamily> families) {
  if (families.empty()) throw SolverError("no NV families given");
  double total = 0.0;
  for (const auto& f : families) {
    if (!(f.weight >= 0.0)) throw SolverError("negative NV family weight");
    total += f.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw SolverError("NV family weights must sum to 1, got " +
                      std::to_string(total));
}

template <typename Gain>
void check_single_crossing(const Gain& gain, double root, double g0,
                           const SolverOptions& options) {
  // Gain must stay positive below the root and negative above it. A probe of
  // the wrong sign brackets a second crossing against a known-sign point.
  for (int k = 6; k >= 1; --k) {
    const double x = root * std::pow(10.0, -k);
    const double gx = gain(x);
    if (gx <= 0.0) {
      const auto other = numeric::bracketed_root(gain, 0.0, x, g0, gx, 1e-9, 1e-12);
      throw NonMonotoneGain("non-monotone net gain: two candidate roots",
                            other.x, root);
    }
  }
  double last_negative = 0.0, g_last = 0.0;
  for (double factor = 1.5; root * factor <= options.n_max; factor *= 10.0) {
    const double x = root * factor;
    const double gx = gain(x);
    if (gx >= 0.0) {
      const double other =
          last_negative > 0.0
              ? numeric::bracketed_root(gain, last_negative, x, g_last, gx, 1e-9, 1e-12).x
              : x;
      throw NonMonotoneGain("non-monotone net gain: two candidate roots", root,
                            other);
    }
    last_negative = x;
    g_last = gx;
  }
}

}  // namespace

double NVState::trace() const {
  double t = 0.0;
  for (double v : populations) t += v;
  return t;
}

NVState nv_steady_state(const ModelParams& params, double n_photons) {
  return nv_steady_state(params, n_photons, NvFamily{1.0, params.nv.detuning});
}

NVState nv_steady_state(const ModelParams& params, double n_photons,
                        const NvFamily& family) {
  if (!(n_photons >= 0.0)) throw SolverError("photon number must be >= 0");
  const Drive drive = drive_of(params, family);
  if (params.nv.pump_rate == 0.0 && drive.rabi == 0.0)
    throw DegenerateSteadyState(
        "degenerate steady state: ground levels |1> and |3> are decoupled "
        "(no NV pump and no microwave drive)");

  Matrix8 a;
  assemble(params.nv, n_photons, drive, a);
  Vector8 b = Vector8::Zero();
  b[7] = 1.0;
  Eigen::PartialPivLU<Matrix8> lu(a);
  const Vector8 x = lu.solve(b);
  if (!x.allFinite() || std::abs(lu.determinant()) == 0.0)
    throw SolverError("singular NV steady-state assembly");

  NVState s;
  for (int i = 0; i < 6; ++i) s.populations[i] = x[i];
  s.coherence_13 = {x[6], x[7]};
  return s;
}

std::array<double, 8> nv_residuals(const ModelParams& params, double n,
                                   const NvFamily& family,
                                   const NVState& s) {
  const auto& nv = params.nv;
  const Drive d = drive_of(params, family);
  const std::complex<double> i{0.0, 1.0};
  const std::complex<double> r13 = s.coherence_13;
  const std::complex<double> r31 = std::conj(r13);
  const double r1 = s.rho(1), r2 = s.rho(2), r3 = s.rho(3), r4 = s.rho(4),
               r5 = s.rho(5), r6 = s.rho(6);
  const double absorb = nv.singlet_coupling * n / nv.ensemble_size;
  const std::complex<double> d13 =
      (i * d.detuning - nv.dephasing_13 - nv.pump_rate) * r13 +
      i * d.rabi * (r1 - r3);
  const double d11 = (i * d.rabi * (r13 - r31)).real() - nv.pump_rate * r1 +
                     nv.decay_21 * r2 + nv.isc_61 * r6;
  const double d22 = nv.pump_rate * r1 - (nv.decay_21 + nv.isc_25) * r2;
  const double d33 = (i * d.rabi * (r31 - r13)).real() - nv.pump_rate * r3 +
                     nv.decay_43 * r4 + nv.isc_63 * r6;
  const double d44 = nv.pump_rate * r3 - (nv.decay_43 + nv.isc_45) * r4;
  const double d55 =
      nv.isc_25 * r2 + nv.isc_45 * r4 - nv.singlet_56 * r5 + absorb * r6;
  const double d66 =
      nv.singlet_56 * r5 - absorb * r6 - (nv.isc_61 + nv.isc_63) * r6;
  return {d13.real(), d13.imag(), d11, d22, d33, d44, d55, d66};
}

MecselState mecsel_steady_state(const ModelParams& params, double n_photons) {
  if (!(n_photons >= 0.0)) throw SolverError("photon number must be >= 0");
  const auto& m = params.mecsel;
  MecselState s;
  const double stim = m.gain_coupling * n_photons / m.ensemble_size;
  if (std::isinf(stim)) {
    s.excited = s.ground = 0.5;
    return s;
  }
  const double den = m.pump_rate + m.decay + 2.0 * stim;
  if (den == 0.0)
    throw SolverError("MECSEL steady state undefined: all rates are zero");
  s.excited = (m.pump_rate + stim) / den;
  s.ground = 1.0 - s.excited;
  return s;
}

double singlet_population(const ModelParams& params, double n_photons,
                          std::span<const NvFamily> families) {
  if (params.nv.pump_rate == 0.0) return 0.0;
  double total = 0.0;
  for (const auto& f : families) {
    if (f.weight == 0.0) continue;
    total += f.weight * nv_steady_state(params, n_photons, f).rho(6);
  }
  return total;
}

double net_gain(const ModelParams& params, double n_photons) {
  const NvFamily family{1.0, params.nv.detuning};
  return net_gain(params, n_photons, std::span<const NvFamily>(&family, 1));
}

double net_gain(const ModelParams& params, double n_photons,
                std::span<const NvFamily> families) {
  const double absorption =
      params.nv.singlet_coupling == 0.0
          ? 0.0
          : params.nv.singlet_coupling *
                singlet_population(params, n_photons, families);
  const MecselState m = mecsel_steady_state(params, n_photons);
  return -absorption + params.mecsel.gain_coupling * m.inversion() -
         params.cavity.loss_rate;
}

PhotonSolution solve_photon_number(const ModelParams& params,
                                   const SolverOptions& options) {
  const NvFamily family{1.0, params.nv.detuning};
  return multi_family_steady_state(
      params, std::span<const NvFamily>(&family, 1), options);
}

PhotonSolution multi_family_steady_state(const ModelParams& params,
                                         std::span<const NvFamily> families,
                                         const SolverOptions& options) {
  check_families(families);
  auto gain = [&](double n) { return net_gain(params, n, families); };

  PhotonSolution sol;
  const double g0 = gain(0.0);
  double root = 0.0;
  if (g0 > 0.0) {
    double lo = 0.0, g_lo = g0;
    double hi = std::min(params.mecsel.ensemble_size, options.n_max), g_hi = gain(hi);
    while (g_hi > 0.0) {
      if (hi >= options.n_max)
        throw SolverError("runaway gain: check parameters (no sign change of "
                          "the net gain below N = " +
                          std::to_string(options.n_max) + ")");
      lo = hi;
      g_lo = g_hi;
      hi = std::min(hi * 10.0, options.n_max);
      g_hi = gain(hi);
    }
    root = numeric::bracketed_root(gain, lo, hi, g_lo, g_hi, 1e-9,
                                   options.xtol_rel, options.max_iterations)
               .x;

    if (options.check_monotone) check_single_crossing(gain, root, g0, options);

    const double h = std::max(1.0, 1e-6 * root);
    const double up = root + h;
    const double down = std::max(root - h, 0.0);
    sol.stability_derivative =
        (up * gain(up) - down * gain(down)) / (up - down);
    if (!(sol.stability_derivative < 0.0))
      throw NonMonotoneGain("lasing root is not stable (d(dN/dt)/dN >= 0)",
                            root, root);
    sol.lasing = true;
  } else {
    sol.stability_derivative = g0;
  }

  sol.n_photons = root;
  sol.mecsel = mecsel_steady_state(params, root);
  for (const auto& f : families) {
    const NVState s = family_state(params, root, f);
    for (int i = 0; i < 6; ++i) sol.nv.populations[i] += f.weight * s.populations[i];
    sol.nv.coherence_13 += f.weight * s.coherence_13;
  }
  return sol;
}

double output_power(double n_photons, const ModelParams& params) {
  return photon_energy(params.cavity.wavelength, params.constants) *
         params.cavity.mirror_loss_rate * n_photons;
}

}  // namespace ltm
