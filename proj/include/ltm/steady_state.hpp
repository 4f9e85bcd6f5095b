#pragma once

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "ltm/params.hpp"

namespace ltm {

struct NVState {
  // rho_11 ... rho_66
  std::array<double, 6> populations{};
  // rho_13; rho_31 is its conjugate.
  std::complex<double> coherence_13{};

  double rho(int level) const { return populations[level - 1]; }
  double trace() const;
};

struct MecselState {
  double ground = 1.0;
  double excited = 0.0;
  double inversion() const { return excited - ground; }
};

struct PhotonSolution {
  double n_photons = 0.0;
  bool lasing = false;
  NVState nv;  // weight-averaged over families
  MecselState mecsel;
  // d(dN/dt)/dN at the solution, Hz.
  double stability_derivative = 0.0;
};

// One sub-ensemble of NV centres sharing the common parameters but seeing
// its own microwave detuning. An empty detuning means the family is not
// driven at all.
struct NvFamily {
  double weight = 1.0;
  std::optional<double> detuning;
};

struct SolverOptions {
  double n_max = 1e16;
  double xtol_rel = 1e-13;
  int max_iterations = 300;
  // Extra gain evaluations on a log grid to catch a second sign change.
  bool check_monotone = true;
};

// Steady state of the NV block at fixed cavity photon number. Throws
// DegenerateSteadyState when pump and drive both vanish.
NVState nv_steady_state(const ModelParams& params, double n_photons);
NVState nv_steady_state(const ModelParams& params, double n_photons,
                        const NvFamily& family);

MecselState mecsel_steady_state(const ModelParams& params, double n_photons);

// Population of the absorbing lower singlet, averaged over families. Exactly
// zero without NV pump, where every stationary state has empty excited and
// singlet levels.
double singlet_population(const ModelParams& params, double n_photons,
                          std::span<const NvFamily> families);

// dN/dt divided by N, Hz.
double net_gain(const ModelParams& params, double n_photons);
double net_gain(const ModelParams& params, double n_photons,
                std::span<const NvFamily> families);

PhotonSolution solve_photon_number(const ModelParams& params,
                                   const SolverOptions& options = {});
PhotonSolution multi_family_steady_state(const ModelParams& params,
                                         std::span<const NvFamily> families,
                                         const SolverOptions& options = {});

// W
double output_power(double n_photons, const ModelParams& params);

// Residuals of the eight real NV rate equations at a state, for checks.
std::array<double, 8> nv_residuals(const ModelParams& params, double n_photons,
                                   const NvFamily& family,
                                   const NVState& state);

}  // namespace ltm
