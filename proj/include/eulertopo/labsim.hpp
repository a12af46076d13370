#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "eulertopo/bloch.hpp"
#include "eulertopo/grid.hpp"

namespace eulertopo {

// Microwave drive parameters in dimensionless (hbar = 1) units. The four
// drives couple (1<->2), (1<->3), and the far-detuned Raman pair; the
// cross couplings only contribute Stark shifts.
struct PulseParams {
  double omega12_1 = 0.0;  // near-resonant 1<->2 drive
  double omega13_2 = 0.0;  // near-resonant 1<->3 drive
  double omega12_3 = 0.0;  // Raman leg of drive 3
  double omega13_4 = 0.0;  // Raman leg of drive 4
  double omega12_2 = 0.0, omega12_4 = 0.0;  // cross couplings (Stark only)
  double omega13_1 = 0.0, omega13_3 = 0.0;
  double delta1 = 0.0, delta2 = 0.0;  // Stark-compensation detunings
  double Delta1 = 50.0, Delta2 = 50.0;  // Raman detunings
  double phi1 = 0.0, phi2 = 0.0, phi3 = 0.0, phi4 = 0.0;
  double omega_z = 400.0, omega_q = 80.0;  // Zeeman splittings

  double max_rabi() const;
  // Raman validity: Delta1, Delta2 at least 5x the largest Rabi frequency,
  // all Rabi frequencies nonnegative.
  void validate() const;
};

// Time-independent effective Hamiltonian of the driven qutrit, including the
// Stark-shift diagonal. Throws RamanInvalid when the detuning ratio is
// violated.
Eigen::Matrix3cd effective_hamiltonian(const PulseParams& p);

// Accessible-parameter envelope for pulse synthesis. The paper does not give
// its hardware bounds; these defaults are placeholders in the same
// dimensionless units as the target Hamiltonians.
struct PulseBounds {
  double max_rabi_near = 1.0;   // direct (1<->2), (1<->3) drives
  double max_rabi_raman = 1.0;  // each Raman leg
  double max_energy = 1.0;      // cap on the realized energy scale c
  double Delta1 = 50.0, Delta2 = 50.0;
  double omega_z = 400.0, omega_q = 80.0;
};

enum class BasisSwitch { off, on, automatic };

struct PulseSolution {
  PulseParams params;
  double c = 0.0;  // energy scale, maximized
  double b = 0.0;  // global shift absorbed into the diagonal
  bool basis_switched = false;  // solved in the (1<->2)-swapped basis
};

// Find drive parameters with effective_hamiltonian == c (target - b I) in the
// chosen basis, maximizing c by a derivative-free feasibility search.
// Throws Infeasible when the best residual exceeds 1e-4.
PulseSolution solve_pulse(const Ham3& target, const PulseBounds& bounds,
                          BasisSwitch basis_switch = BasisSwitch::automatic);

// The lab-frame Hamiltonian realized by a solution (undoes the basis switch).
Eigen::Matrix3cd realized_hamiltonian(const PulseSolution& sol);

// Straight torus segment from a high-symmetry point, minimal winding per
// component; `steps` segments, endpoints inclusive. Collapses to one point
// when the endpoints coincide.
std::vector<Momentum> shortest_path(const Momentum& kstar, const Momentum& k, int steps);

struct AdiabaticSchedule {
  double duration = 40.0;
  int steps = 400;
  bool use_pulse_synthesis = false;  // default: ideal H_exp = H(k)
  PulseBounds bounds;
};

// Ramp the Hamiltonian along the shortest path starting from |1> at kstar,
// stepping with exact per-step exponentials. Throws GapClosed when the
// instantaneous top gap of the realized Hamiltonian falls below 1e-3 and
// InvalidParameter when |1> is not the top eigenstate at kstar.
Spinor3 adiabatic_prepare(double m, const Momentum& kstar, const Momentum& k,
                          const AdiabaticSchedule& schedule);

// Photon statistics of the state detection.
struct DetectionModel {
  double N1 = 0.06, N2 = 13.28, N3 = 13.34;  // mean counts per level
  double p_bright_as_dark = 0.0190;
  double p_dark_as_bright = 0.0056;
  long shots = 3000;
  void validate() const;
};

// P(count >= 2 | dark state): the dark->bright misclassification of the
// threshold discriminator.
double dark_misclassification_probability(const DetectionModel& model);

struct TomoCounts {
  std::array<double, 8> mean_counts{};
  long shots = 0;  // 0 marks exact expected values
};

// Rotation sequence of one Table-I basis applied to the state. The 1<->3
// rotation acts on the state before the 1<->2 rotation; the agreement test
// against the closed forms pins this convention.
Eigen::Matrix3cd tomo_basis_unitary(int index);

// Dark-state probability P1 after each of the eight tomographic sequences,
// evaluated by rotating the state.
std::array<double, 8> tomo_probabilities(const DensityMatrix3& rho);
// The same quantities from the closed forms in the measurement table.
std::array<double, 8> tomo_probabilities_closed_form(const DensityMatrix3& rho);
// Populations of all three levels after sequence `index`.
Vec3 level_populations(const DensityMatrix3& rho, int index);

// Exact expected mean counts n_i = sum_j N_j P_j^i.
TomoCounts expected_counts(const DensityMatrix3& rho, const DetectionModel& model);

// Shot-sampled counts: per shot draw the projective outcome, then a Poisson
// photon count with the level's mean. Deterministic under a fixed seed.
TomoCounts simulate_counts(const DensityMatrix3& rho, const DetectionModel& model,
                           std::uint64_t seed);

// Maximum-likelihood reconstruction through the triangular-factor
// parametrization; always Hermitian, PSD and trace-1. Throws OptimizerStalled
// when the best objective exceeds the chi^2-style bound of 100.
DensityMatrix3 mle_reconstruct(const TomoCounts& counts, const DetectionModel& model);

// Real unit vector maximizing psi^T Re(rho) psi: the top eigenvector of the
// symmetrized real part. Throws DegenerateTop when the top eigenvalue is not
// separated by 1e-9.
Vec3 closest_real_state(const DensityMatrix3& rho);

double fidelity(const DensityMatrix3& rho, const Spinor3& psi);
double fidelity(const DensityMatrix3& rho, const Vec3& psi);

struct PipelineResult {
  DensityMatrix3 rho;
  Vec3 psi_real;
  double fidelity_vs_exact = 0.0;  // <u3(k)| rho |u3(k)>
  double prep_fidelity = 0.0;      // |<u3(k)|psi_prepared>|^2
};

// Simulated replica of the per-momentum measurement: adiabatic preparation,
// (optionally sampled) tomography counts, MLE reconstruction and
// closest-real-state extraction. `sample_noise` false uses exact expected
// counts.
PipelineResult pipeline_measure_state(double m, const Momentum& k, const Momentum& kstar,
                                      const AdiabaticSchedule& schedule,
                                      const DetectionModel& model, std::uint64_t seed,
                                      bool sample_noise);

// Nearest high-symmetry starting point for a target momentum.
Momentum nearest_high_symmetry_point(const Momentum& k);

}  // namespace eulertopo
