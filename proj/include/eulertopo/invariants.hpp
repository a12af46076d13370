#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "eulertopo/bloch.hpp"
#include "eulertopo/grid.hpp"

namespace eulertopo {

enum class Axis { x, y };

// Winding content of a unit-vector field, returned in the Euler-class
// normalization xi = (1/2pi) \int n . (dn/dkx x dn/dky) = 2 * (wrap count).
// Per-plaquette signed spherical-triangle areas make the result an exact
// (even) integer for consistent fields.
// Throws IllConditionedPlaquette when a triangle has a near-antipodal vertex
// pair (dot < -0.999).
double winding_number(const BZGrid<Vec3>& field);

// Same integral by raw centered finite differences; converges to the integer
// as O(1/N^2) and is kept as a convergence cross-check.
double euler_class_direct(const BZGrid<Vec3>& field);

// Lattice field-strength Chern number of a grid of normalized 2-spinors;
// exactly integer by construction. Throws ZeroLink on a vanishing overlap.
int chern_number_fhs(const BZGrid<Eigen::Vector2cd>& states);

// Lower-band eigenvectors of n . sigma over a grid.
BZGrid<Eigen::Vector2cd> lower_band_states(const BZGrid<Vec3>& field);

// |(Eq.3 integrand) - (Eq.4 integrand)| at one momentum, both sides evaluated
// with centered differences of step h on a locally aligned real gauge.
// Throws GaugeObstruction if the occupied subspaces across the stencil
// overlap poorly (singular value < 0.9).
double integrand_identity_residual(double m, const Momentum& k, double h);

// Real-state Wilson-line Berry phase of a closed loop of states: 0 when the
// product of consecutive overlaps is positive, pi when negative.
// The loop must repeat its first state at the end.
// Throws PathTooCoarse when |<u_j|u_{j+1}>| < 0.1.
double berry_phase(const std::vector<Vec3>& loop_states);

struct WilsonSpectrum {
  Axis direction = Axis::x;
  std::vector<double> transverse_k;
  // Per transverse momentum the eigenphase pair (theta1, theta2) in (-pi, pi],
  // sorted ascending. For the four-band sweep a third branch is appended.
  std::vector<std::vector<double>> branches;
};

// Wilson-loop spectrum of the occupied pair, built from projector products
// P = prod_j (I - u3 u3^T) along the `direction` cycle (base point at the
// grid origin). Throws AmbiguousRank if the discarded eigenvalue exceeds 1e-6.
WilsonSpectrum wilson_spectrum(const BZGrid<BlochFrame>& grid, Axis direction);

// Signed total winding of one branch over the transverse cycle, tracked by
// velocity-predictive nearest-branch continuation.
// Throws UnwrapFailure when the best candidate deviates from the linear
// prediction by more than `jump_threshold`.
int wilson_winding(const WilsonSpectrum& spec, double jump_threshold = kPi / 2.0);

// Three occupied branches of the four-band path Hamiltonian H4(k,s).
WilsonSpectrum wilson_spectrum_four_band(double m, double s, int nx, int ny,
                                         Axis direction = Axis::x);

struct EntanglementSpectrum {
  Axis cut = Axis::x;        // axis that is bipartitioned
  double conserved_k = 0.0;  // momentum along the cut line
  std::vector<double> xi;    // 3L correlation-matrix eigenvalues, ascending
};

// Momentum-resolved single-particle entanglement spectra of the occupied
// projector, one spectrum per conserved momentum. The grid extent along the
// cut axis must equal 2L.
std::vector<EntanglementSpectrum> entanglement_spectrum(const BZGrid<BlochFrame>& grid,
                                                        Axis cut, int L);

struct DiracNode {
  Momentum k;
  double gap = 0.0;
};

// All gap minima of H' below `tolerance`, located by a coarse scan plus
// simplex refinement. An overload takes a custom Hamiltonian; it throws
// InvalidParameter when the input is degenerate over the whole zone
// (flattened input).
std::vector<DiracNode> locate_dirac_nodes(double tolerance = 1e-6);
std::vector<DiracNode> locate_dirac_nodes(const std::function<Ham3(const Momentum&)>& ham,
                                          double tolerance);

}  // namespace eulertopo
