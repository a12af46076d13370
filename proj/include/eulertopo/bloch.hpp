#pragma once

#include <complex>
#include <optional>

#include "eulertopo/grid.hpp"

namespace eulertopo {

// Parameter window: |m| must stay away from {0, 2} for n(k) to be
// well-defined everywhere on the torus.
void require_valid_m(double m);

// n(k) = (m - cos kx - cos ky, sin kx, sin ky) / N, unit norm.
// Throws DegenerateVector when the unnormalized vector is shorter than 1e-12.
Vec3 n_vec(double m, const Momentum& k);

// Flattened three-band Hamiltonian H = 2 n n^T - I with spectrum {-1,-1,+1}.
Ham3 euler_ham(double m, const Momentum& k);

// H' = H(m=1) + diag(h0, h0+0.5, h0-0.5), h0 = 0.1 (cos ky - cos kx).
// Lifts the occupied-band degeneracy except at four Dirac points.
Ham3 perturbed_ham(const Momentum& k);

// Four-band trivialization path H4(k,s) = 2 n4 n4^T - I4 with
// n4 = (cos(pi s/2) n3; sin(pi s/2)), s in [0,1].
Ham4 four_band_ham(double m, const Momentum& k, double s);
Vec4 n_vec4(double m, const Momentum& k, double s);

// Ascending-energy real orthonormal frame with a deterministic sign
// convention: the largest-|component| entry of each eigenvector is made
// positive (ties broken by lowest index). For the flattened Hamiltonian the
// degenerate pair (u1, u2) is an arbitrary orthonormal basis of the -1
// eigenspace; downstream topology only ever uses the projector I - u3 u3^T.
BlochFrame eig_frame(const Ham3& H);

// Apply the largest-component-positive convention to one vector.
Vec3 canonical_sign(const Vec3& v);

struct GaugeFixResult {
  BZGrid<BlochFrame> frames;
  bool orientable = false;
};

// Choose per-node signs of each band: positive overlap with `reference`
// (a grid of u3 vectors) when given, else row-major nearest-neighbor
// continuity. The orientability flag reports whether the continuity choice
// for u3 closes consistently around both torus cycles.
// Throws GaugeObstruction when a neighbor overlap magnitude drops below 0.1.
GaugeFixResult fix_gauge(const BZGrid<BlochFrame>& grid,
                         const std::optional<BZGrid<Vec3>>& reference = std::nullopt);

// Two-band image Hamiltonian H_C(k) = n . sigma.
Eigen::Matrix2cd chern_map(const Vec3& n);

// Grid of frames of the flattened Hamiltonian.
BZGrid<BlochFrame> frame_grid(double m, int nx, int ny);
// Grid of n(k) vectors.
BZGrid<Vec3> n_field(double m, int nx, int ny);

}  // namespace eulertopo
