#pragma once

#include <array>
#include <vector>

#include "eulertopo/bloch.hpp"
#include "eulertopo/grid.hpp"

namespace eulertopo {

// Exact evolution psi(t) = [cos(t) - i sin(t) H] psi0 for a flattened H.
// Throws NotFlattened when H^2 deviates from I by more than 1e-9.
Spinor3 evolve_flat(const Ham3& H, double t, const Spinor3& psi0);

// a(k) = H(k) psi0 = (2 nx nz, 2 ny nz, 2 nz^2 - 1) over a grid.
BZGrid<Vec3> a_field(double m, int nx, int ny);

enum class Patch { upper, lower };  // ky in (0, pi) / ky in (-pi, 0)

// Chern number of the lower band of a(k).sigma restricted to one patch,
// with the fixed-point boundary rows pinned to a = (0,0,-1).
// Throws BoundaryNotFixed when a boundary node deviates by more than 1e-6.
int patch_chern(double m, Patch patch, int nx, int ny);

// Hopf image p = (psi^ mu_x psi, psi^ mu_y psi, psi^ mu_z psi).
Vec3 hopf_image(const Spinor3& psi);

// Time-evolving spinor field over (kx, ky, t) in [-pi,pi)^2 x [0,pi) with the
// S^3 lift x = (cos t, sin t * a(k)) and the Hopf images stored per node.
class HopfField {
 public:
  HopfField(double m, int nkx, int nky, int nt);

  int nkx() const { return nkx_; }
  int nky() const { return nky_; }
  int nt() const { return nt_; }
  double m() const { return m_; }

  double kx(int i) const { return -kPi + 2.0 * kPi * i / nkx_; }
  double ky(int j) const { return -kPi + 2.0 * kPi * j / nky_; }
  double t(int l) const { return kPi * l / nt_; }

  Vec3 a_at(int i, int j) const { return {ax_[aidx(i, j)], ay_[aidx(i, j)], az_[aidx(i, j)]}; }
  std::array<double, 4> lift_at(int i, int j, int l) const;
  Spinor3 spinor_at(int i, int j, int l) const;
  Vec3 image_at(int i, int j, int l) const;

  const std::vector<double>& px() const { return px_; }
  const std::vector<double>& py() const { return py_; }
  const std::vector<double>& pz() const { return pz_; }
  std::size_t node_index(int i, int j, int l) const {
    return (static_cast<std::size_t>(mod(i, nkx_)) * nky_ + mod(j, nky_)) * nt_ + mod(l, nt_);
  }

 private:
  static int mod(int a, int n) {
    int r = a % n;
    return r < 0 ? r + n : r;
  }
  std::size_t aidx(int i, int j) const {
    return static_cast<std::size_t>(mod(i, nkx_)) * nky_ + mod(j, nky_);
  }

  double m_;
  int nkx_, nky_, nt_;
  std::vector<double> ax_, ay_, az_;
  std::vector<double> px_, py_, pz_;
};

HopfField build_hopf_field(double m, int nkx, int nky, int nt);

struct Polyline3 {
  // Vertices in (kx, ky, t), unwrapped to a continuous curve in R^3.
  std::vector<Vec3> points;
  // True when the curve closes on itself with zero net winding around the
  // torus cycles (first ~ last within a cell diagonal after unwrapping).
  bool closed = false;
};

// Closed preimage curves { (k,t) : p(k,t) = target }, marched on the
// half-shifted dual lattice of the stored images with bilinear face roots.
// Throws InvalidParameter for the fixed-point image target and OpenCurve when
// the cell-crossing parity breaks (grid too coarse).
std::vector<Polyline3> extract_preimage(const HopfField& field, const Vec3& target);

// Discretized Gauss double sum over two closed contractible polylines.
// Throws CurvesTooClose when the curves come closer than min_separation,
// InvalidParameter when either curve is not closed.
double gauss_linking(const Polyline3& a, const Polyline3& b, double min_separation = 0.0);

// Whitehead-form Hopf invariant of the field restricted to one patch, with
// the fixed-point boundary rows pinned. Sign convention matches the
// pullback-oriented Gauss linking of preimage loops.
// Throws BoundaryNotFixed when a boundary node is not at the fixed point.
double hopf_invariant(const HopfField& field, Patch patch);

// -(1/4pi) \int d^2k  d . (d_kx d x d_ky d) by centered differences; the
// finite-difference route for the 3-torus degree of the evolution lift.
double torus_degree_h5(const BZGrid<Vec3>& field);

// Default target pair for the linking diagnostics: generic directions near
// the image north pole, whose preimages are contractible loops (one per
// patch) for the topological phase.
Vec3 default_target_1();
Vec3 default_target_2();

}  // namespace eulertopo
