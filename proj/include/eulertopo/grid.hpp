#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <vector>

#include "eulertopo/errors.hpp"

namespace eulertopo {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Ham3 = Eigen::Matrix3d;
using Ham4 = Eigen::Matrix4d;
using Spinor3 = Eigen::Vector3cd;
using DensityMatrix3 = Eigen::Matrix3cd;

inline constexpr double kPi = 3.14159265358979323846;

// Reduce an angle into the canonical window [-pi, pi).
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);  // (-pi, pi]
  if (a >= kPi) a -= 2.0 * kPi;
  return a;
}

struct Momentum {
  double kx = 0.0;
  double ky = 0.0;

  Momentum() = default;
  Momentum(double kx_, double ky_) : kx(wrap_angle(kx_)), ky(wrap_angle(ky_)) {}
};

// Real orthonormal eigentriple of a 3x3 real-symmetric Bloch Hamiltonian,
// energies ascending.
struct BlochFrame {
  Vec3 u1 = Vec3::UnitX();
  Vec3 u2 = Vec3::UnitY();
  Vec3 u3 = Vec3::UnitZ();
  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
};

// Uniform nx x ny sampling of the torus Brillouin zone with nodes at
// k_ij = (-pi + 2*pi*i/nx, -pi + 2*pi*j/ny) and periodic indexing.
template <typename T>
class BZGrid {
 public:
  BZGrid() = default;
  BZGrid(int nx, int ny) : nx_(nx), ny_(ny), data_(static_cast<size_t>(nx) * ny) {
    if (nx < 4 || ny < 4) throw InvalidParameter("BZGrid: grid sizes must be >= 4");
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }

  // Periodic access.
  T& at(int i, int j) { return data_[index(i, j)]; }
  const T& at(int i, int j) const { return data_[index(i, j)]; }

  Momentum node(int i, int j) const {
    return Momentum(-kPi + 2.0 * kPi * mod(i, nx_) / nx_,
                    -kPi + 2.0 * kPi * mod(j, ny_) / ny_);
  }

  template <typename F>
  static BZGrid<T> build(int nx, int ny, F&& f) {
    BZGrid<T> g(nx, ny);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) g.at(i, j) = f(g.node(i, j));
    return g;
  }

 private:
  static int mod(int a, int n) {
    int r = a % n;
    return r < 0 ? r + n : r;
  }
  size_t index(int i, int j) const {
    return static_cast<size_t>(mod(i, nx_)) * ny_ + mod(j, ny_);
  }

  int nx_ = 0, ny_ = 0;
  std::vector<T> data_;
};

}  // namespace eulertopo
