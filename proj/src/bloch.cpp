#include "eulertopo/bloch.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace eulertopo {

namespace {
constexpr double kMGuard = 1e-9;
constexpr double kDegenerateNorm = 1e-12;
}  // namespace

void require_valid_m(double m) {
  const double am = std::abs(m);
  if (std::abs(am) < kMGuard || std::abs(am - 2.0) < kMGuard) {
    std::ostringstream os;
    os << "m = " << m << " excluded: |m| must differ from 0 and 2";
    throw InvalidParameter(os.str());
  }
}

Vec3 n_vec(double m, const Momentum& k) {
  require_valid_m(m);
  Vec3 v(m - std::cos(k.kx) - std::cos(k.ky), std::sin(k.kx), std::sin(k.ky));
  const double norm = v.norm();
  if (norm < kDegenerateNorm) {
    std::ostringstream os;
    os << "n(k) vanishes at k = (" << k.kx << ", " << k.ky << ")";
    throw DegenerateVector(os.str());
  }
  return v / norm;
}

Ham3 euler_ham(double m, const Momentum& k) {
  const Vec3 n = n_vec(m, k);
  return 2.0 * (n * n.transpose()) - Ham3::Identity();
}

Ham3 perturbed_ham(const Momentum& k) {
  const double h0 = 0.1 * (std::cos(k.ky) - std::cos(k.kx));
  Ham3 H = euler_ham(1.0, k);
  H(0, 0) += h0;
  H(1, 1) += h0 + 0.5;
  H(2, 2) += h0 - 0.5;
  return H;
}

Vec4 n_vec4(double m, const Momentum& k, double s) {
  if (s < 0.0 || s > 1.0) throw InvalidParameter("four_band_ham: s must lie in [0,1]");
  const Vec3 n3 = n_vec(m, k);
  const double c = std::cos(kPi * s / 2.0);
  const double sn = std::sin(kPi * s / 2.0);
  return Vec4(c * n3.x(), c * n3.y(), c * n3.z(), sn);
}

Ham4 four_band_ham(double m, const Momentum& k, double s) {
  const Vec4 n4 = n_vec4(m, k, s);
  return 2.0 * (n4 * n4.transpose()) - Ham4::Identity();
}

Vec3 canonical_sign(const Vec3& v) {
  int arg = 0;
  double best = std::abs(v(0));
  for (int i = 1; i < 3; ++i) {
    if (std::abs(v(i)) > best) {
      best = std::abs(v(i));
      arg = i;
    }
  }
  return v(arg) < 0.0 ? Vec3(-v) : v;
}

BlochFrame eig_frame(const Ham3& H) {
  Eigen::SelfAdjointEigenSolver<Ham3> es(H);
  BlochFrame f;
  f.e1 = es.eigenvalues()(0);
  f.e2 = es.eigenvalues()(1);
  f.e3 = es.eigenvalues()(2);
  f.u1 = canonical_sign(es.eigenvectors().col(0));
  f.u2 = canonical_sign(es.eigenvectors().col(1));
  f.u3 = canonical_sign(es.eigenvectors().col(2));
  return f;
}

namespace {

// Flip signs of one band across the grid for continuity; returns whether the
// sign assignment closes around both cycles.
bool fix_band(BZGrid<BlochFrame>& grid, int band,
              const std::optional<BZGrid<Vec3>>& reference) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  auto vec = [&](int i, int j) -> Vec3& {
    BlochFrame& f = grid.at(i, j);
    return band == 0 ? f.u1 : (band == 1 ? f.u2 : f.u3);
  };
  if (reference) {
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) {
        const double ov = vec(i, j).dot(reference->at(i, j));
        if (std::abs(ov) < 0.1)
          throw GaugeObstruction("fix_gauge: reference overlap below 0.1");
        if (ov < 0.0) vec(i, j) = -vec(i, j);
      }
    }
    return true;
  }
  // Row-major continuity: column 0 chained in j, each row chained in i.
  for (int j = 1; j < ny; ++j) {
    const double ov = vec(0, j).dot(vec(0, j - 1));
    if (std::abs(ov) < 0.1) throw GaugeObstruction("fix_gauge: neighbor overlap below 0.1");
    if (ov < 0.0) vec(0, j) = -vec(0, j);
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) {
      const double ov = vec(i, j).dot(vec(i - 1, j));
      if (std::abs(ov) < 0.1) throw GaugeObstruction("fix_gauge: neighbor overlap below 0.1");
      if (ov < 0.0) vec(i, j) = -vec(i, j);
    }
  }
  // Seam consistency around both cycles.
  bool orientable = true;
  for (int j = 0; j < ny; ++j) {
    const double ov = vec(0, j).dot(vec(nx - 1, j));
    if (std::abs(ov) < 0.1) throw GaugeObstruction("fix_gauge: seam overlap below 0.1");
    if (ov < 0.0) orientable = false;
  }
  for (int i = 0; i < nx; ++i) {
    const double ov = vec(i, 0).dot(vec(i, ny - 1));
    if (std::abs(ov) < 0.1) throw GaugeObstruction("fix_gauge: seam overlap below 0.1");
    if (ov < 0.0) orientable = false;
  }
  return orientable;
}

}  // namespace

GaugeFixResult fix_gauge(const BZGrid<BlochFrame>& grid,
                         const std::optional<BZGrid<Vec3>>& reference) {
  GaugeFixResult out{grid, true};
  // u3 determines the occupied projector and the orientability flag. The
  // lower bands are only sign-fixable when they are nondegenerate everywhere
  // (for the flattened Hamiltonian the -1 pair is an arbitrary basis and is
  // left untouched).
  double min_gap12 = 1e300;
  for (int i = 0; i < grid.nx(); ++i)
    for (int j = 0; j < grid.ny(); ++j)
      min_gap12 = std::min(min_gap12, grid.at(i, j).e2 - grid.at(i, j).e1);
  out.orientable = fix_band(out.frames, 2, reference);
  if (min_gap12 > 1e-8) {
    fix_band(out.frames, 0, std::nullopt);
    fix_band(out.frames, 1, std::nullopt);
  }
  return out;
}

Eigen::Matrix2cd chern_map(const Vec3& n) {
  using namespace std::complex_literals;
  Eigen::Matrix2cd H;
  H(0, 0) = n.z();
  H(0, 1) = n.x() - 1i * n.y();
  H(1, 0) = n.x() + 1i * n.y();
  H(1, 1) = -n.z();
  return H;
}

BZGrid<BlochFrame> frame_grid(double m, int nx, int ny) {
  return BZGrid<BlochFrame>::build(
      nx, ny, [&](const Momentum& k) { return eig_frame(euler_ham(m, k)); });
}

BZGrid<Vec3> n_field(double m, int nx, int ny) {
  return BZGrid<Vec3>::build(nx, ny,
                             [&](const Momentum& k) { return n_vec(m, k); });
}

}  // namespace eulertopo
