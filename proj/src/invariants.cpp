#include "eulertopo/invariants.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>

#include "eulertopo/simplex.hpp"

namespace eulertopo {

namespace {

// Signed spherical area of the geodesic triangle (a, b, c).
double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  if (a.dot(b) < -0.999 || b.dot(c) < -0.999 || c.dot(a) < -0.999)
    throw IllConditionedPlaquette("spherical triangle has a near-antipodal vertex pair");
  const double num = a.dot(b.cross(c));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(num, den);
}

}  // namespace

double winding_number(const BZGrid<Vec3>& field) {
  const int nx = field.nx(), ny = field.ny();
  double total = 0.0;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const Vec3& v00 = field.at(i, j);
      const Vec3& v10 = field.at(i + 1, j);
      const Vec3& v11 = field.at(i + 1, j + 1);
      const Vec3& v01 = field.at(i, j + 1);
      total += spherical_triangle_area(v00, v10, v11);
      total += spherical_triangle_area(v00, v11, v01);
    }
  }
  return total / (2.0 * kPi);
}

double euler_class_direct(const BZGrid<Vec3>& field) {
  const int nx = field.nx(), ny = field.ny();
  const double dx = 2.0 * kPi / nx;
  const double dy = 2.0 * kPi / ny;
  double total = 0.0;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const Vec3 ddx = (field.at(i + 1, j) - field.at(i - 1, j)) / (2.0 * dx);
      const Vec3 ddy = (field.at(i, j + 1) - field.at(i, j - 1)) / (2.0 * dy);
      total += field.at(i, j).dot(ddx.cross(ddy)) * dx * dy;
    }
  }
  return total / (2.0 * kPi);
}

BZGrid<Eigen::Vector2cd> lower_band_states(const BZGrid<Vec3>& field) {
  BZGrid<Eigen::Vector2cd> states(field.nx(), field.ny());
  for (int i = 0; i < field.nx(); ++i) {
    for (int j = 0; j < field.ny(); ++j) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(chern_map(field.at(i, j)));
      states.at(i, j) = es.eigenvectors().col(0);
    }
  }
  return states;
}

int chern_number_fhs(const BZGrid<Eigen::Vector2cd>& states) {
  const int nx = states.nx(), ny = states.ny();
  auto link = [&](int i1, int j1, int i2, int j2) {
    const std::complex<double> u = states.at(i1, j1).adjoint() * states.at(i2, j2);
    if (std::abs(u) < 1e-12) throw ZeroLink("chern_number_fhs: vanishing link overlap");
    return u;
  };
  double total = 0.0;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const std::complex<double> prod = link(i, j, i + 1, j) * link(i + 1, j, i + 1, j + 1) *
                                        link(i + 1, j + 1, i, j + 1) * link(i, j + 1, i, j);
      total += std::arg(prod);
    }
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

namespace {

// Occupied pair of the flattened Hamiltonian, right-handed against n:
// u1 x u2 = +n.
Eigen::Matrix<double, 3, 2> occupied_pair(double m, const Momentum& k, Vec3* n_out) {
  const Vec3 n = n_vec(m, k);
  Eigen::SelfAdjointEigenSolver<Ham3> es(euler_ham(m, k));
  Eigen::Matrix<double, 3, 2> pair;
  pair.col(0) = es.eigenvectors().col(0);
  pair.col(1) = es.eigenvectors().col(1);
  if (pair.col(0).cross(pair.col(1)).dot(n) < 0.0) pair.col(1) = -pair.col(1);
  if (n_out) *n_out = n;
  return pair;
}

// Align an occupied pair to the base pair by the closest rotation (det +1).
Eigen::Matrix<double, 3, 2> rotation_align(const Eigen::Matrix<double, 3, 2>& base,
                                           const Eigen::Matrix<double, 3, 2>& pair) {
  const Eigen::Matrix2d overlap = pair.transpose() * base;
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(1) < 0.9)
    throw GaugeObstruction("integrand identity: stencil subspaces overlap below 0.9");
  Eigen::Matrix2d D = Eigen::Matrix2d::Identity();
  D(1, 1) = ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) ? -1.0 : 1.0;
  const Eigen::Matrix2d R = svd.matrixU() * D * svd.matrixV().transpose();
  return pair * R;
}

}  // namespace

double integrand_identity_residual(double m, const Momentum& k, double h) {
  Vec3 n0;
  const auto base = occupied_pair(m, k, &n0);
  const auto xp = rotation_align(base, occupied_pair(m, Momentum(k.kx + h, k.ky), nullptr));
  const auto xm = rotation_align(base, occupied_pair(m, Momentum(k.kx - h, k.ky), nullptr));
  const auto yp = rotation_align(base, occupied_pair(m, Momentum(k.kx, k.ky + h), nullptr));
  const auto ym = rotation_align(base, occupied_pair(m, Momentum(k.kx, k.ky - h), nullptr));

  const Vec3 du1_dx = (xp.col(0) - xm.col(0)) / (2.0 * h);
  const Vec3 du2_dx = (xp.col(1) - xm.col(1)) / (2.0 * h);
  const Vec3 du1_dy = (yp.col(0) - ym.col(0)) / (2.0 * h);
  const Vec3 du2_dy = (yp.col(1) - ym.col(1)) / (2.0 * h);
  const double lhs = du1_dx.dot(du2_dy) - du1_dy.dot(du2_dx);

  const Vec3 dn_dx =
      (n_vec(m, Momentum(k.kx + h, k.ky)) - n_vec(m, Momentum(k.kx - h, k.ky))) / (2.0 * h);
  const Vec3 dn_dy =
      (n_vec(m, Momentum(k.kx, k.ky + h)) - n_vec(m, Momentum(k.kx, k.ky - h))) / (2.0 * h);
  const double rhs = n0.dot(dn_dx.cross(dn_dy));
  return std::abs(lhs - rhs);
}

double berry_phase(const std::vector<Vec3>& loop_states) {
  if (loop_states.size() < 2) throw PathTooCoarse("berry_phase: loop needs at least 2 states");
  double prod = 1.0;
  for (size_t i = 0; i + 1 < loop_states.size(); ++i) {
    const double ov = loop_states[i].dot(loop_states[i + 1]);
    if (std::abs(ov) < 0.1) throw PathTooCoarse("berry_phase: consecutive overlap below 0.1");
    prod *= (ov < 0.0) ? -1.0 : 1.0;
  }
  return prod < 0.0 ? kPi : 0.0;
}

namespace {

// Eigenphases of a projector product, largest-|lambda| first; asserts the
// discarded remainder is numerically rank-deficient.
std::vector<double> projector_product_phases(const Eigen::MatrixXd& P, int keep) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(P);
  std::vector<std::pair<double, std::complex<double>>> lam;
  for (int i = 0; i < P.rows(); ++i) {
    const std::complex<double> l = es.eigenvalues()(i);
    lam.emplace_back(std::abs(l), l);
  }
  std::sort(lam.begin(), lam.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = keep; i < static_cast<int>(lam.size()); ++i) {
    if (lam[i].first > 1e-6)
      throw AmbiguousRank("wilson_spectrum: discarded eigenvalue above 1e-6");
  }
  std::vector<double> phases;
  for (int i = 0; i < keep; ++i) phases.push_back(std::arg(lam[i].second));
  std::sort(phases.begin(), phases.end());
  return phases;
}

}  // namespace

WilsonSpectrum wilson_spectrum(const BZGrid<BlochFrame>& grid, Axis direction) {
  const int nloop = (direction == Axis::x) ? grid.nx() : grid.ny();
  const int ntrans = (direction == Axis::x) ? grid.ny() : grid.nx();
  WilsonSpectrum spec;
  spec.direction = direction;
  for (int t = 0; t < ntrans; ++t) {
    Eigen::Matrix3d P = Eigen::Matrix3d::Identity();
    // Loop k_0 -> k_N inclusive; the first and last projectors coincide.
    for (int j = 0; j <= nloop; ++j) {
      const Vec3& u3 = (direction == Axis::x) ? grid.at(j, t).u3 : grid.at(t, j).u3;
      P = (Eigen::Matrix3d::Identity() - u3 * u3.transpose()) * P;
    }
    const Momentum kt = (direction == Axis::x) ? grid.node(0, t) : grid.node(t, 0);
    spec.transverse_k.push_back(direction == Axis::x ? kt.ky : kt.kx);
    spec.branches.push_back(projector_product_phases(P, 2));
  }
  return spec;
}

WilsonSpectrum wilson_spectrum_four_band(double m, double s, int nx, int ny, Axis direction) {
  const int nloop = (direction == Axis::x) ? nx : ny;
  const int ntrans = (direction == Axis::x) ? ny : nx;
  WilsonSpectrum spec;
  spec.direction = direction;
  for (int t = 0; t < ntrans; ++t) {
    const double kt = -kPi + 2.0 * kPi * t / ntrans;
    Eigen::Matrix4d P = Eigen::Matrix4d::Identity();
    for (int j = 0; j <= nloop; ++j) {
      const double kl = -kPi + 2.0 * kPi * j / nloop;
      const Momentum k = (direction == Axis::x) ? Momentum(kl, kt) : Momentum(kt, kl);
      const Vec4 n4 = n_vec4(m, k, s);
      P = (Eigen::Matrix4d::Identity() - n4 * n4.transpose()) * P;
    }
    spec.transverse_k.push_back(kt);
    spec.branches.push_back(projector_product_phases(P, 3));
  }
  return spec;
}

int wilson_winding(const WilsonSpectrum& spec, double jump_threshold) {
  const size_t n = spec.branches.size();
  if (n < 4) throw UnwrapFailure("wilson_winding: too few transverse momenta");
  // Start on the largest phase of the first pair; tie-break positive.
  double prev = spec.branches[0].back();
  double slope = 0.0;
  double total = 0.0;
  for (size_t step = 1; step <= n; ++step) {
    const auto& pair = spec.branches[step % n];
    const double pred = prev + slope;
    double best = 0.0;
    double best_dist = 1e300;
    for (const double ph : pair) {
      for (int w = -3; w <= 3; ++w) {
        const double cand = ph + 2.0 * kPi * w;
        const double dist = std::abs(cand - pred);
        if (dist < best_dist) {
          best_dist = dist;
          best = cand;
        }
      }
    }
    if (best_dist > jump_threshold)
      throw UnwrapFailure("wilson_winding: branch continuation jump above threshold");
    slope = best - prev;
    prev = best;
    total += slope;
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

std::vector<EntanglementSpectrum> entanglement_spectrum(const BZGrid<BlochFrame>& grid,
                                                        Axis cut, int L) {
  const int n_cut = (cut == Axis::x) ? grid.nx() : grid.ny();
  const int n_cons = (cut == Axis::x) ? grid.ny() : grid.nx();
  if (n_cut != 2 * L)
    throw InvalidParameter("entanglement_spectrum: grid extent along the cut must be 2L");

  std::vector<EntanglementSpectrum> out;
  using Mat = Eigen::MatrixXcd;
  const std::complex<double> I(0.0, 1.0);
  for (int t = 0; t < n_cons; ++t) {
    // Occupied projectors along the cut axis at fixed conserved momentum.
    std::vector<Eigen::Matrix3d> proj(n_cut);
    for (int i = 0; i < n_cut; ++i) {
      const Vec3& u3 = (cut == Axis::x) ? grid.at(i, t).u3 : grid.at(t, i).u3;
      proj[i] = Eigen::Matrix3d::Identity() - u3 * u3.transpose();
    }
    Mat C = Mat::Zero(3 * L, 3 * L);
    for (int x = 0; x < L; ++x) {
      for (int xp = 0; xp < L; ++xp) {
        Eigen::Matrix3cd block = Eigen::Matrix3cd::Zero();
        for (int ik = 0; ik < n_cut; ++ik) {
          const double kk = -kPi + 2.0 * kPi * ik / n_cut;
          block += std::exp(I * (kk * double(x - xp))) * proj[ik];
        }
        C.block<3, 3>(3 * x, 3 * xp) = block / double(n_cut);
      }
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(C);
    EntanglementSpectrum s;
    s.cut = cut;
    const Momentum kc = (cut == Axis::x) ? grid.node(0, t) : grid.node(t, 0);
    s.conserved_k = (cut == Axis::x) ? kc.ky : kc.kx;
    s.xi.assign(es.eigenvalues().data(), es.eigenvalues().data() + 3 * L);
    for (double xi : s.xi) {
      if (xi < -1e-9 || xi > 1.0 + 1e-9)
        throw InvalidParameter("entanglement_spectrum: eigenvalue outside [0,1]");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<DiracNode> locate_dirac_nodes(double tolerance) {
  return locate_dirac_nodes([](const Momentum& k) { return perturbed_ham(k); }, tolerance);
}

std::vector<DiracNode> locate_dirac_nodes(const std::function<Ham3(const Momentum&)>& ham,
                                          double tolerance) {
  auto gap = [&](double kx, double ky) {
    Eigen::SelfAdjointEigenSolver<Ham3> es(ham(Momentum(kx, ky)));
    return es.eigenvalues()(1) - es.eigenvalues()(0);
  };

  const int N = 64;
  BZGrid<double> gaps = BZGrid<double>::build(
      N, N, [&](const Momentum& k) { return gap(k.kx, k.ky); });
  double max_gap = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) max_gap = std::max(max_gap, gaps.at(i, j));
  if (max_gap <= tolerance)
    throw InvalidParameter("locate_dirac_nodes: gap below tolerance everywhere (flattened input)");

  std::vector<DiracNode> nodes;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const double g = gaps.at(i, j);
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          if (gaps.at(i + di, j + dj) < g) {
            is_min = false;
            break;
          }
        }
      if (!is_min || g > 0.3) continue;

      const Momentum k0 = gaps.node(i, j);
      SimplexOptions opt;
      opt.initial_step = kPi / N;
      opt.max_iter = 600;
      opt.f_tol = 1e-16;
      auto r = nelder_mead([&](const std::vector<double>& x) { return gap(x[0], x[1]); },
                           {k0.kx, k0.ky}, opt);
      if (r.fval > 1e-8) continue;
      const Momentum kn(r.x[0], r.x[1]);
      bool dup = false;
      for (const auto& existing : nodes) {
        const double dx = wrap_angle(existing.k.kx - kn.kx);
        const double dy = wrap_angle(existing.k.ky - kn.ky);
        if (std::hypot(dx, dy) < 0.05) {
          dup = true;
          break;
        }
      }
      if (!dup && r.fval < tolerance) nodes.push_back(DiracNode{kn, r.fval});
    }
  }
  std::sort(nodes.begin(), nodes.end(), [](const DiracNode& a, const DiracNode& b) {
    return a.k.kx < b.k.kx || (a.k.kx == b.k.kx && a.k.ky < b.k.ky);
  });
  return nodes;
}

}  // namespace eulertopo
