#include "eulertopo/quench.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>

#include "eulertopo/kernels.hpp"

namespace eulertopo {

using std::complex;
using namespace std::complex_literals;

Spinor3 evolve_flat(const Ham3& H, double t, const Spinor3& psi0) {
  if (((H * H) - Ham3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw NotFlattened("evolve_flat: H^2 deviates from identity");
  return std::cos(t) * psi0 - 1i * std::sin(t) * (H * psi0).eval();
}

BZGrid<Vec3> a_field(double m, int nx, int ny) {
  const BZGrid<Vec3> nf = n_field(m, nx, ny);
  const std::size_t count = static_cast<std::size_t>(nx) * ny;
  std::vector<double> nxs(count), nys(count), nzs(count), ax(count), ay(count), az(count);
  std::size_t idx = 0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j, ++idx) {
      nxs[idx] = nf.at(i, j).x();
      nys[idx] = nf.at(i, j).y();
      nzs[idx] = nf.at(i, j).z();
    }
  kernels::afield_from_n(nxs.data(), nys.data(), nzs.data(), count, ax.data(), ay.data(),
                         az.data());
  BZGrid<Vec3> out(nx, ny);
  idx = 0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j, ++idx) out.at(i, j) = Vec3(ax[idx], ay[idx], az[idx]);
  return out;
}

namespace {

const Vec3 kFixedImage(0.0, 0.0, -1.0);

Eigen::Vector2cd lower_band_2x2(const Vec3& d) {
  Eigen::Matrix2cd H;
  H(0, 0) = d.z();
  H(0, 1) = d.x() - 1i * d.y();
  H(1, 0) = d.x() + 1i * d.y();
  H(1, 1) = -d.z();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(H);
  return es.eigenvectors().col(0);
}

// Patch row range [jlo, jhi] inclusive; rows jlo and jhi are the pinned
// fixed-point boundary.
std::pair<int, int> patch_rows(Patch patch, int ny) {
  if (ny % 2 != 0) throw InvalidParameter("patch operations need an even ky grid");
  return patch == Patch::upper ? std::make_pair(ny / 2, ny) : std::make_pair(0, ny / 2);
}

}  // namespace

int patch_chern(double m, Patch patch, int nx, int ny) {
  const BZGrid<Vec3> a = a_field(m, nx, ny);
  const auto [jlo, jhi] = patch_rows(patch, ny);
  for (int i = 0; i < nx; ++i) {
    for (int jb : {jlo, jhi}) {
      if ((a.at(i, jb) - kFixedImage).norm() > 1e-6)
        throw BoundaryNotFixed("patch_chern: boundary row off the fixed point");
    }
  }
  const Eigen::Vector2cd fixed_state(1.0, 0.0);  // lower band of -sigma_z
  auto state = [&](int i, int j) -> Eigen::Vector2cd {
    if (j == jlo || j == jhi) return fixed_state;
    return lower_band_2x2(a.at(i, j));
  };
  double total = 0.0;
  for (int j = jlo; j < jhi; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Eigen::Vector2cd s00 = state(i, j);
      const Eigen::Vector2cd s10 = state(i + 1, j);
      const Eigen::Vector2cd s11 = state(i + 1, j + 1);
      const Eigen::Vector2cd s01 = state(i, j + 1);
      const complex<double> prod = (s00.adjoint() * s10).value() * (s10.adjoint() * s11).value() *
                                   (s11.adjoint() * s01).value() * (s01.adjoint() * s00).value();
      total += std::arg(prod);
    }
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

Vec3 hopf_image(const Spinor3& psi) {
  Eigen::Matrix3cd mux, muy, muz;
  mux << 0, 0, -1, 0, 0, -1i, -1.0, 1i, 0;
  muy << 0, 0, 1i, 0, 0, -1, -1i, -1.0, 0;
  muz << 1, 0, 0, 0, 1, 0, 0, 0, -1;
  return Vec3(std::real((psi.adjoint() * mux * psi).value()),
              std::real((psi.adjoint() * muy * psi).value()),
              std::real((psi.adjoint() * muz * psi).value()));
}

HopfField::HopfField(double m, int nkx, int nky, int nt)
    : m_(m), nkx_(nkx), nky_(nky), nt_(nt) {
  if (nkx < 4 || nky < 4 || nt < 4)
    throw InvalidParameter("HopfField: grid sizes must be >= 4");
  const std::size_t nk = static_cast<std::size_t>(nkx) * nky;
  ax_.resize(nk);
  ay_.resize(nk);
  az_.resize(nk);
  const BZGrid<Vec3> a = a_field(m, nkx, nky);
  std::size_t idx = 0;
  for (int i = 0; i < nkx; ++i)
    for (int j = 0; j < nky; ++j, ++idx) {
      ax_[idx] = a.at(i, j).x();
      ay_[idx] = a.at(i, j).y();
      az_[idx] = a.at(i, j).z();
    }
  const std::size_t total = nk * nt;
  px_.resize(total);
  py_.resize(total);
  pz_.resize(total);
  // Images per time slice; the slice stride over (i,j) is nt, so gather into
  // contiguous slice buffers for the kernel and scatter back.
  std::vector<double> spx(nk), spy(nk), spz(nk);
  for (int l = 0; l < nt; ++l) {
    const double tv = t(l);
    kernels::hopf_images(ax_.data(), ay_.data(), az_.data(), nk, std::cos(tv), std::sin(tv),
                         spx.data(), spy.data(), spz.data());
    for (std::size_t q = 0; q < nk; ++q) {
      px_[q * nt + l] = spx[q];
      py_[q * nt + l] = spy[q];
      pz_[q * nt + l] = spz[q];
    }
  }
}

std::array<double, 4> HopfField::lift_at(int i, int j, int l) const {
  const double tv = t(mod(l, nt_));
  const std::size_t q = aidx(i, j);
  const double st = std::sin(tv);
  return {std::cos(tv), st * ax_[q], st * ay_[q], st * az_[q]};
}

Spinor3 HopfField::spinor_at(int i, int j, int l) const {
  const auto x = lift_at(i, j, l);
  return Spinor3(-1i * x[1], -1i * x[2], x[0] - 1i * x[3]);
}

Vec3 HopfField::image_at(int i, int j, int l) const {
  const std::size_t q = node_index(i, j, l);
  return Vec3(px_[q], py_[q], pz_[q]);
}

HopfField build_hopf_field(double m, int nkx, int nky, int nt) {
  return HopfField(m, nkx, nky, nt);
}

// --- preimage extraction ----------------------------------------------------
//
// The curve { p = target } is marched on the half-shifted dual lattice of the
// stored images (trilinear midpoint values) so that the model's symmetry
// lines, which pass exactly through primal nodes, land mid-cell. Face
// crossings are the exact roots of the bilinear interpolant on each face;
// within a cell crossing points are paired by distance and the segments are
// chained into loops.
namespace {

struct FaceKey {
  int axis;  // normal axis 0,1,2
  int i, j, l;
  auto operator<=>(const FaceKey&) const = default;
};

struct Extractor {
  const HopfField& f;
  int N[3];
  double delta[3];
  Vec3 e1, e2, tgt;
  // Dual-lattice scalar fields.
  std::vector<double> f1, f2, f3;

  std::map<FaceKey, std::vector<Vec3>> crossings;  // index-space positions

  Extractor(const HopfField& field, const Vec3& target) : f(field) {
    N[0] = field.nkx();
    N[1] = field.nky();
    N[2] = field.nt();
    delta[0] = 2.0 * kPi / N[0];
    delta[1] = 2.0 * kPi / N[1];
    delta[2] = kPi / N[2];
    tgt = target.normalized();
    if ((tgt - kFixedImage).norm() < 1e-6)
      throw InvalidParameter("extract_preimage: target equals the fixed-point image");
    e1 = tgt.cross(Vec3::UnitZ());
    if (e1.norm() < 0.5) e1 = tgt.cross(Vec3::UnitY());
    e1.normalize();
    e2 = tgt.cross(e1);

    const std::size_t total = static_cast<std::size_t>(N[0]) * N[1] * N[2];
    f1.resize(total);
    f2.resize(total);
    f3.resize(total);
    const auto& px = f.px();
    const auto& py = f.py();
    const auto& pz = f.pz();
    for (int i = 0; i < N[0]; ++i) {
      for (int j = 0; j < N[1]; ++j) {
        for (int l = 0; l < N[2]; ++l) {
          double mx = 0.0, my = 0.0, mz = 0.0;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              for (int c = 0; c < 2; ++c) {
                const std::size_t q = f.node_index(i + a, j + b, l + c);
                mx += px[q];
                my += py[q];
                mz += pz[q];
              }
          const Vec3 p(mx / 8.0, my / 8.0, mz / 8.0);
          const std::size_t q = dual_index(i, j, l);
          f1[q] = p.dot(e1);
          f2[q] = p.dot(e2);
          f3[q] = p.dot(tgt);
        }
      }
    }
  }

  static int mod(int a, int n) {
    int r = a % n;
    return r < 0 ? r + n : r;
  }
  std::size_t dual_index(int i, int j, int l) const {
    return (static_cast<std::size_t>(mod(i, N[0])) * N[1] + mod(j, N[1])) * N[2] + mod(l, N[2]);
  }

  // Corner dual-node indices of a face, ordered (0,0),(0,1),(1,0),(1,1) in
  // the face's (u,v) chart; the chart axes are the non-normal axes in
  // ascending order.
  void face_corners(const FaceKey& face, std::size_t out[4]) const {
    const int axes[2] = {face.axis == 0 ? 1 : 0, face.axis == 2 ? 1 : 2};
    const int base[3] = {face.i, face.j, face.l};
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        int c[3] = {base[0], base[1], base[2]};
        c[axes[0]] += a;
        c[axes[1]] += b;
        out[a * 2 + b] = dual_index(c[0], c[1], c[2]);
      }
    }
  }

  const std::vector<Vec3>& face_crossings(const FaceKey& face) {
    auto it = crossings.find(face);
    if (it != crossings.end()) return it->second;
    std::vector<Vec3> sols;
    std::size_t corner[4];
    face_corners(face, corner);
    // g ordered (0,0),(0,1),(1,0),(1,1)
    const double g1[4] = {f1[corner[0]], f1[corner[1]], f1[corner[2]], f1[corner[3]]};
    const double g2[4] = {f2[corner[0]], f2[corner[1]], f2[corner[2]], f2[corner[3]]};
    const double g3[4] = {f3[corner[0]], f3[corner[1]], f3[corner[2]], f3[corner[3]]};
    auto all_same_sign = [](const double g[4]) {
      return (g[0] > 0 && g[1] > 0 && g[2] > 0 && g[3] > 0) ||
             (g[0] < 0 && g[1] < 0 && g[2] < 0 && g[3] < 0);
    };
    const double mag1 = std::max({std::abs(g1[0]), std::abs(g1[1]), std::abs(g1[2]), std::abs(g1[3])});
    const double mag2 = std::max({std::abs(g2[0]), std::abs(g2[1]), std::abs(g2[2]), std::abs(g2[3])});
    const bool reject = all_same_sign(g1) || all_same_sign(g2) ||
                        (g3[0] < 0 && g3[1] < 0 && g3[2] < 0 && g3[3] < 0) || mag1 < 1e-12 ||
                        mag2 < 1e-12;
    if (!reject) {
      // Bilinear f = a + b u + c v + d u v per field.
      const double a1 = g1[0], b1 = g1[2] - g1[0], c1 = g1[1] - g1[0],
                   d1 = g1[3] - g1[2] - g1[1] + g1[0];
      const double a2 = g2[0], b2 = g2[2] - g2[0], c2 = g2[1] - g2[0],
                   d2 = g2[3] - g2[2] - g2[1] + g2[0];
      const double A = b2 * d1 - d2 * b1;
      const double B = a2 * d1 + b2 * c1 - c2 * b1 - d2 * a1;
      const double C = a2 * c1 - c2 * a1;
      double roots[2];
      int nroots = 0;
      const double scale = std::max({std::abs(B), std::abs(C), 1e-300});
      if (std::abs(A) < 1e-14 * scale) {
        if (std::abs(B) > 1e-14 * std::max(std::abs(C), 1e-300)) roots[nroots++] = -C / B;
      } else {
        const double disc = B * B - 4.0 * A * C;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          if (B != 0.0) {
            const double q = -0.5 * (B + std::copysign(sq, B));
            roots[nroots++] = q / A;
            if (q != 0.0) roots[nroots++] = C / q;
          } else {
            roots[nroots++] = sq / (2.0 * A);
            roots[nroots++] = -sq / (2.0 * A);
          }
        }
      }
      constexpr double eps = 1e-9;
      for (int r = 0; r < nroots; ++r) {
        const double u = roots[r];
        if (u < -eps || u > 1.0 + eps) continue;
        const double den1 = c1 + d1 * u;
        const double den2 = c2 + d2 * u;
        double v;
        if (std::abs(den1) >= std::abs(den2)) {
          if (std::abs(den1) < 1e-300) continue;
          v = -(a1 + b1 * u) / den1;
        } else {
          v = -(a2 + b2 * u) / den2;
        }
        if (v < -eps || v > 1.0 + eps) continue;
        const double w00 = (1 - u) * (1 - v), w01 = (1 - u) * v, w10 = u * (1 - v), w11 = u * v;
        if (g3[0] * w00 + g3[1] * w01 + g3[2] * w10 + g3[3] * w11 <= 0.0) continue;
        Vec3 pos(face.i, face.j, face.l);
        const int axes[2] = {face.axis == 0 ? 1 : 0, face.axis == 2 ? 1 : 2};
        pos(axes[0]) += u;
        pos(axes[1]) += v;
        bool dup = false;
        for (const Vec3& s : sols)
          if ((s - pos).norm() < 1e-7) dup = true;
        if (!dup) sols.push_back(pos);
      }
    }
    return crossings.emplace(face, std::move(sols)).first->second;
  }

  std::array<FaceKey, 6> cell_faces(int i, int j, int l) const {
    return {FaceKey{0, i, j, l},          FaceKey{0, mod(i + 1, N[0]), j, l},
            FaceKey{1, i, j, l},          FaceKey{1, i, mod(j + 1, N[1]), l},
            FaceKey{2, i, j, l},          FaceKey{2, i, j, mod(l + 1, N[2])}};
  }

  Vec3 wrap_delta(const Vec3& d) const {
    Vec3 out = d;
    for (int ax = 0; ax < 3; ++ax) out(ax) -= N[ax] * std::round(out(ax) / N[ax]);
    return out;
  }
};

using NodeId = std::pair<FaceKey, int>;

}  // namespace

std::vector<Polyline3> extract_preimage(const HopfField& field, const Vec3& target) {
  Extractor ex(field, target);
  const int(&N)[3] = ex.N;

  std::map<NodeId, std::vector<NodeId>> adjacency;
  std::map<NodeId, Vec3> position;
  int odd_cells = 0;
  for (int i = 0; i < N[0]; ++i) {
    for (int j = 0; j < N[1]; ++j) {
      for (int l = 0; l < N[2]; ++l) {
        std::vector<std::pair<NodeId, Vec3>> nodes;
        for (const FaceKey& fk : ex.cell_faces(i, j, l)) {
          const auto& sols = ex.face_crossings(fk);
          for (int s = 0; s < static_cast<int>(sols.size()); ++s)
            nodes.emplace_back(NodeId{fk, s}, sols[s]);
        }
        if (nodes.empty()) continue;
        if (nodes.size() % 2 != 0) {
          ++odd_cells;
          continue;
        }
        std::vector<int> remaining(nodes.size());
        for (size_t q = 0; q < nodes.size(); ++q) remaining[q] = static_cast<int>(q);
        while (!remaining.empty()) {
          const int a = remaining.front();
          remaining.erase(remaining.begin());
          int best = -1;
          double best_d = 1e300;
          for (const int b : remaining) {
            const double d = ex.wrap_delta(nodes[a].second - nodes[b].second).norm();
            if (d < best_d) {
              best_d = d;
              best = b;
            }
          }
          remaining.erase(std::find(remaining.begin(), remaining.end(), best));
          adjacency[nodes[a].first].push_back(nodes[best].first);
          adjacency[nodes[best].first].push_back(nodes[a].first);
          position[nodes[a].first] = nodes[a].second;
          position[nodes[best].first] = nodes[best].second;
        }
      }
    }
  }
  if (odd_cells > 0)
    throw OpenCurve("extract_preimage: crossing parity broke in " + std::to_string(odd_cells) +
                    " cells (grid too coarse)");

  std::vector<Polyline3> loops;
  std::map<NodeId, bool> visited;
  for (const auto& [start, nbrs] : adjacency) {
    if (visited.count(start)) continue;
    if (nbrs.size() != 2)
      throw OpenCurve("extract_preimage: a crossing point is not shared by two cells");
    std::vector<NodeId> chain{start};
    visited[start] = true;
    NodeId prev = start;
    NodeId cur = nbrs[0];
    bool closed_walk = false;
    while (true) {
      if (cur == start) {
        closed_walk = true;
        break;
      }
      if (visited.count(cur)) break;
      visited[cur] = true;
      chain.push_back(cur);
      const auto& adj = adjacency.at(cur);
      if (adj.size() != 2)
        throw OpenCurve("extract_preimage: a crossing point is not shared by two cells");
      const NodeId next = (adj[0] == prev) ? adj[1] : adj[0];
      prev = cur;
      cur = next;
    }
    if (!closed_walk) throw OpenCurve("extract_preimage: a traced curve exits without closing");
    if (chain.size() < 4) continue;

    // Unwrap to a continuous R^3 curve in index space.
    std::vector<Vec3> idx_pts;
    idx_pts.push_back(position[chain[0]]);
    for (size_t q = 1; q < chain.size(); ++q)
      idx_pts.push_back(idx_pts.back() + ex.wrap_delta(position[chain[q]] - idx_pts.back()));
    const Vec3 closing = ex.wrap_delta(position[chain[0]] - idx_pts.back());
    const Vec3 net = (idx_pts.back() + closing) - idx_pts.front();
    const bool contractible = net.norm() < 1e-6;

    // Pullback orientation: det[grad f1, grad f2, tangent] > 0 with
    // (e1, e2, target) right-handed. Sample a few vertices and trust the
    // largest-margin one.
    double best_det = 0.0;
    for (size_t s = 0; s < chain.size(); s += std::max<size_t>(1, chain.size() / 8)) {
      const Vec3& p = idx_pts[s];
      const Vec3 tau_idx = idx_pts[(s + 1) % idx_pts.size()] -
                           idx_pts[(s + idx_pts.size() - 1) % idx_pts.size()];
      int node[3];
      for (int ax = 0; ax < 3; ++ax) node[ax] = Extractor::mod((int)std::lround(p(ax)), N[ax]);
      Vec3 g1, g2, tau;
      for (int ax = 0; ax < 3; ++ax) {
        int up[3] = {node[0], node[1], node[2]};
        int dn[3] = {node[0], node[1], node[2]};
        up[ax] = Extractor::mod(up[ax] + 1, N[ax]);
        dn[ax] = Extractor::mod(dn[ax] - 1, N[ax]);
        g1(ax) = (ex.f1[ex.dual_index(up[0], up[1], up[2])] -
                  ex.f1[ex.dual_index(dn[0], dn[1], dn[2])]) /
                 (2.0 * ex.delta[ax]);
        g2(ax) = (ex.f2[ex.dual_index(up[0], up[1], up[2])] -
                  ex.f2[ex.dual_index(dn[0], dn[1], dn[2])]) /
                 (2.0 * ex.delta[ax]);
        tau(ax) = tau_idx(ax) * ex.delta[ax];
      }
      Eigen::Matrix3d M;
      M.row(0) = g1;
      M.row(1) = g2;
      M.row(2) = tau;
      const double det = M.determinant();
      if (std::abs(det) > std::abs(best_det)) best_det = det;
    }
    if (best_det < 0.0) std::reverse(idx_pts.begin(), idx_pts.end());

    Polyline3 line;
    line.closed = contractible;
    for (const Vec3& p : idx_pts) {
      // Dual-lattice node q sits at primal coordinate q + 1/2.
      line.points.emplace_back(-kPi + (p(0) + 0.5) * ex.delta[0],
                               -kPi + (p(1) + 0.5) * ex.delta[1], (p(2) + 0.5) * ex.delta[2]);
    }
    loops.push_back(std::move(line));
  }
  std::sort(loops.begin(), loops.end(), [](const Polyline3& a, const Polyline3& b) {
    return a.points.size() > b.points.size();
  });
  return loops;
}

double gauss_linking(const Polyline3& a, const Polyline3& b, double min_separation) {
  if (!a.closed || !b.closed)
    throw InvalidParameter("gauss_linking: both curves must be closed contractible loops");
  const size_t na = a.points.size(), nb = b.points.size();
  if (na < 3 || nb < 3) throw InvalidParameter("gauss_linking: degenerate polyline");

  std::vector<double> cbx(nb), cby(nb), cbz(nb), dbx(nb), dby(nb), dbz(nb);
  for (size_t j = 0; j < nb; ++j) {
    const Vec3& p = b.points[j];
    const Vec3& q = b.points[(j + 1) % nb];
    cbx[j] = 0.5 * (p.x() + q.x());
    cby[j] = 0.5 * (p.y() + q.y());
    cbz[j] = 0.5 * (p.z() + q.z());
    dbx[j] = q.x() - p.x();
    dby[j] = q.y() - p.y();
    dbz[j] = q.z() - p.z();
  }
  if (min_separation > 0.0) {
    for (const Vec3& p : a.points)
      for (const Vec3& q : b.points)
        if ((p - q).norm() < min_separation)
          throw CurvesTooClose("gauss_linking: curves closer than the separation floor");
  }
  double total = 0.0;
  for (size_t i = 0; i < na; ++i) {
    const Vec3& p = a.points[i];
    const Vec3& q = a.points[(i + 1) % na];
    const double ca[3] = {0.5 * (p.x() + q.x()), 0.5 * (p.y() + q.y()), 0.5 * (p.z() + q.z())};
    const double da[3] = {q.x() - p.x(), q.y() - p.y(), q.z() - p.z()};
    total += kernels::gauss_row_sum(ca, da, cbx.data(), cby.data(), cbz.data(), dbx.data(),
                                    dby.data(), dbz.data(), nb);
  }
  return total / (4.0 * kPi);
}

// --- Whitehead integral ------------------------------------------------------

namespace {

// z-spinor of the lift: z = (x2 + i x1, x0 - i x3); |z| = 1 on S^3 and
// p = z^ sigma z. Antiperiodic across the t seam (psi(t+pi) = -psi(t)).
struct ZField {
  const HopfField& f;
  int jlo, jhi;  // pinned boundary rows (inclusive)
  Eigen::Vector2cd fixed_cache;

  Eigen::Vector2cd at(int i, int jj, int l) const {
    // jj is the absolute ky row index, clamped into [jlo, jhi].
    int j = std::clamp(jj, jlo, jhi);
    double sign = 1.0;
    int lr = l % f.nt();
    if (lr < 0) lr += f.nt();
    const int wraps = (l - lr) / f.nt();
    if (wraps % 2 != 0) sign = -1.0;
    const bool pinned = (j == jlo || j == jhi);
    std::array<double, 4> x;
    if (pinned) {
      const double tv = f.t(lr);
      x = {std::cos(tv), 0.0, 0.0, -std::sin(tv)};
    } else {
      x = f.lift_at(i, j, lr);
    }
    return sign * Eigen::Vector2cd(x[2] + 1i * x[1], x[0] - 1i * x[3]);
  }
};

}  // namespace

double hopf_invariant(const HopfField& field, Patch patch) {
  const int nx = field.nkx(), ny = field.nky(), nt = field.nt();
  const auto [jlo, jhi] = patch_rows(patch, ny);
  for (int i = 0; i < nx; ++i) {
    for (int jb : {jlo, jhi}) {
      if ((field.a_at(i, jb) - kFixedImage).norm() > 1e-6)
        throw BoundaryNotFixed("hopf_invariant: boundary row off the fixed point");
    }
  }
  const ZField z{field, jlo, jhi};
  const double dk = 2.0 * kPi / nx;
  const double dky = 2.0 * kPi / ny;
  const double dt = kPi / nt;
  const double deltas[3] = {dk, dky, dt};
  const int rows = jhi - jlo + 1;

  // A_mu = Im(z^ dz) by centered differences, stored per (i, row, l).
  std::vector<double> A(static_cast<std::size_t>(nx) * rows * nt * 3);
  auto aidx = [&](int i, int r, int l, int mu) {
    return ((static_cast<std::size_t>(i) * rows + r) * nt + l) * 3 + mu;
  };
  for (int i = 0; i < nx; ++i) {
    for (int r = 0; r < rows; ++r) {
      const int j = jlo + r;
      for (int l = 0; l < nt; ++l) {
        const Eigen::Vector2cd z0 = z.at(i, j, l);
        const int di[3] = {1, 0, 0};
        const int dj[3] = {0, 1, 0};
        const int dl[3] = {0, 0, 1};
        for (int mu = 0; mu < 3; ++mu) {
          const Eigen::Vector2cd zp = z.at((i + di[mu]) % nx, j + dj[mu], l + dl[mu]);
          const Eigen::Vector2cd zm =
              z.at((i - di[mu] + nx) % nx, j - dj[mu], l - dl[mu]);
          A[aidx(i, r, l, mu)] =
              std::imag((z0.adjoint() * (zp - zm)).value()) / (2.0 * deltas[mu]);
        }
      }
    }
  }
  auto A_at = [&](int i, int r, int l, int mu) {
    i = (i % nx + nx) % nx;
    r = std::clamp(r, 0, rows - 1);
    l = (l % nt + nt) % nt;
    return A[aidx(i, r, l, mu)];
  };
  double chi = 0.0;
  for (int i = 0; i < nx; ++i) {
    for (int r = 0; r < rows; ++r) {
      const double weight = (r == 0 || r == rows - 1) ? 0.5 : 1.0;
      for (int l = 0; l < nt; ++l) {
        const double bx = (A_at(i, r + 1, l, 2) - A_at(i, r - 1, l, 2)) / (2.0 * dky) -
                          (A_at(i, r, l + 1, 1) - A_at(i, r, l - 1, 1)) / (2.0 * dt);
        const double by = (A_at(i, r, l + 1, 0) - A_at(i, r, l - 1, 0)) / (2.0 * dt) -
                          (A_at(i + 1, r, l, 2) - A_at(i - 1, r, l, 2)) / (2.0 * dk);
        const double bz = (A_at(i + 1, r, l, 1) - A_at(i - 1, r, l, 1)) / (2.0 * dk) -
                          (A_at(i, r + 1, l, 0) - A_at(i, r - 1, l, 0)) / (2.0 * dky);
        chi += weight * (A_at(i, r, l, 0) * bx + A_at(i, r, l, 1) * by + A_at(i, r, l, 2) * bz);
      }
    }
  }
  // Sign fixed so that chi matches the pullback-oriented Gauss linking of
  // preimage loops (and the patch Chern number).
  return -chi * dk * dky * dt / (4.0 * kPi * kPi);
}

double torus_degree_h5(const BZGrid<Vec3>& field) {
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
  return -total / (4.0 * kPi);
}

Vec3 default_target_1() { return Vec3(0.30, 0.20, 0.93).normalized(); }
Vec3 default_target_2() { return Vec3(-0.22, -0.32, 0.92).normalized(); }

}  // namespace eulertopo
