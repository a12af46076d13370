#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "eulertopo/invariants.hpp"

using namespace eulertopo;

TEST_CASE("solid-angle winding is an exact even integer") {
  // xi = +-2 in the topological phase, 0 in the trivial one.
  for (double m : {0.5, 1.0, 1.5, -0.5, -1.0, -1.5}) {
    const double xi = winding_number(n_field(m, 20, 20));
    CHECK(std::abs(xi - std::lround(xi)) < 1e-9);
    CHECK(std::abs(std::lround(xi)) == 2);
  }
  for (double m : {3.0, 4.0, -3.0, -4.0}) {
    const double xi = winding_number(n_field(m, 20, 20));
    CHECK(std::abs(xi) < 1e-9);
  }
  BZGrid<Vec3> constant(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) constant.at(i, j) = Vec3(0, 0, 1);
  CHECK(winding_number(constant) == doctest::Approx(0.0));
}

TEST_CASE("winding flips sign under field negation") {
  BZGrid<Vec3> field = n_field(1.0, 16, 16);
  const double xi = winding_number(field);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) field.at(i, j) = -field.at(i, j);
  CHECK(winding_number(field) == doctest::Approx(-xi).epsilon(1e-12));
}

TEST_CASE("ill-conditioned plaquettes are rejected") {
  BZGrid<Vec3> field(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) field.at(i, j) = Vec3(0, 0, 1);
  field.at(1, 1) = Vec3(0, 0.001, -1).normalized();  // near-antipodal to neighbors
  CHECK_THROWS_AS(winding_number(field), IllConditionedPlaquette);
}

TEST_CASE("direct finite-difference integral converges to the integer") {
  const double xi20 = euler_class_direct(n_field(1.0, 20, 20));
  const double xi_exact = winding_number(n_field(1.0, 20, 20));
  CHECK(std::abs(xi20 - xi_exact) < 0.15);
  const double xi101 = euler_class_direct(n_field(1.0, 101, 101));
  CHECK(std::abs(xi101 - xi_exact) < 0.01);
  CHECK(std::abs(euler_class_direct(n_field(3.0, 20, 20))) < 0.15);
  // O(1/N^2): quadrupling expected when the grid is doubled.
  const double err20 = std::abs(xi20 - xi_exact);
  const double err40 = std::abs(euler_class_direct(n_field(1.0, 40, 40)) - xi_exact);
  CHECK(err20 / err40 > 2.5);
  CHECK(err20 / err40 < 6.0);
}

TEST_CASE("lattice Chern number and the Euler class agree") {
  for (double m : {0.5, 1.0, 1.5, -0.5, -1.0, -1.5, 3.0, 4.0, -3.0, -4.0}) {
    const BZGrid<Vec3> field = n_field(m, 20, 20);
    const int c = chern_number_fhs(lower_band_states(field));
    const long xi = std::lround(winding_number(field));
    CHECK(2 * std::abs(c) == std::labs(xi));
    // Lower-band convention: C = -xi/2.
    CHECK(2 * c == -xi);
  }
  BZGrid<Eigen::Vector2cd> constant(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) constant.at(i, j) = Eigen::Vector2cd(1.0, 0.0);
  CHECK(chern_number_fhs(constant) == 0);
}

TEST_CASE("vanishing link overlaps are rejected") {
  BZGrid<Eigen::Vector2cd> states(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      states.at(i, j) = (i % 2 == 0) ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1);
  CHECK_THROWS_AS(chern_number_fhs(states), ZeroLink);
}

TEST_CASE("the two Euler-class integrands agree pointwise") {
  CHECK(integrand_identity_residual(1.0, Momentum(0.3, 0.7), 1e-3) < 1e-4);
  CHECK(integrand_identity_residual(3.0, Momentum(1.1, -0.4), 1e-3) < 1e-4);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uk(-kPi, kPi);
  for (double m : {1.0, 3.0}) {
    for (int s = 0; s < 50; ++s) {
      CHECK(integrand_identity_residual(m, Momentum(uk(rng), uk(rng)), 1e-3) < 1e-4);
    }
  }
}

TEST_CASE("identity residual decays at second order in the step") {
  // At h small the residual sits at rounding noise, so probe the truncation
  // regime with coarse steps.
  const double r1 = integrand_identity_residual(1.0, Momentum(0.3, 0.7), 0.4);
  const double r2 = integrand_identity_residual(1.0, Momentum(0.3, 0.7), 0.2);
  CHECK(r1 > 1e-8);  // truly in the truncation-dominated regime
  CHECK(r1 / r2 > 2.5);
  CHECK(r1 / r2 < 6.0);
}

namespace {

std::vector<Vec3> lowest_band_loop(double cx, double cy, int npts, double radius) {
  std::vector<Vec3> states;
  for (int i = 0; i <= npts; ++i) {
    const double th = 2.0 * kPi * i / npts;
    const Momentum k(cx + radius * std::cos(th), cy + radius * std::sin(th));
    states.push_back(eig_frame(perturbed_ham(k)).u1);
  }
  states.back() = states.front();
  return states;
}

}  // namespace

TEST_CASE("berry phase is pi around each Dirac node and 0 elsewhere") {
  const auto nodes = locate_dirac_nodes(1e-6);
  REQUIRE(nodes.size() == 4);
  double sum = 0.0;
  for (const auto& node : nodes) {
    const double gamma = berry_phase(lowest_band_loop(node.k.kx, node.k.ky, 16, 0.1 * kPi));
    CHECK(gamma == doctest::Approx(kPi));
    sum += gamma;
  }
  CHECK(std::fmod(sum, 2.0 * kPi) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(berry_phase(lowest_band_loop(0.0, 0.0, 16, 0.1 * kPi)) == doctest::Approx(0.0));
  // Brute-force cross-check with a denser loop.
  CHECK(berry_phase(lowest_band_loop(0.0, 0.0, 64, 0.1 * kPi)) == doctest::Approx(0.0));
  CHECK(berry_phase(lowest_band_loop(nodes[0].k.kx, nodes[0].k.ky, 64, 0.1 * kPi)) ==
        doctest::Approx(kPi));
}

TEST_CASE("berry phase is invariant under interior sign flips") {
  const auto nodes = locate_dirac_nodes(1e-6);
  auto loop = lowest_band_loop(nodes[0].k.kx, nodes[0].k.ky, 16, 0.1 * kPi);
  const double before = berry_phase(loop);
  std::mt19937_64 rng(23);
  for (size_t i = 1; i + 1 < loop.size(); ++i)
    if (rng() & 1) loop[i] = -loop[i];
  CHECK(berry_phase(loop) == doctest::Approx(before));
}

TEST_CASE("berry phase rejects constant and too-coarse inputs") {
  std::vector<Vec3> constant(10, Vec3(0, 0, 1));
  CHECK(berry_phase(constant) == doctest::Approx(0.0));
  std::vector<Vec3> bad = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 0, 0)};
  CHECK_THROWS_AS(berry_phase(bad), PathTooCoarse);
}

TEST_CASE("wilson spectrum branch pairing and winding") {
  const BZGrid<BlochFrame> frames = frame_grid(1.0, 20, 20);
  for (Axis axis : {Axis::x, Axis::y}) {
    const WilsonSpectrum spec = wilson_spectrum(frames, axis);
    for (const auto& pair : spec.branches)
      CHECK(std::abs(pair[0] + pair[1]) < 5e-2);
    CHECK(std::abs(wilson_winding(spec)) == 2);
  }
  const BZGrid<BlochFrame> trivial = frame_grid(3.0, 20, 20);
  CHECK(wilson_winding(wilson_spectrum(trivial, Axis::x)) == 0);
  CHECK(wilson_winding(wilson_spectrum(trivial, Axis::y)) == 0);
}

TEST_CASE("wilson spectrum is base-point independent") {
  const int N = 20;
  const BZGrid<BlochFrame> frames = frame_grid(1.0, N, N);
  BZGrid<BlochFrame> rolled(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) rolled.at(i, j) = frames.at(i + 7, j);
  const WilsonSpectrum a = wilson_spectrum(frames, Axis::x);
  const WilsonSpectrum b = wilson_spectrum(rolled, Axis::x);
  for (size_t t = 0; t < a.branches.size(); ++t) {
    CHECK(a.branches[t][0] == doctest::Approx(b.branches[t][0]).epsilon(1e-9));
    CHECK(a.branches[t][1] == doctest::Approx(b.branches[t][1]).epsilon(1e-9));
  }
}

TEST_CASE("wilson eigenphases ignore per-node sign choices") {
  const int N = 12;
  BZGrid<BlochFrame> frames = frame_grid(1.0, N, N);
  std::mt19937_64 rng(31);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (rng() & 1) frames.at(i, j).u3 = -frames.at(i, j).u3;
  const WilsonSpectrum flipped = wilson_spectrum(frames, Axis::x);
  const WilsonSpectrum clean = wilson_spectrum(frame_grid(1.0, N, N), Axis::x);
  for (size_t t = 0; t < clean.branches.size(); ++t)
    CHECK(flipped.branches[t][1] == doctest::Approx(clean.branches[t][1]).epsilon(1e-10));
}

TEST_CASE("unwrap failure surfaces on jumpy synthetic spectra") {
  WilsonSpectrum spec;
  spec.direction = Axis::x;
  for (int t = 0; t < 8; ++t) {
    spec.transverse_k.push_back(t);
    const double th = (t % 2 == 0) ? 0.1 : 2.5;
    spec.branches.push_back({-th, th});
  }
  CHECK_THROWS_AS(wilson_winding(spec), UnwrapFailure);
}

TEST_CASE("four-band wilson branches across the trivialization path") {
  const WilsonSpectrum s0 = wilson_spectrum_four_band(1.0, 0.0, 20, 20);
  // s = 0: the decoupled flat band contributes an exact theta = 0 branch.
  for (const auto& br : s0.branches) {
    REQUIRE(br.size() == 3);
    double closest = 1e9;
    for (double th : br) closest = std::min(closest, std::abs(th));
    CHECK(closest < 1e-9);
  }
  CHECK(std::abs(wilson_winding(s0)) == 2);  // winding pair survives at s=0

  const WilsonSpectrum s1 = wilson_spectrum_four_band(1.0, 1.0, 20, 20);
  for (const auto& br : s1.branches)
    for (double th : br) CHECK(std::abs(th) < 0.05);

  // The triple point at (theta=0, ky=0) opens for s > 0; the branch spread
  // there is not monotone in s (it collapses again as everything
  // trivializes).
  auto gap_at_ky0 = [](const WilsonSpectrum& spec) {
    double gap = 0.0;
    for (size_t t = 0; t < spec.transverse_k.size(); ++t) {
      if (std::abs(spec.transverse_k[t]) > 1e-12) continue;
      for (double th : spec.branches[t]) gap = std::max(gap, std::abs(th));
    }
    return gap;
  };
  CHECK(gap_at_ky0(s0) < 1e-9);
  for (double s : {0.25, 0.5, 0.75})
    CHECK(gap_at_ky0(wilson_spectrum_four_band(1.0, s, 20, 20)) > 0.1);
  CHECK(gap_at_ky0(s1) < 0.05);
}

TEST_CASE("entanglement spectra distinguish the phases") {
  const BZGrid<BlochFrame> topo = frame_grid(1.0, 20, 20);
  const BZGrid<BlochFrame> triv = frame_grid(3.0, 20, 20);
  for (Axis cut : {Axis::x, Axis::y}) {
    double best_topo = 1.0;
    for (const auto& s : entanglement_spectrum(topo, cut, 10)) {
      for (double xi : s.xi) {
        CHECK(xi > -1e-9);
        CHECK(xi < 1.0 + 1e-9);
        best_topo = std::min(best_topo, std::abs(xi - 0.5));
      }
    }
    CHECK(best_topo < 0.05);
    for (const auto& s : entanglement_spectrum(triv, cut, 10))
      for (double xi : s.xi) CHECK((xi < 0.4 || xi > 0.6));
  }
}

TEST_CASE("atomic flat hamiltonian has a strictly local projector") {
  BZGrid<BlochFrame> grid(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      BlochFrame f;
      f.u3 = Vec3(0, 0, 1);  // diag(-1,-1,1) top band
      f.u1 = Vec3(1, 0, 0);
      f.u2 = Vec3(0, 1, 0);
      f.e1 = f.e2 = -1.0;
      f.e3 = 1.0;
      grid.at(i, j) = f;
    }
  for (const auto& s : entanglement_spectrum(grid, Axis::x, 4))
    for (double xi : s.xi)
      CHECK(std::min(std::abs(xi), std::abs(xi - 1.0)) < 1e-9);
}

TEST_CASE("dirac nodes sit at the figure positions") {
  const auto nodes = locate_dirac_nodes(1e-6);
  REQUIRE(nodes.size() == 4);
  for (const auto& node : nodes) {
    CHECK(node.gap < 1e-6);
    CHECK(std::abs(std::abs(node.k.kx) - 0.26 * kPi) < 0.02 * kPi);
    CHECK(std::abs(std::abs(node.k.ky) - 0.4 * kPi) < 0.02 * kPi);
  }
}

TEST_CASE("node search rejects a flattened hamiltonian") {
  CHECK_THROWS_AS(
      locate_dirac_nodes([](const Momentum& k) { return euler_ham(1.0, k); }, 1e-6),
      InvalidParameter);
}
