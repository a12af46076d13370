#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "eulertopo/bloch.hpp"

using namespace eulertopo;

TEST_CASE("momentum reduces into the canonical window") {
  CHECK(Momentum(3.0 * kPi / 2.0, 0.0).kx == doctest::Approx(-kPi / 2.0));
  CHECK(Momentum(kPi, kPi).kx == doctest::Approx(-kPi));
  CHECK(Momentum(-kPi, 0.0).kx == doctest::Approx(-kPi));
  CHECK(Momentum(2.0 * kPi, 0.0).kx == doctest::Approx(0.0));
}

TEST_CASE("n_vec reference directions") {
  const Vec3 a = n_vec(1.0, Momentum(0.0, 0.0));
  CHECK(a.isApprox(Vec3(-1, 0, 0), 1e-14));
  const Vec3 b = n_vec(1.0, Momentum(kPi / 2.0, 0.0));
  CHECK(b.isApprox(Vec3(0, 1, 0), 1e-14));
  const Vec3 c = n_vec(3.0, Momentum(kPi, kPi));
  CHECK(c.isApprox(Vec3(1, 0, 0), 1e-14));
}

TEST_CASE("excluded mass parameters are rejected") {
  CHECK_THROWS_AS(n_vec(2.0, Momentum(0.3, 0.4)), InvalidParameter);
  CHECK_THROWS_AS(n_vec(-2.0, Momentum(0.3, 0.4)), InvalidParameter);
  CHECK_THROWS_AS(n_vec(1e-10, Momentum(0.3, 0.4)), InvalidParameter);
  CHECK_NOTHROW(n_vec(1.999, Momentum(0.3, 0.4)));
}

TEST_CASE("euler_ham at high-symmetry points") {
  CHECK(euler_ham(1.0, Momentum(0, 0)).isApprox(Eigen::Vector3d(1, -1, -1).asDiagonal().toDenseMatrix(), 1e-14));
  CHECK(euler_ham(1.0, Momentum(kPi, kPi)).isApprox(Eigen::Vector3d(1, -1, -1).asDiagonal().toDenseMatrix(), 1e-14));
  // At (pi/2, pi/2): n = (-1,1,1)/sqrt(3) and H n = n.
  const Momentum k(kPi / 2, kPi / 2);
  const Vec3 n = n_vec(1.0, k);
  CHECK(n.isApprox(Vec3(-1, 1, 1).normalized(), 1e-14));
  CHECK((euler_ham(1.0, k) * n).isApprox(n, 1e-12));
}

TEST_CASE("flattened spectrum is {-1,-1,1} across parameters") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uk(-kPi, kPi);
  for (double m : {0.5, 1.0, 1.5, -0.5, -1.5, 3.0, -3.0, 4.0}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Ham3 H = euler_ham(m, Momentum(uk(rng), uk(rng)));
      CHECK((H - H.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      Eigen::SelfAdjointEigenSolver<Ham3> es(H);
      CHECK(es.eigenvalues()(0) == doctest::Approx(-1.0).epsilon(1e-10));
      CHECK(es.eigenvalues()(1) == doctest::Approx(-1.0).epsilon(1e-10));
      CHECK(es.eigenvalues()(2) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("perturbed_ham diagonal shifts") {
  // h0(0,0) = 0, so the shift is diag(0, 0.5, -0.5).
  const Ham3 d0 = perturbed_ham(Momentum(0, 0)) - euler_ham(1.0, Momentum(0, 0));
  CHECK(d0.isApprox(Eigen::Vector3d(0.0, 0.5, -0.5).asDiagonal().toDenseMatrix(), 1e-14));
  // h0(pi/2, 0) = 0.1 (cos 0 - cos pi/2) = 0.1.
  const Ham3 d1 = perturbed_ham(Momentum(kPi / 2, 0)) - euler_ham(1.0, Momentum(kPi / 2, 0));
  CHECK(d1.isApprox(Eigen::Vector3d(0.1, 0.6, -0.4).asDiagonal().toDenseMatrix(), 1e-14));
}

TEST_CASE("perturbed_ham has a small occupied gap near the figure nodes") {
  Eigen::SelfAdjointEigenSolver<Ham3> es(perturbed_ham(Momentum(0.26 * kPi, 0.4 * kPi)));
  CHECK(es.eigenvalues()(1) - es.eigenvalues()(0) < 0.02);
}

TEST_CASE("four-band path endpoints and flatness") {
  CHECK(four_band_ham(1.0, Momentum(0.7, -0.4), 1.0)
            .isApprox(Eigen::Vector4d(-1, -1, -1, 1).asDiagonal().toDenseMatrix(), 1e-14));
  Ham4 expected = Ham4::Zero();
  expected.topLeftCorner<3, 3>() = euler_ham(1.0, Momentum(0, 0));
  expected(3, 3) = -1.0;
  CHECK(four_band_ham(1.0, Momentum(0, 0), 0.0).isApprox(expected, 1e-14));
  CHECK_THROWS_AS(four_band_ham(1.0, Momentum(0, 0), 1.5), InvalidParameter);

  // Gap stays exactly 2 along the whole path on a 20x20 grid.
  for (double s : {0.0, 0.3, 0.6, 1.0}) {
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) {
        const Momentum k(-kPi + 2 * kPi * i / 20.0, -kPi + 2 * kPi * j / 20.0);
        Eigen::SelfAdjointEigenSolver<Ham4> es(four_band_ham(1.0, k, s));
        CHECK(es.eigenvalues()(2) == doctest::Approx(-1.0).epsilon(1e-10));
        CHECK(es.eigenvalues()(3) == doctest::Approx(1.0).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("eig_frame conventions and frame algebra") {
  const BlochFrame f = eig_frame(Eigen::Vector3d(1, -1, -1).asDiagonal().toDenseMatrix());
  CHECK(f.u3.isApprox(Vec3(1, 0, 0), 1e-14));
  CHECK(f.e3 == doctest::Approx(1.0));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uk(-kPi, kPi);
  for (int trial = 0; trial < 40; ++trial) {
    const Momentum k(uk(rng), uk(rng));
    const BlochFrame g = eig_frame(euler_ham(1.0, k));
    const Vec3 n = n_vec(1.0, k);
    CHECK(std::abs(g.u3.dot(n)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(g.u1.dot(g.u2)) < 1e-10);
    CHECK(std::abs(g.u1.dot(g.u3)) < 1e-10);
    CHECK(std::abs(std::abs(g.u1.cross(g.u2).dot(g.u3)) - 1.0) < 1e-10);
    // Flattened Hamiltonian reconstructs from the top band alone.
    const Ham3 rebuilt = 2.0 * g.u3 * g.u3.transpose() - Ham3::Identity();
    CHECK(rebuilt.isApprox(euler_ham(1.0, k), 1e-10));
  }
}

TEST_CASE("eig_frame resolves the small gap at a Dirac node") {
  Eigen::SelfAdjointEigenSolver<Ham3> probe(perturbed_ham(Momentum(0.2622 * kPi, 0.3961 * kPi)));
  const BlochFrame f = eig_frame(perturbed_ham(Momentum(0.2622 * kPi, 0.3961 * kPi)));
  CHECK(f.e2 - f.e1 < 1e-3);
}

TEST_CASE("fix_gauge aligns a constant field with random signs") {
  std::mt19937_64 rng(13);
  BZGrid<BlochFrame> grid(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      BlochFrame f;
      const double s = (rng() & 1) ? 1.0 : -1.0;
      f.u3 = s * Vec3(0, 0, 1);
      f.u1 = Vec3(1, 0, 0);
      f.u2 = s * Vec3(0, 1, 0);
      f.e1 = f.e2 = -1.0;
      f.e3 = 1.0;
      grid.at(i, j) = f;
    }
  const auto fixed = fix_gauge(grid);
  CHECK(fixed.orientable);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      CHECK(fixed.frames.at(i, j).u3.isApprox(fixed.frames.at(0, 0).u3, 1e-14));
}

TEST_CASE("fix_gauge against the analytic reference") {
  const int N = 20;
  const BZGrid<BlochFrame> frames = frame_grid(1.0, N, N);
  const BZGrid<Vec3> ref = n_field(1.0, N, N);
  const auto with_ref = fix_gauge(frames, ref);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      CHECK(with_ref.frames.at(i, j).u3.isApprox(ref.at(i, j), 1e-10));
  // Continuity-based fixing agrees with the reference result up to one
  // global sign and reports an orientable bundle.
  const auto no_ref = fix_gauge(frames);
  CHECK(no_ref.orientable);
  const double global = no_ref.frames.at(0, 0).u3.dot(with_ref.frames.at(0, 0).u3) > 0 ? 1.0 : -1.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      CHECK(no_ref.frames.at(i, j).u3.isApprox(global * with_ref.frames.at(i, j).u3, 1e-10));
}

TEST_CASE("chern_map reference matrices") {
  CHECK(chern_map(Vec3(0, 0, 1)).isApprox((Eigen::Matrix2cd() << 1, 0, 0, -1).finished(), 1e-14));
  CHECK(chern_map(Vec3(1, 0, 0)).isApprox((Eigen::Matrix2cd() << 0, 1, 1, 0).finished(), 1e-14));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(chern_map(Vec3(-1, 1, 1).normalized()));
  CHECK(es.eigenvalues()(0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(es.eigenvalues()(1) == doctest::Approx(1.0).epsilon(1e-12));
}
