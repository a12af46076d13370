#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "eulertopo/kernels.hpp"

using namespace eulertopo;

namespace {

struct Soa {
  std::vector<double> x, y, z;
};

Soa random_unit_vectors(size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Soa s;
  s.x.resize(n);
  s.y.resize(n);
  s.z.resize(n);
  for (size_t i = 0; i < n; ++i) {
    double a = gauss(rng), b = gauss(rng), c = gauss(rng);
    const double r = std::sqrt(a * a + b * b + c * c);
    s.x[i] = a / r;
    s.y[i] = b / r;
    s.z[i] = c / r;
  }
  return s;
}

}  // namespace

TEST_CASE("afield kernel reference values and norms") {
  // n = z-hat maps to a = z-hat; unit inputs stay unit.
  const size_t n = 257;  // odd length exercises the scalar tail
  Soa in = random_unit_vectors(n, 42);
  in.x[0] = 0.0;
  in.y[0] = 0.0;
  in.z[0] = 1.0;
  Soa out;
  out.x.assign(n, 0.0);
  out.y.assign(n, 0.0);
  out.z.assign(n, 0.0);
  kernels::afield_from_n(in.x.data(), in.y.data(), in.z.data(), n, out.x.data(), out.y.data(),
                         out.z.data());
  CHECK(out.x[0] == doctest::Approx(0.0));
  CHECK(out.z[0] == doctest::Approx(1.0));
  for (size_t i = 0; i < n; ++i) {
    const double norm =
        std::sqrt(out.x[i] * out.x[i] + out.y[i] * out.y[i] + out.z[i] * out.z[i]);
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("hopf image kernel matches the quadratic forms and stays unit") {
  const size_t n = 131;
  const Soa a = random_unit_vectors(n, 7);
  std::vector<double> px(n), py(n), pz(n);
  const double t = 0.83;
  kernels::hopf_images(a.x.data(), a.y.data(), a.z.data(), n, std::cos(t), std::sin(t),
                       px.data(), py.data(), pz.data());
  for (size_t i = 0; i < n; ++i) {
    const double x0 = std::cos(t), x1 = std::sin(t) * a.x[i], x2 = std::sin(t) * a.y[i],
                 x3 = std::sin(t) * a.z[i];
    CHECK(px[i] == doctest::Approx(2 * x0 * x2 - 2 * x1 * x3).epsilon(1e-14));
    CHECK(py[i] == doctest::Approx(-2 * x0 * x1 - 2 * x2 * x3).epsilon(1e-14));
    CHECK(pz[i] == doctest::Approx(x1 * x1 + x2 * x2 - x0 * x0 - x3 * x3).epsilon(1e-14));
    CHECK(px[i] * px[i] + py[i] * py[i] + pz[i] * pz[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
  // t = 0: every image sits at the fixed point (0,0,-1).
  kernels::hopf_images(a.x.data(), a.y.data(), a.z.data(), n, 1.0, 0.0, px.data(), py.data(),
                       pz.data());
  for (size_t i = 0; i < n; ++i) {
    CHECK(px[i] == 0.0);
    CHECK(py[i] == 0.0);
    CHECK(pz[i] == -1.0);
  }
}

TEST_CASE("gauss row kernel equals a direct summation") {
  const size_t n = 101;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> cbx(n), cby(n), cbz(n), dbx(n), dby(n), dbz(n);
  for (size_t i = 0; i < n; ++i) {
    cbx[i] = gauss(rng) + 3.0;
    cby[i] = gauss(rng);
    cbz[i] = gauss(rng);
    dbx[i] = 0.1 * gauss(rng);
    dby[i] = 0.1 * gauss(rng);
    dbz[i] = 0.1 * gauss(rng);
  }
  const double ca[3] = {-1.0, 0.2, 0.1};
  const double da[3] = {0.05, -0.02, 0.07};
  double ref = 0.0;
  for (size_t j = 0; j < n; ++j) {
    const double rx = cbx[j] - ca[0], ry = cby[j] - ca[1], rz = cbz[j] - ca[2];
    const double cx = da[1] * dbz[j] - da[2] * dby[j];
    const double cy = da[2] * dbx[j] - da[0] * dbz[j];
    const double cz = da[0] * dby[j] - da[1] * dbx[j];
    const double r = std::sqrt(rx * rx + ry * ry + rz * rz);
    ref += (rx * cx + ry * cy + rz * cz) / (r * r * r);
  }
  const double got = kernels::gauss_row_sum(ca, da, cbx.data(), cby.data(), cbz.data(),
                                            dbx.data(), dby.data(), dbz.data(), n);
  CHECK(got == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("scalar and avx2 backends agree") {
  using namespace kernels;
  if (!detail::avx2_supported()) {
    MESSAGE("AVX2 not available on this host; dispatch stays scalar");
    CHECK(active_backend() == Backend::scalar);
    return;
  }
#if defined(__x86_64__) || defined(_M_X64)
  const size_t n = 1003;
  const Soa a = random_unit_vectors(n, 11);

  std::vector<double> s1(n), s2(n), s3(n), v1(n), v2(n), v3(n);
  detail::afield_from_n_scalar(a.x.data(), a.y.data(), a.z.data(), n, s1.data(), s2.data(),
                               s3.data());
  detail::afield_from_n_avx2(a.x.data(), a.y.data(), a.z.data(), n, v1.data(), v2.data(),
                             v3.data());
  for (size_t i = 0; i < n; ++i) {
    CHECK(s1[i] == doctest::Approx(v1[i]).epsilon(1e-13));
    CHECK(s2[i] == doctest::Approx(v2[i]).epsilon(1e-13));
    CHECK(s3[i] == doctest::Approx(v3[i]).epsilon(1e-13));
  }

  detail::hopf_images_scalar(a.x.data(), a.y.data(), a.z.data(), n, std::cos(0.37),
                             std::sin(0.37), s1.data(), s2.data(), s3.data());
  detail::hopf_images_avx2(a.x.data(), a.y.data(), a.z.data(), n, std::cos(0.37), std::sin(0.37),
                           v1.data(), v2.data(), v3.data());
  for (size_t i = 0; i < n; ++i) {
    CHECK(s1[i] == doctest::Approx(v1[i]).epsilon(1e-13));
    CHECK(s2[i] == doctest::Approx(v2[i]).epsilon(1e-13));
    CHECK(s3[i] == doctest::Approx(v3[i]).epsilon(1e-13));
  }

  const Soa b = random_unit_vectors(n, 12);
  const double ca[3] = {4.0, -1.0, 2.0};
  const double da[3] = {0.03, 0.02, -0.05};
  const double ref = detail::gauss_row_sum_scalar(ca, da, b.x.data(), b.y.data(), b.z.data(),
                                                  a.x.data(), a.y.data(), a.z.data(), n);
  const double got = detail::gauss_row_sum_avx2(ca, da, b.x.data(), b.y.data(), b.z.data(),
                                                a.x.data(), a.y.data(), a.z.data(), n);
  CHECK(got == doctest::Approx(ref).epsilon(1e-12));
#endif
}

TEST_CASE("backend selection is switchable at runtime") {
  using namespace kernels;
  const Backend initial = active_backend();
  set_backend(Backend::scalar);
  CHECK(active_backend() == Backend::scalar);
  CHECK(std::string(backend_name()) == "scalar");
  set_backend(Backend::avx2);
  if (detail::avx2_supported()) {
    CHECK(active_backend() == Backend::avx2);
  } else {
    CHECK(active_backend() == Backend::scalar);
  }
  set_backend(initial);
}
