#include "eulertopo/kernels.hpp"

#include <cstdlib>

namespace eulertopo::kernels {

namespace detail {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

}  // namespace detail

namespace {

Backend pick_initial() {
  if (std::getenv("EULERTOPO_FORCE_SCALAR") != nullptr) return Backend::scalar;
  return detail::avx2_supported() ? Backend::avx2 : Backend::scalar;
}

Backend& current() {
  static Backend b = pick_initial();
  return b;
}

}  // namespace

Backend active_backend() { return current(); }

const char* backend_name() {
  return current() == Backend::avx2 ? "avx2" : "scalar";
}

void set_backend(Backend b) {
  if (b == Backend::avx2 && !detail::avx2_supported()) return;
  current() = b;
}

void afield_from_n(const double* nx, const double* ny, const double* nz,
                   std::size_t n, double* ax, double* ay, double* az) {
#if defined(__x86_64__) || defined(_M_X64)
  if (current() == Backend::avx2) {
    detail::afield_from_n_avx2(nx, ny, nz, n, ax, ay, az);
    return;
  }
#endif
  detail::afield_from_n_scalar(nx, ny, nz, n, ax, ay, az);
}

void hopf_images(const double* ax, const double* ay, const double* az,
                 std::size_t n, double ct, double st,
                 double* px, double* py, double* pz) {
#if defined(__x86_64__) || defined(_M_X64)
  if (current() == Backend::avx2) {
    detail::hopf_images_avx2(ax, ay, az, n, ct, st, px, py, pz);
    return;
  }
#endif
  detail::hopf_images_scalar(ax, ay, az, n, ct, st, px, py, pz);
}

double gauss_row_sum(const double ca[3], const double da[3],
                     const double* cbx, const double* cby, const double* cbz,
                     const double* dbx, const double* dby, const double* dbz,
                     std::size_t n) {
#if defined(__x86_64__) || defined(_M_X64)
  if (current() == Backend::avx2) {
    return detail::gauss_row_sum_avx2(ca, da, cbx, cby, cbz, dbx, dby, dbz, n);
  }
#endif
  return detail::gauss_row_sum_scalar(ca, da, cbx, cby, cbz, dbx, dby, dbz, n);
}

}  // namespace eulertopo::kernels
