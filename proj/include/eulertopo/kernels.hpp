#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops used by the field builders and the linking
// integral. Each kernel has a scalar reference implementation and an AVX2
// variant; the active one is picked at runtime from CPU support. Both paths
// are exercised by the equivalence tests.
namespace eulertopo::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
const char* backend_name();

// Force the scalar path (used by tests; also honoured when the environment
// variable EULERTOPO_FORCE_SCALAR is set at first use).
void set_backend(Backend b);

// a = (2 nx nz, 2 ny nz, 2 nz^2 - 1) elementwise over SoA arrays.
void afield_from_n(const double* nx, const double* ny, const double* nz,
                   std::size_t n, double* ax, double* ay, double* az);

// Hopf images of the lift x = (ct, st*a) elementwise:
//   px = 2 x0 x2 - 2 x1 x3
//   py = -2 x0 x1 - 2 x2 x3
//   pz = x1^2 + x2^2 - x0^2 - x3^2
void hopf_images(const double* ax, const double* ay, const double* az,
                 std::size_t n, double ct, double st,
                 double* px, double* py, double* pz);

// One row of the Gauss double sum: sum_j ((cb_j - ca) . (da x db_j)) / |cb_j - ca|^3
double gauss_row_sum(const double ca[3], const double da[3],
                     const double* cbx, const double* cby, const double* cbz,
                     const double* dbx, const double* dby, const double* dbz,
                     std::size_t n);

namespace detail {

bool avx2_supported();

void afield_from_n_scalar(const double*, const double*, const double*,
                          std::size_t, double*, double*, double*);
void hopf_images_scalar(const double*, const double*, const double*,
                        std::size_t, double, double, double*, double*, double*);
double gauss_row_sum_scalar(const double[3], const double[3],
                            const double*, const double*, const double*,
                            const double*, const double*, const double*, std::size_t);

#if defined(__x86_64__) || defined(_M_X64)
void afield_from_n_avx2(const double*, const double*, const double*,
                        std::size_t, double*, double*, double*);
void hopf_images_avx2(const double*, const double*, const double*,
                      std::size_t, double, double, double*, double*, double*);
double gauss_row_sum_avx2(const double[3], const double[3],
                          const double*, const double*, const double*,
                          const double*, const double*, const double*, std::size_t);
#endif

}  // namespace detail

}  // namespace eulertopo::kernels
