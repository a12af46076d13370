#include <cmath>
#include <cstddef>

#include "eulertopo/kernels.hpp"

namespace eulertopo::kernels::detail {

void afield_from_n_scalar(const double* nx, const double* ny, const double* nz,
                          std::size_t n, double* ax, double* ay, double* az) {
  for (std::size_t i = 0; i < n; ++i) {
    const double z = nz[i];
    ax[i] = 2.0 * nx[i] * z;
    ay[i] = 2.0 * ny[i] * z;
    az[i] = 2.0 * z * z - 1.0;
  }
}

void hopf_images_scalar(const double* ax, const double* ay, const double* az,
                        std::size_t n, double ct, double st,
                        double* px, double* py, double* pz) {
  const double x0 = ct;
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = st * ax[i];
    const double x2 = st * ay[i];
    const double x3 = st * az[i];
    px[i] = 2.0 * x0 * x2 - 2.0 * x1 * x3;
    py[i] = -2.0 * x0 * x1 - 2.0 * x2 * x3;
    pz[i] = x1 * x1 + x2 * x2 - x0 * x0 - x3 * x3;
  }
}

double gauss_row_sum_scalar(const double ca[3], const double da[3],
                            const double* cbx, const double* cby, const double* cbz,
                            const double* dbx, const double* dby, const double* dbz,
                            std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double rx = cbx[j] - ca[0];
    const double ry = cby[j] - ca[1];
    const double rz = cbz[j] - ca[2];
    const double cx = da[1] * dbz[j] - da[2] * dby[j];
    const double cy = da[2] * dbx[j] - da[0] * dbz[j];
    const double cz = da[0] * dby[j] - da[1] * dbx[j];
    const double r2 = rx * rx + ry * ry + rz * rz;
    const double inv = 1.0 / (r2 * std::sqrt(r2));
    acc += (rx * cx + ry * cy + rz * cz) * inv;
  }
  return acc;
}

}  // namespace eulertopo::kernels::detail
