#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstddef>

#include "eulertopo/kernels.hpp"

namespace eulertopo::kernels::detail {

void afield_from_n_avx2(const double* nx, const double* ny, const double* nz,
                        std::size_t n, double* ax, double* ay, double* az) {
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(nx + i);
    const __m256d vy = _mm256_loadu_pd(ny + i);
    const __m256d vz = _mm256_loadu_pd(nz + i);
    const __m256d twz = _mm256_mul_pd(two, vz);
    _mm256_storeu_pd(ax + i, _mm256_mul_pd(vx, twz));
    _mm256_storeu_pd(ay + i, _mm256_mul_pd(vy, twz));
    _mm256_storeu_pd(az + i, _mm256_sub_pd(_mm256_mul_pd(vz, twz), one));
  }
  for (; i < n; ++i) {
    const double z = nz[i];
    ax[i] = 2.0 * nx[i] * z;
    ay[i] = 2.0 * ny[i] * z;
    az[i] = 2.0 * z * z - 1.0;
  }
}

void hopf_images_avx2(const double* ax, const double* ay, const double* az,
                      std::size_t n, double ct, double st,
                      double* px, double* py, double* pz) {
  const __m256d x0 = _mm256_set1_pd(ct);
  const __m256d vst = _mm256_set1_pd(st);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d x0sq = _mm256_mul_pd(x0, x0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x1 = _mm256_mul_pd(vst, _mm256_loadu_pd(ax + i));
    const __m256d x2 = _mm256_mul_pd(vst, _mm256_loadu_pd(ay + i));
    const __m256d x3 = _mm256_mul_pd(vst, _mm256_loadu_pd(az + i));
    const __m256d vpx = _mm256_mul_pd(
        two, _mm256_sub_pd(_mm256_mul_pd(x0, x2), _mm256_mul_pd(x1, x3)));
    const __m256d vpy = _mm256_mul_pd(
        two, _mm256_add_pd(_mm256_mul_pd(x0, x1), _mm256_mul_pd(x2, x3)));
    const __m256d vpz = _mm256_sub_pd(
        _mm256_add_pd(_mm256_mul_pd(x1, x1), _mm256_mul_pd(x2, x2)),
        _mm256_add_pd(x0sq, _mm256_mul_pd(x3, x3)));
    _mm256_storeu_pd(px + i, vpx);
    _mm256_storeu_pd(py + i, _mm256_sub_pd(_mm256_setzero_pd(), vpy));
    _mm256_storeu_pd(pz + i, vpz);
  }
  for (; i < n; ++i) {
    const double x1 = st * ax[i];
    const double x2 = st * ay[i];
    const double x3 = st * az[i];
    px[i] = 2.0 * ct * x2 - 2.0 * x1 * x3;
    py[i] = -2.0 * ct * x1 - 2.0 * x2 * x3;
    pz[i] = x1 * x1 + x2 * x2 - ct * ct - x3 * x3;
  }
}

double gauss_row_sum_avx2(const double ca[3], const double da[3],
                          const double* cbx, const double* cby, const double* cbz,
                          const double* dbx, const double* dby, const double* dbz,
                          std::size_t n) {
  const __m256d cax = _mm256_set1_pd(ca[0]);
  const __m256d cay = _mm256_set1_pd(ca[1]);
  const __m256d caz = _mm256_set1_pd(ca[2]);
  const __m256d dax = _mm256_set1_pd(da[0]);
  const __m256d day = _mm256_set1_pd(da[1]);
  const __m256d daz = _mm256_set1_pd(da[2]);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d rx = _mm256_sub_pd(_mm256_loadu_pd(cbx + j), cax);
    const __m256d ry = _mm256_sub_pd(_mm256_loadu_pd(cby + j), cay);
    const __m256d rz = _mm256_sub_pd(_mm256_loadu_pd(cbz + j), caz);
    const __m256d bx = _mm256_loadu_pd(dbx + j);
    const __m256d by = _mm256_loadu_pd(dby + j);
    const __m256d bz = _mm256_loadu_pd(dbz + j);
    const __m256d cx = _mm256_sub_pd(_mm256_mul_pd(day, bz), _mm256_mul_pd(daz, by));
    const __m256d cy = _mm256_sub_pd(_mm256_mul_pd(daz, bx), _mm256_mul_pd(dax, bz));
    const __m256d cz = _mm256_sub_pd(_mm256_mul_pd(dax, by), _mm256_mul_pd(day, bx));
    const __m256d r2 = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(rx, rx), _mm256_mul_pd(ry, ry)),
        _mm256_mul_pd(rz, rz));
    const __m256d dot = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(rx, cx), _mm256_mul_pd(ry, cy)),
        _mm256_mul_pd(rz, cz));
    const __m256d den = _mm256_mul_pd(r2, _mm256_sqrt_pd(r2));
    acc = _mm256_add_pd(acc, _mm256_div_pd(dot, den));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; j < n; ++j) {
    const double rx = cbx[j] - ca[0];
    const double ry = cby[j] - ca[1];
    const double rz = cbz[j] - ca[2];
    const double cx = da[1] * dbz[j] - da[2] * dby[j];
    const double cy = da[2] * dbx[j] - da[0] * dbz[j];
    const double cz = da[0] * dby[j] - da[1] * dbx[j];
    const double r2 = rx * rx + ry * ry + rz * rz;
    total += (rx * cx + ry * cy + rz * cz) / (r2 * __builtin_sqrt(r2));
  }
  return total;
}

}  // namespace eulertopo::kernels::detail

#endif  // x86_64
