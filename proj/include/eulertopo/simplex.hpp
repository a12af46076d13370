#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

namespace eulertopo {

struct SimplexOptions {
  double initial_step = 0.1;
  int max_iter = 4000;
  double f_tol = 1e-14;
};

struct SimplexResult {
  std::vector<double> x;
  double fval = 0.0;
  int iterations = 0;
};

// Nelder-Mead downhill simplex with the standard 1/2/0.5/0.5 coefficients.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x0,
                                 const SimplexOptions& opt = {}) {
  const size_t n = x0.size();
  std::vector<std::vector<double>> xs(n + 1, x0);
  for (size_t i = 0; i < n; ++i) xs[i + 1][i] += opt.initial_step;
  std::vector<double> fs(n + 1);
  for (size_t i = 0; i <= n; ++i) fs[i] = f(xs[i]);

  std::vector<size_t> order(n + 1);
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return fs[a] < fs[b]; });
    {
      std::vector<std::vector<double>> xs2(n + 1);
      std::vector<double> fs2(n + 1);
      for (size_t i = 0; i <= n; ++i) {
        xs2[i] = xs[order[i]];
        fs2[i] = fs[order[i]];
      }
      xs.swap(xs2);
      fs.swap(fs2);
    }
    if (fs[n] - fs[0] < opt.f_tol) break;

    std::vector<double> centroid(n, 0.0);
    for (size_t i = 0; i < n; ++i)
      for (size_t d = 0; d < n; ++d) centroid[d] += xs[i][d] / double(n);

    auto blend = [&](double t) {
      std::vector<double> x(n);
      for (size_t d = 0; d < n; ++d) x[d] = centroid[d] + t * (xs[n][d] - centroid[d]);
      return x;
    };
    const std::vector<double> xr = blend(-1.0);
    const double fr = f(xr);
    if (fr < fs[0]) {
      const std::vector<double> xe = blend(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        xs[n] = xe;
        fs[n] = fe;
      } else {
        xs[n] = xr;
        fs[n] = fr;
      }
    } else if (fr < fs[n - 1]) {
      xs[n] = xr;
      fs[n] = fr;
    } else {
      const std::vector<double> xc = blend(0.5);
      const double fc = f(xc);
      if (fc < fs[n]) {
        xs[n] = xc;
        fs[n] = fc;
      } else {
        for (size_t i = 1; i <= n; ++i) {
          for (size_t d = 0; d < n; ++d) xs[i][d] = xs[0][d] + 0.5 * (xs[i][d] - xs[0][d]);
          fs[i] = f(xs[i]);
        }
      }
    }
  }
  size_t best = 0;
  for (size_t i = 1; i <= n; ++i)
    if (fs[i] < fs[best]) best = i;
  return SimplexResult{xs[best], fs[best], it};
}

}  // namespace eulertopo
