#include "eulertopo/labsim.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "eulertopo/simplex.hpp"

namespace eulertopo {

using std::complex;
using namespace std::complex_literals;

double PulseParams::max_rabi() const {
  return std::max({omega12_1, omega13_2, omega12_3, omega13_4, omega12_2, omega12_4, omega13_1,
                   omega13_3});
}

void PulseParams::validate() const {
  const double rabi[] = {omega12_1, omega13_2, omega12_3, omega13_4,
                         omega12_2, omega12_4, omega13_1, omega13_3};
  for (double r : rabi)
    if (r < 0.0) throw RamanInvalid("PulseParams: Rabi frequencies must be nonnegative");
  const double top = max_rabi();
  if (top > 0.0 && (Delta1 < 5.0 * top || Delta2 < 5.0 * top))
    throw RamanInvalid("PulseParams: Raman detunings below 5x the largest Rabi frequency");
}

Eigen::Matrix3cd effective_hamiltonian(const PulseParams& p) {
  p.validate();
  const double wzq = p.omega_z + p.omega_q;
  const double st11 = p.omega12_2 * p.omega12_2 / (4.0 * (wzq + p.delta2)) -
                      p.omega12_3 * p.omega12_3 / (4.0 * p.Delta1) -
                      p.omega12_4 * p.omega12_4 / (4.0 * (p.Delta2 - wzq)) -
                      p.omega13_1 * p.omega13_1 / (4.0 * (wzq - p.delta1)) -
                      p.omega13_3 * p.omega13_3 / (4.0 * (wzq + p.Delta1)) -
                      p.omega13_4 * p.omega13_4 / (4.0 * p.Delta2);
  const double st22 = -p.omega12_2 * p.omega12_2 / (4.0 * (wzq + p.delta2)) +
                      p.omega12_3 * p.omega12_3 / (4.0 * p.Delta1) +
                      p.omega12_4 * p.omega12_4 / (4.0 * (p.Delta2 - wzq));
  const double st33 = p.omega13_1 * p.omega13_1 / (4.0 * (wzq - p.delta1)) +
                      p.omega13_3 * p.omega13_3 / (4.0 * (wzq + p.Delta1)) +
                      p.omega13_4 * p.omega13_4 / (4.0 * p.Delta2);
  const double raman =
      p.omega12_3 * p.omega13_4 * (p.Delta1 + p.Delta2) / (8.0 * p.Delta1 * p.Delta2);

  Eigen::Matrix3cd H = Eigen::Matrix3cd::Zero();
  H(0, 0) = st11;
  H(1, 1) = st22 - p.delta1;
  H(2, 2) = st33 - p.delta2;
  H(0, 1) = 0.5 * p.omega12_1 * std::exp(1i * p.phi1);
  H(0, 2) = 0.5 * p.omega13_2 * std::exp(1i * p.phi2);
  H(1, 2) = raman * std::exp(1i * (p.phi4 - p.phi3));
  H(1, 0) = std::conj(H(0, 1));
  H(2, 0) = std::conj(H(0, 2));
  H(2, 1) = std::conj(H(1, 2));
  return H;
}

namespace {

Ham3 swap12(const Ham3& H) {
  Ham3 P = Ham3::Zero();
  P(0, 1) = P(1, 0) = P(2, 2) = 1.0;
  return P * H * P;
}

Eigen::Matrix3cd swap12c(const Eigen::Matrix3cd& H) {
  Eigen::Matrix3cd P = Eigen::Matrix3cd::Zero();
  P(0, 1) = P(1, 0) = P(2, 2) = 1.0;
  return P * H * P;
}

struct PlainSolve {
  PulseParams params;
  double c = 0.0, b = 0.0;
  double residual = 0.0;
};

// Solve in the current basis: couplings from the off-diagonal magnitudes,
// c maximized by bisection on feasibility, Stark/shift bookkeeping by
// fixed-point iteration.
PlainSolve solve_in_basis(const Ham3& T, const PulseBounds& bounds) {
  PlainSolve out;
  PulseParams& p = out.params;
  p.Delta1 = bounds.Delta1;
  p.Delta2 = bounds.Delta2;
  p.omega_z = bounds.omega_z;
  p.omega_q = bounds.omega_q;

  const double raman_unit = (bounds.Delta1 + bounds.Delta2) / (8.0 * bounds.Delta1 * bounds.Delta2);
  const double rabi_cap = std::min({bounds.max_rabi_near, bounds.max_rabi_raman,
                                    std::min(bounds.Delta1, bounds.Delta2) / 5.0});
  const double near_cap = std::min(bounds.max_rabi_near, std::min(bounds.Delta1, bounds.Delta2) / 5.0);

  auto feasible = [&](double c) {
    if (c > bounds.max_energy) return false;
    if (2.0 * c * std::abs(T(0, 1)) > near_cap) return false;
    if (2.0 * c * std::abs(T(0, 2)) > near_cap) return false;
    // Raman coupling magnitude c|T12| with balanced legs Omega3 = Omega4.
    const double need = c * std::abs(T(1, 2));
    const double leg = std::sqrt(need / std::max(raman_unit, 1e-300));
    return leg <= rabi_cap;
  };
  double lo = 0.0, hi = bounds.max_energy;
  if (feasible(hi)) {
    lo = hi;
  } else {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? lo : hi) = mid;
    }
  }
  out.c = lo;
  const double c = out.c;
  if (!(c > 0.0)) throw Infeasible("solve_pulse: no positive energy scale is feasible");

  p.omega12_1 = 2.0 * c * std::abs(T(0, 1));
  p.phi1 = (T(0, 1) >= 0.0) ? 0.0 : kPi;
  p.omega13_2 = 2.0 * c * std::abs(T(0, 2));
  p.phi2 = (T(0, 2) >= 0.0) ? 0.0 : kPi;
  const double leg = std::sqrt(c * std::abs(T(1, 2)) / std::max(raman_unit, 1e-300));
  p.omega12_3 = leg;
  p.omega13_4 = leg;
  p.phi3 = 0.0;
  p.phi4 = (T(1, 2) >= 0.0) ? 0.0 : kPi;

  // Diagonal bookkeeping: b absorbs the (1,1) Stark shift, the compensation
  // detunings absorb the rest; the deltas feed back into the Stark
  // denominators, hence the fixed point.
  for (int it = 0; it < 60; ++it) {
    const Eigen::Matrix3cd H = effective_hamiltonian(p);
    const double st11 = std::real(H(0, 0));
    const double st22 = std::real(H(1, 1)) + p.delta1;
    const double st33 = std::real(H(2, 2)) + p.delta2;
    const double b = T(0, 0) - st11 / c;
    const double d1 = st22 - c * (T(1, 1) - b);
    const double d2 = st33 - c * (T(2, 2) - b);
    const double move = std::abs(d1 - p.delta1) + std::abs(d2 - p.delta2);
    p.delta1 = d1;
    p.delta2 = d2;
    out.b = b;
    if (move < 1e-15 * std::max(1.0, std::abs(d1) + std::abs(d2))) break;
  }

  const Eigen::Matrix3cd H = effective_hamiltonian(p);
  const Eigen::Matrix3cd want = c * (T - out.b * Ham3::Identity()).cast<complex<double>>();
  const double scale = std::max(want.cwiseAbs().maxCoeff(), 1e-12);
  out.residual = (H - want).cwiseAbs().maxCoeff() / scale;
  return out;
}

}  // namespace

PulseSolution solve_pulse(const Ham3& target, const PulseBounds& bounds, BasisSwitch basis_switch) {
  std::vector<std::pair<bool, PlainSolve>> tries;
  if (basis_switch != BasisSwitch::on)
    tries.emplace_back(false, solve_in_basis(target, bounds));
  if (basis_switch != BasisSwitch::off)
    tries.emplace_back(true, solve_in_basis(swap12(target), bounds));
  const auto best = std::max_element(tries.begin(), tries.end(), [](const auto& a, const auto& b) {
    return a.second.c < b.second.c;
  });
  if (best->second.residual > 1e-4)
    throw Infeasible("solve_pulse: residual above 1e-4 at best feasible point");
  PulseSolution sol;
  sol.params = best->second.params;
  sol.c = best->second.c;
  sol.b = best->second.b;
  sol.basis_switched = best->first;
  return sol;
}

Eigen::Matrix3cd realized_hamiltonian(const PulseSolution& sol) {
  const Eigen::Matrix3cd H = effective_hamiltonian(sol.params);
  return sol.basis_switched ? swap12c(H) : H;
}

std::vector<Momentum> shortest_path(const Momentum& kstar, const Momentum& k, int steps) {
  const double hs[] = {0.0, kPi};
  bool ok = false;
  for (double x : hs)
    for (double y : hs)
      if (std::abs(wrap_angle(kstar.kx - (-x))) < 1e-12 || std::abs(wrap_angle(kstar.kx - x)) < 1e-12)
        if (std::abs(wrap_angle(kstar.ky - y)) < 1e-12 || std::abs(wrap_angle(kstar.ky + y)) < 1e-12)
          ok = true;
  if (!ok) throw InvalidParameter("shortest_path: start must be a high-symmetry point");
  const double dx = wrap_angle(k.kx - kstar.kx);
  const double dy = wrap_angle(k.ky - kstar.ky);
  if (dx == 0.0 && dy == 0.0) return {kstar};
  if (steps < 1) throw InvalidParameter("shortest_path: need at least one segment");
  std::vector<Momentum> path;
  path.reserve(steps + 1);
  for (int s = 0; s <= steps; ++s) {
    const double f = double(s) / steps;
    path.emplace_back(kstar.kx + f * dx, kstar.ky + f * dy);
  }
  return path;
}

Momentum nearest_high_symmetry_point(const Momentum& k) {
  Momentum best(0.0, 0.0);
  double best_d = 1e300;
  for (double x : {0.0, kPi}) {
    for (double y : {0.0, kPi}) {
      const double d = std::hypot(wrap_angle(k.kx - x), wrap_angle(k.ky - y));
      if (d < best_d) {
        best_d = d;
        best = Momentum(x, y);
      }
    }
  }
  return best;
}

Spinor3 adiabatic_prepare(double m, const Momentum& kstar, const Momentum& k,
                          const AdiabaticSchedule& schedule) {
  {
    const BlochFrame f0 = eig_frame(euler_ham(m, kstar));
    if (std::abs(f0.u3.x()) < 1.0 - 1e-9)
      throw InvalidParameter("adiabatic_prepare: |1> is not the top eigenstate at kstar");
  }
  const std::vector<Momentum> path = shortest_path(kstar, k, schedule.steps);
  Spinor3 psi = Spinor3(1.0, 0.0, 0.0);
  if (path.size() == 1) return psi;
  const double dt = schedule.duration / schedule.steps;
  for (size_t s = 1; s < path.size(); ++s) {
    Eigen::Matrix3cd H;
    if (schedule.use_pulse_synthesis) {
      H = realized_hamiltonian(solve_pulse(euler_ham(m, path[s]), schedule.bounds));
    } else {
      H = euler_ham(m, path[s]).cast<complex<double>>();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(H);
    if (es.eigenvalues()(2) - es.eigenvalues()(1) < 1e-3)
      throw GapClosed("adiabatic_prepare: instantaneous top gap below 1e-3");
    const Eigen::Vector3cd phases =
        (-1i * dt * es.eigenvalues().cast<complex<double>>().array()).exp();
    psi = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint() * psi;
  }
  return psi;
}

void DetectionModel::validate() const {
  if (!(N1 < 1.0 && N2 > 1.0 && N3 > 1.0))
    throw InvalidParameter("DetectionModel: need N1 < 1 < N2, N3");
  for (double p : {p_bright_as_dark, p_dark_as_bright})
    if (p < 0.0 || p > 1.0) throw InvalidParameter("DetectionModel: probabilities in [0,1]");
}

double dark_misclassification_probability(const DetectionModel& model) {
  // Threshold discriminator: counts >= 2 read as bright.
  return 1.0 - std::exp(-model.N1) * (1.0 + model.N1);
}

Eigen::Matrix3cd tomo_basis_unitary(int index) {
  struct Op {
    char axis;
    double theta;
    bool used;
  };
  // Table rows: (1<->2 rotation, 1<->3 rotation).
  static const std::array<std::array<Op, 2>, 8> kOps = {{
      {{{'X', 0.0, false}, {'X', 0.0, false}}},
      {{{'Y', -kPi, true}, {'X', 0.0, false}}},
      {{{'X', kPi / 2, true}, {'X', 0.0, false}}},
      {{{'Y', -kPi / 2, true}, {'X', 0.0, false}}},
      {{{'X', 0.0, false}, {'X', kPi / 2, true}}},
      {{{'X', 0.0, false}, {'Y', -kPi / 2, true}}},
      {{{'X', kPi / 2, true}, {'Y', -kPi, true}}},
      {{{'Y', -kPi / 2, true}, {'Y', -kPi, true}}},
  }};
  if (index < 0 || index >= 8) throw InvalidParameter("tomo basis index out of range");

  auto embed = [](int a, int b, char axis, double theta) {
    Eigen::Matrix3cd U = Eigen::Matrix3cd::Identity();
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    U(a, a) = c;
    U(b, b) = c;
    if (axis == 'X') {
      U(a, b) = -1i * s;
      U(b, a) = -1i * s;
    } else {
      U(a, b) = -s;
      U(b, a) = s;
    }
    return U;
  };
  Eigen::Matrix3cd U = Eigen::Matrix3cd::Identity();
  const auto& ops = kOps[index];
  if (ops[1].used) U = embed(0, 2, ops[1].axis, ops[1].theta) * U;
  if (ops[0].used) U = embed(0, 1, ops[0].axis, ops[0].theta) * U;
  return U;
}

Vec3 level_populations(const DensityMatrix3& rho, int index) {
  const Eigen::Matrix3cd U = tomo_basis_unitary(index);
  const Eigen::Matrix3cd r = U * rho * U.adjoint();
  return Vec3(std::real(r(0, 0)), std::real(r(1, 1)), std::real(r(2, 2)));
}

std::array<double, 8> tomo_probabilities(const DensityMatrix3& rho) {
  std::array<double, 8> out{};
  for (int i = 0; i < 8; ++i) out[i] = level_populations(rho, i)(0);
  return out;
}

std::array<double, 8> tomo_probabilities_closed_form(const DensityMatrix3& rho) {
  const double a = std::real(rho(0, 0));
  const double b = std::real(rho(1, 1));
  const double c = std::real(rho(0, 1));
  const double d = std::imag(rho(0, 1));
  const double g = std::real(rho(0, 2));
  const double h = std::imag(rho(0, 2));
  const double e = std::real(rho(1, 2));
  const double f = std::imag(rho(1, 2));
  return {a,
          b,
          (a + b) / 2.0 - d,
          (a + b) / 2.0 + c,
          (1.0 - b) / 2.0 - h,
          (1.0 - b) / 2.0 + g,
          (1.0 - a) / 2.0 + f,
          (1.0 - a) / 2.0 + e};
}

TomoCounts expected_counts(const DensityMatrix3& rho, const DetectionModel& model) {
  model.validate();
  TomoCounts out;
  out.shots = 0;
  for (int i = 0; i < 8; ++i) {
    const Vec3 p = level_populations(rho, i);
    out.mean_counts[i] = model.N1 * p(0) + model.N2 * p(1) + model.N3 * p(2);
  }
  return out;
}

TomoCounts simulate_counts(const DensityMatrix3& rho, const DetectionModel& model,
                           std::uint64_t seed) {
  model.validate();
  if (model.shots < 1) throw InvalidParameter("simulate_counts: shots must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  TomoCounts out;
  out.shots = model.shots;
  for (int i = 0; i < 8; ++i) {
    const Vec3 p = level_populations(rho, i);
    double sum = 0.0;
    for (long s = 0; s < model.shots; ++s) {
      const double r = uni(rng);
      const double mean = (r < p(0)) ? model.N1 : (r < p(0) + p(1) ? model.N2 : model.N3);
      std::poisson_distribution<long> poisson(mean);
      sum += (mean > 0.0) ? double(poisson(rng)) : 0.0;
    }
    out.mean_counts[i] = sum / double(model.shots);
  }
  return out;
}

namespace {

DensityMatrix3 rho_from_t(const std::array<double, 9>& t) {
  Eigen::Matrix3cd T = Eigen::Matrix3cd::Zero();
  T(0, 0) = t[0];
  T(1, 1) = t[1];
  T(2, 2) = t[2];
  T(1, 0) = t[3] + 1i * t[4];
  T(2, 1) = t[5] + 1i * t[6];
  T(2, 0) = t[7] + 1i * t[8];
  Eigen::Matrix3cd r = T.adjoint() * T;
  const double tr = std::real(r.trace());
  if (tr < 1e-300) return DensityMatrix3::Identity() / 3.0;
  return r / tr;
}

std::array<double, 9> t_from_rho(const DensityMatrix3& rho) {
  // Project to strictly positive spectrum, then factor rho = T^ T with T
  // lower triangular via the reversal trick.
  Eigen::SelfAdjointEigenSolver<DensityMatrix3> es(rho);
  Eigen::Vector3d w = es.eigenvalues().cwiseMax(1e-10);
  DensityMatrix3 r = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
  r /= std::real(r.trace());
  Eigen::Matrix3cd J = Eigen::Matrix3cd::Zero();
  J(0, 2) = J(1, 1) = J(2, 0) = 1.0;
  const Eigen::Matrix3cd L = (J * r * J).llt().matrixL();
  const Eigen::Matrix3cd T = J * L.adjoint() * J;
  return {std::real(T(0, 0)), std::real(T(1, 1)), std::real(T(2, 2)),
          std::real(T(1, 0)), std::imag(T(1, 0)), std::real(T(2, 1)),
          std::imag(T(2, 1)), std::real(T(2, 0)), std::imag(T(2, 0))};
}

// Linear inversion of the affine counts map in the eight real density-matrix
// parameters (a,b,c,d,e,f,g,h); the result may be unphysical and is only a
// starting point.
DensityMatrix3 linear_inversion(const TomoCounts& counts, const DetectionModel& model) {
  auto rho_of = [](const Eigen::Matrix<double, 8, 1>& th) {
    DensityMatrix3 r;
    const double a = th(0), b = th(1), c = th(2), d = th(3), e = th(4), f = th(5), g = th(6),
                 h = th(7);
    r << a, c + 1i * d, g + 1i * h, c - 1i * d, b, e + 1i * f, g - 1i * h, e - 1i * f,
        1.0 - a - b;
    return r;
  };
  auto counts_of = [&](const Eigen::Matrix<double, 8, 1>& th) {
    const DensityMatrix3 r = rho_of(th);
    Eigen::Matrix<double, 8, 1> n;
    for (int i = 0; i < 8; ++i) {
      const Vec3 p = level_populations(r, i);
      n(i) = model.N1 * p(0) + model.N2 * p(1) + model.N3 * p(2);
    }
    return n;
  };
  const Eigen::Matrix<double, 8, 1> zero = Eigen::Matrix<double, 8, 1>::Zero();
  const Eigen::Matrix<double, 8, 1> base = counts_of(zero);
  Eigen::Matrix<double, 8, 8> A;
  for (int k = 0; k < 8; ++k) {
    Eigen::Matrix<double, 8, 1> e = zero;
    e(k) = 1.0;
    A.col(k) = counts_of(e) - base;
  }
  Eigen::Matrix<double, 8, 1> rhs;
  for (int i = 0; i < 8; ++i) rhs(i) = counts.mean_counts[i] - base(i);
  const Eigen::Matrix<double, 8, 1> theta = A.fullPivLu().solve(rhs);
  return rho_of(theta);
}

}  // namespace

DensityMatrix3 mle_reconstruct(const TomoCounts& counts, const DetectionModel& model) {
  model.validate();
  // Precompute the rotated level projectors so the objective is a cheap
  // trace against fixed observables.
  std::array<std::array<Eigen::Matrix3cd, 3>, 8> obs;
  for (int i = 0; i < 8; ++i) {
    const Eigen::Matrix3cd U = tomo_basis_unitary(i);
    for (int j = 0; j < 3; ++j) {
      Eigen::Matrix3cd proj = Eigen::Matrix3cd::Zero();
      proj(j, j) = 1.0;
      obs[i][j] = U.adjoint() * proj * U;
    }
  }
  const double Ns[3] = {model.N1, model.N2, model.N3};
  auto objective = [&](const std::vector<double>& tv) {
    std::array<double, 9> t;
    std::copy_n(tv.begin(), 9, t.begin());
    const DensityMatrix3 r = rho_from_t(t);
    double l = 0.0;
    for (int i = 0; i < 8; ++i) {
      double nbar = 0.0;
      for (int j = 0; j < 3; ++j) nbar += Ns[j] * std::real((obs[i][j] * r).trace());
      nbar = std::max(nbar, 1e-9);
      const double diff = nbar - counts.mean_counts[i];
      l += diff * diff / (2.0 * nbar);
    }
    return l;
  };

  std::vector<std::vector<double>> starts;
  {
    const auto t0 = t_from_rho(linear_inversion(counts, model));
    starts.emplace_back(t0.begin(), t0.end());
  }
  std::mt19937_64 rng(0x7095u);  // fixed: reconstruction must be deterministic
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int s = 0; s < 4; ++s) {
    Eigen::Matrix3cd G;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) G(r, c) = gauss(rng) + 1i * gauss(rng);
    DensityMatrix3 rr = G * G.adjoint();
    rr /= std::real(rr.trace());
    const auto ts = t_from_rho(rr);
    starts.emplace_back(ts.begin(), ts.end());
  }

  SimplexOptions opt;
  opt.initial_step = 0.05;
  opt.max_iter = 4000;
  opt.f_tol = 1e-16;
  std::vector<double> best;
  double best_f = 1e300;
  for (const auto& s : starts) {
    const SimplexResult r = nelder_mead(objective, s, opt);
    if (r.fval < best_f) {
      best_f = r.fval;
      best = r.x;
    }
  }
  if (best_f > 100.0)
    throw OptimizerStalled("mle_reconstruct: objective above the chi^2 sanity bound");
  std::array<double, 9> t;
  std::copy_n(best.begin(), 9, t.begin());
  return rho_from_t(t);
}

Vec3 closest_real_state(const DensityMatrix3& rho) {
  const Eigen::Matrix3d re = rho.real();
  const Eigen::Matrix3d sym = 0.5 * (re + re.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sym);
  if (es.eigenvalues()(2) - es.eigenvalues()(1) < 1e-9)
    throw DegenerateTop("closest_real_state: top eigenvalue of Re(rho) is degenerate");
  return canonical_sign(es.eigenvectors().col(2));
}

double fidelity(const DensityMatrix3& rho, const Spinor3& psi) {
  return std::real((psi.adjoint() * rho * psi).value());
}

double fidelity(const DensityMatrix3& rho, const Vec3& psi) {
  return fidelity(rho, Spinor3(psi.x(), psi.y(), psi.z()));
}

PipelineResult pipeline_measure_state(double m, const Momentum& k, const Momentum& kstar,
                                      const AdiabaticSchedule& schedule,
                                      const DetectionModel& model, std::uint64_t seed,
                                      bool sample_noise) {
  const Spinor3 psi = adiabatic_prepare(m, kstar, k, schedule);
  const DensityMatrix3 rho_true = psi * psi.adjoint();
  const TomoCounts counts =
      sample_noise ? simulate_counts(rho_true, model, seed) : expected_counts(rho_true, model);
  PipelineResult out;
  out.rho = mle_reconstruct(counts, model);
  out.psi_real = closest_real_state(out.rho);
  const Vec3 u3 = eig_frame(euler_ham(m, k)).u3;
  out.fidelity_vs_exact = fidelity(out.rho, u3);
  const Spinor3 u3c(u3.x(), u3.y(), u3.z());
  out.prep_fidelity = std::norm((u3c.adjoint() * psi).value());
  return out;
}

}  // namespace eulertopo
