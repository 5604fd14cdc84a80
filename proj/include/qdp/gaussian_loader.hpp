#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "qdp/common.hpp"
#include "qdp/qarith.hpp"

namespace qdp {

// Parameters are stored layer-major: params[k * n + q] is the angle on qubit q in layer k.
// Layer 0 acts first; a CNOT ladder follows each of the first L layers.
struct RyCnotAnsatz {
  int n = 1;
  int L = 0;
  std::vector<double> params;

  [[nodiscard]] static std::size_t param_count(int n, int L) {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(L + 1);
  }
};

constexpr int kMaxSimQubits = 12;

inline void validate(const RyCnotAnsatz& a) {
  require(a.n >= 1 && a.n <= kMaxSimQubits, "ansatz needs 1 <= n <= 12 for statevector simulation");
  require(a.L >= 0, "ansatz depth L must be nonnegative");
  require(a.params.size() == RyCnotAnsatz::param_count(a.n, a.L), "ansatz needs exactly n(L+1) parameters");
}

namespace detail {

// Qubit 0 is the most significant bit of the basis index.
inline void apply_ry(Eigen::VectorXd& psi, int n, int q, double theta) {
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  const Eigen::Index stride = Eigen::Index{1} << (n - 1 - q);
  const Eigen::Index N = psi.size();
  for (Eigen::Index base = 0; base < N; base += 2 * stride)
    for (Eigen::Index i = base; i < base + stride; ++i) {
      const double a0 = psi[i], a1 = psi[i + stride];
      psi[i] = c * a0 - s * a1;
      psi[i + stride] = s * a0 + c * a1;
    }
}

inline void apply_cnot(Eigen::VectorXd& psi, int n, int control, int target) {
  const Eigen::Index cm = Eigen::Index{1} << (n - 1 - control);
  const Eigen::Index tm = Eigen::Index{1} << (n - 1 - target);
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    if ((i & cm) && !(i & tm)) std::swap(psi[i], psi[i | tm]);
}

inline Eigen::VectorXd simulate(int n, int L, const double* th) {
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(Eigen::Index{1} << n);
  psi[0] = 1.0;
  for (int k = 0; k <= L; ++k) {
    for (int q = 0; q < n; ++q) apply_ry(psi, n, q, th[k * n + q]);
    if (k < L)
      for (int q = 1; q < n; ++q) apply_cnot(psi, n, q - 1, q);
  }
  return psi;
}

// Columns are d psi / d theta_j, using d/dtheta Ry(theta) = Ry(theta + pi) / 2.
inline Eigen::MatrixXd state_jacobian(int n, int L, const std::vector<double>& th) {
  const auto P = static_cast<Eigen::Index>(th.size());
  Eigen::MatrixXd J(Eigen::Index{1} << n, P);
  std::vector<double> shifted = th;
  for (Eigen::Index j = 0; j < P; ++j) {
    shifted[j] += std::numbers::pi;
    J.col(j) = 0.5 * simulate(n, L, shifted.data());
    shifted[j] = th[j];
  }
  return J;
}

}  // namespace detail

[[nodiscard]] inline Eigen::VectorXd simulate_ansatz(const RyCnotAnsatz& a) {
  validate(a);
  return detail::simulate(a.n, a.L, a.params.data());
}

// Left-edge mesh x_i = -w + i dx on 2^n points; target masses g(x_i) dx, not renormalized.
struct LoaderTarget {
  int n = 5;
  double w = 5.0;
  Eigen::VectorXd x;
  Eigen::VectorXd mass;

  [[nodiscard]] double dx() const { return 2.0 * w / static_cast<double>(Eigen::Index{1} << n); }
  [[nodiscard]] double alpha() const { return 1.0 - mass.sum(); }
  [[nodiscard]] Eigen::VectorXd amplitudes() const { return mass.cwiseSqrt(); }
};

[[nodiscard]] inline LoaderTarget make_loader_target(int n, double w = 5.0) {
  require(n >= 1 && n <= kMaxSimQubits, "loader target needs 1 <= n <= 12");
  require(w > 0.0, "loader half-width must be positive");
  LoaderTarget t{n, w, {}, {}};
  const Eigen::Index N = Eigen::Index{1} << n;
  const double dx = t.dx();
  t.x.resize(N);
  t.mass.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    t.x[i] = -w + static_cast<double>(i) * dx;
    t.mass[i] = std::exp(-0.5 * t.x[i] * t.x[i]) / std::sqrt(2.0 * std::numbers::pi) * dx;
  }
  return t;
}

// H = P^2/(2m) + m (X - x0)^2 / 2 on the loader mesh. The kinetic term uses the centered
// transform, momenta p_j = (j - N/2) 2 pi / (N dx). Only the real part of H matters for
// real states, since the imaginary part is antisymmetric.
[[nodiscard]] inline Eigen::MatrixXd harmonic_hamiltonian(int n, double w, double m, double x0) {
  require(m > 0.0, "harmonic mass parameter must be positive");
  const auto t = make_loader_target(n, w);
  const Eigen::Index N = t.x.size();
  const double dx = t.dx();
  Eigen::MatrixXcd F(N, N);
  Eigen::VectorXd kin(N);
  for (Eigen::Index j = 0; j < N; ++j) {
    const double pj = (static_cast<double>(j) - static_cast<double>(N) / 2.0) * 2.0 * std::numbers::pi /
                      (static_cast<double>(N) * dx);
    kin[j] = pj * pj / (2.0 * m);
    for (Eigen::Index k = 0; k < N; ++k) {
      const double ph = -2.0 * std::numbers::pi * (static_cast<double>(j) - static_cast<double>(N) / 2.0) *
                        static_cast<double>(k) / static_cast<double>(N);
      F(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(N)), ph);
    }
  }
  const Eigen::MatrixXcd K = F.adjoint() * kin.asDiagonal() * F;
  Eigen::MatrixXd H = K.real();
  for (Eigen::Index i = 0; i < N; ++i) H(i, i) += 0.5 * m * (t.x[i] - x0) * (t.x[i] - x0);
  return 0.5 * (H + H.transpose());
}

// m = 1/(2 sigma^2) with sigma = 1 makes the ground-state density the standard normal.
constexpr double kStandardMass = 0.5;

[[nodiscard]] inline double harmonic_energy(const Eigen::VectorXd& state, double m, double x0, const LoaderTarget& grid) {
  require(state.size() == grid.x.size(), "state length must match the mesh");
  require(std::abs(state.norm() - 1.0) < 1e-9, "harmonic_energy needs a unit-norm state");
  return state.dot(harmonic_hamiltonian(grid.n, grid.w, m, x0) * state);
}

[[nodiscard]] inline double linf_loss(const Eigen::VectorXd& state, const LoaderTarget& target) {
  require(state.size() == target.mass.size(), "state length must match the target");
  return (state.cwiseAbs2() - target.mass).cwiseAbs().maxCoeff();
}

// ---- optimizers (GSL multimin) ----

namespace detail {

struct Objective {
  std::function<double(const std::vector<double>&)> f;
  std::function<void(const std::vector<double>&, std::vector<double>&)> df;  // optional
};

inline std::vector<double> to_vec(const gsl_vector* v) {
  std::vector<double> x(v->size);
  for (std::size_t i = 0; i < v->size; ++i) x[i] = gsl_vector_get(v, i);
  return x;
}

inline double gsl_f(const gsl_vector* v, void* p) { return static_cast<Objective*>(p)->f(to_vec(v)); }

inline void gsl_df(const gsl_vector* v, void* p, gsl_vector* g) {
  std::vector<double> gr;
  static_cast<Objective*>(p)->df(to_vec(v), gr);
  for (std::size_t i = 0; i < gr.size(); ++i) gsl_vector_set(g, i, gr[i]);
}

inline void gsl_fdf(const gsl_vector* v, void* p, double* f, gsl_vector* g) {
  *f = gsl_f(v, p);
  gsl_df(v, p, g);
}

struct GslHandlerGuard {
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  ~GslHandlerGuard() { gsl_set_error_handler(old); }
};

inline std::vector<double> nelder_mead(Objective& obj, std::vector<double> x0, double step, int max_iter,
                                       double size_tol = 1e-10) {
  const std::size_t P = x0.size();
  gsl_multimin_function fn{&gsl_f, P, &obj};
  gsl_vector* x = gsl_vector_alloc(P);
  gsl_vector* ss = gsl_vector_alloc(P);
  for (std::size_t i = 0; i < P; ++i) gsl_vector_set(x, i, x0[i]);
  gsl_vector_set_all(ss, step);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, P);
  gsl_multimin_fminimizer_set(s, &fn, x, ss);
  for (int it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), size_tol) == GSL_SUCCESS) break;
  }
  auto best = to_vec(gsl_multimin_fminimizer_x(s));
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(ss);
  return best;
}

inline std::vector<double> bfgs(Objective& obj, std::vector<double> x0, int max_iter, double grad_tol = 1e-12,
                                double step = 1e-2) {
  const std::size_t P = x0.size();
  gsl_multimin_function_fdf fn{&gsl_f, &gsl_df, &gsl_fdf, P, &obj};
  gsl_vector* x = gsl_vector_alloc(P);
  for (std::size_t i = 0; i < P; ++i) gsl_vector_set(x, i, x0[i]);
  gsl_multimin_fdfminimizer* s = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, P);
  gsl_multimin_fdfminimizer_set(s, &fn, x, step, 0.1);
  for (int it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fdfminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_gradient(gsl_multimin_fdfminimizer_gradient(s), grad_tol) == GSL_SUCCESS) break;
  }
  auto best = to_vec(gsl_multimin_fdfminimizer_x(s));
  // BFGS may stop on a failed line search; keep the better of start and end.
  if (obj.f(best) > obj.f(x0)) best = x0;
  gsl_multimin_fdfminimizer_free(s);
  gsl_vector_free(x);
  return best;
}

}  // namespace detail

struct TrainOptions {
  int restarts = 8;
  std::uint64_t seed = 1;
  double w = 5.0;
  double m = kStandardMass;
  double x0 = 0.0;
  int warmup_iters = 400;     // Nelder-Mead on energy
  int bfgs_iters = 2000;      // BFGS on energy
  std::vector<double> lp_exponents{8.0, 32.0, 128.0, 512.0};
  int lp_iters = 1500;        // BFGS per L_p stage
  int polish_iters = 4000;    // Nelder-Mead on true L_inf
  bool energy_phase = true;   // false: L_inf-only optimization from the initial point
};

struct TrainResult {
  RyCnotAnsatz best_params;
  double l_inf = 0.0;
  double energy = 0.0;
  double energy_phase_l_inf = 0.0;  // best restart's L_inf after the energy phase
  int restarts_used = 0;
  std::vector<double> restart_l_inf;
};

namespace detail {

struct LoaderProblem {
  int n, L;
  LoaderTarget target;
  Eigen::MatrixXd H;

  [[nodiscard]] double energy(const std::vector<double>& th) const {
    const auto psi = simulate(n, L, th.data());
    return psi.dot(H * psi);
  }
  void energy_grad(const std::vector<double>& th, std::vector<double>& g) const {
    const auto psi = simulate(n, L, th.data());
    const Eigen::VectorXd Hpsi = H * psi;
    const Eigen::VectorXd gr = 2.0 * state_jacobian(n, L, th).transpose() * Hpsi;
    g.assign(gr.data(), gr.data() + gr.size());
  }
  [[nodiscard]] Eigen::VectorXd residual(const std::vector<double>& th) const {
    return simulate(n, L, th.data()).cwiseAbs2() - target.mass;
  }
  [[nodiscard]] double linf(const std::vector<double>& th) const { return residual(th).cwiseAbs().maxCoeff(); }

  // s * ||r / s||_p with fixed scale s; gradient via the state Jacobian.
  [[nodiscard]] double lp(const std::vector<double>& th, double p, double s) const {
    const Eigen::VectorXd u = residual(th).cwiseAbs() / s;
    return s * std::pow(u.array().pow(p).sum(), 1.0 / p);
  }
  void lp_grad(const std::vector<double>& th, double p, double s, std::vector<double>& g) const {
    const auto psi = simulate(n, L, th.data());
    const Eigen::VectorXd r = psi.cwiseAbs2() - target.mass;
    const Eigen::ArrayXd u = r.cwiseAbs().array() / s;
    const double S = u.pow(p).sum();
    const Eigen::ArrayXd coef = std::pow(S, 1.0 / p - 1.0) * u.pow(p - 1.0) * r.array().sign();
    const Eigen::VectorXd dr_weight = (coef * 2.0 * psi.array()).matrix();
    const Eigen::VectorXd gr = state_jacobian(n, L, th).transpose() * dr_weight;
    g.assign(gr.data(), gr.data() + gr.size());
  }
};

inline std::vector<double> refine_linf(const LoaderProblem& pb, std::vector<double> th, const TrainOptions& o) {
  for (double p : o.lp_exponents) {
    const double s = std::max(pb.linf(th), 1e-300);
    Objective obj{[&](const std::vector<double>& x) { return pb.lp(x, p, s); },
                  [&](const std::vector<double>& x, std::vector<double>& g) { pb.lp_grad(x, p, s, g); }};
    auto cand = bfgs(obj, th, o.lp_iters, 1e-14, 1e-3);
    if (pb.linf(cand) < pb.linf(th)) th = std::move(cand);
  }
  Objective polish{[&](const std::vector<double>& x) { return pb.linf(x); }, {}};
  auto cand = nelder_mead(polish, th, 1e-3, o.polish_iters, 1e-12);
  if (pb.linf(cand) < pb.linf(th)) th = std::move(cand);
  return th;
}

}  // namespace detail

// Energy phase (Nelder-Mead warmup, BFGS), then L_inf phase (L_p continuation, Nelder-Mead polish).
// warm: parameters from depth L-1 or L-2; half of the restarts start from them (restart 0 exactly,
// the others with small perturbations), the rest from uniform random angles. Restarts are independent; the best L_inf wins
// with ties broken by restart index, so the result does not depend on scheduling.
[[nodiscard]] inline TrainResult train(int n, int L, const TrainOptions& o = {},
                                       const std::optional<RyCnotAnsatz>& warm = std::nullopt) {
  require(n >= 1 && n <= kMaxSimQubits && L >= 0, "train needs 1 <= n <= 12 and L >= 0");
  require(o.restarts >= 1, "train needs at least one restart");
  detail::GslHandlerGuard guard;
  const detail::LoaderProblem pb{n, L, make_loader_target(n, o.w), harmonic_hamiltonian(n, o.w, o.m, o.x0)};
  const std::size_t P = RyCnotAnsatz::param_count(n, L);
  std::vector<std::vector<double>> finals(o.restarts);
  std::vector<double> energy_linf(o.restarts), final_linf(o.restarts);

#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < o.restarts; ++r) {
    std::mt19937_64 rng(o.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(r));
    std::uniform_real_distribution<double> full(-std::numbers::pi, std::numbers::pi);
    std::normal_distribution<double> small(0.0, 0.05);
    std::vector<double> th(P);
    const bool use_warm = warm && warm->n == n && r < (o.restarts + 1) / 2;
    if (use_warm) {
      // Zero-angle layers prepended to the warm circuit leave |0...0> fixed (the ladder maps it to itself),
      // so restart 0 starts exactly at the shallower optimum.
      const std::size_t pad = P - std::min(P, warm->params.size());
      for (std::size_t i = 0; i < P; ++i)
        th[i] = (i < pad ? 0.0 : warm->params[i - pad]) + (r == 0 ? 0.0 : small(rng));
    } else {
      for (auto& v : th) v = full(rng);
    }
    const std::vector<double> start = th;
    if (o.energy_phase) {
      detail::Objective e{[&](const std::vector<double>& x) { return pb.energy(x); },
                          [&](const std::vector<double>& x, std::vector<double>& g) { pb.energy_grad(x, g); }};
      th = detail::nelder_mead(e, th, 0.5, o.warmup_iters, 1e-6);
      th = detail::bfgs(e, th, o.bfgs_iters, 1e-12, 1e-2);
    }
    energy_linf[r] = pb.linf(th);
    th = detail::refine_linf(pb, th, o);
    // Never return worse than the starting point; this keeps warm-started sweeps non-increasing in L.
    if (pb.linf(start) < pb.linf(th)) th = start;
    final_linf[r] = pb.linf(th);
    finals[r] = std::move(th);
  }

  int best = 0;
  for (int r = 1; r < o.restarts; ++r)
    if (final_linf[r] < final_linf[best]) best = r;
  TrainResult res;
  res.best_params = {n, L, finals[best]};
  res.l_inf = final_linf[best];
  res.energy = pb.energy(finals[best]);
  res.energy_phase_l_inf = *std::min_element(energy_linf.begin(), energy_linf.end());
  res.restarts_used = o.restarts;
  res.restart_l_inf = final_linf;
  return res;
}

// Trains depths in increasing order, warm-starting each from the better of L-1 and L-2.
[[nodiscard]] inline std::vector<TrainResult> train_sweep(int n, const std::vector<int>& depths, const TrainOptions& o = {}) {
  std::vector<TrainResult> out;
  for (int L : depths) {
    std::optional<RyCnotAnsatz> warm;
    double warm_loss = std::numeric_limits<double>::infinity();
    for (const auto& prev : out)
      if ((prev.best_params.L == L - 1 || prev.best_params.L == L - 2) && prev.l_inf < warm_loss) {
        warm = prev.best_params;
        warm_loss = prev.l_inf;
      }
    out.push_back(train(n, L, o, warm));
  }
  return out;
}

struct DigitizeResult {
  std::vector<double> params;
  double l_inf_snapped = 0.0;
  double l_inf_after_local_search = 0.0;
};

// Snap every angle to i * 2 pi / M_digit, then coordinate-wise +-1 grid steps while L_inf improves.
[[nodiscard]] inline DigitizeResult digitize(const RyCnotAnsatz& a, const LoaderTarget& target, std::int64_t M_digit,
                                             int max_sweeps = 50) {
  validate(a);
  require(M_digit >= 4, "digitize needs M_digit >= 4");
  require(target.n == a.n, "target and ansatz qubit counts differ");
  const double h = 2.0 * std::numbers::pi / static_cast<double>(M_digit);
  std::vector<std::int64_t> idx(a.params.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = std::llround(a.params[i] / h);
  auto angles = [&](const std::vector<std::int64_t>& k) {
    std::vector<double> th(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) th[i] = static_cast<double>(k[i]) * h;
    return th;
  };
  auto loss = [&](const std::vector<std::int64_t>& k) {
    return linf_loss(detail::simulate(a.n, a.L, angles(k).data()), target);
  };
  DigitizeResult res;
  double cur = loss(idx);
  res.l_inf_snapped = cur;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool improved = false;
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (int step : {1, -1}) {
        idx[i] += step;
        const double v = loss(idx);
        if (v < cur) {
          cur = v;
          improved = true;
        } else {
          idx[i] -= step;
        }
      }
    if (!improved) break;
  }
  res.params = angles(idx);
  res.l_inf_after_local_search = cur;
  return res;
}

// T_Ry(n) per layer, L+1 layers.
[[nodiscard]] inline ResourceCount loader_gate_resources(int n, int L, double eps) {
  require(n >= 1 && L >= 0, "loader resources need n >= 1 and L >= 0");
  require(eps > 0.0 && eps < 1.0, "rotation precision must lie in (0,1)");
  const std::int64_t layer = register_rotation_depth(n, eps);
  const auto per_rot = static_cast<std::int64_t>(std::ceil(3.0 * std::log2(n / eps)));
  return {0, static_cast<std::int64_t>(n) * (L + 1) * per_rot, layer * (L + 1), n};
}

}  // namespace qdp
