#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qdp/amplitude_estimation.hpp"
#include "qdp/common.hpp"
#include "qdp/contracts.hpp"
#include "qdp/error_budget.hpp"
#include "qdp/market_model.hpp"
#include "qdp/qarith.hpp"

namespace qdp {

// Items inside a stage run in parallel; stages run in series.
struct Stage {
  std::string label;
  std::vector<std::pair<std::string, ResourceCount>> items;
};

struct Estimate {
  std::string name;
  std::vector<Stage> stages;
  ResourceCount total;
};

[[nodiscard]] inline ResourceCount compose(const std::vector<Stage>& stages) {
  ResourceCount acc;
  for (const auto& s : stages) {
    ResourceCount par;
    for (const auto& [label, rc] : s.items) par = parallel(par, rc);
    acc = serial(acc, par);
  }
  return acc;
}

[[nodiscard]] inline Estimate make_estimate(std::string name, std::vector<Stage> stages) {
  Estimate e{std::move(name), std::move(stages), {}};
  e.total = compose(e.stages);
  return e;
}

namespace detail {
inline void add_stage(std::vector<Stage>& v, std::string label, std::string item, ResourceCount rc) {
  v.push_back({std::move(label), {{std::move(item), rc}}});
}
inline ResourceCount times(ResourceCount rc, std::int64_t k) { return repeat_parallel(rc, k); }
// Counts of `k` copies but depth and qubits of `depth_src`.
inline ResourceCount counted(std::int64_t toffolis, std::int64_t t_extra, std::int64_t depth, std::int64_t qubits) {
  return {toffolis, kTPerToffoli * toffolis + t_extra, depth, qubits};
}
inline std::int64_t ceil_to_int(double x) { return static_cast<std::int64_t>(std::ceil(x - 1e-9)); }
}  // namespace detail

struct LoadingParams {
  FixedPointFormat fmt{34, 2};
  PolyParams poly{};
  double eps = 1e-4;  // rotation synthesis precision
};

// Riemann-sum path loading. Depth terms follow the closed form
// n^2 + 2n^2 C(d,2)/d + 10(C(d,2)+d) + 10T + 9n + 5 + 3n log2(n/eps) + 2 T_exp + T_arcsin,
// qubits T n (4d + C(d,2)) + 3n + 1 + q_exp (1 + dT) + q_arcsin; one stage per term.
[[nodiscard]] inline Estimate riemann_loading_resources(int d, int T, const LoadingParams& lp) {
  const auto& f = lp.fmt;
  validate(f);
  require(d >= 1 && T >= 1, "riemann loading needs d, T >= 1");
  require(lp.poly.z >= 1 && lp.poly.z <= f.n, "invalid multiplication split z");
  const std::int64_t n = f.n, D = d, TT = T, c2 = binom2(d);
  const auto ex = exp_resources(f, lp.poly);
  const auto as = arcsin_sqrt_resources(f, lp.poly);
  const std::int64_t tfa = tf_add(f.n), tfm = tf_mul(f.n, f.p);
  std::vector<Stage> st;
  using detail::add_stage;
  using detail::counted;
  add_stage(st, "squares R^2", "T_mul ~ n^2 over d*T registers", counted(TT * D * tfm, 0, n * n, TT * D * n));
  add_stage(st, "cross terms R_i R_j", "T_mul * C(d,2)/(d/2) ~ 2n^2 C(d,2)/d",
            counted(TT * c2 * tfm, 0, n * n * (D - 1), TT * c2 * n));
  add_stage(st, "sum of quadratic terms", "T_add * log(C(d,2)+d) ~ 10(C(d,2)+d)",
            counted(TT * (c2 + D - 1) * tfa, 0, 10 * (c2 + D), TT * D * n));
  add_stage(st, "cumulative log-return sums", "T_add * (T-1) ~ 10T", counted((TT - 1) * D * tfa, 0, 10 * TT, TT * D * n));
  add_stage(st, "R - mu and offsets", "9n + 5, log-return registers", counted(TT * D * tfa, 0, 9 * n + 5, TT * D * n));
  add_stage(st, "density exponential", "T_exp", ex);
  add_stage(st, "price exponentials", "T_exp over d*T registers",
            counted(TT * D * ex.toffoli_count, 0, ex.t_depth, TT * D * ex.logical_qubits));
  add_stage(st, "arcsin sqrt of density", "T_arcsin", as);
  const std::int64_t rot = register_rotation_depth(f.n, lp.eps);
  add_stage(st, "ancilla rotation", "3n log2(n/eps), 3n+1 qubits", {0, 3 * rot, rot, 3 * n + 1});
  return make_estimate("riemann_loading", std::move(st));
}

[[nodiscard]] inline int reparam_register_bits(int n, int d, int T) {
  return n + static_cast<int>(ceil_log2(T)) + static_cast<int>(ceil_log2(d));
}

struct ReparamParams {
  int n = 5;  // qubits per Gaussian
  int L = 6;  // ansatz depth
  int p = 3;  // integer bits of the n-bar registers
  PolyParams poly{};
  double eps = 1e-4;
};

// Reparameterization path loading. Depth 3n log2(n/eps)(L+1) + 10T + d nbar^2 + T_exp(nbar);
// qubits (n + nbar + q_exp(nbar)) dT with nbar = n + ceil(log2 T) + ceil(log2 d).
[[nodiscard]] inline Estimate reparam_loading_resources(int d, int T, const ReparamParams& rp) {
  require(d >= 1 && T >= 1, "reparam loading needs d, T >= 1");
  require(rp.L >= 0 && rp.n >= 1, "reparam loading needs L >= 0, n >= 1");
  const int nbar = reparam_register_bits(rp.n, d, T);
  const FixedPointFormat fb{std::max(nbar, 4), std::min(rp.p, std::max(nbar, 4) - 1)};
  const std::int64_t D = d, TT = T, nb = nbar;
  const auto ex = exp_resources(fb, rp.poly);
  const std::int64_t layer = register_rotation_depth(rp.n, rp.eps);
  const std::int64_t rot_t = detail::ceil_to_int(3.0 * std::log2(rp.n / rp.eps));
  std::vector<Stage> st;
  using detail::add_stage;
  using detail::counted;
  add_stage(st, "gaussian loading", "T_Ry(n) * (L+1) over d*T registers",
            {0, TT * D * rp.n * (rp.L + 1) * rot_t, layer * (rp.L + 1), TT * D * rp.n});
  add_stage(st, "cumulative sums and drift offset", "T_add * (T-1) + T_add ~ 10T",
            counted(TT * D * tf_add(fb.n), 0, 10 * TT, TT * D * nb));
  add_stage(st, "cholesky mixing", "T_mul * d ~ d nbar^2", counted(TT * D * D * tf_mul(fb.n, fb.p), 0, D * nb * nb, 0));
  add_stage(st, "price exponentials", "T_exp(nbar) over d*T registers",
            counted(TT * D * ex.toffoli_count, 0, ex.t_depth, TT * D * ex.logical_qubits));
  return make_estimate("reparam_loading", std::move(st));
}

// Controlled single rotation: rotation depth one, three synthesized rotations, one ancilla.
[[nodiscard]] inline ResourceCount controlled_single_rotation(double eps) {
  const auto r = rotation_resources(eps);
  return {0, 3 * r.t_count, r.t_depth, 1};
}

// Step-by-step composition of the autocallable payoff circuit on return registers.
[[nodiscard]] inline Estimate autocall_payoff_resources(const AutocallableSpec& s, const FixedPointFormat& f,
                                                        double eps_f, const PolyParams& poly = {}) {
  validate(s);
  validate(f);
  require(eps_f > 0.0 && eps_f < 1.0, "eps_f must lie in (0,1)");
  const auto m = static_cast<std::int64_t>(s.binaries.size());
  const bool put = s.k > 0.0;
  const auto nb = static_cast<std::int64_t>(s.barrier_dates.size());
  const double eps_rot = eps_f / static_cast<double>(m + (put ? 1 : 0));
  const auto cmp = comparator_resources(f);
  std::vector<Stage> st;

  Stage s1{"comparators", {{"strike comparators x" + std::to_string(m), detail::times(cmp, m)}}};
  if (put) {
    s1.items.push_back({"barrier comparators x" + std::to_string(nb), detail::times(cmp, nb)});
    s1.items.push_back({"put strike comparator", cmp});
  }
  st.push_back(s1);

  if (put) {
    Stage s2{"put flag logic",
             {{"OR over barrier bits", logic_tree_resources(nb)}, {"OR over strike bits", logic_tree_resources(m)}}};
    st.push_back(s2);
    st.push_back({"put flag logic", {{"two ANDs", repeat_serial(logic_gate_resources(), 2)}}});
  }

  // Cascade: rotation i is controlled on s_i and "no earlier strike", 2 Toffolis for i >= 2.
  ResourceCount cascade;
  for (std::int64_t i = 0; i < m; ++i) {
    if (i > 0) cascade = serial(cascade, repeat_serial(logic_gate_resources(), 2));
    cascade = serial(cascade, controlled_single_rotation(eps_rot));
  }
  Stage s34{"binary rotations || put register", {{"serial controlled rotations x" + std::to_string(m), cascade}}};
  if (put) {
    const auto put_reg = serial(serial(sub_resources(f), const_mul_resources(f, poly.z)), arcsin_sqrt_resources(f, poly));
    s34.items.push_back({"R_T - K_put, scale, arcsin sqrt", put_reg});
  }
  st.push_back(s34);

  if (put) {
    const int nt = effective_rotation_bits(f, eps_rot);
    Stage s5{"put rotation cascade",
             {{"double-control ANDs", toffoli_gadget(nt, 1, nt)},
              {"controlled Ry cascade", controlled_rotation_resources(f, eps_rot)}}};
    st.push_back(s5);
  }
  return make_estimate("autocall_payoff", std::move(st));
}

[[nodiscard]] inline Estimate tarf_payoff_resources(const TARFSpec& s, const FixedPointFormat& f, double eps_f,
                                                    const PolyParams& poly = {}) {
  validate(s);
  validate(f);
  require(eps_f > 0.0 && eps_f < 1.0, "eps_f must lie in (0,1)");
  const auto T = static_cast<std::int64_t>(s.payment_times.size());
  const std::int64_t n = f.n;
  const auto cmp = comparator_resources(f);
  // Lower-condition multiplication 10x more precise; discounting eps/sqrt(T) per date.
  const FixedPointFormat f_low{f.n + static_cast<int>(ceil_log2(10)), f.p};
  const FixedPointFormat f_disc{f.n + static_cast<int>(std::ceil(0.5 * std::log2(static_cast<double>(T)))), f.p};
  std::vector<Stage> st;
  using detail::times;

  st.push_back({"comparators", {{"lower/upper/barrier comparators x" + std::to_string(3 * T), times(cmp, 3 * T)}}});
  if (T > 1) {
    st.push_back({"knock-out prefix OR",
                  {{"prefix OR network", toffoli_gadget(T * ceil_log2(T), ceil_log2(T), T * ceil_log2(T))}}});
  }
  st.push_back({"upper/lower flags", {{"ANDs with not-knocked-out", toffoli_gadget(2 * T, 1, 2 * T)}}});
  st.push_back({"partial payoffs", {{"S - F x" + std::to_string(T), times(sub_resources(f), T)}}});
  st.push_back({"partial payoffs",
                {{"alpha (S - F) x" + std::to_string(T), times(const_mul_resources(f_low, poly.z), T)}}});
  st.push_back({"partial payoffs", {{"control-copies", toffoli_gadget(2 * T * n, 1, T * n)}}});
  if (T > 1) {
    st.push_back({"cumulative partial payoffs", {{"serial adds x" + std::to_string(T - 1),
                                                  repeat_serial(add_resources(f), T - 1)}}});
    st.push_back({"cap comparisons", {{"comparators >= C x" + std::to_string(T), times(cmp, T)}}});
    st.push_back({"cap register", {{"serial AND/OR chain", toffoli_gadget(2 * (T - 1), 2 * (T - 1), 2 * T)}}});
  }
  st.push_back({"capped payoffs", {{"control-copies on cap flags", toffoli_gadget(T * n, 1, T * n)}}});
  st.push_back({"cap date payoff",
                {{"C - prefix sum, controlled add x" + std::to_string(T),
                  times(serial(sub_resources(f), controlled_add_resources(f)), T)}}});
  st.push_back({"discounting", {{"constant multiplications x" + std::to_string(T), times(const_mul_resources(f_disc, poly.z), T)}}});
  if (T > 1) {
    st.push_back({"sum of discounted payoffs",
                  {{"adder tree", toffoli_gadget((T - 1) * tf_add(f.n), ceil_log2(T) * t_add(f.n), (T - 1) * n)}}});
  }
  st.push_back({"normalize", {{"offset add", add_resources(f)}}});
  st.push_back({"normalize", {{"scale", const_mul_resources(f, poly.z)}}});
  st.push_back({"arcsin sqrt", {{"arcsin sqrt", arcsin_sqrt_resources(f, poly)}}});
  st.push_back({"payoff rotation", {{"controlled Ry cascade", controlled_rotation_resources(f, eps_f)}}});
  return make_estimate("tarf_payoff", std::move(st));
}

// ---- importance sampling feasibility ----

struct FeasibilityResult {
  bool feasible = false;
  double max_ratio = 0.0;
};

// f: density on [0,1] sampled at N grid points; h: proposal pmf. Feasible iff max f/(h N) <= 1.
[[nodiscard]] inline FeasibilityResult importance_feasibility(const std::vector<double>& f, const std::vector<double>& h) {
  require(f.size() == h.size() && !f.empty(), "importance_feasibility: grid shape mismatch");
  const auto N = static_cast<double>(f.size());
  double mr = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    require(h[i] > 0.0, "importance_feasibility: proposal must be strictly positive");
    mr = std::max(mr, f[i] / (h[i] * N));
  }
  return {mr <= 1.0 + 1e-12, mr};
}

// Process form with f_t(x_t | x_{t-1}) as matrices [x_prev, x_t]; h_self[t] = h_t^t, h_next[t] = h_t^{t+1}.
[[nodiscard]] inline FeasibilityResult importance_feasibility_process(const Eigen::VectorXd& f0,
                                                                     const std::vector<Eigen::MatrixXd>& transitions,
                                                                     const std::vector<Eigen::VectorXd>& h_self,
                                                                     const std::vector<Eigen::VectorXd>& h_next) {
  const auto N = static_cast<double>(f0.size());
  require(h_self.size() == transitions.size() + 1 && h_next.size() == transitions.size() + 1,
          "importance_feasibility_process: need T+1 proposal factors");
  double mr = 0.0;
  for (Eigen::Index i = 0; i < f0.size(); ++i) mr = std::max(mr, f0[i] / (h_self[0][i] * N));
  for (std::size_t t = 0; t < transitions.size(); ++t) {
    const auto& ft = transitions[t];
    require(ft.rows() == f0.size() && ft.cols() == f0.size(), "importance_feasibility_process: shape mismatch");
    for (Eigen::Index a = 0; a < ft.rows(); ++a)
      for (Eigen::Index b = 0; b < ft.cols(); ++b)
        mr = std::max(mr, ft(a, b) / (h_next[t][a] * h_self[t + 1][b] * N));
  }
  return {mr <= 1.0 + 1e-12, mr};
}

// ---- end to end ----

enum class Method { riemann, riemann_no_norm, reparam };

[[nodiscard]] inline std::string to_string(Method m) {
  switch (m) {
    case Method::riemann: return "riemann";
    case Method::riemann_no_norm: return "riemann-no-norm";
    case Method::reparam: return "reparam";
  }
  return "?";
}

[[nodiscard]] inline Method parse_method(const std::string& s) {
  if (s == "riemann") return Method::riemann;
  if (s == "riemann-no-norm") return Method::riemann_no_norm;
  if (s == "reparam") return Method::reparam;
  throw InvalidInput("unknown method '" + s + "' (expected riemann, riemann-no-norm or reparam)");
}

struct EstimatorConfig {
  FixedPointFormat fmt{34, 2};          // Riemann arithmetic
  FixedPointFormat payoff_fmt{34, 2};   // payoff circuits, both methods
  PolyParams poly{};
  ReparamParams reparam{};
  double w = 5.0;
  double beta = 17.0;
  double eps_rot = 1e-4;   // loading rotation precision
  double eps_f = 1e-4;     // payoff error
  double eps_dens = 2e-6;  // reparam per-Gaussian density error (loader L_inf)
  double eps_amp = 1e-3;   // amplitude estimation
  double eps_poly = 1e-9;  // exp / arcsin polynomial approximation error
  double target_error = 2e-3;
  double confidence = 0.68;
  SigmaMaxReading sigma_reading = SigmaMaxReading::sqrt_eigenvalue;
};

struct EndToEndReport {
  Method method = Method::reparam;
  Estimate loading;
  Estimate payoff;
  ResourceCount oracle;   // A = loading then payoff
  ResourceCount grover;   // Q contains A twice
  double n_oracle = 0.0;  // oracle_call_bound(eps_amp, 1 - confidence)
  double total_t_count = 0.0;
  double total_t_depth = 0.0;
  std::int64_t total_qubits = 0;
  ErrorBudget budget;
  double p_max = 1.0;
  double scale_pmax_T = 1.0;
  bool feasible = true;  // false when the normalization scale is astronomically large
  bool meets_target = true;
  std::string binding_component;
  double f_delta = 1.0;
};

[[nodiscard]] inline std::string binding_component(const ErrorBudget& b) {
  std::pair<double, std::string> best{b.eps_trunc, "eps_trunc"};
  for (auto c : {std::pair{b.eps_disc, std::string("eps_disc")}, std::pair{b.eps_arith, std::string("eps_arith")},
                 std::pair{b.eps_amp, std::string("eps_amp")}})
    if (c.first > best.first) best = c;
  return best.second;
}

constexpr double kInfeasibleScale = 1e40;

// The normalized method must resolve eps_amp / P_max^T; below double resolution no estimate is meaningful.
[[nodiscard]] inline bool scale_feasible(double eps_amp, double scale) {
  return scale < kInfeasibleScale && eps_amp / scale >= std::numeric_limits<double>::epsilon();
}

// strict: throw Infeasible (naming the binding component) when the budget misses the target.
[[nodiscard]] inline EndToEndReport end_to_end(Method method, const GBMParams& model, const ContractSpec& contract,
                                               const EstimatorConfig& cfg, bool strict = false) {
  validate(model);
  require(cfg.confidence > 0.0 && cfg.confidence < 1.0, "confidence must lie in (0,1)");
  EndToEndReport rep;
  rep.method = method;
  const int d = model.d, T = model.T;
  const auto cov = build_covariance(model);
  const double smax = sigma_max(cov, cfg.sigma_reading);
  const auto bounds = payoff_bounds(contract, model.r);
  rep.f_delta = bounds.f_delta();

  if (method == Method::reparam) {
    ReparamParams rp = cfg.reparam;
    rp.eps = cfg.eps_rot;
    rep.loading = reparam_loading_resources(d, T, rp);
  } else {
    rep.loading = riemann_loading_resources(d, T, {cfg.fmt, cfg.poly, cfg.eps_rot});
  }
  if (const auto* ac = std::get_if<AutocallableSpec>(&contract))
    rep.payoff = autocall_payoff_resources(*ac, cfg.payoff_fmt, cfg.eps_f, cfg.poly);
  else
    rep.payoff = tarf_payoff_resources(std::get<TARFSpec>(contract), cfg.payoff_fmt, cfg.eps_f, cfg.poly);

  rep.oracle = serial(rep.loading.total, rep.payoff.total);
  rep.grover = {2 * rep.oracle.toffoli_count, 2 * rep.oracle.t_count, 2 * rep.oracle.t_depth, rep.oracle.logical_qubits};
  rep.n_oracle = oracle_call_bound(cfg.eps_amp, 1.0 - cfg.confidence);
  rep.total_t_depth = static_cast<double>(rep.grover.t_depth) * rep.n_oracle;
  rep.total_t_count = static_cast<double>(rep.grover.t_count) * rep.n_oracle;
  rep.total_qubits = rep.grover.logical_qubits;

  ErrorComponents c;
  c.eps_trunc = truncation_error(d, T, cfg.w);
  c.eps_amp = cfg.eps_amp;
  if (method == Method::reparam) {
    c.eps_disc = discretization_error(cfg.beta, cfg.w, smax, d, T, cfg.reparam.n);
    c.eps_arith = reparam_arith_error(cfg.w, d, T, cfg.eps_dens, cfg.eps_f);
    rep.budget = reparam_total(c, rep.f_delta);
  } else {
    c.eps_disc = discretization_error(cfg.beta, cfg.w, smax, d, T, cfg.fmt.n);
    DensityComponents dc;
    dc.eps_sin = cfg.eps_rot;
    dc.eps_arcsin = cfg.eps_poly;
    dc.eps_exp = cfg.eps_poly;
    dc.eps_sq = eps_sq(cfg.fmt);
    dc.eps_sum = riemann_sum_error(cfg.fmt, cfg.w, smax, d, T);
    c.eps_arith = riemann_arith_error(cfg.eps_f, riemann_density_error(dc), cfg.w, smax, d, T);
    rep.p_max = method == Method::riemann ? riemann_pmax(cfg.w, cov.sigma) : 1.0;
    rep.budget = riemann_total(c, rep.p_max, T, rep.f_delta);
    rep.scale_pmax_T = std::pow(rep.p_max, T);
  }
  rep.binding_component = binding_component(rep.budget);
  if (method == Method::riemann) {
    rep.feasible = scale_feasible(cfg.eps_amp, rep.scale_pmax_T);
    // The amplitude precision needed to absorb the scale multiplies the oracle count.
    if (rep.scale_pmax_T > 1.0) {
      const double eps_needed = cfg.eps_amp / rep.scale_pmax_T;
      rep.n_oracle = oracle_call_bound(eps_needed, 1.0 - cfg.confidence);
      rep.total_t_depth = static_cast<double>(rep.grover.t_depth) * rep.n_oracle;
      rep.total_t_count = static_cast<double>(rep.grover.t_count) * rep.n_oracle;
    }
    if (!rep.feasible) rep.binding_component = "normalization scale P_max^T";
  }
  rep.meets_target = rep.feasible && rep.budget.eps_total <= cfg.target_error * rep.f_delta * (1.0 + 1e-12);
  if (strict && !rep.meets_target)
    throw Infeasible("target error " + std::to_string(cfg.target_error) + " (relative to f_delta) not met by " +
                     to_string(method) + "; binding component: " + rep.binding_component);
  return rep;
}

}  // namespace qdp
