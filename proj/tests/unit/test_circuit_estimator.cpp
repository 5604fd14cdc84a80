#include <gtest/gtest.h>

#include <cmath>

#include "qdp/circuit_estimator.hpp"
#include "qdp/config.hpp"
#include "support/oracles.hpp"

using namespace qdp;

namespace {

struct Benchmark {
  GBMParams model;
  ContractSpec contract;
  EstimatorConfig est;
};

Benchmark load(const std::string& name) {
  const auto j = load_json_file(std::string(QDP_SOURCE_DIR) + "/configs/" + name);
  return {model_from_json(j.at("model")), contract_from_json(j.at("contract")), estimator_from_json(j.at("estimator"))};
}

ResourceCount sum_stages(const Estimate& e) {
  ResourceCount acc;
  for (const auto& s : e.stages) {
    ResourceCount par;
    std::int64_t depth = 0;
    for (const auto& [label, rc] : s.items) {
      par.toffoli_count += rc.toffoli_count;
      par.t_count += rc.t_count;
      par.logical_qubits += rc.logical_qubits;
      depth = std::max(depth, rc.t_depth);
    }
    acc.toffoli_count += par.toffoli_count;
    acc.t_count += par.t_count;
    acc.logical_qubits += par.logical_qubits;
    acc.t_depth += depth;
  }
  return acc;
}

bool within_factor(double x, double ref, double f) { return x >= ref / f && x <= ref * f; }

}  // namespace

TEST(CircuitEstimator, BreakdownSumsToTotal) {
  const auto b = load("benchmark_autocallable.json");
  for (const auto m : {Method::reparam, Method::riemann_no_norm}) {
    const auto r = end_to_end(m, b.model, b.contract, b.est);
    EXPECT_EQ(sum_stages(r.loading), r.loading.total);
    EXPECT_EQ(sum_stages(r.payoff), r.payoff.total);
    EXPECT_EQ(r.oracle, serial(r.loading.total, r.payoff.total));
    EXPECT_EQ(r.grover.t_depth, 2 * r.oracle.t_depth);
  }
}

TEST(CircuitEstimator, RiemannLoadingDepthMatchesClosedForm) {
  const LoadingParams lp{{34, 2}, {3, 32, 2}, 1e-4};
  for (const auto& [d, T] : {std::pair{1, 1}, std::pair{3, 20}, std::pair{2, 5}}) {
    const auto e = riemann_loading_resources(d, T, lp);
    const std::int64_t n = 34, c2 = binom2(d);
    const auto ex = exp_resources(lp.fmt, lp.poly), as = arcsin_sqrt_resources(lp.fmt, lp.poly);
    const std::int64_t expect = n * n + 2 * n * n * c2 / d + 10 * (c2 + d) + 10 * T + 9 * n + 5 +
                                register_rotation_depth(34, 1e-4) + 2 * ex.t_depth + as.t_depth;
    EXPECT_EQ(e.total.t_depth, expect) << d << "," << T;
    const std::int64_t q = T * n * (4 * d + c2) + 3 * n + 1 + ex.logical_qubits * (1 + d * T) + as.logical_qubits;
    EXPECT_EQ(e.total.logical_qubits, q) << d << "," << T;
  }
}

TEST(CircuitEstimator, SingleAssetDropsCrossTerms) {
  const auto e = riemann_loading_resources(1, 4, {});
  EXPECT_EQ(e.stages[1].items[0].second.t_depth, 0);
  EXPECT_EQ(e.stages[1].items[0].second.toffoli_count, 0);
}

TEST(CircuitEstimator, ReparamRegisterWidths) {
  EXPECT_EQ(reparam_register_bits(5, 1, 1), 5);
  EXPECT_EQ(reparam_register_bits(5, 3, 20), 5 + 5 + 2);
  ReparamParams rp;
  rp.L = 0;
  const auto e = reparam_loading_resources(1, 1, rp);
  EXPECT_EQ(e.stages[0].items[0].second.t_depth, register_rotation_depth(5, rp.eps));
}

TEST(CircuitEstimator, ReparamLoadingCheaperThanRiemann) {
  for (const auto& name : {"benchmark_autocallable.json", "benchmark_tarf.json"}) {
    const auto b = load(name);
    const auto rp = end_to_end(Method::reparam, b.model, b.contract, b.est);
    const auto rn = end_to_end(Method::riemann_no_norm, b.model, b.contract, b.est);
    EXPECT_LT(rp.loading.total.t_depth, rn.loading.total.t_depth) << name;
  }
}

TEST(CircuitEstimator, SingleBinaryWithoutPut) {
  AutocallableSpec s;
  s.binaries = {{1.1, 1.0, 2.0}};
  s.k = 0.0;
  const FixedPointFormat f{34, 2};
  const auto e = autocall_payoff_resources(s, f, 1e-4);
  EXPECT_EQ(e.total, serial(comparator_resources(f), controlled_single_rotation(1e-4)));
}

TEST(CircuitEstimator, BinaryCascadeAddsTwoToffolisPerLaterLeg) {
  AutocallableSpec s;
  s.k = 0.0;
  s.binaries = {{1.1, 1.0, 2.0}, {1.1, 2.0, 4.0}, {1.1, 3.0, 6.0}};
  const FixedPointFormat f{34, 2};
  const auto e = autocall_payoff_resources(s, f, 3e-4);
  const auto rot = controlled_single_rotation(1e-4);
  EXPECT_EQ(e.total.t_depth, comparator_resources(f).t_depth + 3 * rot.t_depth + 4);
  EXPECT_EQ(e.total.toffoli_count, 3 * comparator_resources(f).toffoli_count + 4);
}

TEST(CircuitEstimator, TarfSingleDateHasNoPrefixNetworks) {
  TARFSpec s;
  s.payment_times = {1.0};
  const auto e = tarf_payoff_resources(s, {34, 2}, 1e-4);
  for (const auto& st : e.stages) {
    EXPECT_NE(st.label, "knock-out prefix OR");
    EXPECT_NE(st.label, "cap register");
  }
}

TEST(CircuitEstimator, ReparamTableRowsWithinFactorTwo) {
  const auto a = load("benchmark_autocallable.json");
  const auto ra = end_to_end(Method::reparam, a.model, a.contract, a.est);
  EXPECT_TRUE(within_factor(ra.total_t_depth, 5.4e7, 2.0)) << ra.total_t_depth;
  EXPECT_TRUE(within_factor(static_cast<double>(ra.total_qubits), 8000, 2.0)) << ra.total_qubits;
  const auto t = load("benchmark_tarf.json");
  const auto rt = end_to_end(Method::reparam, t.model, t.contract, t.est);
  EXPECT_TRUE(within_factor(rt.total_t_depth, 8.2e7, 2.0)) << rt.total_t_depth;
  EXPECT_TRUE(within_factor(static_cast<double>(rt.total_qubits), 11500, 2.0)) << rt.total_qubits;
}

TEST(CircuitEstimator, OracleCountEqualsBound) {
  const auto a = load("benchmark_autocallable.json");
  const auto r = end_to_end(Method::reparam, a.model, a.contract, a.est);
  EXPECT_DOUBLE_EQ(r.n_oracle, oracle_call_bound(1e-3, 0.32));
  EXPECT_DOUBLE_EQ(r.total_t_depth, 2.0 * r.oracle.t_depth * r.n_oracle);
}

TEST(CircuitEstimator, NormalizedRiemannIsInfeasibleAtBenchmark) {
  const auto a = load("benchmark_autocallable.json");
  const auto r = end_to_end(Method::riemann, a.model, a.contract, a.est);
  EXPECT_NEAR(r.p_max, 63.49, 0.05);
  EXPECT_NEAR(r.scale_pmax_T, std::pow(r.p_max, 20), 1e-6 * r.scale_pmax_T);
  EXPECT_FALSE(r.feasible);
  EXPECT_FALSE(r.meets_target);
  EXPECT_THROW((void)end_to_end(Method::riemann, a.model, a.contract, a.est, true), Infeasible);
}

TEST(CircuitEstimator, ScaleFeasibilityRule) {
  EXPECT_TRUE(scale_feasible(1e-3, 1e6));
  EXPECT_FALSE(scale_feasible(1e-3, 1e14));  // 1e-17 below double resolution
  EXPECT_FALSE(scale_feasible(1.0, 1e41));
}

TEST(CircuitEstimator, StrictModeNamesBindingComponent) {
  const auto a = load("benchmark_autocallable.json");
  auto cfg = a.est;
  cfg.target_error = 1e-9;
  try {
    (void)end_to_end(Method::reparam, a.model, a.contract, cfg, true);
    FAIL() << "expected Infeasible";
  } catch (const Infeasible& e) {
    EXPECT_NE(std::string(e.what()).find("binding component"), std::string::npos);
  }
  const auto r = end_to_end(Method::reparam, a.model, a.contract, cfg);
  EXPECT_FALSE(r.meets_target);
  EXPECT_EQ(r.binding_component, binding_component(r.budget));
}

TEST(CircuitEstimator, MethodNamesRoundTrip) {
  for (const auto m : {Method::riemann, Method::riemann_no_norm, Method::reparam}) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_THROW((void)parse_method("qmc"), InvalidInput);
}

TEST(ImportanceSampling, UniformProposalRatioIsPeakDensity) {
  const int N = 64;
  std::vector<double> f(N), h(N, 1.0 / N);
  double peak = 0.0;
  for (int i = 0; i < N; ++i) {
    f[i] = oracle::pdf((i + 0.5) / N, 0.5, 0.1);
    peak = std::max(peak, f[i]);
  }
  const auto r = importance_feasibility(f, h);
  EXPECT_NEAR(r.max_ratio, peak, 1e-12);
  EXPECT_FALSE(r.feasible);
}

TEST(ImportanceSampling, MatchedProposalIsFeasible) {
  const int N = 64;
  std::vector<double> f(N), h(N);
  double z = 0.0;
  for (int i = 0; i < N; ++i) z += oracle::pdf((i + 0.5) / N, 0.5, 0.1);
  for (int i = 0; i < N; ++i) {
    f[i] = oracle::pdf((i + 0.5) / N, 0.5, 0.1);
    h[i] = f[i] / z;
  }
  const auto r = importance_feasibility(f, h);
  EXPECT_TRUE(r.feasible);
  EXPECT_NEAR(r.max_ratio, z / N, 1e-12);
}

TEST(ImportanceSampling, ProcessFormChecksEveryTransition) {
  const int N = 4;
  const Eigen::VectorXd f0 = Eigen::VectorXd::Constant(N, 1.0);
  const Eigen::VectorXd h = Eigen::VectorXd::Constant(N, 1.0 / N);
  Eigen::MatrixXd tr = Eigen::MatrixXd::Constant(N, N, 0.25);
  EXPECT_TRUE(importance_feasibility_process(f0, {tr}, {h, h}, {h, h}).feasible);
  tr(2, 1) = 1.0;
  const auto r = importance_feasibility_process(f0, {tr}, {h, h}, {h, h});
  EXPECT_FALSE(r.feasible);
  EXPECT_NEAR(r.max_ratio, 1.0 / (0.0625 * 4), 1e-12);
}
