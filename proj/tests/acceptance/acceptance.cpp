// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any criterion fails.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdp/amplitude_estimation.hpp"
#include "qdp/circuit_estimator.hpp"
#include "qdp/config.hpp"
#include "qdp/contracts.hpp"
#include "qdp/error_budget.hpp"
#include "qdp/gaussian_loader.hpp"
#include "qdp/pricing.hpp"
#include "support/oracles.hpp"

using namespace qdp;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << (ok ? "" : "[x] ") << what << "; ";
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

bool within_factor(double x, double ref, double f) { return x >= ref / f && x <= ref * f; }

struct Bench {
  GBMParams model;
  ContractSpec contract;
  EstimatorConfig est;
};

Bench load(const std::string& name) {
  const auto j = load_json_file(std::string(QDP_SOURCE_DIR) + "/configs/" + name);
  return {model_from_json(j.at("model")), contract_from_json(j.at("contract")), estimator_from_json(j.at("estimator"))};
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void table_rows(Outcome& o, Method m, double ref_depth_a, double ref_q_a, double ref_depth_t, double ref_q_t) {
  const auto a = load("benchmark_autocallable.json");
  const auto t = load("benchmark_tarf.json");
  const auto ra = end_to_end(m, a.model, a.contract, a.est);
  const auto rt = end_to_end(m, t.model, t.contract, t.est);
  o.check(within_factor(ra.total_t_depth, ref_depth_a, 2.0),
          "autocall T-depth " + fmt(ra.total_t_depth) + " vs " + fmt(ref_depth_a));
  o.check(within_factor(static_cast<double>(ra.total_qubits), ref_q_a, 2.0),
          "autocall qubits " + std::to_string(ra.total_qubits) + " vs " + fmt(ref_q_a));
  o.check(within_factor(rt.total_t_depth, ref_depth_t, 2.0),
          "tarf T-depth " + fmt(rt.total_t_depth) + " vs " + fmt(ref_depth_t));
  o.check(within_factor(static_cast<double>(rt.total_qubits), ref_q_t, 2.0),
          "tarf qubits " + std::to_string(rt.total_qubits) + " vs " + fmt(ref_q_t));
}

void criterion1(Outcome& o) { table_rows(o, Method::reparam, 5.4e7, 8000, 8.2e7, 11500); }

void criterion2(Outcome& o) { table_rows(o, Method::riemann_no_norm, 1.5e8, 23000, 1.6e8, 17000); }

void criterion3(Outcome& o) {
  const auto a = load("benchmark_autocallable.json");
  const auto r = end_to_end(Method::riemann, a.model, a.contract, a.est);
  o.check(std::abs(r.p_max - 63.45) <= 0.05 * 63.45, "P_max " + fmt(r.p_max) + " vs 63.45");
  o.check(std::abs(std::log10(r.scale_pmax_T) - 40.0) <= 1.0, "P_max^T " + fmt(r.scale_pmax_T) + " vs 1e40 (+-1 OOM)");
  o.check(!r.feasible, std::string("flagged ") + (r.feasible ? "feasible" : "infeasible"));
}

void criterion4(Outcome& o) {
  const double b = oracle_call_bound(1e-3, 0.32);
  o.check(b >= 5.0e3 && b <= 6.0e3, "N_oracle(1e-3, 0.32) = " + fmt(b));
}

void criterion5(Outcome& o) {
  const std::vector<double> eps{1e-2, 3e-3, 1e-3, 3e-4};
  const double alpha = 0.32;
  const int seeds = 200;
  std::vector<double> inv_eps, q_calls, c_calls;
  double min_cov = 1.0;
  for (double e : eps) {
    double calls = 0.0;
    int covered = 0;
    std::mt19937_64 amp_rng(17);
    std::uniform_real_distribution<double> amp(0.05, 0.95);
    for (int s = 0; s < seeds; ++s) {
      const double a = amp(amp_rng);
      GroverOracleSim sim(a);
      const auto r = iqae_estimate(sim, e, alpha, 1000 + static_cast<std::uint64_t>(s));
      calls += static_cast<double>(r.oracle_calls);
      covered += std::abs(r.a_hat - a) <= e;
    }
    inv_eps.push_back(1.0 / e);
    q_calls.push_back(calls / seeds);
    c_calls.push_back(static_cast<double>(classical_sample_count(e, alpha)));
    min_cov = std::min(min_cov, static_cast<double>(covered) / seeds);
  }
  const double sq = loglog_slope(inv_eps, q_calls), sc = loglog_slope(inv_eps, c_calls);
  o.check(std::abs(sq - 1.0) <= 0.15, "quantum slope " + fmt(sq));
  o.check(std::abs(sc - 2.0) <= 0.2, "classical slope " + fmt(sc));
  o.check(min_cov >= 0.63, "min coverage " + fmt(min_cov));
}

void criterion6(Outcome& o) {
  const auto p = GBMParams::single(0.0, 0.2, 1.0, 3, 1.0);
  AutocallableSpec s;
  s.binaries = {{1.1, 1.0, 2.0}, {1.1, 2.0, 4.0}, {1.1, 3.0, 6.0}};
  s.K_put = 1.0;
  s.b = 0.7;
  s.k = 18.0;
  s.barrier_dates = {1.0, 2.0, 3.0};
  const auto g = make_grid(p, 3, 5.0);
  const auto exact = exact_lattice_price(p, s, g);
  const auto bf = oracle::brute_force_autocall({{1.1, 1.1, 1.1}, {2.0, 4.0, 6.0}, 1.0, 0.7, 18.0}, 0.2, 0.0, 1.0, 3, 3, 5.0);
  o.check(std::abs(exact.price - bf.price) <= 1e-12, "exact " + fmt(exact.price) + " vs brute force " + fmt(bf.price));
  // The lattice sampler draws from the renormalized lattice pmf, so it estimates price / mass.
  const auto mc = mc_price(p, s, 100000, 20240101, McSettings{SamplingModel::lattice, g, 1024});
  const double target = exact.price / exact.mass;
  o.check(std::abs(mc.estimate - target) <= 3.0 * mc.stderr_,
          "lattice MC " + fmt(mc.estimate) + " +- " + fmt(mc.stderr_) + " vs " + fmt(target));
  const auto bs = GBMParams::single(0.03, 0.25, 0.25, 4, 100.0);
  const auto call = mc_expectation(bs, 200000, 20240101, [](const PricePath& x) {
    return std::exp(-0.03) * std::max(x(3, 0) - 100.0, 0.0);
  });
  const double ref = black_scholes_call(100.0, 100.0, 0.03, 0.25, 1.0);
  o.check(std::abs(call.estimate - ref) <= 3.0 * call.stderr_,
          "European MC " + fmt(call.estimate) + " +- " + fmt(call.stderr_) + " vs BS " + fmt(ref));
}

// Midpoint sum over a D-dimensional box with 2^n cells per side.
double midpoint_sum(const std::function<double(const std::vector<double>&)>& g, int D, double lo, double hi, int n) {
  const std::int64_t N = std::int64_t{1} << n;
  const double h = (hi - lo) / static_cast<double>(N);
  std::int64_t total = 1;
  for (int j = 0; j < D; ++j) total *= N;
  KahanSum s;
  std::vector<double> x(D);
  for (std::int64_t k = 0; k < total; ++k) {
    std::int64_t rem = k;
    for (int j = 0; j < D; ++j) {
      x[j] = lo + (static_cast<double>(rem % N) + 0.5) * h;
      rem /= N;
    }
    s.add(g(x));
  }
  return s.value() * std::pow(h, D);
}

void criterion7(Outcome& o) {
  using boost::math::quadrature::gauss_kronrod;
  // Tail mass of the benchmark box: each coordinate has sd <= sigma_max, union over dT coordinates.
  const auto a = load("benchmark_autocallable.json");
  const auto cov = build_covariance(a.model);
  const double smax = sigma_max(cov);
  bool tails_ok = true;
  std::string tails;
  for (double w : {2.0, 3.0, 4.0, 5.0}) {
    double inside = 1.0;
    for (int j = 0; j < a.model.d; ++j) {
      const double sd = std::sqrt(cov.sigma(j, j));
      const double half = gauss_kronrod<double, 61>::integrate(
          [&](double x) { return oracle::pdf(x, 0.0, sd); }, 0.0, w * smax, 10, 1e-15);
      inside *= std::pow(2.0 * half, a.model.T);
    }
    const double tail = 1.0 - inside, bound = truncation_error(a.model.d, a.model.T, w);
    tails_ok = tails_ok && tail <= bound;
    tails += " w=" + fmt(w) + ":" + fmt(tail) + "<=" + fmt(bound);
  }
  o.check(tails_ok, "tail mass" + tails);

  // Midpoint rule: 1D exp(0.7x) on [-1,1]; 2D exp(0.7x + 0.4y) on [-1,1]^2. Half-width w sigma = 1.
  struct Case {
    int D;
    std::function<double(const std::vector<double>&)> g;
    double exact, beta;
  };
  const double e1 = (std::exp(0.7) - std::exp(-0.7)) / 0.7;
  const double e2 = e1 * (std::exp(0.4) - std::exp(-0.4)) / 0.4;
  const std::vector<Case> cases{
      {1, [](const std::vector<double>& x) { return std::exp(0.7 * x[0]); }, e1, 0.49 * std::exp(0.7)},
      {2, [](const std::vector<double>& x) { return std::exp(0.7 * x[0] + 0.4 * x[1]); }, e2, 0.65 * std::exp(1.1)}};
  bool mid_ok = true, ratio_ok = true;
  std::string mids;
  for (const auto& c : cases) {
    double prev = 0.0;
    for (int n = 2; n <= 7; ++n) {
      const double err = std::abs(midpoint_sum(c.g, c.D, -1.0, 1.0, n) - c.exact);
      const double bound = discretization_error(c.beta, 1.0, 1.0, c.D, 1, n);
      mid_ok = mid_ok && err <= bound;
      if (n > 2) ratio_ok = ratio_ok && std::abs(prev / err - 4.0) <= 0.1;
      prev = err;
    }
    mids += " D=" + std::to_string(c.D) + " last err " + fmt(prev);
  }
  o.check(mid_ok, "midpoint error <= bound" + mids);
  o.check(ratio_ok, "midpoint error ratio 4 +- 0.1 per qubit");

  // Fixed point: sqrt(x y + z) with truncating arithmetic against the propagated bound.
  const FixedPointFormat f{24, 4};
  const oracle::Fixed fx{f.n, f.p};
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  int violations = 0;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng), y = u(rng), z = u(rng);
    const auto qx = fx.quantize(x), qy = fx.quantize(y), qz = fx.quantize(z);
    const double ex = x - fx.value(qx), ey = y - fx.value(qy), ez = z - fx.value(qz);
    const auto prod = fx.mul(qx, qy);
    const auto sum = fx.add(prod, qz);
    const double e_mul = eps_mul(2.0, ex, ey, f);
    const double e_sum = e_mul + ez;
    const double e_root = eps_sqrt(e_sum, f);
    const double err_mul = std::abs(fx.value(prod) - x * y);
    const double err_sum = std::abs(fx.value(sum) - (x * y + z));
    const double err_root = std::abs(fx.sqrt_value(sum) - std::sqrt(x * y + z));
    violations += (err_mul > e_mul) + (err_sum > e_sum) + (err_root > e_root);
    worst = std::max({worst, err_mul / e_mul, err_sum / e_sum, err_root / e_root});
  }
  o.check(violations == 0, "fixed-point violations " + std::to_string(violations) + "/3000, worst ratio " + fmt(worst));
}

void criterion8(Outcome& o) {
  TrainOptions opts;  // best of 8 restarts, w = 5
  const auto s4 = train_sweep(4, {2, 4, 6, 8}, opts);
  const auto s5 = train_sweep(5, {2, 4, 6}, opts);
  std::string c4, c5;
  double best4 = 1.0;
  for (const auto& r : s4) {
    best4 = std::min(best4, r.l_inf);
    c4 += " L" + std::to_string(r.best_params.L) + "=" + fmt(r.l_inf);
  }
  for (const auto& r : s5) c5 += " L" + std::to_string(r.best_params.L) + "=" + fmt(r.l_inf);
  o.check(best4 <= 1e-3, "n=4:" + c4);
  o.check(s5.back().l_inf <= 1e-4, "n=5:" + c5);
  // Non-increasing up to a relative 1e-6 and an absolute 1e-12 slack for the optimizer floor.
  bool mono = true;
  for (const auto* s : {&s4, &s5})
    for (std::size_t i = 1; i < s->size(); ++i)
      mono = mono && (*s)[i].l_inf <= (*s)[i - 1].l_inf * (1.0 + 1e-6) + 1e-12;
  o.check(mono, "best L_inf non-increasing in L");

  const auto& model = s4[1].best_params;  // n=4, L=4
  const auto target = make_loader_target(4, opts.w);
  const double cont = s4[1].l_inf;
  std::vector<double> Ms, diffs;
  std::string dg;
  double diff_1e5 = 0.0;
  for (double M : {1e2, 1e3, 1e4, 1e5}) {
    const auto d = digitize(model, target, static_cast<std::int64_t>(M));
    const double diff = d.l_inf_after_local_search - cont;
    dg += " M=" + fmt(M) + ":" + fmt(diff);
    if (diff > 0.0) {
      Ms.push_back(M);
      diffs.push_back(diff);
    }
    diff_1e5 = diff;
  }
  const double slope = Ms.size() >= 2 ? loglog_slope(Ms, diffs) : 0.0;
  o.check(Ms.size() >= 2 && std::abs(slope + 1.0) <= 0.5, "digitization slope " + fmt(slope) + dg);
  o.check(diff_1e5 <= std::max(0.1 * cont, 1e-5), "parity at M=1e5: excess " + fmt(diff_1e5) + " over " + fmt(cont));
}

void criterion9(Outcome& o) {
  std::ifstream in(std::string(QDP_SOURCE_DIR) + "/tests/data/contract_fixtures.json");
  const auto fx = nlohmann::json::parse(in);
  int cases = 0, wrong = 0;
  auto same = [](const std::vector<Cashflow>& got, const nlohmann::json& want) {
    if (got.size() != want.size()) return false;
    for (std::size_t i = 0; i < got.size(); ++i)
      if (got[i].time != want[i][0].get<double>() || std::abs(got[i].amount - want[i][1].get<double>()) > 1e-12)
        return false;
    return true;
  };
  const auto ac = std::get<AutocallableSpec>(contract_from_json(fx.at("autocallable").at("contract")));
  for (const auto& c : fx.at("autocallable").at("cases")) {
    ++cases;
    const CumulativePath path{c.at("times").get<std::vector<double>>(), c.at("returns").get<std::vector<double>>()};
    wrong += !same(autocall_payoff(path, ac), c.at("cashflows"));
  }
  const auto tf = std::get<TARFSpec>(contract_from_json(fx.at("tarf").at("contract")));
  for (const auto& c : fx.at("tarf").at("cases")) {
    ++cases;
    wrong += !same(tarf_payoff(c.at("prices").get<std::vector<double>>(), tf), c.at("cashflows"));
  }
  o.check(wrong == 0, std::to_string(cases - wrong) + "/" + std::to_string(cases) + " fixtures reproduced (dates exact, amounts to 1e-12)");

  // 10^6 paths per benchmark contract at triple volatility; normalize throws outside [0,1].
  std::int64_t outside = 0, total = 0;
  for (const auto* name : {"benchmark_autocallable.json", "benchmark_tarf.json"}) {
    auto b = load(name);
    b.model.sigmas *= 3.0;
    const auto bounds = payoff_bounds(b.contract, b.model.r);
    const auto res = mc_expectation(b.model, 1000000, 7, [&](const PricePath& s) {
      try {
        const double v = normalize(discounted_payoff(b.contract, s, b.model.s0, b.model.dt, b.model.r), bounds);
        return v >= 0.0 && v <= 1.0 ? 0.0 : 1.0;
      } catch (const InvalidInput&) {
        return 1.0;
      }
    });
    total += res.paths;
    outside += std::llround(res.estimate * static_cast<double>(res.paths));
  }
  o.check(outside == 0, std::to_string(total) + " random paths, " + std::to_string(outside) + " outside [0,1]");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, void (*)(Outcome&)>> criteria{
      {"reparam resource rows within factor 2", criterion1},
      {"riemann-no-norm resource rows within factor 2", criterion2},
      {"normalized Riemann blow-up", criterion3},
      {"oracle call bound", criterion4},
      {"amplitude estimation scaling", criterion5},
      {"desk-scale oracle equivalence", criterion6},
      {"error budget soundness", criterion7},
      {"gaussian loader training and digitization", criterion8},
      {"contract fixtures and normalization", criterion9}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("CRITERION %zu %s: %s (%.1fs) %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
