// qdp: pricing oracles, resource estimates and the Table-1 report.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qdp/amplitude_estimation.hpp"
#include "qdp/circuit_estimator.hpp"
#include "qdp/config.hpp"
#include "qdp/error_budget.hpp"
#include "qdp/gaussian_loader.hpp"
#include "qdp/pricing.hpp"
#include "qdp/qarith.hpp"

#ifndef QDP_SOURCE_DIR
#define QDP_SOURCE_DIR "."
#endif

namespace fs = std::filesystem;
using qdp::json;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 20240101;
  std::string format;
};

std::string default_out_dir() {
  const char* env = std::getenv("QDP_OUT_DIR");
  return env && *env ? env : "qdp_out";
}

fs::path out_path(const Common& c, const std::string& stem, const std::string& ext) {
  fs::create_directories(c.out);
  return fs::path(c.out) / (stem + "." + ext);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
  std::cout << "wrote " << p.string() << "\n";
}

json load_config(const Common& c) {
  if (c.config.empty()) throw qdp::ConfigError("--config is required for this subcommand");
  return qdp::load_json_file(c.config);
}

json envelope(const json& cfg, const Common& c, const std::string& cmd) {
  return {{"command", cmd}, {"config_hash", qdp::config_hash(cfg)}, {"seed", c.seed}};
}

const json& section(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw qdp::ConfigError("/" + key + ": required section missing");
  return cfg.at(key);
}

qdp::GridSpec grid_from(const json& cfg, const qdp::GBMParams& model) {
  const auto& g = section(cfg, "grid");
  const int n = qdp::cfg::integer(g, "/grid", "n");
  const double w = qdp::cfg::number_or(g, "/grid", "w", 5.0);
  return qdp::make_grid(model, n, w);
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---- subcommands ----

int price_mc(const Common& c, std::int64_t paths_override, const std::string& model_override) {
  const auto cfg = load_config(c);
  const auto model = qdp::model_from_json(section(cfg, "model"));
  const auto contract = qdp::contract_from_json(section(cfg, "contract"));
  const json mc = cfg.value("mc", json::object());
  std::int64_t M = paths_override > 0 ? paths_override : mc.value("paths", std::int64_t{100000});
  const std::string sm = !model_override.empty() ? model_override : mc.value("model", std::string("continuous"));
  qdp::McSettings s;
  if (sm == "lattice") {
    s.model = qdp::SamplingModel::lattice;
    s.grid = grid_from(cfg, model);
  } else if (sm != "continuous") {
    throw qdp::ConfigError("/mc/model: expected continuous or lattice");
  }
  const auto r = qdp::mc_price(model, contract, M, c.seed, s);
  json out = envelope(cfg, c, "price-mc");
  out["estimate"] = r.estimate;
  out["stderr"] = r.stderr_;
  out["paths"] = r.paths;
  out["sampling_model"] = sm;
  if (c.format == "csv") {
    write_text(out_path(c, "price_mc", "csv"), "estimate,stderr,paths,seed,config_hash\n" + fmt_g(r.estimate) + "," +
                                                    fmt_g(r.stderr_) + "," + std::to_string(r.paths) + "," +
                                                    std::to_string(c.seed) + "," + qdp::config_hash(cfg) + "\n");
  } else {
    write_text(out_path(c, "price_mc", "json"), out.dump(2) + "\n");
  }
  return 0;
}

int price_exact(const Common& c) {
  const auto cfg = load_config(c);
  const auto model = qdp::model_from_json(section(cfg, "model"));
  const auto contract = qdp::contract_from_json(section(cfg, "contract"));
  const auto g = grid_from(cfg, model);
  const auto r = qdp::exact_lattice_price(model, contract, g);
  json out = envelope(cfg, c, "price-exact");
  out["price"] = r.price;
  out["normalized_expectation"] = r.normalized_expectation;
  out["rescaled"] = r.rescaled;
  out["mass"] = r.mass;
  out["lattice_size"] = r.lattice_size;
  write_text(out_path(c, "price_exact", "json"), out.dump(2) + "\n");
  return 0;
}

struct ReferenceRow {
  std::string method;
  std::string contract;
  double t_count;
  double t_depth;
  double qubits;  // 0: not reported
};

// Published resource estimates; the normalized Riemann values are lower bounds.
const std::vector<ReferenceRow> kReferenceRows = {
    {"riemann", "autocallable", 1e43, 1e43, 0}, {"riemann", "tarf", 1e18, 1e18, 0},
    {"riemann-no-norm", "autocallable", 1.6e11, 1.5e8, 23000}, {"riemann-no-norm", "tarf", 5.5e10, 1.6e8, 17000},
    {"reparam", "autocallable", 1.2e10, 5.4e7, 8000}, {"reparam", "tarf", 9.8e9, 8.2e7, 11500}};

const ReferenceRow& reference_row(const std::string& method, const std::string& contract) {
  for (const auto& r : kReferenceRows)
    if (r.method == method && r.contract == contract) return r;
  throw std::logic_error("no reference row");
}

std::string contract_name(const qdp::ContractSpec& c) {
  return std::holds_alternative<qdp::AutocallableSpec>(c) ? "autocallable" : "tarf";
}

const char* kTable1Header =
    "method,contract,d,T,t_count,ref_t_count,t_depth,ref_t_depth,logical_qubits,ref_logical_qubits,"
    "n_oracle,scale_pmax_T,feasible,eps_total_over_f_delta,meets_target,binding_component\n";

std::string table1_row(const qdp::EndToEndReport& r, const qdp::GBMParams& m, const qdp::ContractSpec& c) {
  const auto& p = reference_row(qdp::to_string(r.method), contract_name(c));
  std::ostringstream os;
  const bool ge = r.method == qdp::Method::riemann;
  os << qdp::to_string(r.method) << "," << contract_name(c) << "," << m.d << "," << m.T << "," << fmt_g(r.total_t_count)
     << "," << (ge ? ">=" : "") << fmt_g(p.t_count) << "," << fmt_g(r.total_t_depth) << "," << (ge ? ">=" : "")
     << fmt_g(p.t_depth) << "," << r.total_qubits << "," << (p.qubits > 0 ? fmt_g(p.qubits) : "-") << ","
     << fmt_g(r.n_oracle) << "," << fmt_g(r.scale_pmax_T) << "," << (r.feasible ? "true" : "false") << ","
     << fmt_g(r.budget.eps_total / r.f_delta) << "," << (r.meets_target ? "true" : "false") << "," << r.binding_component
     << "\n";
  return os.str();
}

void warn_budget(const qdp::EndToEndReport& r) {
  if (!r.meets_target)
    std::cerr << "warning: " << qdp::to_string(r.method) << " misses the target error; binding component: "
              << r.binding_component << "\n";
}

int estimate_resources(const Common& c, const std::string& method, bool strict) {
  const auto cfg = load_config(c);
  const auto model = qdp::model_from_json(section(cfg, "model"));
  const auto contract = qdp::contract_from_json(section(cfg, "contract"));
  const auto est = qdp::estimator_from_json(cfg.value("estimator", json()));
  const auto r = qdp::end_to_end(qdp::parse_method(method), model, contract, est, strict);
  warn_budget(r);
  json out = envelope(cfg, c, "estimate-resources");
  out["report"] = qdp::to_json(r);
  out["estimator"] = qdp::to_json(est);
  write_text(out_path(c, "resources_" + method, "json"), out.dump(2) + "\n");
  write_text(out_path(c, "resources_" + method, "csv"), std::string(kTable1Header) + table1_row(r, model, contract));
  return 0;
}

int error_budget(const Common& c, const std::string& method) {
  const auto cfg = load_config(c);
  const auto model = qdp::model_from_json(section(cfg, "model"));
  const auto contract = qdp::contract_from_json(section(cfg, "contract"));
  const auto est = qdp::estimator_from_json(cfg.value("estimator", json()));
  const auto r = qdp::end_to_end(qdp::parse_method(method), model, contract, est);
  const auto cov = qdp::build_covariance(model);
  const double smax = qdp::sigma_max(cov, est.sigma_reading);
  json out = envelope(cfg, c, "error-budget");
  out["method"] = method;
  out["budget"] = qdp::to_json(r.budget);
  out["eps_total_over_f_delta"] = r.budget.eps_total / r.f_delta;
  out["target_error"] = est.target_error;
  out["meets_target"] = r.meets_target;
  out["binding_component"] = r.binding_component;
  out["sigma_max"] = smax;
  out["p_max"] = r.p_max;
  out["scale_pmax_T"] = r.scale_pmax_T;
  if (r.budget.eps_disc > 0.0)
    out["qubits_per_register_for_eps_disc_1e-5"] =
        qdp::qubits_per_register_for_target(1e-5, est.beta, est.w, smax, model.d, model.T);
  write_text(out_path(c, "error_budget_" + method, "json"), out.dump(2) + "\n");
  return 0;
}

int iqae_demo(const Common& c, std::vector<double> eps_list, double alpha, double amplitude, int seeds) {
  if (eps_list.empty()) eps_list = {1e-2, 3e-3, 1e-3, 3e-4};
  std::ostringstream csv;
  csv << "epsilon,calls_quantum,calls_classical,coverage,max_calls_over_bound\n";
  for (double eps : eps_list) {
    double calls = 0.0, worst = 0.0;
    int covered = 0;
    for (int s = 0; s < seeds; ++s) {
      qdp::GroverOracleSim oracle(amplitude);
      const auto r = qdp::iqae_estimate(oracle, eps, alpha, c.seed + static_cast<std::uint64_t>(s));
      calls += static_cast<double>(r.oracle_calls);
      worst = std::max(worst, static_cast<double>(r.oracle_calls) / qdp::oracle_call_bound(eps, alpha));
      covered += std::abs(r.a_hat - amplitude) <= eps ? 1 : 0;
    }
    csv << eps << "," << calls / seeds << "," << qdp::classical_sample_count(eps, alpha) << ","
        << static_cast<double>(covered) / seeds << "," << worst << "\n";
  }
  write_text(out_path(c, "iqae_demo", "csv"), csv.str());
  return 0;
}

int train_loader(const Common& c, int n, std::vector<int> depths, int restarts, double w) {
  if (depths.empty()) depths = {2, 4, 6, 8};
  qdp::TrainOptions o;
  o.restarts = restarts;
  o.seed = c.seed;
  o.w = w;
  const auto results = qdp::train_sweep(n, depths, o);
  std::ostringstream csv;
  csv << "n,L,l_inf,energy,energy_phase_l_inf,restarts\n";
  json params = json::array();
  for (const auto& r : results) {
    csv << n << "," << r.best_params.L << "," << r.l_inf << "," << r.energy << "," << r.energy_phase_l_inf << ","
        << r.restarts_used << "\n";
    params.push_back({{"n", n}, {"L", r.best_params.L}, {"w", w}, {"l_inf", r.l_inf}, {"params", r.best_params.params}});
  }
  write_text(out_path(c, "train_loader_n" + std::to_string(n), "csv"), csv.str());
  json out = {{"command", "train-loader"}, {"seed", c.seed}, {"restarts", restarts}, {"ansatz", params}};
  write_text(out_path(c, "loader_params_n" + std::to_string(n), "json"), out.dump(2) + "\n");
  return 0;
}

int qarith(const Common& c, const std::vector<int>& ns, const std::vector<int>& ps, int k, int M, int z, double eps) {
  std::ostringstream csv;
  csv << "primitive,n,p,toffoli_count,t_count,t_depth,logical_qubits\n";
  json rows = json::array();
  for (int n : ns)
    for (int p : ps) {
      if (p < 1 || p >= n) continue;
      const qdp::FixedPointFormat f{n, p};
      const std::vector<std::pair<std::string, qdp::ResourceCount>> prims{
          {"add", qdp::add_resources(f)},
          {"controlled_add", qdp::controlled_add_resources(f)},
          {"mul", qdp::mul_resources(f, std::min(z, n))},
          {"const_mul", qdp::const_mul_resources(f, std::min(z, n))},
          {"sqrt", qdp::sqrt_resources(f)},
          {"comparator", qdp::comparator_resources(f)},
          {"exp", qdp::exp_resources(f, {k, M, std::min(z, n)})},
          {"arcsin_sqrt", qdp::arcsin_sqrt_resources(f, {k, M, std::min(z, n)})},
          {"controlled_rotation", qdp::controlled_rotation_resources(f, eps)}};
      for (const auto& [name, r] : prims) {
        csv << name << "," << n << "," << p << "," << r.toffoli_count << "," << r.t_count << "," << r.t_depth << ","
            << r.logical_qubits << "\n";
        json row = qdp::to_json(r);
        row["primitive"] = name;
        row["n"] = n;
        row["p"] = p;
        rows.push_back(row);
      }
    }
  if (rows.empty()) throw qdp::InvalidInput("qarith: no (n, p) pair with 1 <= p < n");
  write_text(out_path(c, "qarith", "csv"), csv.str());
  if (c.format != "csv") {
    const json out = {{"command", "qarith"}, {"poly", {{"k", k}, {"M", M}, {"z", z}}}, {"eps", eps}, {"rows", rows}};
    write_text(out_path(c, "qarith", "json"), out.dump(2) + "\n");
  }
  return 0;
}

int table1(const Common& c, const std::string& method_filter, const std::string& auto_cfg, const std::string& tarf_cfg) {
  std::ostringstream csv;
  csv << kTable1Header;
  json rows = json::array();
  for (const auto& path : {auto_cfg, tarf_cfg}) {
    const auto cfg = qdp::load_json_file(path);
    const auto model = qdp::model_from_json(section(cfg, "model"));
    const auto contract = qdp::contract_from_json(section(cfg, "contract"));
    const auto est = qdp::estimator_from_json(cfg.value("estimator", json()));
    for (const auto m : {qdp::Method::riemann, qdp::Method::riemann_no_norm, qdp::Method::reparam}) {
      if (!method_filter.empty() && qdp::to_string(m) != method_filter) continue;
      const auto r = qdp::end_to_end(m, model, contract, est);
      csv << table1_row(r, model, contract);
      json row = qdp::to_json(r);
      row["contract"] = contract_name(contract);
      row["config"] = path;
      row["config_hash"] = qdp::config_hash(cfg);
      rows.push_back(row);
    }
  }
  write_text(out_path(c, "table1", "csv"), csv.str());
  if (c.format != "csv") write_text(out_path(c, "table1", "json"), json{{"command", "table1"}, {"rows", rows}}.dump(2) + "\n");
  std::cout << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum derivative pricing: resource estimates, pricing oracles and loader training"};
  app.require_subcommand(1);
  Common common;
  common.out = default_out_dir();
  auto add_common = [&](CLI::App* sc, bool needs_config) {
    auto* opt = sc->add_option("--config", common.config, "JSON config (see README for the schema)");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sc->add_option("--out", common.out, "output directory (default $QDP_OUT_DIR or ./qdp_out)");
    sc->add_option("--seed", common.seed, "random seed");
    sc->add_option("--format", common.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  };

  std::int64_t paths = 0;
  std::string sampling;
  auto* mc = app.add_subcommand("price-mc", "Monte Carlo price of the configured contract");
  add_common(mc, true);
  mc->add_option("--paths", paths, "number of paths (overrides /mc/paths)");
  mc->add_option("--sampling", sampling, "continuous or lattice (overrides /mc/model)");

  auto* ex = app.add_subcommand("price-exact", "exact price over the discretized lattice (desk scale)");
  add_common(ex, true);

  std::string method = "reparam";
  bool strict = false;
  auto* er = app.add_subcommand("estimate-resources", "end-to-end resource estimate");
  add_common(er, true);
  er->add_option("--method", method, "riemann, riemann-no-norm or reparam")
      ->check(CLI::IsMember({"riemann", "riemann-no-norm", "reparam"}));
  er->add_flag("--strict", strict, "fail when the error budget misses the target");

  auto* eb = app.add_subcommand("error-budget", "error budget components for a method");
  add_common(eb, true);
  eb->add_option("--method", method, "riemann, riemann-no-norm or reparam")
      ->check(CLI::IsMember({"riemann", "riemann-no-norm", "reparam"}));

  std::vector<double> eps_list;
  double alpha = 0.32, amplitude = 0.3;
  int seeds = 200;
  auto* iq = app.add_subcommand("iqae-demo", "simulated amplitude estimation sweep vs the classical baseline");
  add_common(iq, false);
  iq->add_option("--eps", eps_list, "target precisions, comma-separated")->delimiter(',');
  iq->add_option("--alpha", alpha, "1 - confidence")->check(CLI::Range(1e-9, 0.999));
  iq->add_option("--amplitude", amplitude, "true amplitude a")->check(CLI::Range(0.0, 1.0));
  iq->add_option("--seeds", seeds, "runs per precision")->check(CLI::PositiveNumber);

  int n = 5, restarts = 8;
  std::vector<int> depths;
  double w = 5.0;
  auto* tl = app.add_subcommand("train-loader", "train the Ry-CNOT Gaussian loader over depths");
  add_common(tl, false);
  tl->add_option("--n", n, "qubits")->check(CLI::Range(1, 8));
  tl->add_option("--L", depths, "depths, comma-separated")->delimiter(',')->check(CLI::Range(0, 14));
  tl->add_option("--restarts", restarts, "restarts per depth")->check(CLI::PositiveNumber);
  tl->add_option("--w", w, "half-width of the mesh")->check(CLI::PositiveNumber);

  std::vector<int> qn{34}, qp{2};
  int qk = 3, qM = 32, qz = 2;
  double qeps = 1e-4;
  auto* qa = app.add_subcommand("qarith", "resources of the arithmetic primitives");
  add_common(qa, false);
  qa->add_option("--n", qn, "register bits, comma-separated sweep")->delimiter(',')->check(CLI::Range(4, 64));
  qa->add_option("--p", qp, "integer bits, comma-separated sweep")->delimiter(',')->check(CLI::Range(1, 63));
  qa->add_option("--k", qk, "polynomial degree");
  qa->add_option("--M", qM, "polynomial subintervals");
  qa->add_option("--z", qz, "multiplication split");
  qa->add_option("--eps", qeps, "rotation precision");

  std::string t1_method, auto_cfg = std::string(QDP_SOURCE_DIR) + "/configs/benchmark_autocallable.json",
                         tarf_cfg = std::string(QDP_SOURCE_DIR) + "/configs/benchmark_tarf.json";
  auto* t1 = app.add_subcommand("table1", "three methods x two benchmark contracts, beside the reference values");
  add_common(t1, false);
  t1->add_option("--method", t1_method, "restrict to one method")
      ->check(CLI::IsMember({"riemann", "riemann-no-norm", "reparam"}));
  t1->add_option("--autocall-config", auto_cfg, "benchmark autocallable config")->check(CLI::ExistingFile);
  t1->add_option("--tarf-config", tarf_cfg, "benchmark TARF config")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*mc) return price_mc(common, paths, sampling);
    if (*ex) return price_exact(common);
    if (*er) return estimate_resources(common, method, strict);
    if (*eb) return error_budget(common, method);
    if (*iq) return iqae_demo(common, eps_list, alpha, amplitude, seeds);
    if (*tl) return train_loader(common, n, depths, restarts, w);
    if (*qa) return qarith(common, qn, qp, qk, qM, qz, qeps);
    if (*t1) return table1(common, t1_method, auto_cfg, tarf_cfg);
  } catch (const qdp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qdp::Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
