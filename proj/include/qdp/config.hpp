#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdp/circuit_estimator.hpp"
#include "qdp/common.hpp"
#include "qdp/contracts.hpp"
#include "qdp/market_model.hpp"
#include "qdp/qarith.hpp"

namespace qdp {

using json = nlohmann::json;

// Schema violation; what() starts with the JSON pointer of the offending key.
struct ConfigError : InvalidInput {
  using InvalidInput::InvalidInput;
};

namespace cfg {

inline std::string at(const std::string& path, const std::string& key) { return path + "/" + key; }

inline const json& field(const json& j, const std::string& path, const std::string& key) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  if (!j.contains(key)) throw ConfigError(at(path, key) + ": required key missing");
  return j.at(key);
}

inline double number(const json& j, const std::string& path, const std::string& key) {
  const auto& v = field(j, path, key);
  if (!v.is_number()) throw ConfigError(at(path, key) + ": expected a number");
  return v.get<double>();
}

inline double number_or(const json& j, const std::string& path, const std::string& key, double def) {
  return j.contains(key) ? number(j, path, key) : def;
}

inline int integer(const json& j, const std::string& path, const std::string& key) {
  const auto& v = field(j, path, key);
  if (!v.is_number_integer()) throw ConfigError(at(path, key) + ": expected an integer");
  return v.get<int>();
}

inline int integer_or(const json& j, const std::string& path, const std::string& key, int def) {
  return j.contains(key) ? integer(j, path, key) : def;
}

inline std::string string(const json& j, const std::string& path, const std::string& key) {
  const auto& v = field(j, path, key);
  if (!v.is_string()) throw ConfigError(at(path, key) + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<double> numbers(const json& j, const std::string& path, const std::string& key) {
  const auto& v = field(j, path, key);
  if (!v.is_array()) throw ConfigError(at(path, key) + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(at(path, key) + "/" + std::to_string(i) + ": expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

// Rethrows domain validation failures with the section pointer attached.
template <class F>
void checked(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace cfg

// {"r", "sigmas": [d], "rho": [[d x d]] (default identity), "dt", "T", "s0": [d]}
[[nodiscard]] inline GBMParams model_from_json(const json& j, const std::string& path = "/model") {
  GBMParams p;
  p.r = cfg::number(j, path, "r");
  const auto sig = cfg::numbers(j, path, "sigmas");
  p.d = static_cast<int>(sig.size());
  p.sigmas = Eigen::Map<const Eigen::VectorXd>(sig.data(), p.d);
  const auto s0 = cfg::numbers(j, path, "s0");
  p.s0 = Eigen::Map<const Eigen::VectorXd>(s0.data(), static_cast<Eigen::Index>(s0.size()));
  p.dt = cfg::number(j, path, "dt");
  p.T = cfg::integer(j, path, "T");
  p.rho = Eigen::MatrixXd::Identity(p.d, p.d);
  if (j.contains("rho")) {
    const auto& rj = j.at("rho");
    if (!rj.is_array() || rj.size() != static_cast<std::size_t>(p.d))
      throw ConfigError(path + "/rho: expected a " + std::to_string(p.d) + "x" + std::to_string(p.d) + " array");
    for (int a = 0; a < p.d; ++a) {
      const auto rp = path + "/rho/" + std::to_string(a);
      const auto& row = rj[a];
      if (!row.is_array() || row.size() != static_cast<std::size_t>(p.d)) throw ConfigError(rp + ": wrong length");
      for (int b = 0; b < p.d; ++b) {
        if (!row[b].is_number()) throw ConfigError(rp + "/" + std::to_string(b) + ": expected a number");
        p.rho(a, b) = row[b].get<double>();
      }
    }
  }
  cfg::checked(path, [&] { validate(p); });
  return p;
}

[[nodiscard]] inline json to_json(const GBMParams& p) {
  json rho = json::array();
  for (int a = 0; a < p.d; ++a) {
    json row = json::array();
    for (int b = 0; b < p.d; ++b) row.push_back(p.rho(a, b));
    rho.push_back(row);
  }
  return {{"r", p.r},
          {"sigmas", std::vector<double>(p.sigmas.data(), p.sigmas.data() + p.d)},
          {"rho", rho},
          {"dt", p.dt},
          {"T", p.T},
          {"s0", std::vector<double>(p.s0.data(), p.s0.data() + p.s0.size())}};
}

// Autocallable: {"type": "autocallable", "binaries": [{"K", "t", "p"}], "K_put", "b", "k",
//   "barrier_dates": [...], "basket": "worst_of" | "best_of"}
// TARF: {"type": "tarf", "F", "K_upper", "K_lower", "b", "alpha", "C", "payment_times": [...]}
[[nodiscard]] inline ContractSpec contract_from_json(const json& j, const std::string& path = "/contract") {
  const auto type = cfg::string(j, path, "type");
  if (type == "autocallable") {
    AutocallableSpec s;
    const auto& bj = cfg::field(j, path, "binaries");
    if (!bj.is_array()) throw ConfigError(path + "/binaries: expected an array");
    for (std::size_t i = 0; i < bj.size(); ++i) {
      const auto bp = path + "/binaries/" + std::to_string(i);
      s.binaries.push_back({cfg::number(bj[i], bp, "K"), cfg::number(bj[i], bp, "t"), cfg::number(bj[i], bp, "p")});
    }
    s.K_put = cfg::number(j, path, "K_put");
    s.b = cfg::number(j, path, "b");
    s.k = cfg::number_or(j, path, "k", 0.0);
    if (j.contains("barrier_dates")) s.barrier_dates = cfg::numbers(j, path, "barrier_dates");
    if (j.contains("basket")) {
      const auto rule = cfg::string(j, path, "basket");
      if (rule == "worst_of") s.basket = BasketRule::worst_of;
      else if (rule == "best_of") s.basket = BasketRule::best_of;
      else throw ConfigError(path + "/basket: expected worst_of or best_of");
    }
    cfg::checked(path, [&] { validate(s); });
    return s;
  }
  if (type == "tarf") {
    TARFSpec s;
    s.F = cfg::number(j, path, "F");
    s.K_upper = cfg::number(j, path, "K_upper");
    s.K_lower = cfg::number(j, path, "K_lower");
    s.b = cfg::number(j, path, "b");
    s.alpha = cfg::number(j, path, "alpha");
    s.C = cfg::number(j, path, "C");
    s.payment_times = cfg::numbers(j, path, "payment_times");
    cfg::checked(path, [&] { validate(s); });
    return s;
  }
  throw ConfigError(path + "/type: expected autocallable or tarf, got '" + type + "'");
}

[[nodiscard]] inline json to_json(const ContractSpec& c) {
  if (const auto* a = std::get_if<AutocallableSpec>(&c)) {
    json bins = json::array();
    for (const auto& l : a->binaries) bins.push_back({{"K", l.K}, {"t", l.t}, {"p", l.p}});
    return {{"type", "autocallable"}, {"binaries", bins}, {"K_put", a->K_put}, {"b", a->b}, {"k", a->k},
            {"barrier_dates", a->barrier_dates},
            {"basket", a->basket == BasketRule::worst_of ? "worst_of" : "best_of"}};
  }
  const auto& t = std::get<TARFSpec>(c);
  return {{"type", "tarf"}, {"F", t.F}, {"K_upper", t.K_upper}, {"K_lower", t.K_lower}, {"b", t.b},
          {"alpha", t.alpha}, {"C", t.C}, {"payment_times", t.payment_times}};
}

[[nodiscard]] inline FixedPointFormat fmt_from_json(const json& j, const std::string& path) {
  FixedPointFormat f{cfg::integer(j, path, "n"), cfg::integer(j, path, "p")};
  cfg::checked(path, [&] { validate(f); });
  return f;
}

[[nodiscard]] inline SigmaMaxReading sigma_reading_from_string(const std::string& s, const std::string& path) {
  if (s == "sqrt_eigenvalue") return SigmaMaxReading::sqrt_eigenvalue;
  if (s == "raw_eigenvalue") return SigmaMaxReading::raw_eigenvalue;
  throw ConfigError(path + ": expected sqrt_eigenvalue or raw_eigenvalue");
}

// Every key optional; missing keys keep the EstimatorConfig defaults.
[[nodiscard]] inline EstimatorConfig estimator_from_json(const json& j, const std::string& path = "/estimator") {
  EstimatorConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  if (j.contains("fmt")) c.fmt = fmt_from_json(j.at("fmt"), path + "/fmt");
  if (j.contains("payoff_fmt")) c.payoff_fmt = fmt_from_json(j.at("payoff_fmt"), path + "/payoff_fmt");
  if (j.contains("poly")) {
    const auto& pj = j.at("poly");
    const auto pp = path + "/poly";
    c.poly = {cfg::integer_or(pj, pp, "k", c.poly.k), cfg::integer_or(pj, pp, "M", c.poly.M),
              cfg::integer_or(pj, pp, "z", c.poly.z)};
    if (c.poly.k < 0 || c.poly.M < 1 || c.poly.z < 1) throw ConfigError(pp + ": need k >= 0, M >= 1, z >= 1");
  }
  if (j.contains("reparam")) {
    const auto& rj = j.at("reparam");
    const auto rp = path + "/reparam";
    c.reparam.n = cfg::integer_or(rj, rp, "n", c.reparam.n);
    c.reparam.L = cfg::integer_or(rj, rp, "L", c.reparam.L);
    c.reparam.p = cfg::integer_or(rj, rp, "p", c.reparam.p);
    if (c.reparam.n < 1 || c.reparam.L < 0 || c.reparam.p < 1) throw ConfigError(rp + ": need n >= 1, L >= 0, p >= 1");
  }
  c.w = cfg::number_or(j, path, "w", c.w);
  c.beta = cfg::number_or(j, path, "beta", c.beta);
  c.eps_rot = cfg::number_or(j, path, "eps_rot", c.eps_rot);
  c.eps_f = cfg::number_or(j, path, "eps_f", c.eps_f);
  c.eps_dens = cfg::number_or(j, path, "eps_dens", c.eps_dens);
  c.eps_amp = cfg::number_or(j, path, "eps_amp", c.eps_amp);
  c.eps_poly = cfg::number_or(j, path, "eps_poly", c.eps_poly);
  c.target_error = cfg::number_or(j, path, "target_error", c.target_error);
  c.confidence = cfg::number_or(j, path, "confidence", c.confidence);
  if (j.contains("sigma_reading"))
    c.sigma_reading = sigma_reading_from_string(cfg::string(j, path, "sigma_reading"), path + "/sigma_reading");
  for (auto [name, v] : {std::pair{"eps_rot", c.eps_rot}, std::pair{"eps_f", c.eps_f}, std::pair{"eps_amp", c.eps_amp},
                         std::pair{"confidence", c.confidence}, std::pair{"target_error", c.target_error}})
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(path + "/" + name + ": must lie in (0,1)");
  if (!(c.w > 0.0)) throw ConfigError(path + "/w: must be positive");
  return c;
}

[[nodiscard]] inline json to_json(const EstimatorConfig& c) {
  return {{"fmt", {{"n", c.fmt.n}, {"p", c.fmt.p}}},
          {"payoff_fmt", {{"n", c.payoff_fmt.n}, {"p", c.payoff_fmt.p}}},
          {"poly", {{"k", c.poly.k}, {"M", c.poly.M}, {"z", c.poly.z}}},
          {"reparam", {{"n", c.reparam.n}, {"L", c.reparam.L}, {"p", c.reparam.p}}},
          {"w", c.w},
          {"beta", c.beta},
          {"eps_rot", c.eps_rot},
          {"eps_f", c.eps_f},
          {"eps_dens", c.eps_dens},
          {"eps_amp", c.eps_amp},
          {"eps_poly", c.eps_poly},
          {"target_error", c.target_error},
          {"confidence", c.confidence},
          {"sigma_reading", c.sigma_reading == SigmaMaxReading::sqrt_eigenvalue ? "sqrt_eigenvalue" : "raw_eigenvalue"}};
}

[[nodiscard]] inline json to_json(const ResourceCount& r) {
  return {{"toffoli_count", r.toffoli_count}, {"t_count", r.t_count}, {"t_depth", r.t_depth},
          {"logical_qubits", r.logical_qubits}};
}

[[nodiscard]] inline json to_json(const Estimate& e) {
  json stages = json::array();
  for (const auto& s : e.stages) {
    json items = json::array();
    for (const auto& [label, rc] : s.items) items.push_back({{"item", label}, {"resources", to_json(rc)}});
    stages.push_back({{"stage", s.label}, {"items", items}});
  }
  return {{"name", e.name}, {"total", to_json(e.total)}, {"stages", stages}};
}

[[nodiscard]] inline json to_json(const ErrorBudget& b) {
  return {{"eps_trunc", b.eps_trunc}, {"eps_disc", b.eps_disc}, {"eps_arith", b.eps_arith}, {"eps_amp", b.eps_amp},
          {"scale", b.scale}, {"eps_total", b.eps_total}};
}

[[nodiscard]] inline json to_json(const EndToEndReport& r) {
  return {{"method", to_string(r.method)},
          {"loading", to_json(r.loading)},
          {"payoff", to_json(r.payoff)},
          {"oracle", to_json(r.oracle)},
          {"grover", to_json(r.grover)},
          {"n_oracle", r.n_oracle},
          {"total_t_count", r.total_t_count},
          {"total_t_depth", r.total_t_depth},
          {"total_qubits", r.total_qubits},
          {"budget", to_json(r.budget)},
          {"p_max", r.p_max},
          {"scale_pmax_T", r.scale_pmax_T},
          {"feasible", r.feasible},
          {"meets_target", r.meets_target},
          {"binding_component", r.binding_component},
          {"f_delta", r.f_delta}};
}

[[nodiscard]] inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": JSON parse error: " + e.what());
  }
}

// FNV-1a over the canonical dump; identifies the exact config a report came from.
[[nodiscard]] inline std::string config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace qdp
