#include <gtest/gtest.h>

#include <functional>

#include "qdp/config.hpp"

using namespace qdp;

namespace {

json benchmark(const std::string& name) { return load_json_file(std::string(QDP_SOURCE_DIR) + "/configs/" + name); }

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ModelRoundTrip) {
  const auto j = benchmark("benchmark_autocallable.json");
  const auto m = model_from_json(j.at("model"));
  EXPECT_EQ(m.d, 3);
  EXPECT_EQ(m.T, 20);
  const auto back = model_from_json(to_json(m));
  EXPECT_EQ(back.sigmas, m.sigmas);
  EXPECT_EQ(back.rho, m.rho);
  EXPECT_EQ(back.dt, m.dt);
}

TEST(Config, ContractRoundTrip) {
  for (const auto* name : {"benchmark_autocallable.json", "benchmark_tarf.json", "small_autocallable.json",
                           "weekly_tarf.json"}) {
    const auto c = contract_from_json(benchmark(name).at("contract"));
    EXPECT_EQ(to_json(contract_from_json(to_json(c))), to_json(c)) << name;
  }
}

TEST(Config, EstimatorRoundTrip) {
  const auto e = estimator_from_json(benchmark("benchmark_tarf.json").at("estimator"));
  const auto back = estimator_from_json(to_json(e));
  EXPECT_EQ(to_json(back), to_json(e));
}

TEST(Config, BenchmarkShapes) {
  const auto a = benchmark("benchmark_autocallable.json");
  const auto c = std::get<AutocallableSpec>(contract_from_json(a.at("contract")));
  EXPECT_EQ(c.binaries.size(), 5u);
  EXPECT_EQ(c.barrier_dates.size(), 20u);
  const auto m = model_from_json(a.at("model"));
  EXPECT_DOUBLE_EQ(m.sigmas.maxCoeff(), 0.4);
  EXPECT_DOUBLE_EQ(m.sigmas.minCoeff(), 0.1);
  const auto t = benchmark("benchmark_tarf.json");
  EXPECT_EQ(model_from_json(t.at("model")).T, 26);
  EXPECT_EQ(std::get<TARFSpec>(contract_from_json(t.at("contract"))).payment_times.size(), 26u);
}

TEST(Config, ErrorsCarryJsonPointer) {
  auto j = benchmark("benchmark_autocallable.json");
  j["model"]["sigmas"] = "0.2";
  EXPECT_EQ(error_of([&] { (void)model_from_json(j.at("model")); }), "/model/sigmas: expected an array of numbers");
  j = benchmark("benchmark_autocallable.json");
  j["model"]["rho"][1][2] = "x";
  EXPECT_EQ(error_of([&] { (void)model_from_json(j.at("model")); }), "/model/rho/1/2: expected a number");
  j = benchmark("benchmark_autocallable.json");
  j["model"].erase("dt");
  EXPECT_EQ(error_of([&] { (void)model_from_json(j.at("model")); }), "/model/dt: required key missing");
  j = benchmark("benchmark_autocallable.json");
  j["contract"]["type"] = "swap";
  EXPECT_NE(error_of([&] { (void)contract_from_json(j.at("contract")); }).find("/contract/type"), std::string::npos);
  j = benchmark("benchmark_autocallable.json");
  j["estimator"]["eps_amp"] = 2.0;
  EXPECT_EQ(error_of([&] { (void)estimator_from_json(j.at("estimator")); }), "/estimator/eps_amp: must lie in (0,1)");
}

TEST(Config, SemanticViolationsAreConfigErrors) {
  auto j = benchmark("benchmark_autocallable.json");
  j["model"]["rho"][0][1] = 0.5;  // asymmetric
  EXPECT_NE(error_of([&] { (void)model_from_json(j.at("model")); }).rfind("/model", 0), std::string::npos);
}

TEST(Config, MalformedFixtureNamesThePointer) {
  const auto j = load_json_file(std::string(QDP_SOURCE_DIR) + "/tests/data/malformed_config.json");
  EXPECT_EQ(error_of([&] { (void)model_from_json(j.at("model")); }), "/model/sigmas: expected an array of numbers");
  EXPECT_NE(error_of([&] { (void)load_json_file("/nonexistent.json"); }).find("cannot open"), std::string::npos);
}

TEST(Config, HashIsStableAndSensitive) {
  auto j = benchmark("benchmark_tarf.json");
  const auto h = config_hash(j);
  EXPECT_EQ(h, config_hash(benchmark("benchmark_tarf.json")));
  j["model"]["r"] = 0.01;
  EXPECT_NE(h, config_hash(j));
}
