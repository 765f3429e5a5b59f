#include <gtest/gtest.h>

#include <fstream>

#include "pedsim/config.hpp"

using namespace pedsim;
using nlohmann::json;

namespace {

std::string error_of(const json &j)
{
  try {
    parse_config(j);
  } catch (const ConfigError &e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(ParseConfig, EmptyObjectGivesDefaults)
{
  const auto cfg = parse_config(json::object());
  EXPECT_EQ(to_json(cfg), to_json(ExperimentConfig{}));
}

TEST(ParseConfig, CommittedDefaultsAreCanonical)
{
  std::ifstream in(PEDSIM_SOURCE_DIR "/config/default.json");
  const auto j = json::parse(in);
  EXPECT_EQ(j, to_json(ExperimentConfig{}));
}

TEST(ParseConfig, OverridesApply)
{
  const auto cfg = parse_config(json{{"params", {{"K_d", 2.5}, {"N", 10}}}, {"batch", {{"seeds", {4, 5}}}}});
  EXPECT_EQ(cfg.params.K_d, 2.5);
  EXPECT_EQ(cfg.params.N, 10);
  EXPECT_EQ(cfg.batch.seeds, (std::vector<std::uint64_t>{4, 5}));
}

TEST(ParseConfig, UnknownKeyNamesThePath)
{
  const auto e = error_of(json{{"params", {{"w_saftey", 1.0}}}});
  EXPECT_EQ(e.rfind("params.w_saftey", 0), 0u) << e;
  EXPECT_NE(error_of(json{{"bogus", 1}}).find("bogus"), std::string::npos);
}

TEST(ParseConfig, TypeMismatchNamesTheField)
{
  const auto e = error_of(json{{"params", {{"d_min", "four"}}}});
  EXPECT_EQ(e.rfind("params.d_min", 0), 0u) << e;
  EXPECT_NE(error_of(json{{"params", {{"N", 2.5}}}}).find("params.N"), std::string::npos);
}

TEST(ParseConfig, BadEnumNamesTheField)
{
  const auto e = error_of(json{{"batch", {{"controllers", {"iampdm", "foo"}}}}});
  EXPECT_NE(e.find("batch.controllers[1]"), std::string::npos) << e;
}

TEST(ParseConfig, InvariantViolationsAreConfigErrors)
{
  EXPECT_FALSE(error_of(json{{"params", {{"a_min", 1.0}}}}).empty());
  EXPECT_FALSE(error_of(json{{"sim", {{"controller_every", 3}}}}).empty());
  EXPECT_FALSE(error_of(json{{"schema", "pedsim.config/0"}}).empty());
}

TEST(ConfigHash, StableUnderKeyOrder)
{
  const json a = json::parse(R"({"params": {"K_d": 2.0, "d_min": 3.0}, "sim": {"T_max": 60}})");
  const json b = json::parse(R"({"sim": {"T_max": 60}, "params": {"d_min": 3.0, "K_d": 2.0}})");
  EXPECT_EQ(config_hash(parse_config(a)), config_hash(parse_config(b)));
  EXPECT_EQ(config_hash(parse_config(a)).size(), 16u);
}

TEST(ConfigHash, IgnoresDeploymentFields)
{
  const auto base = config_hash(ExperimentConfig{});
  ExperimentConfig c;
  c.serve.port = 9999;
  c.serve.bind = "0.0.0.0";
  c.serve.static_dir = "/tmp/www";
  c.batch.threads = 7;
  EXPECT_EQ(config_hash(c), base);
  c.params.d_min = 3.5;
  EXPECT_NE(config_hash(c), base);
}

TEST(ConfigHash, Sha256KnownAnswer)
{
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(ConfigJson, RoundTrip)
{
  ExperimentConfig c;
  c.params.w_safe = 123.5;
  c.params.prediction_mode = PredictionMode::FrozenZ;
  c.tuning.free_params = {"d_min"};
  c.batch.scenarios = {ScenarioKind::DelayedCrossing};
  const auto back = parse_config(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
}
