#include <gtest/gtest.h>

#include "locprune/config.hpp"
#include "locprune/pipeline.hpp"
#include "locprune/types.hpp"

using namespace locprune;

TEST(RunConfig, DefaultsAreReadable) {
  RunConfig cfg;
  EXPECT_EQ(cfg.get("method"), "molp");
  EXPECT_DOUBLE_EQ(cfg.get_double("alpha"), 0.2);
  EXPECT_DOUBLE_EQ(cfg.get_double("eta"), 0.4);
  EXPECT_EQ(cfg.get("g0"), "auto");
  EXPECT_DOUBLE_EQ(cfg.get_double("c_asym"), 4.0);
  EXPECT_EQ(cfg.get("penalty"), "log1.1");
  EXPECT_FALSE(cfg.is_set("alpha"));
}

TEST(RunConfig, EveryKeyHasHelpAndDefault) {
  for (const auto& k : config_keys()) {
    EXPECT_NE(std::string(k.help), "") << k.name;
    EXPECT_EQ(find_config_key(k.name), &k);
  }
  EXPECT_EQ(find_config_key("nope"), nullptr);
}

TEST(RunConfig, UnknownKeyRejected) {
  RunConfig cfg;
  EXPECT_THROW(cfg.set("alhpa", "0.1"), ConfigError);
  EXPECT_THROW(cfg.get("alhpa"), ConfigError);
}

TEST(RunConfig, TypedGettersReject) {
  RunConfig cfg;
  cfg.set("alpha", "abc");
  EXPECT_THROW(cfg.get_double("alpha"), ConfigError);
  cfg.set("seed", "-3");
  EXPECT_THROW(cfg.get_u64("seed"), ConfigError);
  cfg.set("wbs_r", "1.5");
  EXPECT_THROW(cfg.get_int("wbs_r"), ConfigError);
}

TEST(RunConfig, LoadTextWithComments) {
  RunConfig cfg;
  cfg.load_text("# comment\nalpha = 0.1\n\n  eta=0.3  # trailing\nsignal = blocks, teeth10,\n");
  EXPECT_DOUBLE_EQ(cfg.get_double("alpha"), 0.1);
  EXPECT_DOUBLE_EQ(cfg.get_double("eta"), 0.3);
  EXPECT_EQ(cfg.get_list("signal"), (std::vector<std::string>{"blocks", "teeth10"}));
  EXPECT_THROW(cfg.load_text("alpha 0.1\n"), ConfigError);
}

TEST(RunConfig, UnsetRestoresDefault) {
  RunConfig cfg;
  cfg.set("alpha", "0.05");
  cfg.unset("alpha");
  EXPECT_DOUBLE_EQ(cfg.get_double("alpha"), 0.2);
}

TEST(RunConfig, MissingFileIsInputError) {
  RunConfig cfg;
  EXPECT_THROW(cfg.load_file("/nonexistent/locprune.cfg"), InputError);
}

TEST(DetectConfig, FromDefaults) {
  const auto d = detect_config(RunConfig{});
  EXPECT_EQ(d.method, Method::Molp);
  EXPECT_EQ(d.g0, 10);
  EXPECT_EQ(d.window_variance, WindowVariance::Pooled);
  EXPECT_EQ(d.penalty.kind, Penalty::Kind::LogPow);
  EXPECT_DOUBLE_EQ(d.penalty.value, 1.1);
}

TEST(DetectConfig, AutoG0UsesCallerValue) {
  EXPECT_EQ(detect_config(RunConfig{}, 40).g0, 40);
  RunConfig cfg;
  cfg.set("g0", "25");
  EXPECT_EQ(detect_config(cfg, 40).g0, 25);
}

TEST(DetectConfig, RangeChecks) {
  const std::vector<std::pair<const char*, const char*>> bad = {
      {"alpha", "0"},       {"alpha", "1"},     {"eta", "1.5"},      {"g0", "1"},
      {"c_asym", "0.5"},    {"n_cap", "31"},    {"n_cap", "0"},      {"method", "molp,culp"},
      {"penalty", "magic"}, {"sort", "random"}, {"variance", "mad"}, {"window_variance", "biased"},
      {"wbs_r", "0"}};
  for (const auto& [k, v] : bad) {
    RunConfig cfg;
    cfg.set(k, v);
    EXPECT_THROW(detect_config(cfg), ConfigError) << k << "=" << v;
  }
}

TEST(DetectConfig, CulpWithPValueSortRejected) {
  RunConfig cfg;
  cfg.set("method", "culp");
  cfg.set("sort", "pvalue");
  EXPECT_THROW(detect_config(cfg), ConfigError);
}
