#include <gtest/gtest.h>

#include "caputo_ms/config.hpp"
#include "caputo_ms/errors.hpp"

using namespace caputo_ms;

TEST(Config, ParsesFlatKeyValue) {
  const auto c = parse_config(
      "# comment\n"
      "alpha = 0.8   # trailing\n"
      "dt = 1/128\n"
      "checks = theorem32, cocycle\n"
      "base_points = 0, 1.5\n"
      "seed = 18446744073709551615\n"
      "field = rotation\n");
  EXPECT_EQ(c.frac.alpha, 0.8);
  EXPECT_EQ(c.dt, 1.0 / 128);
  EXPECT_EQ(c.checks, (std::vector<std::string>{"theorem32", "cocycle"}));
  EXPECT_EQ(c.base_points.size(), 2u);
  EXPECT_EQ(c.seed, 18446744073709551615ULL);
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.model().field.name, rotation_forced(1, 0.5, 0.0).name);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config("alpha 0.8\n"), ConfigError);
  EXPECT_THROW(parse_config("alpah = 0.8\n"), ConfigError);
  EXPECT_THROW(parse_config("alpha = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("reps = -3\n"), ConfigError);
  EXPECT_THROW(parse_config("alpha = 1.2\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("checks = bogus\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("T = 1\ndt = 0.3\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("field = cubic\n").validate(), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/x.cfg"), ConfigError);
}

TEST(Config, HashTracksSemanticFields) {
  const ExperimentConfig base;
  const std::string h = base.hash();
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(h, ExperimentConfig{}.hash());
  ExperimentConfig out = base;
  out.output = "elsewhere";
  EXPECT_EQ(out.hash(), h);
  for (const char* line : {"alpha = 0.76", "varrho = 4.5", "hurst = 0.71", "lambda = 0.9", "dim = 2", "field = zero",
                           "field.kappa = 0.4", "omega = 2", "T = 4", "dt = 1/128", "reps = 100", "seed = 1",
                           "checks = theorem32", "x0 = 2", "base_points = 1", "cocycle.reps = 5",
                           "equilip.theta = 2", "omega.nmax = 3"}) {
    EXPECT_NE(parse_config(line).hash(), h) << line;
  }
  EXPECT_EQ(parse_config("alpha = 0.75\n").hash(), h);
}
