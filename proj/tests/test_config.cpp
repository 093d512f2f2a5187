#include <gtest/gtest.h>

#include "hlora/config.hpp"

using namespace hlora;
using cli::parse_config_text;

namespace {

std::string message_of(const std::string& text, const cli::Overrides& o = {}) {
  try {
    parse_config_text(text, o);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  const auto c = parse_config_text("# nothing here\n\n");
  const federation::ExperimentSettings d;
  EXPECT_EQ(c.settings.seed, d.seed);
  EXPECT_EQ(c.settings.clients, d.clients);
  EXPECT_EQ(c.settings.sampled_per_round, d.sampled_per_round);
  EXPECT_EQ(c.settings.rounds, d.rounds);
  EXPECT_EQ(c.settings.strategy, d.strategy);
  EXPECT_EQ(c.settings.train.learning_rate, d.train.learning_rate);
  EXPECT_EQ(c.layers, 2);
  EXPECT_EQ(c.output, "results.csv");
}

TEST(Config, ParsesValuesAndComments) {
  const auto c = parse_config_text(
      "seed = 42   # trailing\n"
      "strategy = naive\n"
      "clients = 10\n"
      "sampled_per_round = 4\n"
      "partition = iid\n"
      "timing = true\n"
      "layer_rank_caps = 4,6\n"
      "output = out/x.csv\n");
  EXPECT_EQ(c.settings.seed, 42u);
  EXPECT_EQ(c.settings.strategy, federation::Strategy::naive);
  EXPECT_EQ(c.settings.clients, 10u);
  EXPECT_TRUE(c.settings.iid);
  EXPECT_TRUE(c.settings.record_time);
  EXPECT_EQ(c.settings.layer_rank_caps, (std::vector<Index>{4, 6}));
  EXPECT_EQ(c.output, "out/x.csv");
}

TEST(Config, OverridesWin) {
  const auto c = parse_config_text("seed = 3\n", {{"seed", "7"}});
  EXPECT_EQ(c.settings.seed, 7u);
}

TEST(Config, SampledAboveClientsNamesBoth) {
  const auto msg = message_of("clients = 5\nsampled_per_round = 6\n");
  EXPECT_NE(msg.find("sampled_per_round"), std::string::npos);
  EXPECT_NE(msg.find("clients"), std::string::npos);
}

TEST(Config, RejectsBadInput) {
  EXPECT_NE(message_of("colour = blue\n").find("colour"), std::string::npos);
  EXPECT_NE(message_of("seed = 1\nseed = 2\n").find("duplicate"), std::string::npos);
  EXPECT_NE(message_of("rounds = many\n").find("rounds"), std::string::npos);
  EXPECT_NE(message_of("strategy = fedavg\n"), "");
  EXPECT_NE(message_of("just words\n"), "");
  EXPECT_NE(message_of("learning_rate = -1\n").find("learning_rate"), std::string::npos);
  EXPECT_NE(message_of("layers = 3\n").find("layers"), std::string::npos);
  EXPECT_NE(message_of("", {{"bogus", "1"}}).find("bogus"), std::string::npos);
  EXPECT_NE(message_of("rank_min = 6\nrank_max = 3\n"), "");
}

TEST(Config, MissingFileIsConfigError) {
  EXPECT_THROW(cli::parse_config("/nonexistent/hlora.cfg"), ConfigError);
}

TEST(Config, RenderRoundTrips) {
  const auto c = parse_config_text(
      "seed = 11\nstrategy = hlora_homogeneous\nclients = 12\nsampled_per_round = 3\n"
      "learning_rate = 0.037\nalpha = 0.25\nlayers = 1\ninput_dim = 9\noutput = r.csv\n");
  const auto text = cli::render_config(c);
  EXPECT_EQ(cli::render_config(parse_config_text(text)), text);
  EXPECT_EQ(parse_config_text(text).settings.train.learning_rate, 0.037);
}

TEST(Config, KnownKeysAreUnique) {
  auto keys = cli::known_keys();
  std::sort(keys.begin(), keys.end());
  EXPECT_EQ(std::adjacent_find(keys.begin(), keys.end()), keys.end());
}
