#include <algorithm>

#include "doctest.h"
#include "swn/error.hpp"
#include "swn/run_config.hpp"

using namespace swn;

TEST_CASE("empty config keeps defaults") {
  RunConfig cfg;
  apply_run_config(cfg, "# nothing\n\n", "t");
  CHECK(cfg.to_json() == RunConfig{}.to_json());
  CHECK_FALSE(cfg.words_given);
}

TEST_CASE("keys reach the underlying configs") {
  RunConfig cfg;
  apply_run_config(cfg,
                   "seed = 9\n"
                   "scales = [5, 20]\n"
                   "words = 4\n"
                   "lambda = 0.25\n"
                   "epochs = 3\n"
                   "dilations = [1, 3, 9]\n"
                   "sigma = 0.5\n"
                   "test_fraction = 0.3\n",
                   "t");
  CHECK(cfg.synth.seed == 9);
  CHECK(cfg.vocab.seed == 9);
  CHECK(cfg.model.seed == 9);
  CHECK(cfg.vocab.scales == std::vector<std::size_t>{5, 20});
  CHECK(cfg.model.scales == std::vector<std::size_t>{5, 20});
  CHECK(cfg.vocab.words_per_block == 4);
  CHECK(cfg.words_given);
  CHECK(cfg.model.lambda == 0.25);
  CHECK(cfg.model.epochs == 3);
  CHECK(cfg.model.dilations == std::vector<std::size_t>{1, 3, 9});
  CHECK(cfg.synth.noise_sigma == 0.5);
  CHECK(cfg.test_fraction == 0.3);
  CHECK(cfg.pipeline().model.lambda == 0.25);
}

TEST_CASE("later keys win over seed") {
  RunConfig cfg;
  apply_run_config(cfg, "seed = 1\nsynth_seed = 2\n", "t");
  CHECK(cfg.synth.seed == 2);
  CHECK(cfg.model.seed == 1);
}

TEST_CASE("default words follow the class count") {
  RunConfig cfg;
  cfg.default_words(5);
  CHECK(cfg.vocab.words_per_block == 5);
  apply_run_config(cfg, "words = 2\n", "t");
  cfg.default_words(5);
  CHECK(cfg.vocab.words_per_block == 2);
}

TEST_CASE("malformed configs are config errors") {
  RunConfig cfg;
  CHECK_THROWS_AS(apply_run_config(cfg, "bogus = 1\n", "t"), ConfigError);
  CHECK_THROWS_AS(apply_run_config(cfg, "epochs = many\n", "t"), ConfigError);
  CHECK_THROWS_AS(apply_run_config(cfg, "epochs = 1.5\n", "t"), ConfigError);
  CHECK_THROWS_AS(apply_run_config(cfg, "lambda = [1, 2]\n", "t"), ConfigError);
  CHECK_THROWS_AS(apply_run_config(cfg, "scales = [5, x]\n", "t"), ConfigError);
  CHECK_THROWS_AS(apply_run_config(cfg, "[model]\nepochs = 2\n", "t"), ConfigError);
  CHECK_THROWS_AS(apply_run_config(cfg, "epochs = 2\nepochs = 3\n", "t"), ConfigError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/swn.toml"), ConfigError);
}

TEST_CASE("key list is documented") {
  const auto& keys = run_config_keys();
  CHECK(std::find(keys.begin(), keys.end(), "learning_rate") != keys.end());
  CHECK(std::find(keys.begin(), keys.end(), "words") != keys.end());
}
