#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "swn/dataset.hpp"
#include "swn/experiment.hpp"
#include "swn/model.hpp"
#include "swn/vocab.hpp"

namespace swn {

// Flat key = value settings for every command. Unset keys keep the defaults
// of the underlying configs; `seed` seeds synthesis, vocabulary and model.
struct RunConfig {
  SynthConfig synth;
  VocabConfig vocab;
  ModelConfig model;
  double test_fraction = 0.2;
  // Without an explicit word count, commands use the dataset's class count.
  bool words_given = false;

  void default_words(int class_count) {
    if (!words_given) vocab.words_per_block = static_cast<std::size_t>(class_count);
  }

  PipelineConfig pipeline() const { return {vocab, model}; }
  json to_json() const;
};

// Keys accepted in a config file, in documentation order.
const std::vector<std::string>& run_config_keys();

// Applies `text` on top of `cfg`. Unknown keys, tables, malformed values and
// values of the wrong type throw ConfigError naming `origin`.
void apply_run_config(RunConfig& cfg, std::string_view text, const std::string& origin);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace swn
