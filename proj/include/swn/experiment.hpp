#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swn/dataset.hpp"
#include "swn/metrics.hpp"
#include "swn/model.hpp"
#include "swn/vocab.hpp"

namespace swn {

enum class Variant { full, no_cclm, no_sd };

std::string variant_name(Variant v);
// Throws ConfigError for anything but full, no_cclm, no_sd.
Variant parse_variant(const std::string& name);

// Everything one train/evaluate run needs. The model's scales drive the
// vocabulary scales.
struct PipelineConfig {
  VocabConfig vocab;
  ModelConfig model;

  // Same config with both the vocabulary and the model seeded from `seed`.
  PipelineConfig reseeded(std::uint64_t seed) const;
};

struct VariantResult {
  Variant variant = Variant::full;
  MetricsReport metrics;
  std::vector<EpochStats> history;
  std::string vocab_fingerprint;  // empty for no_sd
};

// full:    tokens at every configured scale, configured lambda.
// no_cclm: tokens at the first configured scale only, lambda = 0.
// no_sd:   raw channels into a single encoder, lambda = 0.
// `prebuilt` is reused when it covers the scales the variant needs.
VariantResult run_variant(const Dataset& train, const Dataset& test, Variant variant,
                          const PipelineConfig& cfg, const VocabularyFit* prebuilt = nullptr);

struct SweepRow {
  std::string param;
  std::string value;
  double acc = 0.0;
  double maf1 = 0.0;
};

// Supported params:
//   lambda       full variant with the given lambda
//   scale_count  full variant on the first N of [5, 10, 25, 50, 100]
//   words        no_cclm variant with N words per block
//   word_length  no_cclm variant at the single scale N
std::vector<SweepRow> run_sweep(const Dataset& train, const Dataset& test,
                                const std::string& param, const std::vector<std::string>& values,
                                const PipelineConfig& cfg);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace swn
