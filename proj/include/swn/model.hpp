#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swn/autodiff.hpp"
#include "swn/dataset.hpp"
#include "swn/discretize.hpp"
#include "swn/metrics.hpp"
#include "swn/optim.hpp"

namespace swn {

struct ModelConfig {
  std::vector<std::size_t> scales{10, 25, 50};
  std::size_t embed_dim = 16;
  std::size_t layer_depth = 3;
  std::size_t kernel_size = 3;
  std::size_t out_channels = 50;
  std::vector<std::size_t> dilations{1, 2, 4};
  std::size_t sfi_out_channels = 4;
  std::size_t sfi_kernel = 3;
  double lambda = 0.5;
  double tau = 1.0;
  std::size_t batch_size = 30;
  std::size_t epochs = 50;
  double learning_rate = 0.001;
  std::uint64_t seed = 0;

  // Throws ConfigError on an invalid combination.
  void validate() const;
  json to_json() const;
  static ModelConfig from_json(const json& j);
};

enum class InputMode { tokens, raw };

// Data-dependent sizes the parameters are built for.
struct ModelDims {
  std::size_t channel_count = 1;
  std::size_t words_per_block = 1;  // ignored for raw input
  int class_count = 2;
  InputMode mode = InputMode::tokens;

  json to_json() const;
  static ModelDims from_json(const json& j);
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

// One training or evaluation item: token sentences per scale, or the raw
// channels when the model consumes undiscretized series.
struct Example {
  std::string id;
  int label = 0;
  std::vector<TokenRows> sentences;
  std::vector<Series> raw;
};

std::vector<Example> examples_from_corpus(const MultiScaleCorpus& corpus);
std::vector<Example> examples_from_dataset(const Dataset& ds);

// Per-scale dilated causal encoders, a convolutional scale integrator over
// the stacked representations, and a linear head.
//
// Parameter names:
//   enc<u>.embed<v>            [k x E]           token mode only
//   enc<u>.conv<l>.{w,b}       [p x C_in x kappa], [p]
//   enc<u>.res<l>.{w,b}        [p x C_in x 1], [p]
//   sfi.{w,b}                  [sfi_out x h x sfi_kernel], [sfi_out]
//   head.{w,b}                 [C x q], [C]      with q = sfi_out * p
class ShapeWordNet {
 public:
  ShapeWordNet(ModelConfig cfg, ModelDims dims);

  const ModelConfig& config() const { return cfg_; }
  const ModelDims& dims() const { return dims_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Encoders: one per scale in token mode, one in raw mode.
  std::size_t view_count() const;
  std::size_t feature_size() const { return cfg_.sfi_out_channels * cfg_.out_channels; }

  // [p] representation of one view of `ex`.
  Var encode(Tape& t, const Example& ex, std::size_t view) const;
  // Pre-pooling activations of the last encoder layer, [p x s].
  Var encode_sequence(Tape& t, const Example& ex, std::size_t view) const;
  // h representations -> [q]
  Var integrate(Tape& t, std::span<const Var> reps) const;
  // [q] -> [C] logits
  Var classify(Tape& t, Var features) const;

  struct Forward {
    std::vector<Var> reps;
    Var logits;
  };
  Forward forward(Tape& t, const Example& ex) const;

  std::vector<double> logits(const Example& ex) const;
  int predict(const Example& ex) const;

 private:
  void init_params();

  ModelConfig cfg_;
  ModelDims dims_;
  ParamStore params_;
};

// argmax with ties to the smallest index.
int argmax(std::span<const double> values);

struct LossTerms {
  Var total;
  Var ce;
  std::optional<Var> sc;  // present whenever the model has >= 2 views
};

// Mean cross-entropy over the batch plus lambda times the cross-scale
// contrastive loss of the batch's per-view representations. With
// lambda == 0 the total is the mean cross-entropy node itself.
LossTerms joint_loss(Tape& t, const ShapeWordNet& model, std::span<const Example* const> batch);

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
  double ce = 0.0;
  double sc = 0.0;
};

json history_to_json(const std::vector<EpochStats>& history);

struct TrainResult {
  ShapeWordNet model;
  std::vector<EpochStats> history;
};

// Seeded init, seeded shuffling, Adam over mini-batches. A final batch of a
// single sample is folded into the previous batch.
TrainResult train(const std::vector<Example>& data, const ModelConfig& cfg, const ModelDims& dims);

// Batch boundaries used by train() for `count` samples.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t count,
                                                              std::size_t batch_size);

MetricsReport evaluate(const ShapeWordNet& model, const std::vector<Example>& data);

// Checkpoint with model config, dims and the vocabulary fingerprint of the
// corpus it was trained on.
void save_model(const ShapeWordNet& model, const std::string& vocab_fingerprint,
                const std::filesystem::path& path, const json& meta = json());

struct LoadedModel {
  ShapeWordNet model;
  std::string vocab_fingerprint;
};
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace swn
