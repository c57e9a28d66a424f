#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "swn/json_io.hpp"

namespace swn {

using Series = std::vector<double>;

struct Sample {
  std::string id;
  int label = 0;
  std::vector<Series> channels;  // d rows of n values

  std::size_t channel_count() const { return channels.size(); }
  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
};

// Labeled multivariate series with a fixed channel count and length.
// Construction validates every invariant; a Dataset is not mutated afterwards.
class Dataset {
 public:
  Dataset() = default;

  // Throws ShapeError on ragged or mismatched samples, DomainError on
  // duplicate ids or out-of-range labels.
  Dataset(std::vector<Sample> samples, int class_count);

  // Same as above but with explicit dimensions; allows an empty sample list.
  Dataset(std::vector<Sample> samples, int class_count, std::size_t channel_count,
          std::size_t length);

  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

  int class_count() const { return class_count_; }
  std::size_t channel_count() const { return channel_count_; }
  std::size_t length() const { return length_; }

  std::vector<int> labels() const;
  std::vector<std::size_t> class_histogram() const;

  // Keeps class_count and dimensions; selects samples in the given order.
  Dataset subset(const std::vector<std::size_t>& indices) const;

 private:
  void validate() const;

  std::vector<Sample> samples_;
  int class_count_ = 0;
  std::size_t channel_count_ = 0;
  std::size_t length_ = 0;
};

struct SynthConfig {
  int class_count = 3;
  std::size_t channel_count = 2;
  std::size_t length = 500;
  std::size_t samples_per_class = 100;
  double noise_sigma = 0.3;
  std::size_t motif_length = 50;
  std::uint64_t seed = 7;
};

// Class motif of the synthetic family:
// 0 one sine period, 1 square pulse, 2 linear chirp, k>2 sine with k periods.
Series class_motif(int label, std::size_t motif_length);

Dataset load_dataset(const std::filesystem::path& path);
// Writes JSON Lines. A non-null meta is written first as {"header": meta};
// load_dataset skips such a line.
void save_dataset(const Dataset& ds, const std::filesystem::path& path,
                  const json& meta = json());

// Each sample gets its class motif added, per channel, at a uniformly random
// offset into noise_sigma * N(0, 1). Bitwise reproducible from the seed.
Dataset generate_synthetic(const SynthConfig& cfg);

// Per-channel z-normalization with population standard deviation; constant
// channels become all zeros.
Dataset znormalize(const Dataset& ds);
void znormalize_inplace(Series& channel);

// Stratified split. Returns (train, test), both in original order.
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed);

Dataset subsample_labels(const Dataset& ds, std::size_t per_class, std::uint64_t seed);

}  // namespace swn
