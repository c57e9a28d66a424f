#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "swn/dataset.hpp"
#include "swn/json_io.hpp"
#include "swn/vocab.hpp"

namespace swn {

// d rows of s tokens.
using TokenRows = std::vector<std::vector<int>>;

struct ShapeSentence {
  std::size_t scale = 0;
  std::string sample_id;
  int label = 0;
  TokenRows tokens;
};

struct CorpusSample {
  std::string id;
  int label = 0;
  std::vector<TokenRows> sentences;  // one per corpus scale, in scale order
};

struct MultiScaleCorpus {
  std::vector<std::size_t> scales;
  std::string vocab_fingerprint;
  int class_count = 0;
  std::size_t channel_count = 0;
  std::size_t words_per_block = 0;
  std::vector<CorpusSample> samples;
};

// floor(n / l) consecutive non-overlapping windows; the remainder is dropped.
std::vector<Series> segment(std::span<const double> channel, std::size_t length);

// Token of the centroid nearest to `segment`; ties go to the smaller token.
int nearest_word(std::span<const double> segment, std::span<const ShapeWordEntry> block);

ShapeSentence discretize_sample(const Sample& sample, const Vocabulary& vocab, std::size_t scale);

// Multi-scale transformation of every sample. Output order follows `ds`.
MultiScaleCorpus mst(const Dataset& ds, const Vocabulary& vocab,
                     const std::vector<std::size_t>& scales, Exec exec = Exec::parallel);

// Header line then one line per sample.
void save_corpus(const MultiScaleCorpus& corpus, const std::filesystem::path& path,
                 const json& meta = json());
MultiScaleCorpus load_corpus(const std::filesystem::path& path);

}  // namespace swn
