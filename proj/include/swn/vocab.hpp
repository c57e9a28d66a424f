#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "swn/dataset.hpp"
#include "swn/json_io.hpp"
#include "swn/shapelets.hpp"

namespace swn {

struct KMeansResult {
  std::vector<Series> centroids;
  std::vector<std::size_t> assignments;
  std::vector<double> inertia_history;  // after each Lloyd update
  double inertia = 0.0;
  std::size_t iterations = 0;
};

// k-means++ seeding followed by Lloyd iterations until every centroid moves
// less than `tol` or `max_iter` is reached. An emptied cluster claims the
// point farthest from its current centroid, so all k clusters stay populated.
KMeansResult kmeans(const std::vector<Series>& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = 100, double tol = 1e-6, Exec exec = Exec::parallel);

struct ShapeWordEntry {
  int token = 0;
  std::size_t variable = 0;
  std::size_t scale = 0;
  Series centroid;
  std::size_t member_count = 0;
};

// ShapeWords for every (variable, scale) block. Entries are kept ordered by
// variable, then scale position, then token, and each block holds tokens
// 0..k-1 exactly once.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::size_t> scales, std::size_t channel_count,
             std::size_t words_per_block, std::vector<ShapeWordEntry> entries);

  const std::vector<std::size_t>& scales() const { return scales_; }
  std::size_t channel_count() const { return channel_count_; }
  std::size_t words_per_block() const { return words_per_block_; }
  const std::vector<ShapeWordEntry>& entries() const { return entries_; }

  bool has_scale(std::size_t scale) const;
  std::span<const ShapeWordEntry> block(std::size_t variable, std::size_t scale) const;
  // k x scale centroid matrix for the block, row-major.
  std::span<const double> block_centroids(std::size_t variable, std::size_t scale) const;

  json to_json() const;
  static Vocabulary from_json(const json& j);
  // Hash of the canonical serialization of the vocabulary content.
  std::string fingerprint() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b);

 private:
  std::size_t block_index(std::size_t variable, std::size_t scale) const;

  std::vector<std::size_t> scales_;
  std::size_t channel_count_ = 0;
  std::size_t words_per_block_ = 0;
  std::vector<ShapeWordEntry> entries_;
  std::vector<std::vector<double>> packed_;  // per block centroids
};

struct VocabConfig {
  std::vector<std::size_t> scales{10, 25, 50};
  std::size_t words_per_block = 3;
  std::size_t samples_per_class = 10;
  std::size_t top_k = 100;
  std::size_t stride = 1;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100;
  double tol = 1e-6;
  Exec exec = Exec::parallel;
};

// Vocabulary plus the shapelets each block was clustered from.
struct VocabularyFit {
  Vocabulary vocabulary;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<ShapeletQuality>> selected;
};

// Seed used for one (variable, scale) block; independent of which other
// scales are requested, so a single-scale fit reproduces the matching block
// of a multi-scale fit.
std::uint64_t block_seed(std::uint64_t seed, std::size_t variable, std::size_t scale);

VocabularyFit build_vocabulary(const Dataset& train, const VocabConfig& cfg);

struct VocabQualityRow {
  std::size_t scale = 0;
  double shapeword_mean_fstat = 0.0;
  double shapelet_mean_fstat = 0.0;
  bool shapewords_exceed = false;
};

struct VocabQualityReport {
  std::vector<VocabQualityRow> rows;
  json to_json() const;
};

// Scores every ShapeWord centroid and every retained shapelet as a shapelet
// over `validation`, averaged per scale across variables.
VocabQualityReport evaluate_vocabulary(const VocabularyFit& fit, const Dataset& validation,
                                       double epsilon = kFstatEpsilon);

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path,
                     const json& meta = json());
Vocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace swn
