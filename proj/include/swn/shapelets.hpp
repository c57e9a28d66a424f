#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "swn/dataset.hpp"
#include "swn/kernels.hpp"

namespace swn {

inline constexpr double kFstatEpsilon = 1e-12;

struct ShapeletCandidate {
  Series values;
  std::size_t variable = 0;
  std::string source_id;
  std::size_t offset = 0;
};

struct ShapeletQuality {
  ShapeletCandidate candidate;
  std::vector<double> distances;  // one sdist per evaluation sample
  double fstat = 0.0;
};

// Sliding-window candidates at offsets 0, stride, 2*stride, ...
std::vector<ShapeletCandidate> extract_candidates(const Sample& sample, std::size_t variable,
                                                  std::size_t length, std::size_t stride = 1);

// Minimum Euclidean distance between `shapelet` and any equal-length window
// of `channel`. No per-window normalization.
double sdist(std::span<const double> shapelet, std::span<const double> channel);

std::vector<double> sdist_profile(const ShapeletCandidate& candidate, const Dataset& eval_set);

// Between-class over within-class variance ratio of the distances, with
// `epsilon` added to the denominator. Classes are the distinct label values.
// Throws DomainError when fewer than two classes are present.
double fstat(std::span<const double> distances, std::span<const int> labels,
             double epsilon = kFstatEpsilon);

struct SelectionConfig {
  std::size_t samples_per_class = 10;
  std::size_t top_k = 100;
  std::size_t stride = 1;
  std::uint64_t seed = 0;
  double epsilon = kFstatEpsilon;
  Exec exec = Exec::parallel;
};

// Draws up to samples_per_class samples per class; the draw supplies both the
// candidates and the evaluation set. Returns the top_k candidates by
// descending F-statistic, ties broken by smaller offset then smaller
// source id.
std::vector<ShapeletQuality> select_shapelets(const Dataset& train, std::size_t variable,
                                              std::size_t length, const SelectionConfig& cfg);

}  // namespace swn
