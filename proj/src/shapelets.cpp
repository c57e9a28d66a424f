#include "swn/shapelets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "swn/error.hpp"

namespace swn {

namespace {

void require_fits(std::size_t l, std::size_t n) {
  if (l < 1) throw ShapeError("shapelet length must be >= 1");
  if (l > n) {
    throw ShapeError("shapelet length " + std::to_string(l) + " exceeds series length " +
                     std::to_string(n));
  }
}

}  // namespace

std::vector<ShapeletCandidate> extract_candidates(const Sample& sample, std::size_t variable,
                                                  std::size_t length, std::size_t stride) {
  if (stride < 1) throw ConfigError("stride must be >= 1");
  if (variable >= sample.channel_count()) throw IndexError("variable index out of range");
  const Series& ch = sample.channels[variable];
  require_fits(length, ch.size());
  std::vector<ShapeletCandidate> out;
  out.reserve((ch.size() - length) / stride + 1);
  for (std::size_t off = 0; off + length <= ch.size(); off += stride) {
    out.push_back({Series(ch.begin() + static_cast<long>(off),
                          ch.begin() + static_cast<long>(off + length)),
                   variable, sample.id, off});
  }
  return out;
}

double sdist(std::span<const double> shapelet, std::span<const double> channel) {
  require_fits(shapelet.size(), channel.size());
  std::vector<double> scratch(channel.size() - shapelet.size() + 1);
  return std::sqrt(kernels::min_window_sq_distance(shapelet, channel, scratch));
}

std::vector<double> sdist_profile(const ShapeletCandidate& candidate, const Dataset& eval_set) {
  std::vector<double> out;
  out.reserve(eval_set.size());
  for (const auto& s : eval_set.samples()) {
    if (candidate.variable >= s.channel_count()) throw IndexError("variable index out of range");
    out.push_back(sdist(candidate.values, s.channels[candidate.variable]));
  }
  return out;
}

double fstat(std::span<const double> distances, std::span<const int> labels, double epsilon) {
  if (distances.size() != labels.size()) {
    throw ShapeError("fstat: distances and labels differ in length");
  }
  struct Group {
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::map<int, Group> groups;
  double total = 0.0;
  for (std::size_t j = 0; j < distances.size(); ++j) {
    auto& g = groups[labels[j]];
    g.sum += distances[j];
    ++g.count;
    total += distances[j];
  }
  const std::size_t classes = groups.size();
  if (classes < 2) throw DomainError("fstat needs at least two classes present");
  const std::size_t n = distances.size();
  const double grand_mean = total / static_cast<double>(n);

  std::map<int, double> class_mean;
  double between = 0.0;
  for (const auto& [label, g] : groups) {
    const double m = g.sum / static_cast<double>(g.count);
    class_mean[label] = m;
    between += (m - grand_mean) * (m - grand_mean);
  }
  between /= static_cast<double>(classes - 1);

  double within = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = distances[j] - class_mean[labels[j]];
    within += d * d;
  }
  // N == V leaves no within-class degrees of freedom; the spread is zero.
  within = n > classes ? within / static_cast<double>(n - classes) : 0.0;
  return between / (within + epsilon);
}

std::vector<ShapeletQuality> select_shapelets(const Dataset& train, std::size_t variable,
                                              std::size_t length, const SelectionConfig& cfg) {
  if (cfg.top_k < 1) throw ConfigError("top_k must be >= 1");
  if (variable >= train.channel_count()) throw IndexError("variable index out of range");
  require_fits(length, train.length());

  const Dataset pool = subsample_labels(train, cfg.samples_per_class, cfg.seed);
  const std::vector<int> labels = pool.labels();
  if (std::set<int>(labels.begin(), labels.end()).size() < 2) {
    throw DomainError("shapelet selection needs at least two classes");
  }

  std::vector<ShapeletCandidate> candidates;
  for (const auto& s : pool.samples()) {
    auto c = extract_candidates(s, variable, length, cfg.stride);
    std::move(c.begin(), c.end(), std::back_inserter(candidates));
  }

  std::vector<std::span<const double>> patterns;
  patterns.reserve(candidates.size());
  for (const auto& c : candidates) patterns.emplace_back(c.values);
  std::vector<std::span<const double>> series;
  series.reserve(pool.size());
  for (const auto& s : pool.samples()) series.emplace_back(s.channels[variable]);

  std::vector<double> dist(patterns.size() * series.size());
  kernels::sdist_matrix(cfg.exec, patterns, series, dist);

  std::vector<double> scores(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    scores[c] = fstat({dist.data() + c * series.size(), series.size()}, labels, cfg.epsilon);
  }

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  const auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (candidates[a].offset != candidates[b].offset) {
      return candidates[a].offset < candidates[b].offset;
    }
    return candidates[a].source_id < candidates[b].source_id;
  };
  const std::size_t keep = std::min(cfg.top_k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(keep), order.end(), better);

  std::vector<ShapeletQuality> out;
  out.reserve(keep);
  for (std::size_t r = 0; r < keep; ++r) {
    const auto c = order[r];
    const auto* row = dist.data() + c * series.size();
    out.push_back({std::move(candidates[c]), std::vector<double>(row, row + series.size()),
                   scores[c]});
  }
  return out;
}

}  // namespace swn
