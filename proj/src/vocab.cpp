#include "swn/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <tuple>

#include "swn/error.hpp"

namespace swn {

namespace {

double sq_dist(const Series& a, const Series& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    d += diff * diff;
  }
  return d;
}

std::vector<Series> seed_plus_plus(const std::vector<Series>& points, std::size_t k,
                                   std::mt19937_64& rng) {
  std::vector<Series> centers;
  centers.reserve(k);
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  centers.push_back(points[pick(rng)]);
  std::vector<double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d2[i] = sq_dist(points[i], centers[0]);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (centers.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double run = 0.0;
      chosen = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        run += d2[i];
        if (d2[i] > 0.0 && run >= target) {
          chosen = i;
          break;
        }
      }
      // Guard against landing on a zero-weight tail through round-off.
      while (d2[chosen] == 0.0 && chosen > 0) --chosen;
    } else {
      chosen = pick(rng);  // all points coincide with a center
    }
    centers.push_back(points[chosen]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = std::min(d2[i], sq_dist(points[i], centers.back()));
    }
  }
  return centers;
}

std::vector<double> pack(const std::vector<Series>& rows) {
  std::vector<double> out;
  for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

}  // namespace

KMeansResult kmeans(const std::vector<Series>& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter, double tol, Exec exec) {
  if (k < 1) throw DomainError("kmeans: k must be >= 1");
  if (points.size() < k) {
    throw DomainError("kmeans: " + std::to_string(points.size()) + " points for k=" +
                      std::to_string(k));
  }
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw ShapeError("kmeans: points differ in dimension");
  }

  std::mt19937_64 rng(seed);
  KMeansResult res;
  res.centroids = seed_plus_plus(points, k, rng);
  res.assignments.assign(points.size(), 0);
  const std::vector<double> flat = pack(points);

  for (std::size_t it = 0; it < std::max<std::size_t>(max_iter, 1); ++it) {
    kernels::assign_nearest(exec, flat, dim, pack(res.centroids), res.assignments);

    std::vector<std::size_t> counts(k, 0);
    for (auto a : res.assignments) ++counts[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      // Claim the point farthest from its centroid among clusters that can
      // spare one.
      std::size_t far = points.size();
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const auto a = res.assignments[i];
        if (counts[a] < 2) continue;
        const double d = sq_dist(points[i], res.centroids[a]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --counts[res.assignments[far]];
      res.assignments[far] = c;
      counts[c] = 1;
    }

    std::vector<Series> next(k, Series(dim, 0.0));
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto& acc = next[res.assignments[i]];
      for (std::size_t j = 0; j < dim; ++j) acc[j] += points[i][j];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      for (auto& v : next[c]) v /= static_cast<double>(counts[c]);
      shift = std::max(shift, std::sqrt(sq_dist(next[c], res.centroids[c])));
    }
    res.centroids = std::move(next);

    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      inertia += sq_dist(points[i], res.centroids[res.assignments[i]]);
    }
    res.inertia_history.push_back(inertia);
    res.inertia = inertia;
    res.iterations = it + 1;
    if (shift < tol) break;
  }
  return res;
}

Vocabulary::Vocabulary(std::vector<std::size_t> scales, std::size_t channel_count,
                       std::size_t words_per_block, std::vector<ShapeWordEntry> entries)
    : scales_(std::move(scales)),
      channel_count_(channel_count),
      words_per_block_(words_per_block),
      entries_(std::move(entries)) {
  if (scales_.empty()) throw DomainError("vocabulary needs at least one scale");
  if (std::set<std::size_t>(scales_.begin(), scales_.end()).size() != scales_.size()) {
    throw DomainError("vocabulary scales must be distinct");
  }
  if (channel_count_ < 1 || words_per_block_ < 1) {
    throw DomainError("vocabulary needs channel_count >= 1 and words_per_block >= 1");
  }
  for (const auto& e : entries_) {
    if (e.variable >= channel_count_) throw DomainError("entry variable out of range");
    if (!has_scale(e.scale)) throw DomainError("entry scale not in vocabulary scales");
    if (e.centroid.size() != e.scale) throw ShapeError("centroid length differs from scale");
    if (e.token < 0 || static_cast<std::size_t>(e.token) >= words_per_block_) {
      throw DomainError("entry token out of range");
    }
    if (e.member_count < 1) throw DomainError("entry member_count must be >= 1");
  }
  std::sort(entries_.begin(), entries_.end(), [&](const auto& a, const auto& b) {
    const auto ka = std::tuple(a.variable, block_index(0, a.scale), a.token);
    const auto kb = std::tuple(b.variable, block_index(0, b.scale), b.token);
    return ka < kb;
  });
  const std::size_t blocks = channel_count_ * scales_.size();
  if (entries_.size() != blocks * words_per_block_) {
    throw DomainError("vocabulary must hold exactly words_per_block entries per block");
  }
  packed_.resize(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t t = 0; t < words_per_block_; ++t) {
      const auto& e = entries_[b * words_per_block_ + t];
      if (block_index(e.variable, e.scale) != b || static_cast<std::size_t>(e.token) != t) {
        throw DomainError("vocabulary tokens are not dense 0..k-1 in every block");
      }
      packed_[b].insert(packed_[b].end(), e.centroid.begin(), e.centroid.end());
    }
  }
}

bool Vocabulary::has_scale(std::size_t scale) const {
  return std::find(scales_.begin(), scales_.end(), scale) != scales_.end();
}

std::size_t Vocabulary::block_index(std::size_t variable, std::size_t scale) const {
  const auto it = std::find(scales_.begin(), scales_.end(), scale);
  if (it == scales_.end()) {
    throw ConfigError("scale " + std::to_string(scale) + " is not in the vocabulary");
  }
  if (variable >= std::max<std::size_t>(channel_count_, 1)) {
    throw IndexError("variable index out of range");
  }
  return variable * scales_.size() + static_cast<std::size_t>(it - scales_.begin());
}

std::span<const ShapeWordEntry> Vocabulary::block(std::size_t variable, std::size_t scale) const {
  const auto b = block_index(variable, scale);
  return {entries_.data() + b * words_per_block_, words_per_block_};
}

std::span<const double> Vocabulary::block_centroids(std::size_t variable,
                                                    std::size_t scale) const {
  return packed_[block_index(variable, scale)];
}

json Vocabulary::to_json() const {
  json entries = json::array();
  for (const auto& e : entries_) {
    entries.push_back({{"token", e.token},
                       {"variable", e.variable},
                       {"scale", e.scale},
                       {"centroid", e.centroid},
                       {"member_count", e.member_count}});
  }
  return {{"scales", scales_},
          {"channel_count", channel_count_},
          {"words_per_block", words_per_block_},
          {"entries", std::move(entries)}};
}

Vocabulary Vocabulary::from_json(const json& j) {
  try {
    std::vector<ShapeWordEntry> entries;
    for (const auto& e : j.at("entries")) {
      entries.push_back({e.at("token").get<int>(), e.at("variable").get<std::size_t>(),
                         e.at("scale").get<std::size_t>(), e.at("centroid").get<Series>(),
                         e.at("member_count").get<std::size_t>()});
    }
    return Vocabulary(j.at("scales").get<std::vector<std::size_t>>(),
                      j.at("channel_count").get<std::size_t>(),
                      j.at("words_per_block").get<std::size_t>(), std::move(entries));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed vocabulary: ") + e.what());
  }
}

std::string Vocabulary::fingerprint() const { return fnv1a_hex(to_json().dump()); }

bool operator==(const Vocabulary& a, const Vocabulary& b) {
  if (a.scales_ != b.scales_ || a.channel_count_ != b.channel_count_ ||
      a.words_per_block_ != b.words_per_block_ || a.entries_.size() != b.entries_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    const auto& x = a.entries_[i];
    const auto& y = b.entries_[i];
    if (x.token != y.token || x.variable != y.variable || x.scale != y.scale ||
        x.member_count != y.member_count || x.centroid != y.centroid) {
      return false;
    }
  }
  return true;
}

std::uint64_t block_seed(std::uint64_t seed, std::size_t variable, std::size_t scale) {
  // splitmix64 finalizer over a mixed key
  std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (variable + 1)) ^
                    (0xbf58476d1ce4e5b9ULL * (scale + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

VocabularyFit build_vocabulary(const Dataset& train, const VocabConfig& cfg) {
  if (cfg.scales.empty()) throw ConfigError("at least one scale is required");
  if (cfg.words_per_block < 1) throw ConfigError("words per block must be >= 1");
  for (auto l : cfg.scales) {
    if (l < 1 || l > train.length()) {
      throw ConfigError("scale " + std::to_string(l) + " does not fit series length " +
                        std::to_string(train.length()));
    }
  }
  if (std::set<std::size_t>(cfg.scales.begin(), cfg.scales.end()).size() != cfg.scales.size()) {
    throw ConfigError("scales must be distinct");
  }

  VocabularyFit fit;
  std::vector<ShapeWordEntry> entries;
  for (std::size_t v = 0; v < train.channel_count(); ++v) {
    for (auto l : cfg.scales) {
      const auto bs = block_seed(cfg.seed, v, l);
      SelectionConfig sel{cfg.samples_per_class, cfg.top_k, cfg.stride, bs, kFstatEpsilon,
                          cfg.exec};
      auto shapelets = select_shapelets(train, v, l, sel);
      std::vector<Series> points;
      points.reserve(shapelets.size());
      for (const auto& q : shapelets) points.push_back(q.candidate.values);
      if (points.size() < cfg.words_per_block) {
        throw DomainError("only " + std::to_string(points.size()) + " shapelets at scale " +
                          std::to_string(l) + " for " + std::to_string(cfg.words_per_block) +
                          " words");
      }
      auto km = kmeans(points, cfg.words_per_block, bs ^ 0x5851f42d4c957f2dULL, cfg.max_iter,
                       cfg.tol, cfg.exec);
      std::vector<std::size_t> members(cfg.words_per_block, 0);
      for (auto a : km.assignments) ++members[a];
      for (std::size_t t = 0; t < cfg.words_per_block; ++t) {
        entries.push_back({static_cast<int>(t), v, l, std::move(km.centroids[t]), members[t]});
      }
      fit.selected[{v, l}] = std::move(shapelets);
    }
  }
  fit.vocabulary =
      Vocabulary(cfg.scales, train.channel_count(), cfg.words_per_block, std::move(entries));
  return fit;
}

json VocabQualityReport::to_json() const {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"scale", r.scale},
                   {"shapeword_mean_fstat", r.shapeword_mean_fstat},
                   {"shapelet_mean_fstat", r.shapelet_mean_fstat},
                   {"shapewords_exceed", r.shapewords_exceed}});
  }
  return out;
}

VocabQualityReport evaluate_vocabulary(const VocabularyFit& fit, const Dataset& validation,
                                       double epsilon) {
  const Vocabulary& vocab = fit.vocabulary;
  if (validation.channel_count() != vocab.channel_count()) {
    throw CompatibilityError("validation channel count differs from vocabulary");
  }
  const auto labels = validation.labels();

  // Mean F-statistic of a set of patterns on one variable of the validation set.
  auto score_all = [&](const std::vector<std::span<const double>>& patterns, std::size_t v,
                       double& sum, std::size_t& count) {
    std::vector<std::span<const double>> series;
    for (const auto& s : validation.samples()) series.emplace_back(s.channels[v]);
    std::vector<double> dist(patterns.size() * series.size());
    kernels::sdist_matrix(Exec::parallel, patterns, series, dist);
    for (std::size_t p = 0; p < patterns.size(); ++p) {
      sum += fstat({dist.data() + p * series.size(), series.size()}, labels, epsilon);
      ++count;
    }
  };

  VocabQualityReport report;
  for (auto l : vocab.scales()) {
    if (l > validation.length()) throw ConfigError("scale exceeds validation series length");
    double word_sum = 0.0, shapelet_sum = 0.0;
    std::size_t word_n = 0, shapelet_n = 0;
    for (std::size_t v = 0; v < vocab.channel_count(); ++v) {
      std::vector<std::span<const double>> words;
      for (const auto& e : vocab.block(v, l)) words.emplace_back(e.centroid);
      score_all(words, v, word_sum, word_n);

      const auto it = fit.selected.find({v, l});
      if (it == fit.selected.end()) continue;
      std::vector<std::span<const double>> shapelets;
      for (const auto& q : it->second) shapelets.emplace_back(q.candidate.values);
      score_all(shapelets, v, shapelet_sum, shapelet_n);
    }
    VocabQualityRow row;
    row.scale = l;
    row.shapeword_mean_fstat = word_n ? word_sum / static_cast<double>(word_n) : 0.0;
    row.shapelet_mean_fstat = shapelet_n ? shapelet_sum / static_cast<double>(shapelet_n) : 0.0;
    row.shapewords_exceed = row.shapeword_mean_fstat > row.shapelet_mean_fstat;
    report.rows.push_back(row);
  }
  return report;
}

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path,
                     const json& meta) {
  json j = vocab.to_json();
  if (!meta.is_null()) j["meta"] = meta;
  write_text_file(path, j.dump() + "\n");
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("vocabulary " + path.string() + ": " + e.what());
  }
  return Vocabulary::from_json(j);
}

}  // namespace swn
