#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "doctest.h"
#include "swn/error.hpp"
#include "swn/vocab.hpp"

using namespace swn;

namespace {

double sq(const Series& a, const Series& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Best partition of a handful of points into k non-empty clusters.
std::vector<Series> enumerate_kmeans(const std::vector<Series>& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= k;
  double best = std::numeric_limits<double>::infinity();
  std::vector<Series> best_c;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<std::size_t> a(n);
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i, c /= k) a[i] = c % k;
    std::vector<Series> means(k, Series(pts[0].size(), 0.0));
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++cnt[a[i]];
      for (std::size_t j = 0; j < pts[i].size(); ++j) means[a[i]][j] += pts[i][j];
    }
    if (std::count(cnt.begin(), cnt.end(), 0u) > 0) continue;
    for (std::size_t g = 0; g < k; ++g) {
      for (auto& v : means[g]) v /= static_cast<double>(cnt[g]);
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += sq(pts[i], means[a[i]]);
    if (inertia < best) {
      best = inertia;
      best_c = means;
    }
  }
  std::sort(best_c.begin(), best_c.end());
  return best_c;
}

VocabConfig small_vocab_config() {
  VocabConfig cfg;
  cfg.scales = {5, 10};
  cfg.words_per_block = 3;
  cfg.samples_per_class = 4;
  cfg.top_k = 20;
  cfg.seed = 3;
  return cfg;
}

Dataset small_synth(std::uint64_t seed = 5) {
  SynthConfig cfg;
  cfg.length = 60;
  cfg.motif_length = 12;
  cfg.samples_per_class = 6;
  cfg.seed = seed;
  return znormalize(generate_synthetic(cfg));
}

}  // namespace

TEST_CASE("kmeans closed forms") {
  const auto two = kmeans({{0, 0}, {10, 10}}, 2, 1);
  auto c = two.centroids;
  std::sort(c.begin(), c.end());
  CHECK(c == std::vector<Series>{{0, 0}, {10, 10}});
  CHECK(two.inertia == 0.0);

  const auto one = kmeans({{1, 2}, {3, 4}, {8, 0}}, 1, 1);
  CHECK(one.centroids[0][0] == doctest::Approx(4.0));
  CHECK(one.centroids[0][1] == doctest::Approx(2.0));

  const std::vector<Series> pts{{0}, {0.1}, {10}, {10.1}};
  const auto oracle = enumerate_kmeans(pts, 2);
  auto got = kmeans(pts, 2, 7).centroids;
  std::sort(got.begin(), got.end());
  REQUIRE(oracle.size() == 2);
  CHECK(oracle[0][0] == doctest::Approx(0.05));
  CHECK(oracle[1][0] == doctest::Approx(10.05));
  CHECK(got[0][0] == doctest::Approx(oracle[0][0]).epsilon(1e-12));
  CHECK(got[1][0] == doctest::Approx(oracle[1][0]).epsilon(1e-12));

  CHECK_THROWS_AS(kmeans({{1}}, 2, 1), DomainError);
  CHECK_THROWS_AS(kmeans({{1}, {1, 2}}, 1, 1), ShapeError);
}

TEST_CASE("kmeans invariants on random instances") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + rng() % 60, dim = 1 + rng() % 8, k = 1 + rng() % std::min<std::size_t>(n, 6);
    std::vector<Series> pts(n, Series(dim));
    for (auto& p : pts) {
      for (auto& v : p) v = g(rng) + static_cast<double>(rng() % 3) * 4.0;
    }
    const auto r = kmeans(pts, k, trial);
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
      CHECK(r.inertia_history[i] <= r.inertia_history[i - 1] * (1.0 + 1e-12) + 1e-12);
    }
    std::vector<std::size_t> cnt(k, 0);
    std::vector<Series> mean(k, Series(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      ++cnt[r.assignments[i]];
      for (std::size_t j = 0; j < dim; ++j) mean[r.assignments[i]][j] += pts[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      REQUIRE(cnt[c] >= 1);
      for (std::size_t j = 0; j < dim; ++j) {
        CHECK(std::abs(mean[c][j] / static_cast<double>(cnt[c]) - r.centroids[c][j]) <= 1e-9);
      }
    }
    const auto again = kmeans(pts, k, trial, 100, 1e-6, Exec::serial);
    CHECK(again.centroids == r.centroids);
    CHECK(again.assignments == r.assignments);
  }
}

TEST_CASE("kmeans repairs empty clusters") {
  // duplicates force coincident seeds; every cluster must still be populated
  const std::vector<Series> pts{{0}, {0}, {0}, {0}, {5}};
  const auto r = kmeans(pts, 3, 2);
  std::vector<std::size_t> cnt(3, 0);
  for (auto a : r.assignments) ++cnt[a];
  for (auto c : cnt) CHECK(c >= 1);
}

TEST_CASE("build_vocabulary shape, determinism and dense tokens") {
  const auto ds = small_synth();
  const auto cfg = small_vocab_config();
  const auto a = build_vocabulary(ds, cfg);
  const auto b = build_vocabulary(ds, cfg);
  CHECK(a.vocabulary == b.vocabulary);
  CHECK(a.vocabulary.fingerprint() == b.vocabulary.fingerprint());
  CHECK(a.vocabulary.entries().size() == 2 * 2 * 3);
  for (std::size_t v = 0; v < 2; ++v) {
    for (auto l : cfg.scales) {
      const auto block = a.vocabulary.block(v, l);
      REQUIRE(block.size() == 3);
      for (std::size_t t = 0; t < 3; ++t) {
        CHECK(block[t].token == static_cast<int>(t));
        CHECK(block[t].centroid.size() == l);
        CHECK(block[t].member_count >= 1);
      }
      CHECK(a.selected.at({v, l}).size() == cfg.top_k);
    }
  }
  // single-scale fits reproduce the matching block
  auto single = cfg;
  single.scales = {10};
  const auto s = build_vocabulary(ds, single);
  for (std::size_t v = 0; v < 2; ++v) {
    const auto x = s.vocabulary.block(v, 10);
    const auto y = a.vocabulary.block(v, 10);
    for (std::size_t t = 0; t < 3; ++t) CHECK(x[t].centroid == y[t].centroid);
  }

  auto bad = cfg;
  bad.scales = {5, 61};
  CHECK_THROWS_AS(build_vocabulary(ds, bad), ConfigError);
  bad.scales = {5, 5};
  CHECK_THROWS_AS(build_vocabulary(ds, bad), ConfigError);
}

TEST_CASE("noise-free two-class vocabulary recovers both motifs") {
  SynthConfig sc;
  sc.class_count = 2;
  sc.channel_count = 1;
  sc.length = 10;  // every candidate is a whole motif
  sc.motif_length = 10;
  sc.samples_per_class = 4;
  sc.noise_sigma = 0.0;
  sc.seed = 8;
  const auto ds = generate_synthetic(sc);
  VocabConfig cfg;
  cfg.scales = {10};
  cfg.words_per_block = 2;
  cfg.top_k = 100;
  cfg.seed = 1;
  const auto fit = build_vocabulary(ds, cfg);
  for (int label : {0, 1}) {
    const auto motif = class_motif(label, 10);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : fit.vocabulary.block(0, 10)) best = std::min(best, std::sqrt(sq(e.centroid, motif)));
    CHECK(best <= 1e-9);
  }
}

TEST_CASE("vocabulary file round trip and validation") {
  const auto fit = build_vocabulary(small_synth(), small_vocab_config());
  const auto path = std::filesystem::temp_directory_path() / "swn_unit_vocab.json";
  save_vocabulary(fit.vocabulary, path, json{{"tool", "swn"}});
  const auto back = load_vocabulary(path);
  CHECK(back == fit.vocabulary);
  CHECK(back.fingerprint() == fit.vocabulary.fingerprint());

  auto j = fit.vocabulary.to_json();
  j["entries"].erase(j["entries"].begin());
  CHECK_THROWS_AS(Vocabulary::from_json(j), DomainError);
  CHECK_THROWS_AS(fit.vocabulary.block(0, 7), ConfigError);
}

TEST_CASE("evaluate_vocabulary") {
  const auto ds = small_synth();
  auto cfg = small_vocab_config();
  const auto fit = build_vocabulary(ds, cfg);
  const auto report = evaluate_vocabulary(fit, subsample_labels(ds, 3, 1));
  REQUIRE(report.rows.size() == cfg.scales.size());
  for (std::size_t i = 0; i < cfg.scales.size(); ++i) {
    CHECK(report.rows[i].scale == cfg.scales[i]);
    CHECK(report.rows[i].shapewords_exceed ==
          (report.rows[i].shapeword_mean_fstat > report.rows[i].shapelet_mean_fstat));
  }

  // centroids equal to the retained shapelets give equal means
  cfg.top_k = 3;
  const auto tight = build_vocabulary(ds, cfg);
  const auto eq = evaluate_vocabulary(tight, ds);
  for (const auto& r : eq.rows) {
    CHECK(r.shapeword_mean_fstat == doctest::Approx(r.shapelet_mean_fstat).epsilon(1e-12));
  }
}
