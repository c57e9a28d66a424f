#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "doctest.h"
#include "swn/error.hpp"
#include "swn/shapelets.hpp"

using namespace swn;

namespace {

double brute_sdist(const Series& s, const Series& t) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t o = 0; o + s.size() <= t.size(); ++o) {
    double acc = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) acc += (s[j] - t[o + j]) * (s[j] - t[o + j]);
    best = std::min(best, std::sqrt(acc));
  }
  return best;
}

// Group-by evaluation of the between/within variance ratio.
double oracle_fstat(const std::vector<double>& d, const std::vector<int>& y, double eps) {
  std::map<int, std::vector<double>> groups;
  for (std::size_t i = 0; i < d.size(); ++i) groups[y[i]].push_back(d[i]);
  const double n = static_cast<double>(d.size());
  const double v = static_cast<double>(groups.size());
  double grand = 0.0;
  for (double x : d) grand += x;
  grand /= n;
  double between = 0.0, within = 0.0;
  for (const auto& [label, xs] : groups) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    between += (m - grand) * (m - grand);
    for (double x : xs) within += (x - m) * (x - m);
  }
  const double w = n > v ? within / (n - v) : 0.0;
  return (between / (v - 1.0)) / (w + eps);
}

Sample one_channel(std::string id, int label, Series s) { return {std::move(id), label, {std::move(s)}}; }

}  // namespace

TEST_CASE("extract_candidates counts and offsets") {
  Series ch(10);
  for (std::size_t i = 0; i < 10; ++i) ch[i] = static_cast<double>(i);
  const auto s = one_channel("x", 0, ch);
  CHECK(extract_candidates(s, 0, 5, 1).size() == 6);
  const auto whole = extract_candidates(s, 0, 10, 1);
  REQUIRE(whole.size() == 1);
  CHECK(whole[0].values == ch);
  const auto strided = extract_candidates(s, 0, 4, 3);
  REQUIRE(strided.size() == 3);
  CHECK(strided[0].offset == 0);
  CHECK(strided[1].offset == 3);
  CHECK(strided[2].offset == 6);
  CHECK(strided[2].values == Series{6, 7, 8, 9});
  CHECK(strided[1].source_id == "x");
  CHECK_THROWS_AS(extract_candidates(s, 0, 11, 1), ShapeError);
}

TEST_CASE("sdist worked examples") {
  CHECK(sdist(Series{0, 1}, Series{3, 0, 1, 5}) == 0.0);
  CHECK(sdist(Series{1, 1}, Series{0, 2, 4}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(sdist(Series{5}, Series{5, 5, 5}) == 0.0);
  CHECK_THROWS_AS(sdist(Series{1, 2, 3}, Series{1, 2}), ShapeError);
}

TEST_CASE("sdist matches the all-windows oracle") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 120;
    const std::size_t l = 1 + rng() % n;
    Series s(l), t(n);
    for (auto& v : s) v = g(rng);
    for (auto& v : t) v = g(rng);
    CHECK(std::abs(sdist(s, t) - brute_sdist(s, t)) <= 1e-12);
    // a verbatim window is found at distance zero
    const std::size_t o = rng() % (n - l + 1);
    Series w(t.begin() + static_cast<long>(o), t.begin() + static_cast<long>(o + l));
    CHECK(sdist(w, t) == 0.0);
  }
}

TEST_CASE("sdist_profile") {
  std::vector<Sample> samples{one_channel("a", 0, {0, 1, 2, 3}), one_channel("b", 1, {3, 3, 3, 3})};
  const Dataset ds(samples, 2);
  ShapeletCandidate c{{1, 2}, 0, "a", 1};
  const auto d = sdist_profile(c, ds);
  REQUIRE(d.size() == 2);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == doctest::Approx(std::sqrt(4.0 + 1.0)));
  CHECK(sdist_profile(c, ds.subset({})).empty());
}

TEST_CASE("fstat worked examples") {
  // epsilon shifts the worked value by about 5e-11 relative
  const double worked = fstat(std::vector<double>{0, 0.2, 1.0, 1.2}, std::vector<int>{0, 0, 1, 1});
  CHECK(std::abs(worked - 25.0) / 25.0 < 1e-9);
  CHECK(fstat(std::vector<double>{0, 0.2, 1.0, 1.2}, std::vector<int>{0, 0, 1, 1}, 0.0) ==
        doctest::Approx(25.0).epsilon(1e-14));
  CHECK(fstat(std::vector<double>{1, 2, 1, 2}, std::vector<int>{0, 0, 1, 1}) == 0.0);
  CHECK(fstat(std::vector<double>{0, 0, 1, 1}, std::vector<int>{0, 0, 1, 1}, 1e-12) ==
        doctest::Approx(5e11).epsilon(1e-9));
  CHECK_THROWS_AS(fstat(std::vector<double>{1, 2}, std::vector<int>{0, 0}), DomainError);
  CHECK_THROWS_AS(fstat(std::vector<double>{1, 2}, std::vector<int>{0}), ShapeError);
}

TEST_CASE("fstat matches the group-by oracle and its invariances") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int classes = 2 + static_cast<int>(rng() % 4);
    const std::size_t n = static_cast<std::size_t>(classes) + rng() % 30;
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i < static_cast<std::size_t>(classes) ? static_cast<int>(i)
                                                   : static_cast<int>(rng() % classes);
    }
    std::vector<double> d(n);
    for (auto& v : d) v = u(rng);
    const double f = fstat(d, y);
    const double o = oracle_fstat(d, y, kFstatEpsilon);
    CHECK(std::abs(f - o) <= 1e-9 * std::max(1.0, std::abs(o)));

    // joint permutation
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> dp(n);
    std::vector<int> yp(n);
    for (std::size_t i = 0; i < n; ++i) {
      dp[i] = d[perm[i]];
      yp[i] = y[perm[i]];
    }
    CHECK(fstat(dp, yp) == doctest::Approx(f).epsilon(1e-12));

    // scale invariance without the epsilon floor; singleton classes only
    // leave no within-class variance
    if (n == static_cast<std::size_t>(classes)) continue;
    std::vector<double> ds(d);
    for (auto& v : ds) v *= 3.5;
    CHECK(fstat(ds, y, 0.0) == doctest::Approx(fstat(d, y, 0.0)).epsilon(1e-12));
  }
}

TEST_CASE("select_shapelets on a noise-free two-class set picks a motif") {
  SynthConfig cfg;
  cfg.class_count = 2;
  cfg.channel_count = 1;
  cfg.length = 30;
  cfg.samples_per_class = 3;
  cfg.noise_sigma = 0.0;
  cfg.motif_length = 8;
  cfg.seed = 4;
  const auto ds = generate_synthetic(cfg);

  SelectionConfig sel;
  sel.top_k = 1;
  sel.seed = 1;
  const auto top = select_shapelets(ds, 0, cfg.motif_length, sel);
  REQUIRE(top.size() == 1);

  // brute force: every window of every sample scored over the whole set
  const auto labels = ds.labels();
  double best = -1.0;
  for (const auto& s : ds.samples()) {
    for (const auto& c : extract_candidates(s, 0, cfg.motif_length)) {
      best = std::max(best, fstat(sdist_profile(c, ds), labels));
    }
  }
  CHECK(top[0].fstat == doctest::Approx(best).epsilon(1e-12));
  const bool is_motif = top[0].candidate.values == class_motif(0, cfg.motif_length) ||
                        top[0].candidate.values == class_motif(1, cfg.motif_length);
  CHECK(is_motif);
}

TEST_CASE("select_shapelets ordering, saturation and determinism") {
  SynthConfig cfg;
  cfg.channel_count = 2;
  cfg.length = 40;
  cfg.samples_per_class = 4;
  cfg.motif_length = 10;
  const auto ds = generate_synthetic(cfg);
  SelectionConfig sel;
  sel.top_k = 100000;
  sel.seed = 2;
  const auto all = select_shapelets(ds, 1, 10, sel);
  CHECK(all.size() == ds.size() * (40 - 10 + 1));
  for (std::size_t i = 1; i < all.size(); ++i) {
    const auto& a = all[i - 1];
    const auto& b = all[i];
    CHECK(a.fstat >= b.fstat);
    if (a.fstat == b.fstat) {
      const bool ordered = a.candidate.offset < b.candidate.offset ||
                           (a.candidate.offset == b.candidate.offset &&
                            a.candidate.source_id < b.candidate.source_id);
      CHECK(ordered);
    }
  }
  for (const auto& q : all) {
    CHECK(q.candidate.variable == 1);
    CHECK(q.distances.size() == ds.size());
    CHECK(std::isfinite(q.fstat));
  }

  sel.top_k = 7;
  const auto a = select_shapelets(ds, 1, 10, sel);
  const auto b = select_shapelets(ds, 1, 10, sel);
  REQUIRE(a.size() == 7);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].candidate.values == b[i].candidate.values);
    CHECK(a[i].fstat == all[i].fstat);
  }

  sel.exec = Exec::serial;
  const auto s = select_shapelets(ds, 1, 10, sel);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(s[i].fstat == a[i].fstat);

  CHECK_THROWS_AS(select_shapelets(ds.subset({0, 1}), 0, 10, sel), DomainError);
}
