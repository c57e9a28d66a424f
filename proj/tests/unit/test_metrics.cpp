#include <random>

#include "doctest.h"
#include "swn/error.hpp"
#include "swn/metrics.hpp"

using namespace swn;

TEST_CASE("metrics on a small example") {
  const std::vector<int> truth{0, 0, 1}, pred{0, 1, 1};
  const auto m = compute_metrics(truth, pred, 2);
  CHECK(m.acc == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.f1[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.f1[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.maf1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.precision == std::vector<double>{1.0, 0.5});
  CHECK(m.recall == std::vector<double>{0.5, 1.0});
  CHECK(m.confusion == std::vector<std::vector<std::size_t>>{{1, 1}, {0, 1}});
}

TEST_CASE("perfect and degenerate predictions") {
  const std::vector<int> truth{0, 1, 2, 2, 1, 0};
  const auto perfect = compute_metrics(truth, truth, 3);
  CHECK(perfect.acc == 1.0);
  CHECK(perfect.maf1 == 1.0);

  const std::vector<int> t2{0, 0, 1, 1}, all_zero{0, 0, 0, 0};
  const auto m = compute_metrics(t2, all_zero, 2);
  CHECK(m.acc == 0.5);
  CHECK(m.f1[1] == 0.0);
  CHECK(m.f1[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.maf1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  CHECK_THROWS_AS(compute_metrics(std::vector<int>{}, std::vector<int>{}, 2), DomainError);
}

TEST_CASE("metrics agree with a direct count") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int c = 2 + static_cast<int>(rng() % 4);
    const std::size_t n = 1 + rng() % 40;
    std::vector<int> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(rng() % static_cast<unsigned>(c));
      pred[i] = static_cast<int>(rng() % static_cast<unsigned>(c));
    }
    const auto m = compute_metrics(truth, pred, c);
    std::size_t total = 0, hits = 0;
    for (const auto& row : m.confusion) {
      for (auto v : row) total += v;
    }
    for (std::size_t i = 0; i < n; ++i) hits += truth[i] == pred[i];
    CHECK(total == n);
    CHECK(m.acc == doctest::Approx(static_cast<double>(hits) / static_cast<double>(n)));

    double f1_sum = 0.0;
    int present = 0;
    for (int k = 0; k < c; ++k) {
      double tp = 0, fp = 0, fn = 0;
      bool in_truth = false;
      for (std::size_t i = 0; i < n; ++i) {
        in_truth |= truth[i] == k;
        if (truth[i] == k && pred[i] == k) ++tp;
        if (truth[i] != k && pred[i] == k) ++fp;
        if (truth[i] == k && pred[i] != k) ++fn;
      }
      const double f1 = tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
      CHECK(m.f1[static_cast<std::size_t>(k)] == doctest::Approx(f1).epsilon(1e-12));
      if (in_truth) {
        f1_sum += f1;
        ++present;
      }
    }
    CHECK(m.maf1 == doctest::Approx(f1_sum / present).epsilon(1e-12));
    CHECK(m.maf1 >= 0.0);
    CHECK(m.maf1 <= 1.0);
  }
}

TEST_CASE("metrics json keys") {
  const std::vector<int> truth{0, 1}, pred{0, 1};
  const auto j = compute_metrics(truth, pred, 2).to_json();
  for (const char* key : {"acc", "maf1", "per_class_f1", "per_class_precision", "per_class_recall",
                          "confusion"}) {
    CHECK(j.contains(key));
  }
}
