#include "swn/metrics.hpp"

#include "swn/error.hpp"

namespace swn {

json MetricsReport::to_json() const {
  return {{"acc", acc},
          {"maf1", maf1},
          {"per_class_f1", f1},
          {"per_class_precision", precision},
          {"per_class_recall", recall},
          {"confusion", confusion}};
}

MetricsReport compute_metrics(std::span<const int> truth, std::span<const int> predicted,
                              int class_count) {
  if (truth.empty()) throw DomainError("metrics need at least one sample");
  if (truth.size() != predicted.size()) throw ShapeError("truth and prediction lengths differ");
  if (class_count < 1) throw DomainError("class count must be positive");
  const auto c = static_cast<std::size_t>(class_count);

  MetricsReport r;
  r.confusion.assign(c, std::vector<std::size_t>(c, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= class_count || predicted[i] < 0 ||
        predicted[i] >= class_count) {
      throw IndexError("class index outside [0, " + std::to_string(class_count) + ")");
    }
    ++r.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
    if (truth[i] == predicted[i]) ++correct;
  }
  r.acc = static_cast<double>(correct) / static_cast<double>(truth.size());

  r.precision.assign(c, 0.0);
  r.recall.assign(c, 0.0);
  r.f1.assign(c, 0.0);
  double f1_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t row = 0, col = 0;
    for (std::size_t j = 0; j < c; ++j) {
      row += r.confusion[k][j];
      col += r.confusion[j][k];
    }
    const auto tp = static_cast<double>(r.confusion[k][k]);
    if (col > 0) r.precision[k] = tp / static_cast<double>(col);
    if (row > 0) r.recall[k] = tp / static_cast<double>(row);
    const double pr = r.precision[k] + r.recall[k];
    if (pr > 0.0) r.f1[k] = 2.0 * r.precision[k] * r.recall[k] / pr;
    if (row > 0) {
      f1_sum += r.f1[k];
      ++present;
    }
  }
  r.maf1 = f1_sum / static_cast<double>(present);
  return r;
}

}  // namespace swn
