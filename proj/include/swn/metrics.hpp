#pragma once

#include <span>
#include <vector>

#include "swn/json_io.hpp"

namespace swn {

struct MetricsReport {
  double acc = 0.0;
  double maf1 = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][prediction]

  json to_json() const;
};

// ACC plus per-class precision/recall/F1 from the confusion matrix. Classes
// with no true and no predicted members score 0. MAF1 averages F1 over the
// classes present in `truth`. Throws DomainError on empty input.
MetricsReport compute_metrics(std::span<const int> truth, std::span<const int> predicted,
                              int class_count);

}  // namespace swn
