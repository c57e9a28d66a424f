#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::parallel with the same
// signature; both evaluate each output element with the same arithmetic, so
// their results agree bitwise. Tests and the benchmark compare the two.

#include <cstddef>
#include <span>
#include <vector>

namespace swn {

enum class Exec { serial, parallel };

namespace kernels {

// min over windows of sum_j (pattern[j] - series[o + j])^2, summed in j
// order for every window. Requires 1 <= pattern.size() <= series.size().
// `scratch` must hold series.size() - pattern.size() + 1 values.
double min_window_sq_distance(std::span<const double> pattern, std::span<const double> series,
                              std::span<double> scratch) noexcept;

// Index of the row of `rows` (k rows of `dim` values) nearest to `point` in
// squared Euclidean distance; ties go to the smaller index.
std::size_t nearest_row(std::span<const double> point, std::span<const double> rows,
                        std::size_t dim, double* best_sq = nullptr) noexcept;

struct Conv1dShape {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t dilation = 1;
  std::size_t pad_left = 0;  // output length always equals input length
  std::size_t length = 1;
};

namespace serial {

// out[p * series.size() + s] = sdist(patterns[p], series[s]).
void sdist_matrix(std::span<const std::span<const double>> patterns,
                  std::span<const std::span<const double>> series, std::span<double> out);

// Nearest-row assignment of `points` (row-major, `dim` wide).
void assign_nearest(std::span<const double> points, std::size_t dim,
                    std::span<const double> rows, std::span<std::size_t> out);

// y[c, t] = b[c] + sum_{i,j} w[c, i, j] * x[i, t - pad_left + j * dilation]
void conv1d_forward(const Conv1dShape& shape, std::span<const double> x,
                    std::span<const double> w, std::span<const double> b, std::span<double> y);

// Accumulates into dx, dw, db. Any of them may be empty to skip it.
void conv1d_backward(const Conv1dShape& shape, std::span<const double> x,
                     std::span<const double> w, std::span<const double> dy,
                     std::span<double> dx, std::span<double> dw, std::span<double> db);

}  // namespace serial

namespace parallel {

void sdist_matrix(std::span<const std::span<const double>> patterns,
                  std::span<const std::span<const double>> series, std::span<double> out);
void assign_nearest(std::span<const double> points, std::size_t dim,
                    std::span<const double> rows, std::span<std::size_t> out);
void conv1d_forward(const Conv1dShape& shape, std::span<const double> x,
                    std::span<const double> w, std::span<const double> b, std::span<double> y);
void conv1d_backward(const Conv1dShape& shape, std::span<const double> x,
                     std::span<const double> w, std::span<const double> dy,
                     std::span<double> dx, std::span<double> dw, std::span<double> db);

}  // namespace parallel

inline void sdist_matrix(Exec exec, std::span<const std::span<const double>> patterns,
                         std::span<const std::span<const double>> series, std::span<double> out) {
  exec == Exec::parallel ? parallel::sdist_matrix(patterns, series, out)
                         : serial::sdist_matrix(patterns, series, out);
}

inline void assign_nearest(Exec exec, std::span<const double> points, std::size_t dim,
                           std::span<const double> rows, std::span<std::size_t> out) {
  exec == Exec::parallel ? parallel::assign_nearest(points, dim, rows, out)
                         : serial::assign_nearest(points, dim, rows, out);
}

}  // namespace kernels
}  // namespace swn
