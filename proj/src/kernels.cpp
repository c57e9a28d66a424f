#include "swn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace swn::kernels {

namespace {

// Below this many multiply-adds a kernel stays on the calling thread.
constexpr std::size_t kParallelWork = 1u << 15;

// Input offset of tap j relative to output position t, and the range of t
// for which that input index is in bounds.
struct TapRange {
  std::ptrdiff_t shift;
  std::size_t begin;
  std::size_t end;
};

TapRange tap_range(const Conv1dShape& s, std::size_t j) {
  const auto shift = static_cast<std::ptrdiff_t>(j * s.dilation) -
                     static_cast<std::ptrdiff_t>(s.pad_left);
  const auto len = static_cast<std::ptrdiff_t>(s.length);
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(len, len - shift);
  if (hi <= lo) return {shift, 0, 0};
  return {shift, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

void sdist_row(std::span<const double> pattern, std::span<const std::span<const double>> series,
               double* out, std::vector<double>& scratch) {
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto windows = series[s].size() - pattern.size() + 1;
    if (scratch.size() < windows) scratch.resize(windows);
    out[s] = std::sqrt(min_window_sq_distance(pattern, series[s], {scratch.data(), windows}));
  }
}

void conv_forward_channel(const Conv1dShape& s, const double* x, const double* w,
                          const double* b, double* y, std::size_t c) {
  double* yc = y + c * s.length;
  std::fill(yc, yc + s.length, b ? b[c] : 0.0);
  for (std::size_t i = 0; i < s.in_channels; ++i) {
    const double* xi = x + i * s.length;
    const double* wci = w + (c * s.in_channels + i) * s.kernel;
    for (std::size_t j = 0; j < s.kernel; ++j) {
      const auto r = tap_range(s, j);
      const double wv = wci[j];
      const double* src = xi + (static_cast<std::ptrdiff_t>(r.begin) + r.shift);
      double* dst = yc + r.begin;
      for (std::size_t t = 0; t < r.end - r.begin; ++t) dst[t] += wv * src[t];
    }
  }
}

void conv_backward_params_channel(const Conv1dShape& s, const double* x, const double* dy,
                                  double* dw, double* db, std::size_t c) {
  const double* dyc = dy + c * s.length;
  if (db) {
    double acc = 0.0;
    for (std::size_t t = 0; t < s.length; ++t) acc += dyc[t];
    db[c] += acc;
  }
  if (!dw) return;
  for (std::size_t i = 0; i < s.in_channels; ++i) {
    const double* xi = x + i * s.length;
    double* dwci = dw + (c * s.in_channels + i) * s.kernel;
    for (std::size_t j = 0; j < s.kernel; ++j) {
      const auto r = tap_range(s, j);
      const double* src = xi + (static_cast<std::ptrdiff_t>(r.begin) + r.shift);
      const double* g = dyc + r.begin;
      double acc = 0.0;
      for (std::size_t t = 0; t < r.end - r.begin; ++t) acc += g[t] * src[t];
      dwci[j] += acc;
    }
  }
}

void conv_backward_input_channel(const Conv1dShape& s, const double* w, const double* dy,
                                 double* dx, std::size_t i) {
  double* dxi = dx + i * s.length;
  for (std::size_t c = 0; c < s.out_channels; ++c) {
    const double* dyc = dy + c * s.length;
    const double* wci = w + (c * s.in_channels + i) * s.kernel;
    for (std::size_t j = 0; j < s.kernel; ++j) {
      const auto r = tap_range(s, j);
      const double wv = wci[j];
      double* dst = dxi + (static_cast<std::ptrdiff_t>(r.begin) + r.shift);
      const double* g = dyc + r.begin;
      for (std::size_t t = 0; t < r.end - r.begin; ++t) dst[t] += wv * g[t];
    }
  }
}

std::size_t conv_work(const Conv1dShape& s) {
  return s.in_channels * s.out_channels * s.kernel * s.length;
}

}  // namespace

double min_window_sq_distance(std::span<const double> pattern, std::span<const double> series,
                              std::span<double> scratch) noexcept {
  const std::size_t l = pattern.size();
  const std::size_t windows = series.size() - l + 1;
  double* acc = scratch.data();
  std::fill(acc, acc + windows, 0.0);
  // Outer loop over pattern positions keeps each window's sum in j order
  // while the inner loop runs across windows and vectorizes.
  for (std::size_t j = 0; j < l; ++j) {
    const double pj = pattern[j];
    const double* sj = series.data() + j;
    for (std::size_t o = 0; o < windows; ++o) {
      const double d = pj - sj[o];
      acc[o] += d * d;
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t o = 0; o < windows; ++o) best = std::min(best, acc[o]);
  return best;
}

std::size_t nearest_row(std::span<const double> point, std::span<const double> rows,
                        std::size_t dim, double* best_sq) noexcept {
  const std::size_t k = dim == 0 ? 0 : rows.size() / dim;
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < k; ++r) {
    const double* row = rows.data() + r * dim;
    double d = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = point[j] - row[j];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = r;
    }
  }
  if (best_sq) *best_sq = best_d;
  return best;
}

namespace serial {

void sdist_matrix(std::span<const std::span<const double>> patterns,
                  std::span<const std::span<const double>> series, std::span<double> out) {
  std::vector<double> scratch;
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    sdist_row(patterns[p], series, out.data() + p * series.size(), scratch);
  }
}

void assign_nearest(std::span<const double> points, std::size_t dim,
                    std::span<const double> rows, std::span<std::size_t> out) {
  for (std::size_t p = 0; p < out.size(); ++p) {
    out[p] = nearest_row(points.subspan(p * dim, dim), rows, dim);
  }
}

void conv1d_forward(const Conv1dShape& shape, std::span<const double> x,
                    std::span<const double> w, std::span<const double> b, std::span<double> y) {
  for (std::size_t c = 0; c < shape.out_channels; ++c) {
    conv_forward_channel(shape, x.data(), w.data(), b.empty() ? nullptr : b.data(), y.data(), c);
  }
}

void conv1d_backward(const Conv1dShape& shape, std::span<const double> x,
                     std::span<const double> w, std::span<const double> dy,
                     std::span<double> dx, std::span<double> dw, std::span<double> db) {
  if (!dw.empty() || !db.empty()) {
    for (std::size_t c = 0; c < shape.out_channels; ++c) {
      conv_backward_params_channel(shape, x.data(), dy.data(), dw.empty() ? nullptr : dw.data(),
                                   db.empty() ? nullptr : db.data(), c);
    }
  }
  if (!dx.empty()) {
    for (std::size_t i = 0; i < shape.in_channels; ++i) {
      conv_backward_input_channel(shape, w.data(), dy.data(), dx.data(), i);
    }
  }
}

}  // namespace serial

namespace parallel {

void sdist_matrix(std::span<const std::span<const double>> patterns,
                  std::span<const std::span<const double>> series, std::span<double> out) {
  const auto count = static_cast<std::ptrdiff_t>(patterns.size());
#pragma omp parallel
  {
    std::vector<double> scratch;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t p = 0; p < count; ++p) {
      const auto row = static_cast<std::size_t>(p);
      sdist_row(patterns[row], series, out.data() + row * series.size(), scratch);
    }
  }
}

void assign_nearest(std::span<const double> points, std::size_t dim,
                    std::span<const double> rows, std::span<std::size_t> out) {
  const auto count = static_cast<std::ptrdiff_t>(out.size());
  const bool big = out.size() * rows.size() >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::ptrdiff_t p = 0; p < count; ++p) {
    const auto i = static_cast<std::size_t>(p);
    out[i] = nearest_row(points.subspan(i * dim, dim), rows, dim);
  }
}

void conv1d_forward(const Conv1dShape& shape, std::span<const double> x,
                    std::span<const double> w, std::span<const double> b, std::span<double> y) {
  const auto count = static_cast<std::ptrdiff_t>(shape.out_channels);
  const bool big = conv_work(shape) >= kParallelWork;
  const double* bias = b.empty() ? nullptr : b.data();
#pragma omp parallel for schedule(static) if (big)
  for (std::ptrdiff_t c = 0; c < count; ++c) {
    conv_forward_channel(shape, x.data(), w.data(), bias, y.data(), static_cast<std::size_t>(c));
  }
}

void conv1d_backward(const Conv1dShape& shape, std::span<const double> x,
                     std::span<const double> w, std::span<const double> dy,
                     std::span<double> dx, std::span<double> dw, std::span<double> db) {
  const bool big = conv_work(shape) >= kParallelWork;
  if (!dw.empty() || !db.empty()) {
    const auto count = static_cast<std::ptrdiff_t>(shape.out_channels);
    double* dwp = dw.empty() ? nullptr : dw.data();
    double* dbp = db.empty() ? nullptr : db.data();
#pragma omp parallel for schedule(static) if (big)
    for (std::ptrdiff_t c = 0; c < count; ++c) {
      conv_backward_params_channel(shape, x.data(), dy.data(), dwp, dbp,
                                   static_cast<std::size_t>(c));
    }
  }
  if (!dx.empty()) {
    const auto count = static_cast<std::ptrdiff_t>(shape.in_channels);
#pragma omp parallel for schedule(static) if (big)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      conv_backward_input_channel(shape, w.data(), dy.data(), dx.data(),
                                  static_cast<std::size_t>(i));
    }
  }
}

}  // namespace parallel

}  // namespace swn::kernels
