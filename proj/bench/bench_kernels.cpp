// Serial reference vs OpenMP kernels on pipeline-sized inputs.
// Usage: bench_kernels [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <random>
#include <vector>

#include "swn/kernels.hpp"

namespace k = swn::kernels;

namespace {

double best_ms(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

template <class T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

void report(const char* name, double serial_ms, double parallel_ms, bool equal) {
  std::printf("%-16s %10.2f %10.2f %8.2fx  %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, equal ? "bitwise-equal" : "MISMATCH");
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  std::mt19937_64 rng(42);
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-16s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");
  bool all_equal = true;

  {  // shapelet scoring: 400 candidates of length 25 against 30 series of 500
    std::vector<std::vector<double>> pat_store, ser_store;
    for (int i = 0; i < 400; ++i) pat_store.push_back(random_values(rng, 25));
    for (int i = 0; i < 30; ++i) ser_store.push_back(random_values(rng, 500));
    std::vector<std::span<const double>> pats(pat_store.begin(), pat_store.end());
    std::vector<std::span<const double>> sers(ser_store.begin(), ser_store.end());
    std::vector<double> a(pats.size() * sers.size()), b(a.size());
    const double s = best_ms(repeats, [&] { k::serial::sdist_matrix(pats, sers, a); });
    const double p = best_ms(repeats, [&] { k::parallel::sdist_matrix(pats, sers, b); });
    all_equal &= same_bits(a, b);
    report("sdist_matrix", s, p, same_bits(a, b));
  }
  {  // discretization: 300 samples x 50 segments of length 10 against 3 words
    const std::size_t dim = 10, count = 300 * 50;
    const auto points = random_values(rng, count * dim);
    const auto rows = random_values(rng, 3 * dim);
    std::vector<std::size_t> a(count), b(count);
    const double s = best_ms(repeats, [&] { k::serial::assign_nearest(points, dim, rows, a); });
    const double p = best_ms(repeats, [&] { k::parallel::assign_nearest(points, dim, rows, b); });
    all_equal &= same_bits(a, b);
    report("assign_nearest", s, p, same_bits(a, b));
  }
  {  // encoder layer on raw input: 50 -> 50 channels, kernel 3, length 500
    k::Conv1dShape sh{50, 50, 3, 2, 4, 500};
    const auto x = random_values(rng, sh.in_channels * sh.length);
    const auto w = random_values(rng, sh.out_channels * sh.in_channels * sh.kernel);
    const auto bias = random_values(rng, sh.out_channels);
    std::vector<double> a(sh.out_channels * sh.length), b(a.size());
    const double s = best_ms(repeats, [&] { k::serial::conv1d_forward(sh, x, w, bias, a); });
    const double p = best_ms(repeats, [&] { k::parallel::conv1d_forward(sh, x, w, bias, b); });
    all_equal &= same_bits(a, b);
    report("conv1d_forward", s, p, same_bits(a, b));

    const auto dy = random_values(rng, a.size());
    std::vector<double> dxa(x.size()), dwa(w.size()), dba(bias.size());
    std::vector<double> dxb(x.size()), dwb(w.size()), dbb(bias.size());
    const double sb = best_ms(repeats, [&] {
      std::fill(dxa.begin(), dxa.end(), 0.0);
      std::fill(dwa.begin(), dwa.end(), 0.0);
      std::fill(dba.begin(), dba.end(), 0.0);
      k::serial::conv1d_backward(sh, x, w, dy, dxa, dwa, dba);
    });
    const double pb = best_ms(repeats, [&] {
      std::fill(dxb.begin(), dxb.end(), 0.0);
      std::fill(dwb.begin(), dwb.end(), 0.0);
      std::fill(dbb.begin(), dbb.end(), 0.0);
      k::parallel::conv1d_backward(sh, x, w, dy, dxb, dwb, dbb);
    });
    const bool eq = same_bits(dxa, dxb) && same_bits(dwa, dwb) && same_bits(dba, dbb);
    all_equal &= eq;
    report("conv1d_backward", sb, pb, eq);
  }
  return all_equal ? 0 : 1;
}
