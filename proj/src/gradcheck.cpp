#include "swn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

namespace swn {

GradCheckResult grad_check(ParamStore& store, const std::function<Var(Tape&)>& build_loss,
                           const GradCheckOptions& opts) {
  store.zero_grad();
  {
    Tape tape(store);
    tape.backward(build_loss(tape));
  }

  std::vector<std::pair<std::string, std::size_t>> coords;
  for (const auto& name : store.names()) {
    for (std::size_t i = 0; i < store.value(name).size(); ++i) coords.emplace_back(name, i);
  }
  if (opts.max_coordinates > 0 && coords.size() > opts.max_coordinates) {
    std::mt19937_64 rng(opts.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(opts.max_coordinates);
  }

  auto evaluate = [&]() {
    Tape tape(std::as_const(store));
    return tape.value(build_loss(tape)).item();
  };

  GradCheckResult res;
  for (const auto& [name, i] : coords) {
    double& theta = store.value(name).values[i];
    const double saved = theta;
    theta = saved + opts.step;
    const double up = evaluate();
    theta = saved - opts.step;
    const double down = evaluate();
    theta = saved;
    const double numeric = (up - down) / (2.0 * opts.step);
    const double analytic = store.grad(name).values[i];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic - numeric) / denom;
    ++res.coordinates;
    if (rel > res.max_rel_error) {
      res.max_rel_error = rel;
      res.worst_parameter = name;
      res.worst_index = i;
      res.worst_analytic = analytic;
      res.worst_numeric = numeric;
    }
  }
  store.zero_grad();
  return res;
}

}  // namespace swn
