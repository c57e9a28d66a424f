#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "swn/autodiff.hpp"

namespace swn {

struct GradCheckOptions {
  double step = 1e-5;
  // Coordinates checked when the store is larger; 0 checks every coordinate.
  std::size_t max_coordinates = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares the tape gradient of `build_loss` with central differences on
// the parameters of `store`. Relative error is |a - n| / max(|a|, |n|, 1e-8).
// `store` gradients are zeroed on return.
GradCheckResult grad_check(ParamStore& store, const std::function<Var(Tape&)>& build_loss,
                           const GradCheckOptions& opts = {});

}  // namespace swn
