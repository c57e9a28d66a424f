#pragma once

#include "swn/autodiff.hpp"

namespace swn {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
};

// One bias-corrected Adam update over every parameter, then zeroes the
// gradients. Throws StateError if no backward pass has run since the last
// step.
void adam_step(ParamStore& store, const AdamConfig& cfg);

}  // namespace swn
