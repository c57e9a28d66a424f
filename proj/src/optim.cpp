#include "swn/optim.hpp"

#include <cmath>

#include "swn/error.hpp"

namespace swn {

void adam_step(ParamStore& store, const AdamConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!store.has_pending_gradients()) throw StateError("adam_step called before backward");

  const std::size_t t = store.step() + 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (const auto& name : store.names()) {
    auto& s = store.slot(name);
    for (std::size_t i = 0; i < s.value.size(); ++i) {
      const double g = s.grad.values[i];
      s.m.values[i] = cfg.beta1 * s.m.values[i] + (1.0 - cfg.beta1) * g;
      s.v.values[i] = cfg.beta2 * s.v.values[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = s.m.values[i] / c1;
      const double v_hat = s.v.values[i] / c2;
      s.value.values[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps_hat);
    }
  }
  store.set_step(t);
  store.zero_grad();
}

}  // namespace swn
