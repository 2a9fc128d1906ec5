#pragma once

#include <span>
#include <vector>

#include "mir/core/tensor.h"

namespace mir {

struct SgdOptions {
  double lr = 0.02;
  double momentum = 0.9;
  double weight_decay = 1e-4;
};

// One coupled-decay momentum update:
//   v <- momentum * v + grad + weight_decay * param;  param <- param - lr * v
// Throws ConfigError when lr <= 0.
void sgd_update(std::span<double> param, std::span<const double> grad, std::span<double> velocity,
                const SgdOptions& opts);

/// SGD with momentum over a fixed parameter list. A parameter without a
/// gradient buffer is treated as having a zero gradient.
class Sgd {
 public:
  Sgd(std::vector<Tensor> params, SgdOptions opts);

  void step();
  void set_lr(double lr) { opts_.lr = lr; }
  double lr() const { return opts_.lr; }
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> velocity_;
  SgdOptions opts_;
};

// Learning rate after dividing `base` by `factor` at every decay point
// (fractions of `total`) that `iteration` has reached.
double step_decay_lr(double base, int iteration, int total, std::span<const double> decay_points,
                     double factor = 0.1);

}  // namespace mir
