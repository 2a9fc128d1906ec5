#include "mir/core/sgd.h"

#include <cmath>
#include <utility>

#include "mir/core/errors.h"

namespace mir {

void sgd_update(std::span<double> param, std::span<const double> grad, std::span<double> velocity,
                const SgdOptions& opts) {
  if (!(opts.lr > 0.0)) throw ConfigError("sgd: learning rate must be positive");
  if (grad.size() != param.size() || velocity.size() != param.size()) {
    throw DimensionError("sgd: param/grad/velocity length mismatch");
  }
  for (std::size_t i = 0; i < param.size(); ++i) {
    velocity[i] = opts.momentum * velocity[i] + grad[i] + opts.weight_decay * param[i];
    param[i] -= opts.lr * velocity[i];
  }
}

Sgd::Sgd(std::vector<Tensor> params, SgdOptions opts) : params_(std::move(params)), opts_(opts) {
  if (!(opts_.lr > 0.0)) throw ConfigError("sgd: learning rate must be positive");
  velocity_.reserve(params_.size());
  for (const auto& p : params_) velocity_.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
}

void Sgd::step() {
  std::vector<double> zeros;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    std::span<const double> g;
    if (p.has_grad()) {
      g = std::as_const(p).grad();
    } else {
      zeros.assign(static_cast<std::size_t>(p.numel()), 0.0);
      g = zeros;
    }
    sgd_update(p.data(), g, velocity_[i], opts_);
  }
}

double step_decay_lr(double base, int iteration, int total, std::span<const double> decay_points, double factor) {
  double lr = base;
  for (double point : decay_points) {
    const int at = static_cast<int>(std::ceil(point * total - 1e-9));
    if (iteration >= at) lr *= factor;
  }
  return lr;
}

}  // namespace mir
