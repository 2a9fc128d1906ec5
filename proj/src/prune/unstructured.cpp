#include "mir/prune/unstructured.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mir/core/errors.h"

namespace mir::prune {

using net::LayerGraph;
using net::NodeKind;

MaskSet magnitude_mask(const LayerGraph& graph, double sparsity, bool skip_first_conv) {
  if (!(sparsity >= 0.0) || sparsity >= 1.0) throw ConfigError("sparsity must lie in [0, 1)");
  MaskSet masks;
  bool first = true;
  for (const auto& n : graph.nodes()) {
    if (n.kind != NodeKind::conv && n.kind != NodeKind::depthwise_conv) continue;
    const bool skip = first && skip_first_conv;
    first = false;
    const Tensor& w = graph.param(n.id + ".weight");
    Tensor mask(w.shape(), 1.0);
    if (!skip) {
      const auto count = static_cast<std::size_t>(w.numel());
      const auto zeros = static_cast<std::size_t>(std::ceil(sparsity * static_cast<double>(count) - 1e-9));
      std::vector<std::size_t> order(count);
      std::iota(order.begin(), order.end(), 0);
      auto d = w.data();
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
      for (std::size_t i = 0; i < zeros; ++i) mask.data()[order[i]] = 0.0;
    }
    masks.emplace(n.id + ".weight", std::move(mask));
  }
  return masks;
}

void apply_masks(LayerGraph& graph, const MaskSet& masks) {
  for (const auto& [name, mask] : masks) {
    auto p = graph.param(name).data();
    auto m = mask.data();
    if (p.size() != m.size()) throw DimensionError("mask size mismatch for " + name);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] *= m[i];
  }
}

std::vector<double> progressive_schedule(double target, double step) {
  if (!(target > 0.0) || target >= 1.0) throw ConfigError("target sparsity must lie in (0, 1)");
  if (!(step > 0.0)) throw ConfigError("sparsity step must be positive or the schedule never reaches the target");
  std::vector<double> levels;
  for (int k = 1;; ++k) {
    const double level = k * step;
    if (level >= target - 1e-9) break;
    levels.push_back(level);
  }
  levels.push_back(target);
  return levels;
}

MaskSet progressive_unstructured(LayerGraph& student, const ProgressiveOptions& opts, const MaskedTrainer& trainer) {
  MaskSet masks;
  for (double level : progressive_schedule(opts.target, opts.step)) {
    masks = magnitude_mask(student, level, opts.skip_first_conv);
    apply_masks(student, masks);
    if (opts.inner_iters > 0) trainer(student, masks, opts.inner_iters);
  }
  if (opts.final_iters > 0) trainer(student, masks, opts.final_iters);
  apply_masks(student, masks);
  return masks;
}

}  // namespace mir::prune
