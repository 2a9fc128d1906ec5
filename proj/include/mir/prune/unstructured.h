#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mir/core/tensor.h"
#include "mir/net/graph.h"

namespace mir::prune {

using MaskSet = std::map<std::string, Tensor>;

// Per conv weight, zero the ceil(sparsity*n) smallest |w| (ties: lower flat
// index first). BN and linear parameters are never masked.
MaskSet magnitude_mask(const net::LayerGraph& graph, double sparsity, bool skip_first_conv = false);

// Multiplies each masked parameter by its mask in place.
void apply_masks(net::LayerGraph& graph, const MaskSet& masks);

// 0.2, 0.4, ... below target, then target itself.
std::vector<double> progressive_schedule(double target, double step);

struct ProgressiveOptions {
  double target = 0.9;
  double step = 0.2;
  int inner_iters = 400;
  int final_iters = 4000;
  bool skip_first_conv = false;
};

// Trains `student` for the given iterations, re-applying `masks` after every
// optimizer step.
using MaskedTrainer = std::function<void(net::LayerGraph& student, const MaskSet& masks, int iterations)>;

// At each level re-derives masks from the current magnitudes, applies them,
// then trains inner_iters; finally trains final_iters at the target.
MaskSet progressive_unstructured(net::LayerGraph& student, const ProgressiveOptions& opts, const MaskedTrainer& trainer);

}  // namespace mir::prune
