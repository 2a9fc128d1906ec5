#pragma once

#include <cstddef>
#include <span>

#include "mir/data/dataset.h"
#include "mir/net/graph.h"

namespace mir::harness {

struct EvalResult {
  double top1 = 0.0;
  double top5 = 0.0;
  std::size_t count = 0;
};

// True when `label` is among the k largest entries of `row`; equal values
// rank the lower class index first.
bool topk_hit(std::span<const double> row, int label, int k);

// Top-1/top-5 over logits [N, K].
EvalResult score_logits(std::span<const double> logits, std::size_t classes, std::span<const int> labels);

// Eval-mode accuracy over a whole split, no augmentation.
EvalResult evaluate(const net::LayerGraph& model, const data::Dataset& split, std::size_t batch = 200);

}  // namespace mir::harness
