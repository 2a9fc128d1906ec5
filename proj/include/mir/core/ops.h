#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mir/core/tensor.h"

// Differentiable primitives. Each op records itself on the thread's active
// Tape (if any) when one of its inputs requires a gradient.
namespace mir::ops {

struct Conv2dOptions {
  std::int64_t stride = 1;
  std::int64_t padding = 0;
  std::int64_t groups = 1;
};

// Cross-correlation with zero padding, no bias.
// input [N,Cin,H,W], weight [Cout,Cin/groups,Kh,Kw] -> [N,Cout,H',W'].
Tensor conv2d(const Tensor& input, const Tensor& weight, const Conv2dOptions& opts = {});

struct BatchNormOptions {
  bool train = false;
  double momentum = 0.1;
  double eps = 1e-5;
};

// Train mode normalizes with batch statistics and updates the running
// statistics in place (running variance uses the unbiased estimate).
Tensor batch_norm2d(const Tensor& input, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                    Tensor& running_var, const BatchNormOptions& opts);

Tensor global_avg_pool(const Tensor& input);  // [N,C,H,W] -> [N,C]
Tensor max_pool2d(const Tensor& input, std::int64_t kernel, std::int64_t stride, std::int64_t padding);

// input [N,D], weight [K,D], bias [K] (may be undefined) -> [N,K].
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

Tensor relu(const Tensor& x);  // subgradient at 0 is 0
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor sum(const Tensor& x);   // -> [1]
Tensor mean(const Tensor& x);  // -> [1]
Tensor reshape(const Tensor& x, Shape shape);
Tensor flatten(const Tensor& x);  // [N,...] -> [N, prod(...)]

// Mean over the batch of -log softmax(logits)[label].
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);

// Row-wise softmax of logits / temperature; not differentiable.
std::vector<double> softmax_rows(const Tensor& logits, double temperature = 1.0);

}  // namespace mir::ops
