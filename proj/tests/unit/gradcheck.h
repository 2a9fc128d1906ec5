#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "mir/core/ops.h"
#include "mir/core/tape.h"
#include "mir/core/tensor.h"

namespace mir::testing {

// Projects an arbitrary output onto a fixed random direction so every output
// element contributes to the scalar loss.
inline Tensor project(const Tensor& out, std::uint64_t seed = 99) {
  std::mt19937_64 rng(seed);
  Tensor dir = Tensor::randn(out.shape(), rng);
  return ops::sum(ops::mul(out, dir));
}

struct GradCheckResult {
  double worst_rel = 0.0;
  std::size_t leaves = 0;
};

// Central differences on every element of every leaf, compared with the tape
// gradient. Relative error is measured leaf-wise: |g - fd| / max(|g|+|fd|, 1e-8)
// using the Euclidean norm over the leaf.
inline GradCheckResult grad_check(std::vector<Tensor> leaves, const std::function<Tensor()>& loss_fn,
                                  double h = 1e-4) {
  for (auto& l : leaves) l.set_requires_grad(true);
  Tape tape;
  {
    Tape::Scope scope(tape);
    Tensor loss = loss_fn();
    tape.backward(loss);
  }
  GradCheckResult res;
  for (auto& leaf : leaves) {
    std::vector<double> analytic(leaf.grad().begin(), leaf.grad().end());
    std::vector<double> numeric(analytic.size());
    auto data = leaf.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double orig = data[i];
      data[i] = orig + h;
      const double fp = loss_fn().item();
      data[i] = orig - h;
      const double fm = loss_fn().item();
      data[i] = orig;
      numeric[i] = (fp - fm) / (2 * h);
    }
    double diff = 0, na = 0, nn = 0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
      na += analytic[i] * analytic[i];
      nn += numeric[i] * numeric[i];
    }
    const double rel = std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn), 1e-8);
    res.worst_rel = std::max(res.worst_rel, rel);
    ++res.leaves;
  }
  return res;
}

// Direct 6-nested-loop cross-correlation used as the conv oracle.
inline Tensor naive_conv(const Tensor& x, const Tensor& w, std::int64_t stride, std::int64_t pad,
                         std::int64_t groups) {
  const auto N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const auto O = w.dim(0), Cg = w.dim(1), KH = w.dim(2), KW = w.dim(3);
  const auto OH = (H + 2 * pad - KH) / stride + 1, OW = (W + 2 * pad - KW) / stride + 1;
  const auto og = O / groups;
  Tensor out({N, O, OH, OW});
  auto xd = x.data();
  auto wd = w.data();
  auto od = out.data();
  for (std::int64_t n = 0; n < N; ++n)
    for (std::int64_t o = 0; o < O; ++o)
      for (std::int64_t oh = 0; oh < OH; ++oh)
        for (std::int64_t ow = 0; ow < OW; ++ow) {
          double acc = 0;
          const auto g = o / og;
          for (std::int64_t c = 0; c < Cg; ++c)
            for (std::int64_t i = 0; i < KH; ++i)
              for (std::int64_t j = 0; j < KW; ++j) {
                const auto ih = oh * stride - pad + i, iw = ow * stride - pad + j;
                if (ih < 0 || iw < 0 || ih >= H || iw >= W) continue;
                const auto ci = g * Cg + c;
                acc += xd[((n * C + ci) * H + ih) * W + iw] * wd[((o * Cg + c) * KH + i) * KW + j];
              }
          od[((n * O + o) * OH + oh) * OW + ow] = acc;
        }
  (void)C;
  return out;
}

}  // namespace mir::testing
