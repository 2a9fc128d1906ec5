#pragma once

#include <span>
#include <string>
#include <vector>

#include "mir/core/tensor.h"

namespace mir::mimic {

enum class LossKind { mse, l1, cosine };

std::string to_string(LossKind k);
LossKind parse_loss(const std::string& name);

// Per-batch averaged losses between student features fp and (detached)
// teacher features fo, both [N, ...]:
//   mse    = sum (fp - fo)^2 / N
//   l1     = sum |fp - fo| / N
//   cosine = sum_n (1 - <fp_n, fo_n> / (|fp_n| |fo_n|)) / N, a zero-norm
//            sample contributes 1 with zero gradient
Tensor mimic_loss(const Tensor& fp, const Tensor& fo, LossKind kind);
// Unit-weight sum over kinds.
Tensor mimic_loss(const Tensor& fp, const Tensor& fo, std::span<const LossKind> kinds);

// Mean over the batch of KL(softmax(teacher/tau) || softmax(student/tau)),
// differentiable in the student logits. teacher_probs are the rows of
// softmax(teacher/tau).
Tensor kd_kl_loss(const Tensor& student_logits, std::span<const double> teacher_probs, double tau);

}  // namespace mir::mimic
