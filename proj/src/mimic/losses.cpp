#include "mir/mimic/losses.h"

#include <algorithm>
#include <cmath>
#include <memory>

#include "mir/core/errors.h"
#include "mir/core/ops.h"
#include "mir/core/tape.h"

namespace mir::mimic {

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::mse: return "mse";
    case LossKind::l1: return "l1";
    case LossKind::cosine: return "cosine";
  }
  return "?";
}

LossKind parse_loss(const std::string& name) {
  if (name == "mse") return LossKind::mse;
  if (name == "l1") return LossKind::l1;
  if (name == "cosine" || name == "cos") return LossKind::cosine;
  throw ConfigError("unknown mimic loss '" + name + "'");
}

namespace {

Tensor mse(const Tensor& fp, const Tensor& fo, double n) {
  const auto a = fp.data(), b = fo.data();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  Tensor out = Tensor::scalar(s / n);
  record_op({fp}, out, [fp = fp, fo = fo, out, n]() mutable {
    const double dy = out.grad()[0] * 2.0 / n;
    auto g = fp.grad();
    const auto a = fp.data(), b = fo.data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy * (a[i] - b[i]);
  });
  return out;
}

Tensor l1(const Tensor& fp, const Tensor& fo, double n) {
  const auto a = fp.data(), b = fo.data();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  Tensor out = Tensor::scalar(s / n);
  record_op({fp}, out, [fp = fp, fo = fo, out, n]() mutable {
    const double dy = out.grad()[0] / n;
    auto g = fp.grad();
    const auto a = fp.data(), b = fo.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double d = a[i] - b[i];
      g[i] += dy * (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0));
    }
  });
  return out;
}

Tensor cosine(const Tensor& fp, const Tensor& fo, std::int64_t n) {
  const auto a = fp.data(), b = fo.data();
  const std::int64_t d = fp.numel() / n;
  // per sample: dot, |a|, |b|
  auto stats = std::make_shared<std::vector<double>>(3 * n, 0.0);
  double loss = 0.0;
  for (std::int64_t r = 0; r < n; ++r) {
    double dot = 0, na = 0, nb = 0;
    for (std::int64_t i = 0; i < d; ++i) {
      const double x = a[r * d + i], y = b[r * d + i];
      dot += x * y;
      na += x * x;
      nb += y * y;
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    (*stats)[3 * r] = dot;
    (*stats)[3 * r + 1] = na;
    (*stats)[3 * r + 2] = nb;
    loss += (na > 0 && nb > 0) ? 1.0 - dot / (na * nb) : 1.0;
  }
  Tensor out = Tensor::scalar(loss / static_cast<double>(n));
  record_op({fp}, out, [fp = fp, fo = fo, out, stats, n, d]() mutable {
    const double dy = out.grad()[0] / static_cast<double>(n);
    auto g = fp.grad();
    const auto a = fp.data(), b = fo.data();
    for (std::int64_t r = 0; r < n; ++r) {
      const double dot = (*stats)[3 * r], na = (*stats)[3 * r + 1], nb = (*stats)[3 * r + 2];
      if (!(na > 0 && nb > 0)) continue;
      // d/da of -dot/(|a||b|) = -(b/(|a||b|) - dot a/(|a|^3 |b|))
      const double inv = 1.0 / (na * nb);
      const double c = dot / (na * na * na * nb);
      for (std::int64_t i = 0; i < d; ++i) g[r * d + i] += dy * (c * a[r * d + i] - inv * b[r * d + i]);
    }
  });
  return out;
}

}  // namespace

Tensor mimic_loss(const Tensor& fp, const Tensor& fo, LossKind kind) {
  if (fp.shape() != fo.shape()) {
    throw DimensionError("mimic_loss: feature shapes differ " + shape_str(fp.shape()) + " vs " + shape_str(fo.shape()));
  }
  if (fp.ndim() < 1) throw DimensionError("mimic_loss: features need a batch axis");
  if (fo.requires_grad()) throw ConfigError("mimic_loss: teacher features must be detached");
  const std::int64_t n = fp.dim(0);
  switch (kind) {
    case LossKind::mse: return mse(fp, fo, static_cast<double>(n));
    case LossKind::l1: return l1(fp, fo, static_cast<double>(n));
    case LossKind::cosine: return cosine(fp, fo, n);
  }
  throw ConfigError("unhandled loss kind");
}

Tensor mimic_loss(const Tensor& fp, const Tensor& fo, std::span<const LossKind> kinds) {
  if (kinds.empty()) throw ConfigError("mimic_loss: empty loss set");
  Tensor total = mimic_loss(fp, fo, kinds[0]);
  for (std::size_t i = 1; i < kinds.size(); ++i) total = ops::add(total, mimic_loss(fp, fo, kinds[i]));
  return total;
}

Tensor kd_kl_loss(const Tensor& student_logits, std::span<const double> teacher_probs, double tau) {
  if (!(tau > 0)) throw ConfigError("KD temperature must be positive");
  if (student_logits.ndim() != 2 || static_cast<std::int64_t>(teacher_probs.size()) != student_logits.numel()) {
    throw DimensionError("kd_kl_loss: logits/probability shape mismatch");
  }
  const std::int64_t n = student_logits.dim(0), k = student_logits.dim(1);
  auto ps = std::make_shared<std::vector<double>>(ops::softmax_rows(student_logits, tau));
  double loss = 0.0;
  const auto z = student_logits.data();
  for (std::int64_t r = 0; r < n; ++r) {
    double mx = z[r * k];
    for (std::int64_t j = 1; j < k; ++j) mx = std::max(mx, z[r * k + j]);
    double s = 0.0;
    for (std::int64_t j = 0; j < k; ++j) s += std::exp((z[r * k + j] - mx) / tau);
    const double lse = std::log(s);
    for (std::int64_t j = 0; j < k; ++j) {
      const double pt = teacher_probs[r * k + j];
      const double log_ps = (z[r * k + j] - mx) / tau - lse;
      if (pt > 0) loss += pt * (std::log(pt) - log_ps);
    }
  }
  Tensor out = Tensor::scalar(loss / static_cast<double>(n));
  auto pt = std::make_shared<std::vector<double>>(teacher_probs.begin(), teacher_probs.end());
  record_op({student_logits}, out, [z = student_logits, out, ps, pt, n, tau]() mutable {
    const double dy = out.grad()[0] / (static_cast<double>(n) * tau);
    auto g = z.grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy * ((*ps)[i] - (*pt)[i]);
  });
  return out;
}

}  // namespace mir::mimic
