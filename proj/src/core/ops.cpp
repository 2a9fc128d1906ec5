#include "mir/core/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "mir/core/errors.h"
#include "mir/core/tape.h"

namespace mir::ops {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.ndim() != rank) {
    throw DimensionError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " +
                         shape_str(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

struct ConvGeometry {
  std::int64_t n, cin, h, w, cout, kh, kw, ho, wo, stride, pad, groups;
  std::int64_t cin_g() const { return cin / groups; }
  std::int64_t cout_g() const { return cout / groups; }
  std::int64_t patch() const { return kh * kw; }
  std::int64_t plane() const { return ho * wo; }
};

ConvGeometry conv_geometry(const Tensor& input, const Tensor& weight, const Conv2dOptions& o) {
  require_rank(input, 4, "conv2d input");
  require_rank(weight, 4, "conv2d weight");
  if (o.stride < 1 || o.padding < 0 || o.groups < 1) throw ConfigError("conv2d: invalid stride/padding/groups");
  ConvGeometry g{};
  g.n = input.dim(0);
  g.cin = input.dim(1);
  g.h = input.dim(2);
  g.w = input.dim(3);
  g.cout = weight.dim(0);
  g.kh = weight.dim(2);
  g.kw = weight.dim(3);
  g.stride = o.stride;
  g.pad = o.padding;
  g.groups = o.groups;
  if (g.cin % g.groups != 0 || g.cout % g.groups != 0) {
    throw DimensionError("conv2d: channels " + std::to_string(g.cin) + "->" + std::to_string(g.cout) +
                         " not divisible by groups " + std::to_string(g.groups));
  }
  if (weight.dim(1) != g.cin_g()) {
    throw DimensionError("conv2d: weight " + shape_str(weight.shape()) + " does not fit input " +
                         shape_str(input.shape()) + " with groups " + std::to_string(g.groups));
  }
  const auto span_h = g.h + 2 * g.pad - g.kh;
  const auto span_w = g.w + 2 * g.pad - g.kw;
  // Floor semantics for strided windows, as in every CNN framework.
  if (span_h < 0 || span_w < 0) throw ConfigError("conv2d: kernel larger than padded input");
  g.ho = span_h / g.stride + 1;
  g.wo = span_w / g.stride + 1;
  return g;
}

// cols rows: (c*kh + i)*kw + j over all input channels; cols columns: n*plane + p.
void im2col(const double* x, const ConvGeometry& g, double* cols) {
  const std::int64_t ncols = g.n * g.plane();
  for (std::int64_t c = 0; c < g.cin; ++c) {
    for (std::int64_t i = 0; i < g.kh; ++i) {
      for (std::int64_t j = 0; j < g.kw; ++j) {
        double* row = cols + ((c * g.kh + i) * g.kw + j) * ncols;
        for (std::int64_t n = 0; n < g.n; ++n) {
          const double* src = x + (n * g.cin + c) * g.h * g.w;
          double* dst = row + n * g.plane();
          for (std::int64_t oh = 0; oh < g.ho; ++oh) {
            const std::int64_t ih = oh * g.stride - g.pad + i;
            double* drow = dst + oh * g.wo;
            if (ih < 0 || ih >= g.h) {
              std::fill(drow, drow + g.wo, 0.0);
              continue;
            }
            const double* srow = src + ih * g.w;
            for (std::int64_t ow = 0; ow < g.wo; ++ow) {
              const std::int64_t iw = ow * g.stride - g.pad + j;
              drow[ow] = (iw >= 0 && iw < g.w) ? srow[iw] : 0.0;
            }
          }
        }
      }
    }
  }
}

void col2im_add(const double* cols, const ConvGeometry& g, double* dx) {
  const std::int64_t ncols = g.n * g.plane();
  for (std::int64_t c = 0; c < g.cin; ++c) {
    for (std::int64_t i = 0; i < g.kh; ++i) {
      for (std::int64_t j = 0; j < g.kw; ++j) {
        const double* row = cols + ((c * g.kh + i) * g.kw + j) * ncols;
        for (std::int64_t n = 0; n < g.n; ++n) {
          double* dst = dx + (n * g.cin + c) * g.h * g.w;
          const double* src = row + n * g.plane();
          for (std::int64_t oh = 0; oh < g.ho; ++oh) {
            const std::int64_t ih = oh * g.stride - g.pad + i;
            if (ih < 0 || ih >= g.h) continue;
            double* drow = dst + ih * g.w;
            const double* srow = src + oh * g.wo;
            for (std::int64_t ow = 0; ow < g.wo; ++ow) {
              const std::int64_t iw = ow * g.stride - g.pad + j;
              if (iw >= 0 && iw < g.w) drow[iw] += srow[ow];
            }
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Conv2dOptions& opts) {
  const ConvGeometry g = conv_geometry(input, weight, opts);
  const std::int64_t ncols = g.n * g.plane();
  const std::int64_t krows = g.cin * g.patch();
  auto cols = std::make_shared<std::vector<double>>(static_cast<std::size_t>(krows * ncols));
  im2col(input.data().data(), g, cols->data());

  RowMat out_mat(g.cout, ncols);
  const std::int64_t kg = g.cin_g() * g.patch();
  ConstMapMat wmat(weight.data().data(), g.cout, kg);
  ConstMapMat cmat(cols->data(), krows, ncols);
  for (std::int64_t grp = 0; grp < g.groups; ++grp) {
    out_mat.middleRows(grp * g.cout_g(), g.cout_g()).noalias() =
        wmat.middleRows(grp * g.cout_g(), g.cout_g()) * cmat.middleRows(grp * kg, kg);
  }

  Tensor out(Shape{g.n, g.cout, g.ho, g.wo});
  double* y = out.data().data();
  for (std::int64_t n = 0; n < g.n; ++n) {
    for (std::int64_t co = 0; co < g.cout; ++co) {
      const double* src = out_mat.data() + co * ncols + n * g.plane();
      std::copy(src, src + g.plane(), y + (n * g.cout + co) * g.plane());
    }
  }

  record_op({input, weight}, out, [input = input, weight = weight, out, g, cols, kg, ncols, krows]() mutable {
    RowMat dout(g.cout, ncols);
    const double* dy = out.grad().data();
    for (std::int64_t n = 0; n < g.n; ++n) {
      for (std::int64_t co = 0; co < g.cout; ++co) {
        const double* src = dy + (n * g.cout + co) * g.plane();
        std::copy(src, src + g.plane(), dout.data() + co * ncols + n * g.plane());
      }
    }
    ConstMapMat cmat(cols->data(), krows, ncols);
    if (weight.requires_grad()) {
      MapMat dw(weight.grad().data(), g.cout, kg);
      for (std::int64_t grp = 0; grp < g.groups; ++grp) {
        dw.middleRows(grp * g.cout_g(), g.cout_g()).noalias() +=
            dout.middleRows(grp * g.cout_g(), g.cout_g()) * cmat.middleRows(grp * kg, kg).transpose();
      }
    }
    if (input.requires_grad()) {
      ConstMapMat wmat(weight.data().data(), g.cout, kg);
      RowMat dcols(krows, ncols);
      for (std::int64_t grp = 0; grp < g.groups; ++grp) {
        dcols.middleRows(grp * kg, kg).noalias() =
            wmat.middleRows(grp * g.cout_g(), g.cout_g()).transpose() * dout.middleRows(grp * g.cout_g(), g.cout_g());
      }
      col2im_add(dcols.data(), g, input.grad().data());
    }
  });
  return out;
}

Tensor batch_norm2d(const Tensor& input, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                    Tensor& running_var, const BatchNormOptions& opts) {
  require_rank(input, 4, "batch_norm2d input");
  const std::int64_t n = input.dim(0), c = input.dim(1), plane = input.dim(2) * input.dim(3);
  for (const Tensor* t : {&gamma, &beta, static_cast<const Tensor*>(&running_mean),
                          static_cast<const Tensor*>(&running_var)}) {
    if (t->shape() != Shape{c}) {
      throw DimensionError("batch_norm2d: per-channel tensor " + shape_str(t->shape()) + " for " +
                           std::to_string(c) + " channels");
    }
  }
  const std::int64_t count = n * plane;
  if (opts.train && count < 2) throw DimensionError("batch_norm2d: train mode needs N*H*W >= 2");

  auto mean = std::make_shared<std::vector<double>>(c);
  auto invstd = std::make_shared<std::vector<double>>(c);
  const double* x = input.data().data();
  if (opts.train) {
    auto rm = running_mean.data();
    auto rv = running_var.data();
    for (std::int64_t ch = 0; ch < c; ++ch) {
      double s = 0.0;
      for (std::int64_t b = 0; b < n; ++b) {
        const double* p = x + (b * c + ch) * plane;
        for (std::int64_t i = 0; i < plane; ++i) s += p[i];
      }
      const double mu = s / static_cast<double>(count);
      double sq = 0.0;
      for (std::int64_t b = 0; b < n; ++b) {
        const double* p = x + (b * c + ch) * plane;
        for (std::int64_t i = 0; i < plane; ++i) sq += (p[i] - mu) * (p[i] - mu);
      }
      const double var = sq / static_cast<double>(count);
      (*mean)[ch] = mu;
      (*invstd)[ch] = 1.0 / std::sqrt(var + opts.eps);
      rm[ch] = (1.0 - opts.momentum) * rm[ch] + opts.momentum * mu;
      rv[ch] = (1.0 - opts.momentum) * rv[ch] +
               opts.momentum * sq / static_cast<double>(count - 1);
    }
  } else {
    const auto rm = std::as_const(running_mean).data();
    const auto rv = std::as_const(running_var).data();
    for (std::int64_t ch = 0; ch < c; ++ch) {
      (*mean)[ch] = rm[ch];
      (*invstd)[ch] = 1.0 / std::sqrt(rv[ch] + opts.eps);
    }
  }

  Tensor out(input.shape());
  double* y = out.data().data();
  const double* gm = gamma.data().data();
  const double* bt = beta.data().data();
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const double mu = (*mean)[ch], is = (*invstd)[ch];
      const double* p = x + (b * c + ch) * plane;
      double* q = y + (b * c + ch) * plane;
      for (std::int64_t i = 0; i < plane; ++i) q[i] = gm[ch] * (p[i] - mu) * is + bt[ch];
    }
  }

  const bool train = opts.train;
  record_op({input, gamma, beta}, out, [input = input, gamma = gamma, beta = beta, out, mean, invstd, n, c, plane, count, train]() mutable {
    const double* x = input.data().data();
    const double* dy = out.grad().data();
    const double* gm = gamma.data().data();
    std::vector<double> sum_dy(c, 0.0), sum_dy_xhat(c, 0.0);
    for (std::int64_t b = 0; b < n; ++b) {
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const double mu = (*mean)[ch], is = (*invstd)[ch];
        const double* p = x + (b * c + ch) * plane;
        const double* g = dy + (b * c + ch) * plane;
        double s1 = 0.0, s2 = 0.0;
        for (std::int64_t i = 0; i < plane; ++i) {
          s1 += g[i];
          s2 += g[i] * (p[i] - mu) * is;
        }
        sum_dy[ch] += s1;
        sum_dy_xhat[ch] += s2;
      }
    }
    if (gamma.requires_grad()) {
      auto dg = gamma.grad();
      for (std::int64_t ch = 0; ch < c; ++ch) dg[ch] += sum_dy_xhat[ch];
    }
    if (beta.requires_grad()) {
      auto db = beta.grad();
      for (std::int64_t ch = 0; ch < c; ++ch) db[ch] += sum_dy[ch];
    }
    if (input.requires_grad()) {
      double* dx = input.grad().data();
      const double m = static_cast<double>(count);
      for (std::int64_t b = 0; b < n; ++b) {
        for (std::int64_t ch = 0; ch < c; ++ch) {
          const double mu = (*mean)[ch], is = (*invstd)[ch];
          const double* p = x + (b * c + ch) * plane;
          const double* g = dy + (b * c + ch) * plane;
          double* q = dx + (b * c + ch) * plane;
          if (train) {
            const double k = gm[ch] * is / m;
            for (std::int64_t i = 0; i < plane; ++i) {
              const double xhat = (p[i] - mu) * is;
              q[i] += k * (m * g[i] - sum_dy[ch] - xhat * sum_dy_xhat[ch]);
            }
          } else {
            const double k = gm[ch] * is;
            for (std::int64_t i = 0; i < plane; ++i) q[i] += k * g[i];
          }
        }
      }
    }
  });
  return out;
}

Tensor global_avg_pool(const Tensor& input) {
  require_rank(input, 4, "global_avg_pool input");
  const std::int64_t n = input.dim(0), c = input.dim(1), plane = input.dim(2) * input.dim(3);
  Tensor out(Shape{n, c});
  const double* x = input.data().data();
  auto y = out.data();
  for (std::int64_t i = 0; i < n * c; ++i) {
    double s = 0.0;
    for (std::int64_t k = 0; k < plane; ++k) s += x[i * plane + k];
    y[i] = s / static_cast<double>(plane);
  }
  record_op({input}, out, [input = input, out, n, c, plane]() mutable {
    const auto dy = out.grad();
    double* dx = input.grad().data();
    const double inv = 1.0 / static_cast<double>(plane);
    for (std::int64_t i = 0; i < n * c; ++i) {
      for (std::int64_t k = 0; k < plane; ++k) dx[i * plane + k] += dy[i] * inv;
    }
  });
  return out;
}

Tensor max_pool2d(const Tensor& input, std::int64_t kernel, std::int64_t stride, std::int64_t padding) {
  require_rank(input, 4, "max_pool2d input");
  if (kernel < 1 || stride < 1 || padding < 0) throw ConfigError("max_pool2d: invalid geometry");
  const std::int64_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::int64_t ho = (h + 2 * padding - kernel) / stride + 1;
  const std::int64_t wo = (w + 2 * padding - kernel) / stride + 1;
  if (ho < 1 || wo < 1) throw ConfigError("max_pool2d: window larger than padded input");
  Tensor out(Shape{n, c, ho, wo});
  auto argmax = std::make_shared<std::vector<std::int64_t>>(static_cast<std::size_t>(n * c * ho * wo));
  const double* x = input.data().data();
  double* y = out.data().data();
  for (std::int64_t plane = 0; plane < n * c; ++plane) {
    for (std::int64_t oh = 0; oh < ho; ++oh) {
      for (std::int64_t ow = 0; ow < wo; ++ow) {
        double best = -std::numeric_limits<double>::infinity();
        std::int64_t best_idx = -1;
        for (std::int64_t i = 0; i < kernel; ++i) {
          const std::int64_t ih = oh * stride - padding + i;
          if (ih < 0 || ih >= h) continue;
          for (std::int64_t j = 0; j < kernel; ++j) {
            const std::int64_t iw = ow * stride - padding + j;
            if (iw < 0 || iw >= w) continue;
            const std::int64_t idx = plane * h * w + ih * w + iw;
            if (x[idx] > best) {
              best = x[idx];
              best_idx = idx;
            }
          }
        }
        const std::int64_t o = (plane * ho + oh) * wo + ow;
        y[o] = best;
        (*argmax)[o] = best_idx;
      }
    }
  }
  record_op({input}, out, [input = input, out, argmax]() mutable {
    const auto dy = out.grad();
    auto dx = input.grad();
    for (std::size_t o = 0; o < argmax->size(); ++o) dx[(*argmax)[o]] += dy[o];
  });
  return out;
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  require_rank(input, 2, "linear input");
  require_rank(weight, 2, "linear weight");
  const std::int64_t n = input.dim(0), d = input.dim(1), k = weight.dim(0);
  if (weight.dim(1) != d) {
    throw DimensionError("linear: weight " + shape_str(weight.shape()) + " does not fit input " +
                         shape_str(input.shape()));
  }
  if (bias.defined() && bias.shape() != Shape{k}) {
    throw DimensionError("linear: bias " + shape_str(bias.shape()) + " for " + std::to_string(k) + " outputs");
  }
  Tensor out(Shape{n, k});
  MapMat y(out.data().data(), n, k);
  ConstMapMat x(input.data().data(), n, d);
  ConstMapMat wm(weight.data().data(), k, d);
  y.noalias() = x * wm.transpose();
  if (bias.defined()) {
    const auto b = bias.data();
    for (std::int64_t r = 0; r < n; ++r)
      for (std::int64_t j = 0; j < k; ++j) y(r, j) += b[j];
  }
  record_op({input, weight, bias}, out, [input = input, weight = weight, bias = bias, out, n, d, k]() mutable {
    ConstMapMat dy(out.grad().data(), n, k);
    if (input.requires_grad()) {
      MapMat dx(input.grad().data(), n, d);
      dx.noalias() += dy * ConstMapMat(weight.data().data(), k, d);
    }
    if (weight.requires_grad()) {
      MapMat dw(weight.grad().data(), k, d);
      dw.noalias() += dy.transpose() * ConstMapMat(input.data().data(), n, d);
    }
    if (bias.defined() && bias.requires_grad()) {
      auto db = bias.grad();
      for (std::int64_t r = 0; r < n; ++r)
        for (std::int64_t j = 0; j < k; ++j) db[j] += dy(r, j);
    }
  });
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out(x.shape());
  const auto in = x.data();
  auto y = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) y[i] = in[i] > 0.0 ? in[i] : 0.0;
  record_op({x}, out, [x = x, out]() mutable {
    const auto in = x.data();
    const auto dy = out.grad();
    auto dx = x.grad();
    for (std::size_t i = 0; i < in.size(); ++i)
      if (in[i] > 0.0) dx[i] += dy[i];
  });
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  const auto x = a.data(), z = b.data();
  auto y = out.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + z[i];
  record_op({a, b}, out, [a = a, b = b, out]() mutable {
    const auto dy = out.grad();
    for (Tensor* t : {&a, &b}) {
      if (!t->requires_grad()) continue;
      auto g = t->grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i];
    }
  });
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  const auto x = a.data(), z = b.data();
  auto y = out.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] - z[i];
  record_op({a, b}, out, [a = a, b = b, out]() mutable {
    const auto dy = out.grad();
    if (a.requires_grad()) {
      auto g = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i];
    }
    if (b.requires_grad()) {
      auto g = b.grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= dy[i];
    }
  });
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  const auto x = a.data(), z = b.data();
  auto y = out.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] * z[i];
  record_op({a, b}, out, [a = a, b = b, out]() mutable {
    const auto dy = out.grad();
    const auto x = a.data(), z = b.data();
    if (a.requires_grad()) {
      auto g = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i] * z[i];
    }
    if (b.requires_grad()) {
      auto g = b.grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i] * x[i];
    }
  });
  return out;
}

Tensor scale(const Tensor& x, double factor) {
  Tensor out(x.shape());
  const auto in = x.data();
  auto y = out.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = in[i] * factor;
  record_op({x}, out, [x = x, out, factor]() mutable {
    const auto dy = out.grad();
    auto g = x.grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i] * factor;
  });
  return out;
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  Tensor out = Tensor::scalar(s);
  record_op({x}, out, [x = x, out]() mutable {
    const double dy = out.grad()[0];
    for (double& g : x.grad()) g += dy;
  });
  return out;
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: " + shape_str(x.shape()) + " cannot become " + shape_str(shape));
  }
  Tensor out(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()));
  record_op({x}, out, [x = x, out]() mutable {
    const auto dy = out.grad();
    auto g = x.grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i];
  });
  return out;
}

Tensor flatten(const Tensor& x) {
  if (x.ndim() < 1) throw DimensionError("flatten of a rank-0 tensor");
  const std::int64_t n = x.dim(0);
  return reshape(x, Shape{n, x.numel() / n});
}

std::vector<double> softmax_rows(const Tensor& logits, double temperature) {
  require_rank(logits, 2, "softmax input");
  const std::int64_t n = logits.dim(0), k = logits.dim(1);
  std::vector<double> p(static_cast<std::size_t>(n * k));
  const auto z = logits.data();
  for (std::int64_t r = 0; r < n; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::int64_t j = 0; j < k; ++j) mx = std::max(mx, z[r * k + j] / temperature);
    double s = 0.0;
    for (std::int64_t j = 0; j < k; ++j) {
      p[r * k + j] = std::exp(z[r * k + j] / temperature - mx);
      s += p[r * k + j];
    }
    for (std::int64_t j = 0; j < k; ++j) p[r * k + j] /= s;
  }
  return p;
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  require_rank(logits, 2, "cross_entropy logits");
  const std::int64_t n = logits.dim(0), k = logits.dim(1);
  if (static_cast<std::int64_t>(labels.size()) != n) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for batch " +
                         std::to_string(n));
  }
  for (int y : labels) {
    if (y < 0 || y >= k) throw ConfigError("cross_entropy: label " + std::to_string(y) + " out of range");
  }
  auto probs = std::make_shared<std::vector<double>>(softmax_rows(logits));
  double loss = 0.0;
  const auto z = logits.data();
  for (std::int64_t r = 0; r < n; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::int64_t j = 0; j < k; ++j) mx = std::max(mx, z[r * k + j]);
    double s = 0.0;
    for (std::int64_t j = 0; j < k; ++j) s += std::exp(z[r * k + j] - mx);
    loss += -(z[r * k + labels[r]] - mx - std::log(s));
  }
  Tensor out = Tensor::scalar(loss / static_cast<double>(n));
  std::vector<int> ys(labels.begin(), labels.end());
  record_op({logits}, out, [logits = logits, out, probs, ys, n, k]() mutable {
    const double dy = out.grad()[0] / static_cast<double>(n);
    auto g = logits.grad();
    for (std::int64_t r = 0; r < n; ++r) {
      for (std::int64_t j = 0; j < k; ++j) {
        const double target = (j == ys[r]) ? 1.0 : 0.0;
        g[r * k + j] += dy * ((*probs)[r * k + j] - target);
      }
    }
  });
  return out;
}

}  // namespace mir::ops
