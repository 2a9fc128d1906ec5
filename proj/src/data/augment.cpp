#include "mir/data/augment.h"

#include "mir/core/errors.h"

namespace mir::data {

AugmentDraw draw_augment(std::mt19937_64& rng, const AugmentOptions& opts) {
  AugmentDraw d = identity_draw(opts);
  if (opts.flip) d.flip = std::bernoulli_distribution(0.5)(rng);
  if (opts.crop && opts.pad > 0) {
    std::uniform_int_distribution<std::int64_t> off(0, 2 * opts.pad);
    d.dx = off(rng);
    d.dy = off(rng);
  }
  return d;
}

AugmentDraw identity_draw(const AugmentOptions& opts) { return {false, opts.pad, opts.pad}; }

void apply_augment(std::span<const double> img, std::span<double> out, std::int64_t c, std::int64_t h,
                   std::int64_t w, const AugmentDraw& draw, std::int64_t pad) {
  if (static_cast<std::int64_t>(img.size()) != c * h * w || out.size() != img.size()) {
    throw DimensionError("apply_augment: buffer size mismatch");
  }
  for (std::int64_t ch = 0; ch < c; ++ch)
    for (std::int64_t y = 0; y < h; ++y)
      for (std::int64_t x = 0; x < w; ++x) {
        // crop window origin (dx, dy) in the padded image
        const std::int64_t sy = y + draw.dy - pad;
        std::int64_t sx = x + draw.dx - pad;
        double v = 0.0;
        if (sy >= 0 && sy < h && sx >= 0 && sx < w) {
          if (draw.flip) sx = w - 1 - sx;
          v = img[(ch * h + sy) * w + sx];
        }
        out[(ch * h + y) * w + x] = v;
      }
}

Tensor augment(const Tensor& image, const AugmentDraw& draw, std::int64_t pad) {
  if (image.ndim() != 3) throw DimensionError("augment expects [C,H,W]");
  Tensor out(image.shape());
  apply_augment(image.data(), out.data(), image.dim(0), image.dim(1), image.dim(2), draw, pad);
  return out;
}

Batch make_batch(const Dataset& ds, std::span<const std::size_t> indices, const AugmentOptions* aug,
                 std::mt19937_64* rng) {
  if (aug && !rng) throw ConfigError("make_batch: augmentation needs an rng");
  const auto n = static_cast<std::int64_t>(indices.size());
  const std::int64_t per = ds.image_bytes(), plane = ds.height * ds.width;
  Batch b{Tensor({n, ds.channels, ds.height, ds.width}), {}};
  std::vector<double> raw(per), moved(per);
  auto dst = b.images.data();
  for (std::int64_t i = 0; i < n; ++i) {
    auto bytes = ds.bytes(indices[i]);
    for (std::int64_t k = 0; k < per; ++k) raw[k] = bytes[k] / 255.0;
    const std::vector<double>* src = &raw;
    if (aug) {
      apply_augment(raw, moved, ds.channels, ds.height, ds.width, draw_augment(*rng, *aug), aug->pad);
      src = &moved;
    }
    for (std::int64_t c = 0; c < ds.channels; ++c) {
      const double m = ds.norm.mean.at(c), s = ds.norm.std.at(c);
      for (std::int64_t p = 0; p < plane; ++p) dst[i * per + c * plane + p] = ((*src)[c * plane + p] - m) / s;
    }
    b.labels.push_back(ds.labels[indices[i]]);
  }
  return b;
}

}  // namespace mir::data
