#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mir/core/tensor.h"
#include "mir/data/dataset.h"

namespace mir::data {

struct AugmentOptions {
  bool flip = true;
  bool crop = true;
  std::int64_t pad = 4;
};

// One random draw; offsets are in [0, 2*pad], pad/pad being the centre crop.
struct AugmentDraw {
  bool flip = false;
  std::int64_t dx = 0;
  std::int64_t dy = 0;
};

AugmentDraw draw_augment(std::mt19937_64& rng, const AugmentOptions& opts);
AugmentDraw identity_draw(const AugmentOptions& opts);

// Horizontal flip (if drawn) then a crop of the zero-padded image back to the
// original size. `img` is [C,H,W] in CHW order.
void apply_augment(std::span<const double> img, std::span<double> out, std::int64_t c, std::int64_t h,
                   std::int64_t w, const AugmentDraw& draw, std::int64_t pad);
Tensor augment(const Tensor& image, const AugmentDraw& draw, std::int64_t pad);

struct Batch {
  Tensor images;  // [N,C,H,W], normalized
  std::vector<int> labels;
};

// Gathers samples, optionally augments them (draws consumed in sample order),
// then normalizes with the dataset constants.
Batch make_batch(const Dataset& ds, std::span<const std::size_t> indices, const AugmentOptions* aug,
                 std::mt19937_64* rng);

}  // namespace mir::data
