#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mir/core/tensor.h"

namespace mir::data {

struct LabeledImage {
  Tensor pixels;  // [C,H,W], values in [0,1]
  int label = 0;
  std::int64_t id = 0;
};

// Per-channel normalization applied when batches are assembled.
struct Normalization {
  std::vector<double> mean;
  std::vector<double> std;
};

// CIFAR-10 training-set statistics.
Normalization cifar10_normalization();
// Synthetic textures are centred on 0.5.
Normalization synthetic_normalization();

/// Images stored as 8-bit planes (pixel value = byte / 255), in CHW order.
struct Dataset {
  std::int64_t channels = 3;
  std::int64_t height = 32;
  std::int64_t width = 32;
  int num_classes = 10;
  std::vector<std::uint8_t> pixels;  // size() * C*H*W bytes
  std::vector<int> labels;
  std::vector<std::int64_t> ids;
  Normalization norm = cifar10_normalization();

  std::size_t size() const { return labels.size(); }
  std::int64_t image_bytes() const { return channels * height * width; }
  std::span<const std::uint8_t> bytes(std::size_t i) const;
  LabeledImage image(std::size_t i) const;
  // Per-class sample counts.
  std::vector<std::size_t> class_counts() const;
};

// Copy of the selected samples; ids are preserved.
Dataset subset(const Dataset& ds, std::span<const std::size_t> indices);

}  // namespace mir::data
