#include "mir/data/dataset.h"

#include "mir/core/errors.h"

namespace mir::data {

Normalization cifar10_normalization() { return {{0.4914, 0.4822, 0.4465}, {0.2470, 0.2435, 0.2616}}; }

Normalization synthetic_normalization() { return {{0.5, 0.5, 0.5}, {0.25, 0.25, 0.25}}; }

std::span<const std::uint8_t> Dataset::bytes(std::size_t i) const {
  if (i >= size()) throw ConfigError("dataset index out of range");
  return {pixels.data() + i * image_bytes(), static_cast<std::size_t>(image_bytes())};
}

LabeledImage Dataset::image(std::size_t i) const {
  auto b = bytes(i);
  Tensor t({channels, height, width});
  auto d = t.data();
  for (std::size_t k = 0; k < b.size(); ++k) d[k] = b[k] / 255.0;
  return {t, labels[i], ids[i]};
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (int l : labels) ++counts.at(l);
  return counts;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
  Dataset out;
  out.channels = ds.channels;
  out.height = ds.height;
  out.width = ds.width;
  out.num_classes = ds.num_classes;
  out.norm = ds.norm;
  out.pixels.reserve(indices.size() * ds.image_bytes());
  for (std::size_t i : indices) {
    auto b = ds.bytes(i);
    out.pixels.insert(out.pixels.end(), b.begin(), b.end());
    out.labels.push_back(ds.labels[i]);
    out.ids.push_back(ds.ids[i]);
  }
  return out;
}

}  // namespace mir::data
