#include "mir/data/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mir/core/errors.h"

namespace mir::data {

namespace {

constexpr double kDistractor = 0.4;  // distractor amplitude relative to the class grating
constexpr double kWindow = 0.3;      // window sigma as a fraction of the image size
constexpr double kNoise = 0.1;       // pixel noise sigma

}  // namespace

Dataset synth_dataset(std::uint64_t seed, const SynthOptions& opts) {
  if (opts.per_class < 1 || opts.num_classes < 2) throw ConfigError("synth_dataset: need per_class >= 1, >= 2 classes");
  const std::int64_t s = opts.image_size;
  Dataset ds;
  ds.channels = 3;
  ds.height = ds.width = s;
  ds.num_classes = opts.num_classes;
  ds.norm = synthetic_normalization();

  const int orientations = (opts.num_classes + 1) / 2;
  const double base_freq[2] = {2.5, 5.0};  // cycles across the image
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int total = opts.num_classes * opts.per_class;
  ds.pixels.resize(static_cast<std::size_t>(total) * ds.image_bytes());
  // interleave classes so any prefix is roughly balanced
  for (int i = 0; i < total; ++i) {
    const int label = i % opts.num_classes;
    // orientations span [0, 90] degrees with a random mirror sign, so the
    // class distribution is invariant under horizontal flips
    const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    const double theta = sign * 0.5 * std::numbers::pi * (label / 2) / std::max(orientations - 1, 1) + 0.06 * gauss(rng);
    const double freq = base_freq[label % 2] * (1.0 + 0.05 * gauss(rng));
    const double phase = 2 * std::numbers::pi * unit(rng);
    const double amp = 0.25 + 0.15 * unit(rng);
    const double offset = 0.1 * gauss(rng);
    double gain[3];
    for (double& g : gain) g = 0.6 + 0.4 * unit(rng);
    // full-field distractor grating with random orientation and frequency
    const double d_theta = std::numbers::pi * unit(rng);
    const double d_freq = 2.0 + 4.0 * unit(rng);
    const double d_phase = 2 * std::numbers::pi * unit(rng);
    const double dkx = 2 * std::numbers::pi * d_freq * std::cos(d_theta) / s;
    const double dky = 2 * std::numbers::pi * d_freq * std::sin(d_theta) / s;
    // the class grating sits under a Gaussian window at a random centre
    const double cx = s * (0.25 + 0.5 * unit(rng));
    const double cy = s * (0.25 + 0.5 * unit(rng));
    const double two_var = 2 * (kWindow * s) * (kWindow * s);
    const double kx = 2 * std::numbers::pi * freq * std::cos(theta) / s;
    const double ky = 2 * std::numbers::pi * freq * std::sin(theta) / s;
    std::uint8_t* px = ds.pixels.data() + static_cast<std::size_t>(i) * ds.image_bytes();
    for (std::int64_t c = 0; c < 3; ++c)
      for (std::int64_t y = 0; y < s; ++y)
        for (std::int64_t x = 0; x < s; ++x) {
          const double window = std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / two_var);
          const double signal = window * std::sin(kx * x + ky * y + phase) +
                                kDistractor * std::sin(dkx * x + dky * y + d_phase);
          double v = 0.5 + offset + gain[c] * amp * signal + kNoise * gauss(rng);
          v = std::clamp(v, 0.0, 1.0);
          px[(c * s + y) * s + x] = static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
    ds.labels.push_back(label);
    ds.ids.push_back(opts.id_offset + i);
  }
  return ds;
}

SynthSplits synth_splits(std::uint64_t seed, int train_per_class, int test_per_class, int num_classes,
                         std::int64_t image_size) {
  SynthSplits s;
  s.train = synth_dataset(seed, {num_classes, train_per_class, image_size, 0});
  const std::int64_t next = static_cast<std::int64_t>(num_classes) * train_per_class;
  s.test = synth_dataset(seed ^ 0x5eed5eed5eedULL, {num_classes, test_per_class, image_size, next});
  return s;
}

}  // namespace mir::data
