#pragma once

#include <cstdint>

#include "mir/data/dataset.h"

namespace mir::data {

// Oriented sinusoidal gratings. Class c uses orientation +-(c / 2) * 22.5
// degrees (random sign, so horizontal flips keep the class) and the
// (c % 2)-th base frequency (2.5 or 5 cycles per image). The class grating is
// seen through a Gaussian window (sigma 0.3 of the image size) at a random
// centre and overlaid with a full-field distractor grating of random
// orientation and frequency at 0.4 of its amplitude. Each image also draws a
// random phase, small orientation and frequency jitter, a per-channel gain and
// a mean offset, then gets Gaussian noise (sigma 0.1); values are clamped and
// quantized to k/255. Ids start at id_offset. Other class counts space the
// orientations evenly over [0, 90] degrees.
struct SynthOptions {
  int num_classes = 10;
  int per_class = 100;
  std::int64_t image_size = 32;
  std::int64_t id_offset = 0;
};

Dataset synth_dataset(std::uint64_t seed, const SynthOptions& opts);

struct SynthSplits {
  Dataset train;
  Dataset test;
};

// Train and test splits from independent streams (test ids follow train ids).
SynthSplits synth_splits(std::uint64_t seed, int train_per_class, int test_per_class, int num_classes = 10,
                         std::int64_t image_size = 32);

}  // namespace mir::data
