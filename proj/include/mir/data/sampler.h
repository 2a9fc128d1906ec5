#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <random>

#include <json.hpp>

#include "mir/data/dataset.h"

namespace mir::data {

struct FewSampleSpec {
  enum class Mode { n_way_k_shot, random_m };
  Mode mode = Mode::n_way_k_shot;
  int n = 10;  // classes
  int k = 1;   // shots per class
  int m = 50;  // random_m size
  std::uint64_t seed = 0;

  // "10way3shot" or "random50"
  std::string label() const;
  std::size_t expected_size() const;
};

FewSampleSpec parse_few_sample_spec(const std::string& text, std::uint64_t seed = 0);
nlohmann::json to_json(const FewSampleSpec& spec);
FewSampleSpec few_sample_spec_from_json(const nlohmann::json& doc);

// Indices into `ds`, deterministic in spec.seed.
std::vector<std::size_t> sample_few(const Dataset& ds, const FewSampleSpec& spec);

}  // namespace mir::data

namespace mir::data {

// Endless stream of sample indices: per-epoch permutations of [0, n),
// concatenated and cut into batches. Seeded.
class EpochStream {
 public:
  EpochStream(std::size_t n, std::uint64_t seed);
  std::vector<std::size_t> next(std::size_t count);

 private:
  std::vector<std::size_t> perm_;
  std::size_t pos_ = 0;
  std::mt19937_64 rng_;
  void reshuffle();
};

}  // namespace mir::data
