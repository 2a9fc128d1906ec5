#include "mir/data/sampler.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <regex>

#include "mir/core/errors.h"

namespace mir::data {

std::string FewSampleSpec::label() const {
  if (mode == Mode::random_m) return "random" + std::to_string(m);
  return std::to_string(n) + "way" + std::to_string(k) + "shot";
}

std::size_t FewSampleSpec::expected_size() const {
  return mode == Mode::random_m ? static_cast<std::size_t>(m) : static_cast<std::size_t>(n) * k;
}

FewSampleSpec parse_few_sample_spec(const std::string& text, std::uint64_t seed) {
  static const std::regex way(R"((\d+)way(\d+)shot)");
  static const std::regex random(R"(random(\d+))");
  std::smatch mt;
  FewSampleSpec spec;
  spec.seed = seed;
  if (std::regex_match(text, mt, way)) {
    spec.mode = FewSampleSpec::Mode::n_way_k_shot;
    spec.n = std::stoi(mt[1]);
    spec.k = std::stoi(mt[2]);
  } else if (std::regex_match(text, mt, random)) {
    spec.mode = FewSampleSpec::Mode::random_m;
    spec.m = std::stoi(mt[1]);
  } else {
    throw ConfigError("bad sample spec '" + text + "' (expected e.g. 10way3shot or random50)");
  }
  return spec;
}

nlohmann::json to_json(const FewSampleSpec& spec) {
  if (spec.mode == FewSampleSpec::Mode::random_m) return {{"mode", "random_m"}, {"m", spec.m}, {"seed", spec.seed}};
  return {{"mode", "n_way_k_shot"}, {"n", spec.n}, {"k", spec.k}, {"seed", spec.seed}};
}

FewSampleSpec few_sample_spec_from_json(const nlohmann::json& doc) {
  FewSampleSpec spec;
  const std::string mode = doc.at("mode").get<std::string>();
  spec.seed = doc.value("seed", std::uint64_t{0});
  if (mode == "random_m") {
    spec.mode = FewSampleSpec::Mode::random_m;
    spec.m = doc.at("m").get<int>();
  } else if (mode == "n_way_k_shot") {
    spec.mode = FewSampleSpec::Mode::n_way_k_shot;
    spec.n = doc.at("n").get<int>();
    spec.k = doc.at("k").get<int>();
  } else {
    throw ConfigError("unknown sampler mode '" + mode + "'");
  }
  return spec;
}

namespace {

// Partial Fisher-Yates: the first `count` entries become a uniform draw.
template <typename T>
void partial_shuffle(std::vector<T>& v, std::size_t count, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, v.size() - 1);
    std::swap(v[i], v[pick(rng)]);
  }
}

}  // namespace

std::vector<std::size_t> sample_few(const Dataset& ds, const FewSampleSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> out;
  if (spec.mode == FewSampleSpec::Mode::random_m) {
    if (spec.m < 1 || static_cast<std::size_t>(spec.m) > ds.size()) {
      throw ConfigError("random_m: M=" + std::to_string(spec.m) + " exceeds dataset size " + std::to_string(ds.size()));
    }
    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), 0);
    partial_shuffle(all, spec.m, rng);
    out.assign(all.begin(), all.begin() + spec.m);
    return out;
  }
  if (spec.n < 1 || spec.n > ds.num_classes || spec.k < 1) {
    throw ConfigError("n_way_k_shot: need 1 <= N <= " + std::to_string(ds.num_classes) + " and K >= 1");
  }
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);
  std::vector<int> classes(ds.num_classes);
  std::iota(classes.begin(), classes.end(), 0);
  partial_shuffle(classes, spec.n, rng);
  for (int j = 0; j < spec.n; ++j) {
    auto& pool = by_class[classes[j]];
    if (static_cast<std::size_t>(spec.k) > pool.size()) {
      throw ConfigError("n_way_k_shot: K=" + std::to_string(spec.k) + " exceeds class " + std::to_string(classes[j]) +
                        " population " + std::to_string(pool.size()));
    }
    partial_shuffle(pool, spec.k, rng);
    out.insert(out.end(), pool.begin(), pool.begin() + spec.k);
  }
  return out;
}

}  // namespace mir::data

namespace mir::data {

EpochStream::EpochStream(std::size_t n, std::uint64_t seed) : perm_(n), rng_(seed) {
  if (n == 0) throw ConfigError("EpochStream over an empty set");
  std::iota(perm_.begin(), perm_.end(), 0);
  reshuffle();
}

void EpochStream::reshuffle() {
  std::iota(perm_.begin(), perm_.end(), 0);
  partial_shuffle(perm_, perm_.size(), rng_);
  pos_ = 0;
}

std::vector<std::size_t> EpochStream::next(std::size_t count) {
  std::vector<std::size_t> out;
  out.reserve(count);
  while (out.size() < count) {
    if (pos_ == perm_.size()) reshuffle();
    out.push_back(perm_[pos_++]);
  }
  return out;
}

}  // namespace mir::data
