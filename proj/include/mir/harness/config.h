#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mir/data/sampler.h"
#include "mir/harness/dataset_spec.h"
#include "mir/mimic/baselines.h"
#include "mir/mimic/trainer.h"
#include "mir/prune/plan.h"

namespace mir::harness {

enum class Method { mir_before, mir_after, bp, kd, layerwise, freeze_head, prune_only };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct ExperimentConfig {
  std::string model = "resnet-tiny-8";
  DatasetSpec dataset;
  std::string teacher;  // model stem written by train-teacher

  prune::Scheme scheme = prune::Scheme::normal;
  double keep_ratio = 0.5;
  double sparsity = 0.9;  // unstructured scheme only
  bool progressive = false;
  double progressive_step = 0.2;
  int progressive_inner_iters = 400;
  bool skip_first_conv = false;

  Method method = Method::mir_before;
  data::FewSampleSpec samples{data::FewSampleSpec::Mode::n_way_k_shot, 10, 3, 50, 0};
  mimic::MimicConfig mimic;
  mimic::SupervisedConfig supervised;
  mimic::KdOptions kd;
  bool freeze_trained_backbone = true;

  int trials = 5;
  std::uint64_t base_seed = 0;
  bool timing = true;

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
// Keys missing from `doc` keep their defaults; unknown keys are errors.
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc);

// Recursively overlays `patch` on `base`. Every key in `patch` must already
// exist in `base`.
void merge_strict(nlohmann::json& base, const nlohmann::json& patch, const std::string& where = "");

// Applies "a.b.c=value"; value is parsed as JSON and falls back to a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

nlohmann::json read_json_file(const std::string& path);

// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

}  // namespace mir::harness
