#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mir/harness/dataset_spec.h"
#include "mir/harness/evaluate.h"
#include "mir/mimic/trainer.h"
#include "mir/net/graph.h"

namespace mir::harness {

struct TeacherConfig {
  std::string model = "resnet-tiny-8";
  DatasetSpec dataset;
  int epochs = 20;
  int batch_size = 64;
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::vector<double> lr_decay_points{0.5, 0.75};
  bool augment = true;
  std::uint64_t seed = 1;
};

nlohmann::json to_json(const TeacherConfig& cfg);
TeacherConfig teacher_config_from_json(const nlohmann::json& doc);

struct TeacherResult {
  net::LayerGraph model;
  EvalResult train;
  EvalResult test;
  mimic::TrainResult log;
};

// Cross-entropy training on the full labeled split. epochs == 0 returns the
// initialization.
TeacherResult train_teacher(const TeacherConfig& cfg, const Splits& splits, const mimic::TrainHooks& hooks = {});

}  // namespace mir::harness
