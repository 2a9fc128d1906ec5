#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mir/harness/config.h"
#include "mir/harness/dataset_spec.h"
#include "mir/harness/evaluate.h"
#include "mir/net/flops.h"
#include "mir/net/graph.h"

namespace mir::harness {

inline constexpr const char* kVersion = "0.1.0";

struct TrialResult {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double top1 = 0.0;
  double top5 = 0.0;
  double wall_seconds = 0.0;
  double initial_loss = 0.0;
  double final_loss = 0.0;  // mean of the last 10 logged losses
};

struct Summary {
  double top1_mean = 0.0;
  double top1_std = 0.0;  // sample standard deviation, 0 for a single trial
  double top5_mean = 0.0;
  double top5_std = 0.0;
  int ok = 0;
  int failed = 0;
  bool single_trial = false;
};

// Mean and sample standard deviation over the successful trials.
Summary summarize(const std::vector<TrialResult>& trials);

struct ExperimentReport {
  ExperimentConfig config;
  EvalResult teacher;
  std::int64_t teacher_macs = 0;
  std::int64_t teacher_params = 0;
  std::int64_t student_macs = 0;
  std::int64_t student_params = 0;
  std::vector<TrialResult> trials;
  Summary summary;
  bool all_ok() const { return summary.failed == 0; }
};

struct TrialOutput {
  net::LayerGraph model;
  mimic::TrainResult log;
};

// One trial: draw D_few with `seed`, prune the teacher, run the configured
// method. Exposed for tests and the CLI.
TrialOutput run_trial(const ExperimentConfig& cfg, const net::LayerGraph& teacher, const data::Dataset& train,
                      std::uint64_t seed, const mimic::TrainHooks& hooks = {});

// Trials use seed base_seed + t and redraw D_few each time. A failing trial is
// recorded and the remaining trials still run.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const net::LayerGraph& teacher, const Splits& splits);

// method,scheme,keep_ratio,samples_spec,seed,top1,top5,macs,params,wall_seconds
// One row per trial, then "mean" and "std" rows in the seed column.
std::string report_csv(const ExperimentReport& report, bool header = true);
nlohmann::json report_json(const ExperimentReport& report);

enum class SweepAxis { lr, iterations, samples };
SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis a);

// Returns a copy of cfg with the axis set to `value`. The lr axis targets the
// optimizer of the configured method; the samples axis sets M for random_m
// and K = value / N for N-way-K-shot.
ExperimentConfig with_axis_value(const ExperimentConfig& cfg, SweepAxis axis, double value);

struct SweepReport {
  SweepAxis axis = SweepAxis::lr;
  std::vector<double> values;
  std::vector<ExperimentReport> runs;
  double pooled_std = 0.0;       // sqrt of the mean per-value top-1 variance
  std::size_t argmax = 0;        // value index with the best mean top-1
  bool interior_max = false;     // argmax is neither end
  bool non_decreasing = false;   // each mean >= previous mean - pooled_std
  bool diminishing = false;      // each increment <= previous increment + pooled_std
};

SweepReport sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values,
                  const net::LayerGraph& teacher, const Splits& splits);
std::string sweep_csv(const SweepReport& report);
nlohmann::json sweep_json(const SweepReport& report);

// Linear softmax classifier on raw normalized pixels.
EvalResult linear_probe(const data::Dataset& train, const data::Dataset& test, int iterations, std::uint64_t seed);

}  // namespace mir::harness
