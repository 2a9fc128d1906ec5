#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mir/data/augment.h"
#include "mir/data/dataset.h"
#include "mir/mimic/losses.h"
#include "mir/net/executor.h"
#include "mir/net/graph.h"
#include "mir/prune/unstructured.h"

namespace mir::mimic {

struct MimicConfig {
  std::string tap = "before_pool";
  std::vector<LossKind> losses{LossKind::mse};
  int iterations = 2000;
  int batch_size = 64;
  double lr = 0.02;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::vector<double> lr_decay_points{0.4, 0.8};
  bool augment = true;
  data::AugmentOptions augment_opts;
  // BN mode of the trained student layers. Eval mode turns an identical
  // student into an exact fixed point.
  net::Mode student_bn = net::Mode::train;

  void validate() const;
};

struct LogRecord {
  int iteration = 0;
  double lr = 0.0;
  double loss = 0.0;
  double wall_seconds = 0.0;
};

using LogSink = std::function<void(const LogRecord&)>;

// Line-delimited JSON: {"iteration":..,"lr":..,"loss":..,"wall_seconds":..}
void write_jsonl(std::ostream& os, const LogRecord& rec);
LogSink jsonl_sink(std::ostream& os);

struct TrainResult {
  std::vector<LogRecord> log;  // loss measured before each step
  double initial_loss() const { return log.empty() ? 0.0 : log.front().loss; }
  double final_loss() const { return log.empty() ? 0.0 : log.back().loss; }
  // Mean of the last `window` losses.
  double tail_mean(std::size_t window = 10) const;
};

/// Image-only view of a dataset: the labels are dropped at construction, so
/// nothing downstream of it can read them.
class UnlabeledSet {
 public:
  explicit UnlabeledSet(const data::Dataset& ds);
  std::size_t size() const { return images_.size(); }
  Tensor batch(std::span<const std::size_t> indices, const data::AugmentOptions* aug, std::mt19937_64* rng) const;

 private:
  data::Dataset images_;
};

struct TrainHooks {
  const prune::MaskSet* masks = nullptr;  // re-applied after every step
  LogSink sink;
  bool timing = true;  // record wall time in the log
};

// Trains the student backbone to reproduce the teacher's features at cfg.tap.
// The teacher runs in eval mode without a tape; student BN runs in train mode.
// Only backbone parameters are updated.
TrainResult train_mimic(const net::LayerGraph& teacher, net::LayerGraph& student, const UnlabeledSet& data,
                        const MimicConfig& cfg, std::uint64_t seed, const TrainHooks& hooks = {});

// Mimicking restricted to nodes [first_node, tap] of the student, with the
// prefix executed in eval mode and only `params` updated.
TrainResult train_mimic_segment(const net::LayerGraph& teacher, net::LayerGraph& student, const UnlabeledSet& data,
                                const MimicConfig& cfg, std::uint64_t seed, const std::string& tap_node,
                                std::size_t first_node, const std::vector<Tensor>& params,
                                const TrainHooks& hooks = {});

/// Student backbone with the teacher's classifier grafted on.
struct CompressedModel {
  net::LayerGraph graph;
};

// Copies the teacher's final linear layer verbatim onto a clone of `backbone`.
CompressedModel replace_head(const net::LayerGraph& backbone, const net::LayerGraph& teacher);

}  // namespace mir::mimic
