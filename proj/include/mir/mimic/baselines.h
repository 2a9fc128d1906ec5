#pragma once

#include <cstdint>
#include <vector>

#include "mir/data/dataset.h"
#include "mir/mimic/trainer.h"
#include "mir/net/graph.h"

namespace mir::mimic {

struct SupervisedConfig {
  int iterations = 2000;
  int batch_size = 64;
  double lr = 1e-3;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::vector<double> lr_decay_points{0.4, 0.8};
  bool augment = true;
  data::AugmentOptions augment_opts;
};

struct KdOptions {
  double tau = 2.0;
  double alpha = 0.7;
};

// Cross-entropy fine-tuning of the whole network. lr == 0 leaves it unchanged.
TrainResult baseline_bp(net::LayerGraph& model, const data::Dataset& labeled, const SupervisedConfig& cfg,
                        std::uint64_t seed, const TrainHooks& hooks = {});

// (1 - alpha) CE + alpha tau^2 KL(teacher || student) at temperature tau.
TrainResult baseline_kd(net::LayerGraph& model, const net::LayerGraph& teacher, const data::Dataset& labeled,
                        const SupervisedConfig& cfg, const KdOptions& kd, std::uint64_t seed,
                        const TrainHooks& hooks = {});

// Block-by-block reconstruction of each block's output with only that
// block's parameters (the stem joins the first block). Later blocks read the
// student's own earlier outputs. Block output widths must match the teacher.
TrainResult layerwise_recon(const net::LayerGraph& teacher, net::LayerGraph& student, const UnlabeledSet& data,
                            const MimicConfig& cfg, std::uint64_t seed, const TrainHooks& hooks = {});

// Trains only the final linear layer with cross-entropy; the backbone stays
// frozen in eval mode.
TrainResult freeze_backbone_tune_head(net::LayerGraph& model, const data::Dataset& labeled,
                                      const SupervisedConfig& cfg, std::uint64_t seed, const TrainHooks& hooks = {});

// Shared supervised loop; trains `params` of `model`. With a teacher it adds
// the KD term.
TrainResult train_supervised(net::LayerGraph& model, const data::Dataset& labeled, const SupervisedConfig& cfg,
                             std::uint64_t seed, const std::vector<Tensor>& params, const net::LayerGraph* teacher,
                             const KdOptions& kd, const TrainHooks& hooks = {});

}  // namespace mir::mimic
