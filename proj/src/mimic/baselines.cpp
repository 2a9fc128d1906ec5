#include "mir/mimic/baselines.h"

#include <chrono>
#include <cmath>

#include "mir/core/errors.h"
#include "mir/core/ops.h"
#include "mir/core/sgd.h"
#include "mir/core/tape.h"
#include "mir/data/sampler.h"
#include "mir/net/executor.h"

namespace mir::mimic {

using net::LayerGraph;

namespace {

enum class Scope { whole, head_only };

TrainResult supervised_loop(LayerGraph& model, const data::Dataset& labeled, const SupervisedConfig& cfg,
                            std::uint64_t seed, const std::vector<Tensor>& params, const LayerGraph* teacher,
                            const KdOptions& kd, Scope scope, const TrainHooks& hooks) {
  if (cfg.iterations < 0 || cfg.batch_size < 1 || cfg.lr < 0) throw ConfigError("supervised: bad iterations/batch/lr");
  if (labeled.size() == 0) throw ConfigError("supervised: empty training set");
  if (teacher) {
    if (!(kd.tau > 0)) throw ConfigError("KD temperature must be positive");
    if (kd.alpha < 0 || kd.alpha > 1) throw ConfigError("KD alpha must lie in [0, 1]");
  }
  std::vector<Tensor> trained = params;
  for (auto& p : trained) p.set_requires_grad(true);
  Sgd opt(trained, {cfg.lr > 0 ? cfg.lr : 1.0, cfg.momentum, cfg.weight_decay});
  data::EpochStream stream(labeled.size(), seed);
  std::mt19937_64 aug_rng(seed * 0x9E3779B97F4A7C15ULL + 1);
  const auto start = std::chrono::steady_clock::now();
  const net::Node& head = model.head_node();

  TrainResult result;
  for (int it = 0; it < cfg.iterations; ++it) {
    const double lr = step_decay_lr(cfg.lr, it, cfg.iterations, cfg.lr_decay_points);
    const auto idx = stream.next(static_cast<std::size_t>(cfg.batch_size));
    data::Batch b = data::make_batch(labeled, idx, cfg.augment ? &cfg.augment_opts : nullptr, &aug_rng);

    std::vector<double> soft;
    if (teacher) soft = ops::softmax_rows(net::forward(*teacher, b.images).logits, kd.tau);
    Tensor features;
    if (scope == Scope::head_only) {
      features = net::forward(model, b.images, {net::Mode::eval, {net::kAfterPool}, model.head_boundary()})
                     .tapped.at(net::kAfterPool);
    }

    double loss_value = 0.0;
    {
      Tape tape;
      Tape::Scope guard(tape);
      Tensor logits;
      if (scope == Scope::head_only) {
        logits = ops::linear(features, model.param(head.id + ".weight"),
                             head.bias ? model.param(head.id + ".bias") : Tensor());
      } else {
        logits = net::forward(model, b.images, {net::Mode::train, {}, ""}).logits;
      }
      Tensor loss = ops::cross_entropy(logits, b.labels);
      if (teacher) {
        loss = ops::add(ops::scale(loss, 1.0 - kd.alpha),
                        ops::scale(kd_kl_loss(logits, soft, kd.tau), kd.alpha * kd.tau * kd.tau));
      }
      loss_value = loss.item();
      if (!std::isfinite(loss_value)) throw NumericError("training diverged at iteration " + std::to_string(it));
      tape.backward(loss);
    }
    if (lr > 0) {
      opt.set_lr(lr);
      opt.step();
    }
    if (hooks.masks) prune::apply_masks(model, *hooks.masks);
    LogRecord rec{it, lr, loss_value, 0.0};
    if (hooks.timing) rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (hooks.sink) hooks.sink(rec);
    result.log.push_back(rec);
  }
  for (auto& p : trained) {
    p.set_requires_grad(false);
    p.drop_grad();
  }
  return result;
}

}  // namespace

TrainResult train_supervised(LayerGraph& model, const data::Dataset& labeled, const SupervisedConfig& cfg,
                             std::uint64_t seed, const std::vector<Tensor>& params, const LayerGraph* teacher,
                             const KdOptions& kd, const TrainHooks& hooks) {
  return supervised_loop(model, labeled, cfg, seed, params, teacher, kd, Scope::whole, hooks);
}

TrainResult baseline_bp(LayerGraph& model, const data::Dataset& labeled, const SupervisedConfig& cfg,
                        std::uint64_t seed, const TrainHooks& hooks) {
  return supervised_loop(model, labeled, cfg, seed, model.trainable_params(), nullptr, {}, Scope::whole, hooks);
}

TrainResult baseline_kd(LayerGraph& model, const LayerGraph& teacher, const data::Dataset& labeled,
                        const SupervisedConfig& cfg, const KdOptions& kd, std::uint64_t seed,
                        const TrainHooks& hooks) {
  if (!(kd.tau > 0)) throw ConfigError("KD temperature must be positive");
  return supervised_loop(model, labeled, cfg, seed, model.trainable_params(), &teacher, kd, Scope::whole, hooks);
}

TrainResult freeze_backbone_tune_head(LayerGraph& model, const data::Dataset& labeled, const SupervisedConfig& cfg,
                                      std::uint64_t seed, const TrainHooks& hooks) {
  return supervised_loop(model, labeled, cfg, seed, model.head_params(), nullptr, {}, Scope::head_only, hooks);
}

TrainResult layerwise_recon(const LayerGraph& teacher, LayerGraph& student, const UnlabeledSet& data,
                            const MimicConfig& cfg, std::uint64_t seed, const TrainHooks& hooks) {
  const int blocks = teacher.num_blocks();
  if (blocks == 0) throw ConfigError("layerwise: graph has no residual block annotations");
  TrainResult all;
  std::size_t first = 0;
  for (int b = 0; b < blocks; ++b) {
    std::string out_id;
    for (const auto& n : teacher.nodes())
      if (n.block == b) out_id = n.id;
    if (out_id.empty()) continue;
    if (!student.has_node(out_id) || student.node(out_id).out_channels != teacher.node(out_id).out_channels) {
      throw ConfigError("layerwise: block " + std::to_string(b) + " output width differs from the teacher (" + out_id +
                        "); the residual scheme is unsupported");
    }
    const std::size_t last = student.index_of(out_id);
    std::vector<Tensor> params;
    for (std::size_t i = first; i <= last; ++i)
      for (const auto& name : net::trainable_param_names(student.nodes()[i])) params.push_back(student.param(name));
    TrainResult part = train_mimic_segment(teacher, student, data, cfg, seed + b, out_id, first, params, hooks);
    for (auto rec : part.log) {
      rec.iteration += b * cfg.iterations;
      all.log.push_back(rec);
    }
    first = last + 1;
  }
  return all;
}

}  // namespace mir::mimic
