#include "mir/mimic/trainer.h"

#include <chrono>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "mir/core/errors.h"
#include "mir/core/sgd.h"
#include "mir/core/tape.h"
#include "mir/data/sampler.h"
#include "mir/net/executor.h"

namespace mir::mimic {

using net::LayerGraph;

void MimicConfig::validate() const {
  if (losses.empty()) throw ConfigError("mimic: loss set must be nonempty");
  if (iterations < 0) throw ConfigError("mimic: iterations must be >= 0");
  if (batch_size < 1) throw ConfigError("mimic: batch size must be positive");
  if (lr < 0) throw ConfigError("mimic: learning rate must be >= 0");
  double prev = 0.0;
  for (double p : lr_decay_points) {
    if (!(p > prev) || !(p < 1.0)) throw ConfigError("mimic: lr decay points must be strictly increasing in (0, 1)");
    prev = p;
  }
}

void write_jsonl(std::ostream& os, const LogRecord& rec) {
  nlohmann::json j{{"iteration", rec.iteration}, {"lr", rec.lr}, {"loss", rec.loss}, {"wall_seconds", rec.wall_seconds}};
  os << j.dump() << '\n';
}

LogSink jsonl_sink(std::ostream& os) {
  return [&os](const LogRecord& r) { write_jsonl(os, r); };
}

double TrainResult::tail_mean(std::size_t window) const {
  if (log.empty()) return 0.0;
  window = std::min(window, log.size());
  double s = 0.0;
  for (std::size_t i = log.size() - window; i < log.size(); ++i) s += log[i].loss;
  return s / static_cast<double>(window);
}

UnlabeledSet::UnlabeledSet(const data::Dataset& ds) : images_(ds) {
  std::fill(images_.labels.begin(), images_.labels.end(), 0);
}

Tensor UnlabeledSet::batch(std::span<const std::size_t> indices, const data::AugmentOptions* aug,
                           std::mt19937_64* rng) const {
  return data::make_batch(images_, indices, aug, rng).images;
}

TrainResult train_mimic_segment(const LayerGraph& teacher, LayerGraph& student, const UnlabeledSet& data,
                                const MimicConfig& cfg, std::uint64_t seed, const std::string& tap_node,
                                std::size_t first_node, const std::vector<Tensor>& params, const TrainHooks& hooks) {
  cfg.validate();
  const std::string t_edge = teacher.resolve_tap(tap_node);
  const std::string s_edge = student.resolve_tap(tap_node);
  if (s_edge == net::kInputEdge) throw ConfigError("mimic: cannot tap the graph input");
  const std::size_t tap_idx = student.index_of(s_edge);
  if (first_node > tap_idx) throw ConfigError("mimic: segment starts after its tap");
  if (data.size() == 0) throw ConfigError("mimic: empty training set");

  std::vector<Tensor> trained = params;
  for (auto& p : trained) p.set_requires_grad(true);
  SgdOptions sgd_opts{cfg.lr > 0 ? cfg.lr : 1.0, cfg.momentum, cfg.weight_decay};
  Sgd opt(trained, sgd_opts);
  data::EpochStream stream(data.size(), seed);
  std::mt19937_64 aug_rng(seed * 0x9E3779B97F4A7C15ULL + 1);
  const auto start = std::chrono::steady_clock::now();

  TrainResult result;
  for (int it = 0; it < cfg.iterations; ++it) {
    const double lr = step_decay_lr(cfg.lr, it, cfg.iterations, cfg.lr_decay_points);
    const auto idx = stream.next(static_cast<std::size_t>(cfg.batch_size));
    Tensor x = data.batch(idx, cfg.augment ? &cfg.augment_opts : nullptr, &aug_rng);

    Tensor target = net::forward(teacher, x, {net::Mode::eval, {t_edge}, t_edge}).tapped.at(t_edge);
    std::map<std::string, Tensor> env{{net::kInputEdge, x}};
    if (first_node > 0) env = net::run_nodes(student, std::move(env), 0, first_node - 1, net::Mode::eval);

    double loss_value = 0.0;
    {
      Tape tape;
      Tape::Scope scope(tape);
      env = net::run_nodes(student, std::move(env), first_node, tap_idx, cfg.student_bn);
      const Tensor& fp = env.at(s_edge);
      if (fp.shape() != target.shape()) {
        throw ConfigError("mimic: student tap " + shape_str(fp.shape()) + " does not match teacher tap " +
                          shape_str(target.shape()) +
                          "; use a scheme that keeps the final width (the residual scheme exempts the last group)");
      }
      Tensor loss = mimic_loss(fp, target, cfg.losses);
      loss_value = loss.item();
      if (!std::isfinite(loss_value)) throw NumericError("mimic: non-finite loss at iteration " + std::to_string(it));
      tape.backward(loss);
    }
    if (lr > 0) {
      opt.set_lr(lr);
      opt.step();
    }
    if (hooks.masks) prune::apply_masks(student, *hooks.masks);

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

TrainResult train_mimic(const LayerGraph& teacher, LayerGraph& student, const UnlabeledSet& data,
                        const MimicConfig& cfg, std::uint64_t seed, const TrainHooks& hooks) {
  return train_mimic_segment(teacher, student, data, cfg, seed, cfg.tap, 0, student.backbone_params(), hooks);
}

CompressedModel replace_head(const LayerGraph& backbone, const LayerGraph& teacher) {
  const net::Node& th = teacher.head_node();
  const net::Node& sh = backbone.head_node();
  const std::int64_t width = backbone.pool_node().out_channels;
  if (width != th.in_channels || sh.id != th.id || sh.bias != th.bias || sh.out_channels != th.out_channels) {
    throw ConfigError("replace_head: backbone width " + std::to_string(width) + " does not fit the teacher head (" +
                      std::to_string(th.in_channels) + " inputs)");
  }
  CompressedModel m{backbone.clone()};
  for (const auto& name : net::param_names(th)) m.graph.param(name) = teacher.param(name).clone();
  m.graph.validate();
  return m;
}

}  // namespace mir::mimic
