#include "mir/harness/experiment.h"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "mir/core/errors.h"
#include "mir/core/ops.h"
#include "mir/core/sgd.h"
#include "mir/core/tape.h"
#include "mir/data/sampler.h"
#include "mir/mimic/baselines.h"
#include "mir/mimic/trainer.h"
#include "mir/net/zoo.h"
#include "mir/prune/unstructured.h"

namespace mir::harness {

using net::LayerGraph;
using nlohmann::json;

Summary summarize(const std::vector<TrialResult>& trials) {
  Summary s;
  std::vector<const TrialResult*> ok;
  for (const auto& t : trials) {
    if (t.ok) ok.push_back(&t);
  }
  s.ok = static_cast<int>(ok.size());
  s.failed = static_cast<int>(trials.size() - ok.size());
  s.single_trial = trials.size() == 1;
  if (ok.empty()) return s;
  for (const auto* t : ok) {
    s.top1_mean += t->top1;
    s.top5_mean += t->top5;
  }
  s.top1_mean /= ok.size();
  s.top5_mean /= ok.size();
  if (ok.size() > 1) {
    for (const auto* t : ok) {
      s.top1_std += (t->top1 - s.top1_mean) * (t->top1 - s.top1_mean);
      s.top5_std += (t->top5 - s.top5_mean) * (t->top5 - s.top5_mean);
    }
    s.top1_std = std::sqrt(s.top1_std / (ok.size() - 1));
    s.top5_std = std::sqrt(s.top5_std / (ok.size() - 1));
  }
  return s;
}

namespace {

mimic::MimicConfig mimic_cfg(const ExperimentConfig& cfg, const char* tap, int iterations) {
  mimic::MimicConfig m = cfg.mimic;
  m.tap = tap;
  m.iterations = iterations;
  return m;
}

// Runs the configured method on `student` in place and returns the model to
// evaluate together with the loss log.
TrialOutput run_method(const ExperimentConfig& cfg, const LayerGraph& teacher, LayerGraph& student,
                       const data::Dataset& few, std::uint64_t seed, int iterations, const mimic::TrainHooks& hooks) {
  mimic::SupervisedConfig sup = cfg.supervised;
  sup.iterations = iterations;
  switch (cfg.method) {
    case Method::mir_before:
    case Method::mir_after: {
      const char* tap = cfg.method == Method::mir_before ? net::kBeforePool : net::kAfterPool;
      auto log = mimic::train_mimic(teacher, student, mimic::UnlabeledSet(few), mimic_cfg(cfg, tap, iterations), seed,
                                    hooks);
      return {mimic::replace_head(student, teacher).graph, std::move(log)};
    }
    case Method::layerwise: {
      auto log = mimic::layerwise_recon(teacher, student, mimic::UnlabeledSet(few),
                                        mimic_cfg(cfg, net::kBeforePool, iterations), seed, hooks);
      return {mimic::replace_head(student, teacher).graph, std::move(log)};
    }
    case Method::bp: {
      auto log = mimic::baseline_bp(student, few, sup, seed, hooks);
      return {student.clone(), std::move(log)};
    }
    case Method::kd: {
      auto log = mimic::baseline_kd(student, teacher, few, sup, cfg.kd, seed, hooks);
      return {student.clone(), std::move(log)};
    }
    case Method::freeze_head: {
      if (cfg.freeze_trained_backbone) {
        mimic::train_mimic(teacher, student, mimic::UnlabeledSet(few),
                           mimic_cfg(cfg, net::kBeforePool, cfg.mimic.iterations), seed, hooks);
      }
      LayerGraph model = mimic::replace_head(student, teacher).graph;
      auto log = mimic::freeze_backbone_tune_head(model, few, sup, seed, hooks);
      return {std::move(model), std::move(log)};
    }
    case Method::prune_only:
      return {mimic::replace_head(student, teacher).graph, {}};
  }
  throw ConfigError("unhandled method");
}

int method_iterations(const ExperimentConfig& cfg) {
  switch (cfg.method) {
    case Method::bp:
    case Method::kd:
    case Method::freeze_head: return cfg.supervised.iterations;
    default: return cfg.mimic.iterations;
  }
}

LayerGraph prune_teacher(const ExperimentConfig& cfg, const LayerGraph& teacher) {
  if (cfg.scheme == prune::Scheme::unstructured) return teacher.clone();
  return prune::apply_plan(teacher, prune::make_plan(teacher, cfg.scheme, cfg.keep_ratio));
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

TrialOutput run_trial(const ExperimentConfig& cfg, const LayerGraph& teacher, const data::Dataset& train,
                      std::uint64_t seed, const mimic::TrainHooks& hooks) {
  cfg.validate();
  data::FewSampleSpec spec = cfg.samples;
  spec.seed = seed;
  const data::Dataset few = data::subset(train, data::sample_few(train, spec));
  LayerGraph student = prune_teacher(cfg, teacher);

  if (cfg.scheme != prune::Scheme::unstructured) {
    return run_method(cfg, teacher, student, few, seed, method_iterations(cfg), hooks);
  }
  if (!cfg.progressive) {
    prune::MaskSet masks = prune::magnitude_mask(student, cfg.sparsity, cfg.skip_first_conv);
    prune::apply_masks(student, masks);
    mimic::TrainHooks h = hooks;
    h.masks = &masks;
    return run_method(cfg, teacher, student, few, seed, method_iterations(cfg), h);
  }
  prune::ProgressiveOptions opts;
  opts.target = cfg.sparsity;
  opts.step = cfg.progressive_step;
  opts.inner_iters = cfg.progressive_inner_iters;
  opts.final_iters = method_iterations(cfg);
  opts.skip_first_conv = cfg.skip_first_conv;
  TrialOutput last{student.clone(), {}};
  int level = 0;
  prune::progressive_unstructured(student, opts, [&](LayerGraph& g, const prune::MaskSet& masks, int iters) {
    mimic::TrainHooks h = hooks;
    h.masks = &masks;
    LayerGraph work = g.clone();
    last = run_method(cfg, teacher, work, few, seed + 1000 * level++, iters, h);
    for (auto& [name, t] : g.params()) t = last.model.param(name).clone();
  });
  return last;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const LayerGraph& teacher, const Splits& splits) {
  cfg.validate();
  ExperimentReport r;
  r.config = cfg;
  r.teacher = evaluate(teacher, splits.test);
  r.teacher_macs = net::count_macs(teacher).total_macs;
  r.teacher_params = net::count_params(teacher);
  {
    LayerGraph s = prune_teacher(cfg, teacher);
    r.student_macs = net::count_macs(s).total_macs;
    r.student_params = net::count_params(s);
  }
  for (int t = 0; t < cfg.trials; ++t) {
    TrialResult tr;
    tr.seed = cfg.base_seed + t;
    const auto start = std::chrono::steady_clock::now();
    try {
      mimic::TrainHooks hooks;
      hooks.timing = cfg.timing;
      TrialOutput out = run_trial(cfg, teacher, splits.train, tr.seed, hooks);
      EvalResult e = evaluate(out.model, splits.test);
      tr.top1 = e.top1;
      tr.top5 = e.top5;
      tr.initial_loss = out.log.initial_loss();
      tr.final_loss = out.log.tail_mean(10);
      tr.ok = true;
    } catch (const std::exception& e) {
      tr.error = e.what();
    }
    if (cfg.timing) tr.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.trials.push_back(tr);
  }
  r.summary = summarize(r.trials);
  return r;
}

std::string report_csv(const ExperimentReport& r, bool header) {
  std::ostringstream os;
  if (header) os << "method,scheme,keep_ratio,samples_spec,seed,top1,top5,macs,params,wall_seconds\n";
  const auto& c = r.config;
  const double keep = c.scheme == prune::Scheme::unstructured ? 1.0 - c.sparsity : c.keep_ratio;
  const std::string prefix = to_string(c.method) + "," + prune::to_string(c.scheme) + "," + fmt("%.4f", keep) + "," +
                             c.samples.label() + ",";
  const std::string cost = std::to_string(r.student_macs) + "," + std::to_string(r.student_params) + ",";
  double wall = 0;
  for (const auto& t : r.trials) {
    os << prefix << t.seed << ",";
    if (t.ok) {
      os << fmt("%.6f", t.top1) << "," << fmt("%.6f", t.top5) << ",";
    } else {
      os << "nan,nan,";
    }
    os << cost << fmt("%.3f", t.wall_seconds) << "\n";
    wall += t.wall_seconds;
  }
  const auto& s = r.summary;
  os << prefix << "mean," << fmt("%.6f", s.top1_mean) << "," << fmt("%.6f", s.top5_mean) << "," << cost
     << fmt("%.3f", r.trials.empty() ? 0.0 : wall / r.trials.size()) << "\n";
  os << prefix << "std," << fmt("%.6f", s.top1_std) << "," << fmt("%.6f", s.top5_std) << "," << cost
     << fmt("%.3f", 0.0) << "\n";
  return os.str();
}

json report_json(const ExperimentReport& r) {
  const json cfg = to_json(r.config);
  json trials = json::array();
  for (const auto& t : r.trials) {
    json j{{"seed", t.seed}, {"ok", t.ok}, {"top1", t.top1}, {"top5", t.top5}, {"wall_seconds", t.wall_seconds},
           {"initial_loss", t.initial_loss}, {"final_loss", t.final_loss}};
    if (!t.ok) j["error"] = t.error;
    trials.push_back(j);
  }
  auto pct = [](std::int64_t base, std::int64_t v) { return base ? 100.0 * (1.0 - double(v) / double(base)) : 0.0; };
  return {{"version", kVersion},
          {"config", cfg},
          {"config_hash", config_hash(cfg)},
          {"teacher", {{"top1", r.teacher.top1}, {"top5", r.teacher.top5}}},
          {"flops",
           {{"teacher_macs", r.teacher_macs},
            {"teacher_params", r.teacher_params},
            {"student_macs", r.student_macs},
            {"student_params", r.student_params},
            {"macs_reduction_pct", pct(r.teacher_macs, r.student_macs)},
            {"params_reduction_pct", pct(r.teacher_params, r.student_params)}}},
          {"trials", trials},
          {"summary",
           {{"top1_mean", r.summary.top1_mean},
            {"top1_std", r.summary.top1_std},
            {"top5_mean", r.summary.top5_mean},
            {"top5_std", r.summary.top5_std},
            {"ok", r.summary.ok},
            {"failed", r.summary.failed},
            {"single_trial", r.summary.single_trial}}}};
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "lr") return SweepAxis::lr;
  if (name == "iterations") return SweepAxis::iterations;
  if (name == "samples") return SweepAxis::samples;
  throw ConfigError("unknown sweep axis '" + name + "' (lr, iterations, samples)");
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::lr: return "lr";
    case SweepAxis::iterations: return "iterations";
    case SweepAxis::samples: return "samples";
  }
  return "?";
}

ExperimentConfig with_axis_value(const ExperimentConfig& cfg, SweepAxis axis, double value) {
  ExperimentConfig c = cfg;
  const bool supervised = cfg.method == Method::bp || cfg.method == Method::kd || cfg.method == Method::freeze_head;
  switch (axis) {
    case SweepAxis::lr:
      (supervised ? c.supervised.lr : c.mimic.lr) = value;
      break;
    case SweepAxis::iterations:
      (supervised ? c.supervised.iterations : c.mimic.iterations) = static_cast<int>(std::lround(value));
      break;
    case SweepAxis::samples: {
      const long count = std::lround(value);
      if (c.samples.mode == data::FewSampleSpec::Mode::random_m) {
        c.samples.m = static_cast<int>(count);
      } else {
        if (count % c.samples.n != 0) {
          throw ConfigError("samples value " + std::to_string(count) + " is not a multiple of N=" +
                            std::to_string(c.samples.n));
        }
        c.samples.k = static_cast<int>(count / c.samples.n);
      }
      break;
    }
  }
  c.validate();
  return c;
}

SweepReport sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values,
                  const LayerGraph& teacher, const Splits& splits) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  SweepReport s;
  s.axis = axis;
  s.values = values;
  for (double v : values) s.runs.push_back(run_experiment(with_axis_value(cfg, axis, v), teacher, splits));
  double var = 0;
  for (const auto& r : s.runs) var += r.summary.top1_std * r.summary.top1_std;
  s.pooled_std = std::sqrt(var / s.runs.size());
  for (std::size_t i = 1; i < s.runs.size(); ++i)
    if (s.runs[i].summary.top1_mean > s.runs[s.argmax].summary.top1_mean) s.argmax = i;
  s.interior_max = s.argmax > 0 && s.argmax + 1 < s.runs.size();
  s.non_decreasing = true;
  s.diminishing = true;
  for (std::size_t i = 1; i < s.runs.size(); ++i) {
    const double inc = s.runs[i].summary.top1_mean - s.runs[i - 1].summary.top1_mean;
    if (inc < -s.pooled_std) s.non_decreasing = false;
    if (i > 1) {
      const double prev = s.runs[i - 1].summary.top1_mean - s.runs[i - 2].summary.top1_mean;
      if (inc > prev + s.pooled_std) s.diminishing = false;
    }
  }
  return s;
}

std::string sweep_csv(const SweepReport& s) {
  std::ostringstream os;
  os << "axis,value,top1_mean,top1_std,top5_mean,top5_std,final_loss_mean,failed\n";
  for (std::size_t i = 0; i < s.runs.size(); ++i) {
    const auto& r = s.runs[i];
    double loss = 0;
    int n = 0;
    for (const auto& t : r.trials)
      if (t.ok) loss += t.final_loss, ++n;
    os << to_string(s.axis) << "," << fmt("%g", s.values[i]) << "," << fmt("%.6f", r.summary.top1_mean) << ","
       << fmt("%.6f", r.summary.top1_std) << "," << fmt("%.6f", r.summary.top5_mean) << ","
       << fmt("%.6f", r.summary.top5_std) << "," << fmt("%.6g", n ? loss / n : 0.0) << "," << r.summary.failed
       << "\n";
  }
  return os.str();
}

json sweep_json(const SweepReport& s) {
  json runs = json::array();
  for (std::size_t i = 0; i < s.runs.size(); ++i) runs.push_back({{"value", s.values[i]}, {"report", report_json(s.runs[i])}});
  return {{"version", kVersion},
          {"axis", to_string(s.axis)},
          {"values", s.values},
          {"pooled_std", s.pooled_std},
          {"argmax", s.values[s.argmax]},
          {"interior_max", s.interior_max},
          {"non_decreasing", s.non_decreasing},
          {"diminishing", s.diminishing},
          {"runs", runs}};
}

constexpr std::array<double, 2> kProbeDecay{0.4, 0.8};

EvalResult linear_probe(const data::Dataset& train, const data::Dataset& test, int iterations, std::uint64_t seed) {
  const std::int64_t d = train.image_bytes(), k = train.num_classes;
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  Tensor w = Tensor::uniform({k, d}, rng, -bound, bound);
  Tensor b = Tensor::uniform({k}, rng, -bound, bound);
  w.set_requires_grad(true);
  b.set_requires_grad(true);
  Sgd opt({w, b}, {0.01, 0.9, 1e-4});
  data::EpochStream stream(train.size(), seed);
  for (int it = 0; it < iterations; ++it) {
    opt.set_lr(step_decay_lr(0.01, it, iterations, kProbeDecay));
    const auto idx = stream.next(64);
    data::Batch batch = data::make_batch(train, idx, nullptr, nullptr);
    Tape tape;
    {
      Tape::Scope scope(tape);
      Tensor loss = ops::cross_entropy(ops::linear(ops::flatten(batch.images), w, b), batch.labels);
      tape.backward(loss);
    }
    opt.step();
  }
  std::vector<double> logits;
  std::vector<int> labels;
  for (std::size_t start = 0; start < test.size(); start += 200) {
    std::vector<std::size_t> idx(std::min<std::size_t>(200, test.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    data::Batch batch = data::make_batch(test, idx, nullptr, nullptr);
    Tensor out = ops::linear(ops::flatten(batch.images), w, b);
    logits.insert(logits.end(), out.data().begin(), out.data().end());
    labels.insert(labels.end(), batch.labels.begin(), batch.labels.end());
  }
  return score_logits(logits, static_cast<std::size_t>(k), labels);
}

}  // namespace mir::harness
