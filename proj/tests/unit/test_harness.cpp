#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mir/core/errors.h"
#include "mir/harness/config.h"
#include "mir/harness/dataset_spec.h"
#include "mir/harness/evaluate.h"
#include "mir/harness/experiment.h"
#include "mir/harness/model_io.h"
#include "mir/harness/teacher.h"
#include "mir/net/zoo.h"

using namespace mir;
using namespace mir::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

fs::path temp_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("mir_harness_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

DatasetSpec small_spec() {
  DatasetSpec s;
  s.train_per_class = 6;
  s.test_per_class = 2;
  return s;
}

ExperimentConfig small_experiment() {
  ExperimentConfig c;
  c.dataset = small_spec();
  c.samples.k = 1;
  c.mimic.iterations = 3;
  c.mimic.batch_size = 4;
  c.supervised.iterations = 3;
  c.supervised.batch_size = 4;
  c.trials = 2;
  c.timing = false;
  return c;
}

bool same_params(const net::LayerGraph& a, const net::LayerGraph& b) {
  if (a.params().size() != b.params().size()) return false;
  for (const auto& [name, t] : a.params()) {
    auto x = t.data();
    auto y = b.param(name).data();
    if (!std::equal(x.begin(), x.end(), y.begin(), y.end())) return false;
  }
  return true;
}

}  // namespace

TEST(Evaluate, TiesRankLowerIndexFirst) {
  const std::vector<double> row{1, 1, 1, 0};
  EXPECT_TRUE(topk_hit(row, 0, 1));
  EXPECT_FALSE(topk_hit(row, 1, 1));
  EXPECT_TRUE(topk_hit(row, 1, 2));
  EXPECT_FALSE(topk_hit(row, 2, 2));
  EXPECT_FALSE(topk_hit(row, 3, 3));
}

TEST(Evaluate, OneHotLogitsScorePerfect) {
  const std::size_t k = 10, n = 50;
  std::vector<double> logits(n * k, 0.0);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(i % k);
    logits[i * k + labels[i]] = 3.0;
  }
  EvalResult r = score_logits(logits, k, labels);
  EXPECT_EQ(r.count, n);
  EXPECT_DOUBLE_EQ(r.top1, 1.0);
  EXPECT_DOUBLE_EQ(r.top5, 1.0);
}

TEST(Evaluate, RandomLogitsTop1BelowTop5AndTop5NearHalf) {
  const std::size_t k = 10, n = 20000;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> lab(0, 9);
  std::vector<double> logits(n * k);
  std::vector<int> labels(n);
  for (auto& v : logits) v = nd(rng);
  for (auto& l : labels) l = lab(rng);
  EvalResult r = score_logits(logits, k, labels);
  EXPECT_LE(r.top1, r.top5);
  EXPECT_NEAR(r.top1, 0.1, 0.01);
  EXPECT_NEAR(r.top5, 0.5, 0.015);
}

TEST(Evaluate, RejectsMismatchedSizes) {
  const std::vector<double> logits(20, 0.0);
  const std::vector<int> labels(3, 0);
  EXPECT_THROW(score_logits(logits, 10, labels), std::exception);
}

TEST(Summary, SampleStdAndSingleTrial) {
  std::vector<TrialResult> t(3);
  const double v[] = {0.90, 0.92, 0.97};
  for (int i = 0; i < 3; ++i) {
    t[i].ok = true;
    t[i].top1 = v[i];
    t[i].top5 = 1.0;
  }
  Summary s = summarize(t);
  const double mean = (0.90 + 0.92 + 0.97) / 3;
  const double var = ((0.90 - mean) * (0.90 - mean) + (0.92 - mean) * (0.92 - mean) + (0.97 - mean) * (0.97 - mean)) / 2;
  EXPECT_NEAR(s.top1_mean, mean, 1e-12);
  EXPECT_NEAR(s.top1_std, std::sqrt(var), 1e-12);
  EXPECT_DOUBLE_EQ(s.top5_std, 0.0);
  EXPECT_FALSE(s.single_trial);

  Summary one = summarize({t[0]});
  EXPECT_TRUE(one.single_trial);
  EXPECT_DOUBLE_EQ(one.top1_std, 0.0);
}

TEST(Summary, FailedTrialsExcludedFromMean) {
  std::vector<TrialResult> t(2);
  t[0].ok = true;
  t[0].top1 = 0.5;
  t[1].ok = false;
  t[1].top1 = 99;
  Summary s = summarize(t);
  EXPECT_EQ(s.ok, 1);
  EXPECT_EQ(s.failed, 1);
  EXPECT_DOUBLE_EQ(s.top1_mean, 0.5);
}

TEST(Config, RoundTripAndOverrides) {
  ExperimentConfig c;
  json doc = to_json(c);
  EXPECT_EQ(to_json(experiment_config_from_json(doc)), doc);

  apply_override(doc, "mimic.lr=0.125");
  apply_override(doc, "method=kd");
  apply_override(doc, "prune.scheme=residual");
  ExperimentConfig d = experiment_config_from_json(doc);
  EXPECT_DOUBLE_EQ(d.mimic.lr, 0.125);
  EXPECT_EQ(d.method, Method::kd);
  EXPECT_EQ(d.scheme, prune::Scheme::residual);
}

TEST(Config, UnknownKeysAndBadValuesRejected) {
  json doc = to_json(ExperimentConfig{});
  EXPECT_THROW(apply_override(doc, "mimic.lrr=1"), ConfigError);
  EXPECT_THROW(apply_override(doc, "nokey"), ConfigError);
  json patch = {{"mimic", {{"bogus", 1}}}};
  EXPECT_THROW(merge_strict(doc, patch), ConfigError);
  EXPECT_THROW(experiment_config_from_json(json{{"extra", 1}}), ConfigError);
  EXPECT_THROW(experiment_config_from_json(json{{"method", "nope"}}), ConfigError);
  EXPECT_THROW(experiment_config_from_json(json{{"trials", 0}}), ConfigError);
}

TEST(Config, HashIsStableAndSensitive) {
  json a = to_json(ExperimentConfig{});
  json b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  apply_override(b, "base_seed=7");
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, FnvOracle) {
  // FNV-1a 64 of the compact dump "{}" computed byte by byte
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : std::string("{}")) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  EXPECT_EQ(config_hash(json::object()), buf);
}

TEST(AxisValue, RoutesToOptimizerOfTheMethod) {
  ExperimentConfig c;
  ExperimentConfig m = with_axis_value(c, SweepAxis::lr, 0.003);
  EXPECT_DOUBLE_EQ(m.mimic.lr, 0.003);
  EXPECT_DOUBLE_EQ(m.supervised.lr, c.supervised.lr);

  c.method = Method::bp;
  ExperimentConfig b = with_axis_value(c, SweepAxis::iterations, 250);
  EXPECT_EQ(b.supervised.iterations, 250);
  EXPECT_EQ(b.mimic.iterations, c.mimic.iterations);

  ExperimentConfig s = with_axis_value(c, SweepAxis::samples, 50);
  EXPECT_EQ(s.samples.k, 5);
  EXPECT_THROW(with_axis_value(c, SweepAxis::samples, 55), ConfigError);

  c.samples.mode = data::FewSampleSpec::Mode::random_m;
  EXPECT_EQ(with_axis_value(c, SweepAxis::samples, 77).samples.m, 77);
}

TEST(ModelIo, RoundTripPreservesArchAndParams) {
  const fs::path dir = temp_dir("io");
  net::LayerGraph g = net::build_model("resnet-tiny-8", 10, 5);
  save_model(dir / "m", g);
  ASSERT_TRUE(fs::exists(dir / "m.arch.json"));
  ASSERT_TRUE(fs::exists(dir / "m.ckpt"));
  net::LayerGraph h = load_model(dir / "m");
  EXPECT_EQ(h.nodes().size(), g.nodes().size());
  EXPECT_TRUE(same_params(g, h));
  save_model(dir / "again", h);
  EXPECT_EQ(slurp(dir / "m.ckpt"), slurp(dir / "again.ckpt"));
  EXPECT_EQ(slurp(dir / "m.arch.json"), slurp(dir / "again.arch.json"));
}

TEST(ModelIo, LoadParamsRejectsOtherArchitecture) {
  const fs::path dir = temp_dir("mismatch");
  save_model(dir / "m", net::build_model("resnet-tiny-8", 10, 5));
  net::LayerGraph other = net::build_model("resnet-tiny-8", 7, 5);
  EXPECT_THROW(load_params(other, dir / "m.ckpt"), std::exception);
  EXPECT_THROW(load_model(dir / "missing"), std::exception);
}

TEST(Teacher, ZeroEpochsReturnsInitialization) {
  TeacherConfig cfg;
  cfg.dataset = small_spec();
  cfg.epochs = 0;
  Splits s = load_splits(cfg.dataset);
  TeacherResult r = train_teacher(cfg, s);
  EXPECT_TRUE(same_params(r.model, net::build_model(cfg.model, 10, cfg.seed)));
}

TEST(Teacher, SameSeedGivesIdenticalCheckpointBytes) {
  TeacherConfig cfg;
  cfg.dataset = small_spec();
  cfg.epochs = 1;
  cfg.batch_size = 16;
  Splits s = load_splits(cfg.dataset);
  const fs::path dir = temp_dir("teacher");
  save_model(dir / "a", train_teacher(cfg, s).model);
  save_model(dir / "b", train_teacher(cfg, s).model);
  EXPECT_EQ(slurp(dir / "a.ckpt"), slurp(dir / "b.ckpt"));
  cfg.seed = 2;
  save_model(dir / "c", train_teacher(cfg, s).model);
  EXPECT_NE(slurp(dir / "a.ckpt"), slurp(dir / "c.ckpt"));
}

TEST(Experiment, CsvIsDeterministicWithoutTiming) {
  ExperimentConfig c = small_experiment();
  Splits s = load_splits(c.dataset);
  net::LayerGraph teacher = net::build_model(c.model, 10, 1);
  const std::string a = report_csv(run_experiment(c, teacher, s));
  const std::string b = report_csv(run_experiment(c, teacher, s));
  EXPECT_EQ(a, b);
  std::istringstream is(a);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "method,scheme,keep_ratio,samples_spec,seed,top1,top5,macs,params,wall_seconds");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, c.trials + 2);
}

TEST(Experiment, FailingTrialsAreRecordedAndRunContinues) {
  ExperimentConfig c = small_experiment();
  c.method = Method::layerwise;
  c.scheme = prune::Scheme::residual;
  Splits s = load_splits(c.dataset);
  net::LayerGraph teacher = net::build_model(c.model, 10, 1);
  ExperimentReport r;
  ASSERT_NO_THROW(r = run_experiment(c, teacher, s));
  ASSERT_EQ(r.trials.size(), 2u);
  EXPECT_FALSE(r.all_ok());
  EXPECT_EQ(r.summary.failed, 2);
  for (const auto& t : r.trials) EXPECT_FALSE(t.error.empty());
  EXPECT_NE(report_csv(r).find("nan"), std::string::npos);
}

TEST(Experiment, PruneOnlyCostsMatchStudent) {
  ExperimentConfig c = small_experiment();
  c.method = Method::prune_only;
  c.trials = 1;
  Splits s = load_splits(c.dataset);
  net::LayerGraph teacher = net::build_model(c.model, 10, 1);
  ExperimentReport r = run_experiment(c, teacher, s);
  EXPECT_TRUE(r.all_ok());
  EXPECT_LT(r.student_macs, r.teacher_macs);
  EXPECT_LT(r.student_params, r.teacher_params);
  EXPECT_TRUE(r.summary.single_trial);
  json j = report_json(r);
  EXPECT_EQ(j["config_hash"], config_hash(j["config"]));
}

TEST(Experiment, FreezeHeadAtZeroLrMatchesReplaceHead) {
  ExperimentConfig c = small_experiment();
  Splits s = load_splits(c.dataset);
  net::LayerGraph teacher = net::build_model(c.model, 10, 1);
  c.method = Method::freeze_head;
  c.supervised.lr = 0.0;
  TrialOutput frozen = run_trial(c, teacher, s.train, 4);
  c.method = Method::mir_before;
  TrialOutput mir = run_trial(c, teacher, s.train, 4);
  EXPECT_TRUE(same_params(frozen.model, mir.model));
}

TEST(LinearProbe, SyntheticClassesAreNotLinearlySeparable) {
  DatasetSpec spec;
  spec.train_per_class = 100;
  spec.test_per_class = 50;
  Splits s = load_splits(spec);
  EvalResult probe = linear_probe(s.train, s.test, 1500, 1);
  EXPECT_EQ(probe.count, 500u);
  EXPECT_LT(probe.top1, 0.6);
}
