#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mir/core/errors.h"
#include "mir/harness/config.h"
#include "mir/harness/experiment.h"
#include "mir/harness/model_io.h"
#include "mir/harness/teacher.h"
#include "mir/net/flops.h"
#include "mir/net/zoo.h"
#include "mir/prune/plan.h"

namespace fs = std::filesystem;
using namespace mir;
using nlohmann::json;

namespace {

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << text;
}

json load_config(const std::string& path, const std::vector<std::string>& sets, const json& defaults) {
  json doc = defaults;
  if (!path.empty()) harness::merge_strict(doc, harness::read_json_file(path));
  for (const auto& s : sets) harness::apply_override(doc, s);
  return doc;
}

harness::ExperimentConfig experiment_config(const std::string& path, const std::vector<std::string>& sets) {
  return harness::experiment_config_from_json(load_config(path, sets, harness::to_json(harness::ExperimentConfig{})));
}

net::LayerGraph load_teacher(const harness::ExperimentConfig& cfg) {
  if (cfg.teacher.empty()) throw ConfigError("config key 'teacher' must name a model stem from train-teacher");
  return harness::load_model(cfg.teacher);
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("bad sweep value '" + item + "'");
    }
  }
  return out;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

void print_report(const json& r, std::ostream& os) {
  const auto& c = r.at("config");
  const auto& s = r.at("summary");
  const auto& f = r.at("flops");
  os << "method " << c.at("method").get<std::string>() << ", scheme " << c.at("prune").at("scheme").get<std::string>()
     << ", keep " << c.at("prune").at("keep_ratio").get<double>() << ", config " << r.at("config_hash").get<std::string>()
     << "\n";
  os << "teacher top1 " << pct(r.at("teacher").at("top1").get<double>()) << "%\n";
  os << "MACs " << f.at("student_macs").get<std::int64_t>() << " (-" << f.at("macs_reduction_pct").get<double>()
     << "%), params " << f.at("student_params").get<std::int64_t>() << " (-"
     << f.at("params_reduction_pct").get<double>() << "%)\n";
  for (const auto& t : r.at("trials")) {
    os << "  seed " << t.at("seed").get<std::uint64_t>() << ": ";
    if (t.at("ok").get<bool>()) {
      os << "top1 " << pct(t.at("top1").get<double>()) << " top5 " << pct(t.at("top5").get<double>()) << "\n";
    } else {
      os << "failed: " << t.at("error").get<std::string>() << "\n";
    }
  }
  os << "top1 " << pct(s.at("top1_mean").get<double>()) << " +- " << pct(s.at("top1_std").get<double>()) << ", top5 "
     << pct(s.at("top5_mean").get<double>()) << " +- " << pct(s.at("top5_std").get<double>())
     << (s.at("single_trial").get<bool>() ? " (single trial)" : "") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-sample compression by mimicking and replacing"};
  app.require_subcommand(1);

  std::string config, out, teacher_stem, scheme = "normal", axis, values, model_stem, run_dir, model_id;
  std::vector<std::string> sets;
  double keep = 0.5, sparsity = 0.9;
  int classes = 1000;

  auto* train = app.add_subcommand("train-teacher", "Train a teacher on the full labeled split");
  train->add_option("--config", config, "Teacher config JSON");
  train->add_option("--set", sets, "Override key=value (dotted keys)");
  train->add_option("--out", out, "Output directory")->required();

  auto* prune_cmd = app.add_subcommand("prune", "Prune a model and write the student and its plan");
  prune_cmd->add_option("--model", model_stem, "Model stem (<stem>.arch.json + <stem>.ckpt)");
  prune_cmd->add_option("--zoo", model_id, "Zoo model id instead of a stem (resnet34, resnet56, ...)");
  prune_cmd->add_option("--classes", classes, "Classes for --zoo models");
  prune_cmd->add_option("--scheme", scheme, "normal | residual | cd_style | unstructured");
  prune_cmd->add_option("--keep", keep, "Keep ratio for structured schemes");
  prune_cmd->add_option("--sparsity", sparsity, "Sparsity for the unstructured scheme");
  prune_cmd->add_option("--out", out, "Output stem for the student; omit to only report costs");

  auto* compress = app.add_subcommand("compress", "Run the configured experiment over all trials");
  compress->add_option("--config", config, "Experiment config JSON");
  compress->add_option("--set", sets, "Override key=value (dotted keys)");
  compress->add_option("--out", out, "Run directory")->required();

  auto* eval = app.add_subcommand("eval", "Top-1/top-5 of a saved model on the test split");
  eval->add_option("--model", model_stem, "Model stem")->required();
  eval->add_option("--config", config, "Experiment config JSON (for the dataset)");
  eval->add_option("--set", sets, "Override key=value (dotted keys)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run the experiment for each value along an axis");
  sweep_cmd->add_option("--config", config, "Experiment config JSON");
  sweep_cmd->add_option("--set", sets, "Override key=value (dotted keys)");
  sweep_cmd->add_option("--axis", axis, "lr | iterations | samples")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();
  sweep_cmd->add_option("--out", out, "Run directory")->required();

  auto* report = app.add_subcommand("report", "Summarize a run directory");
  report->add_option("--run", run_dir, "Run directory written by compress or sweep")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      json doc = load_config(config, sets, harness::to_json(harness::TeacherConfig{}));
      harness::TeacherConfig cfg = harness::teacher_config_from_json(doc);
      harness::Splits splits = harness::load_splits(cfg.dataset);
      fs::create_directories(out);
      std::ofstream log(fs::path(out) / "teacher_log.jsonl");
      mimic::TrainHooks hooks;
      hooks.sink = mimic::jsonl_sink(log);
      harness::TeacherResult r = harness::train_teacher(cfg, splits, hooks);
      harness::save_model(fs::path(out) / "teacher", r.model);
      json metrics{{"version", harness::kVersion},
                   {"config", doc},
                   {"config_hash", harness::config_hash(doc)},
                   {"train_top1", r.train.top1},
                   {"test_top1", r.test.top1},
                   {"test_top5", r.test.top5},
                   {"final_loss", r.log.tail_mean(10)}};
      write_text(fs::path(out) / "teacher.json", metrics.dump(2) + "\n");
      std::cout << "teacher train top1 " << pct(r.train.top1) << "%, test top1 " << pct(r.test.top1) << "%\n";
      return 0;
    }
    if (prune_cmd->parsed()) {
      if (model_stem.empty() == model_id.empty()) throw ConfigError("give exactly one of --model or --zoo");
      net::LayerGraph g = model_stem.empty() ? net::build_model(model_id, classes) : harness::load_model(model_stem);
      const prune::Scheme s = prune::parse_scheme(scheme);
      prune::PruningPlan plan = prune::make_plan(g, s, s == prune::Scheme::unstructured ? 1.0 - sparsity : keep);
      net::LayerGraph student = prune::apply_plan(g, plan);
      const auto base_macs = net::count_macs(g).total_macs, macs = net::count_macs(student).total_macs;
      const auto base_params = net::count_params(g), params = net::count_params(student);
      json cost{{"teacher_macs", base_macs},
                {"teacher_params", base_params},
                {"student_macs", macs},
                {"student_params", params},
                {"macs_reduction_pct", 100.0 * (1.0 - double(macs) / double(base_macs))},
                {"params_reduction_pct", 100.0 * (1.0 - double(params) / double(base_params))}};
      std::cout << cost.dump(2) << "\n";
      if (!out.empty()) {
        harness::save_model(out, student);
        write_text(out + ".plan.json", prune::plan_to_json(plan).dump(2) + "\n");
      }
      return 0;
    }
    if (compress->parsed()) {
      harness::ExperimentConfig cfg = experiment_config(config, sets);
      harness::Splits splits = harness::load_splits(cfg.dataset);
      net::LayerGraph teacher = load_teacher(cfg);
      harness::ExperimentReport r = harness::run_experiment(cfg, teacher, splits);
      write_text(fs::path(out) / "trials.csv", harness::report_csv(r));
      const json rep = harness::report_json(r);
      write_text(fs::path(out) / "report.json", rep.dump(2) + "\n");
      print_report(rep, std::cout);
      return r.all_ok() ? 0 : 1;
    }
    if (eval->parsed()) {
      harness::ExperimentConfig cfg = experiment_config(config, sets);
      harness::Splits splits = harness::load_splits(cfg.dataset);
      net::LayerGraph g = harness::load_model(model_stem);
      harness::EvalResult e = harness::evaluate(g, splits.test);
      std::cout << json{{"top1", e.top1}, {"top5", e.top5}, {"count", e.count}}.dump() << "\n";
      return 0;
    }
    if (sweep_cmd->parsed()) {
      harness::ExperimentConfig cfg = experiment_config(config, sets);
      harness::Splits splits = harness::load_splits(cfg.dataset);
      net::LayerGraph teacher = load_teacher(cfg);
      harness::SweepReport s =
          harness::sweep(cfg, harness::parse_sweep_axis(axis), parse_values(values), teacher, splits);
      write_text(fs::path(out) / "sweep.csv", harness::sweep_csv(s));
      write_text(fs::path(out) / "sweep.json", harness::sweep_json(s).dump(2) + "\n");
      std::cout << harness::sweep_csv(s);
      std::cout << "argmax " << s.values[s.argmax] << (s.interior_max ? " (interior)" : "") << ", non-decreasing "
                << (s.non_decreasing ? "yes" : "no") << ", diminishing " << (s.diminishing ? "yes" : "no") << "\n";
      bool ok = true;
      for (const auto& r : s.runs) ok = ok && r.all_ok();
      return ok ? 0 : 1;
    }
    if (report->parsed()) {
      const fs::path dir(run_dir);
      if (fs::exists(dir / "report.json")) {
        print_report(harness::read_json_file((dir / "report.json").string()), std::cout);
      } else if (fs::exists(dir / "sweep.json")) {
        const json s = harness::read_json_file((dir / "sweep.json").string());
        for (const auto& run : s.at("runs")) {
          std::cout << s.at("axis").get<std::string>() << " = " << run.at("value").get<double>() << "\n";
          print_report(run.at("report"), std::cout);
        }
        std::cout << "argmax " << s.at("argmax").get<double>() << ", interior " << s.at("interior_max") << "\n";
      } else {
        throw ConfigError(run_dir + " has neither report.json nor sweep.json");
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
