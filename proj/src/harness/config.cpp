#include "mir/harness/config.h"

#include <cstdio>
#include <fstream>

#include "mir/core/errors.h"

namespace mir::harness {

using nlohmann::json;

std::string to_string(Method m) {
  switch (m) {
    case Method::mir_before: return "mir_before";
    case Method::mir_after: return "mir_after";
    case Method::bp: return "bp";
    case Method::kd: return "kd";
    case Method::layerwise: return "layerwise";
    case Method::freeze_head: return "freeze_head";
    case Method::prune_only: return "prune_only";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::mir_before, Method::mir_after, Method::bp, Method::kd, Method::layerwise,
                   Method::freeze_head, Method::prune_only}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (scheme == prune::Scheme::unstructured) {
    if (!(sparsity > 0 && sparsity < 1)) throw ConfigError("sparsity must lie in (0, 1)");
  } else if (!(keep_ratio > 0 && keep_ratio <= 1)) {
    throw ConfigError("keep_ratio must lie in (0, 1]");
  }
  if (progressive && scheme != prune::Scheme::unstructured) throw ConfigError("progressive applies to unstructured only");
  mimic.validate();
  if (supervised.iterations < 0 || supervised.batch_size < 1 || supervised.lr < 0) {
    throw ConfigError("supervised: bad iterations, batch_size or lr");
  }
  if (method == Method::kd && (!(kd.tau > 0) || kd.alpha < 0 || kd.alpha > 1)) {
    throw ConfigError("kd requires tau > 0 and alpha in [0, 1]");
  }
}

namespace {

json mimic_json(const mimic::MimicConfig& m) {
  json losses = json::array();
  for (auto k : m.losses) losses.push_back(mimic::to_string(k));
  return {{"losses", losses},
          {"iterations", m.iterations},
          {"batch_size", m.batch_size},
          {"lr", m.lr},
          {"momentum", m.momentum},
          {"weight_decay", m.weight_decay},
          {"lr_decay_points", m.lr_decay_points},
          {"augment", m.augment},
          {"flip", m.augment_opts.flip},
          {"crop", m.augment_opts.crop},
          {"pad", m.augment_opts.pad},
          {"student_bn", m.student_bn == net::Mode::train ? "train" : "eval"}};
}

json supervised_json(const mimic::SupervisedConfig& s) {
  return {{"iterations", s.iterations},
          {"batch_size", s.batch_size},
          {"lr", s.lr},
          {"momentum", s.momentum},
          {"weight_decay", s.weight_decay},
          {"lr_decay_points", s.lr_decay_points},
          {"augment", s.augment},
          {"flip", s.augment_opts.flip},
          {"crop", s.augment_opts.crop},
          {"pad", s.augment_opts.pad}};
}

template <typename T>
T get(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json samples = data::to_json(c.samples);
  samples.erase("seed");
  if (!samples.contains("n")) samples["n"] = c.samples.n;
  if (!samples.contains("k")) samples["k"] = c.samples.k;
  if (!samples.contains("m")) samples["m"] = c.samples.m;
  return {{"model", c.model},
          {"dataset", to_json(c.dataset)},
          {"teacher", c.teacher},
          {"prune",
           {{"scheme", prune::to_string(c.scheme)},
            {"keep_ratio", c.keep_ratio},
            {"sparsity", c.sparsity},
            {"progressive", c.progressive},
            {"step", c.progressive_step},
            {"inner_iters", c.progressive_inner_iters},
            {"skip_first_conv", c.skip_first_conv}}},
          {"method", to_string(c.method)},
          {"samples", samples},
          {"mimic", mimic_json(c.mimic)},
          {"supervised", supervised_json(c.supervised)},
          {"kd", {{"tau", c.kd.tau}, {"alpha", c.kd.alpha}}},
          {"freeze_head", {{"trained_backbone", c.freeze_trained_backbone}}},
          {"trials", c.trials},
          {"base_seed", c.base_seed},
          {"timing", c.timing}};
}

void merge_strict(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) throw ConfigError("config" + (where.empty() ? "" : " at '" + where + "'") + " must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + path + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_strict(slot, it.value(), path);
    } else {
      slot = it.value();
    }
  }
}

ExperimentConfig experiment_config_from_json(const json& doc) {
  json full = to_json(ExperimentConfig{});
  merge_strict(full, doc);
  ExperimentConfig c;
  c.model = get<std::string>(full, "model");
  c.dataset = dataset_spec_from_json(full.at("dataset"));
  c.teacher = get<std::string>(full, "teacher");
  const json& p = full.at("prune");
  c.scheme = prune::parse_scheme(get<std::string>(p, "scheme"));
  c.keep_ratio = get<double>(p, "keep_ratio");
  c.sparsity = get<double>(p, "sparsity");
  c.progressive = get<bool>(p, "progressive");
  c.progressive_step = get<double>(p, "step");
  c.progressive_inner_iters = get<int>(p, "inner_iters");
  c.skip_first_conv = get<bool>(p, "skip_first_conv");
  c.method = parse_method(get<std::string>(full, "method"));
  json samples = full.at("samples");
  samples["seed"] = 0;
  c.samples = data::few_sample_spec_from_json(samples);
  c.samples.n = get<int>(samples, "n");
  c.samples.k = get<int>(samples, "k");
  c.samples.m = get<int>(samples, "m");

  const json& m = full.at("mimic");
  c.mimic.losses.clear();
  for (const auto& l : m.at("losses")) c.mimic.losses.push_back(mimic::parse_loss(l.get<std::string>()));
  c.mimic.iterations = get<int>(m, "iterations");
  c.mimic.batch_size = get<int>(m, "batch_size");
  c.mimic.lr = get<double>(m, "lr");
  c.mimic.momentum = get<double>(m, "momentum");
  c.mimic.weight_decay = get<double>(m, "weight_decay");
  c.mimic.lr_decay_points = get<std::vector<double>>(m, "lr_decay_points");
  c.mimic.augment = get<bool>(m, "augment");
  c.mimic.augment_opts.flip = get<bool>(m, "flip");
  c.mimic.augment_opts.crop = get<bool>(m, "crop");
  c.mimic.augment_opts.pad = get<std::int64_t>(m, "pad");
  const auto bn = get<std::string>(m, "student_bn");
  if (bn != "train" && bn != "eval") throw ConfigError("mimic.student_bn must be train or eval");
  c.mimic.student_bn = bn == "train" ? net::Mode::train : net::Mode::eval;

  const json& s = full.at("supervised");
  c.supervised.iterations = get<int>(s, "iterations");
  c.supervised.batch_size = get<int>(s, "batch_size");
  c.supervised.lr = get<double>(s, "lr");
  c.supervised.momentum = get<double>(s, "momentum");
  c.supervised.weight_decay = get<double>(s, "weight_decay");
  c.supervised.lr_decay_points = get<std::vector<double>>(s, "lr_decay_points");
  c.supervised.augment = get<bool>(s, "augment");
  c.supervised.augment_opts.flip = get<bool>(s, "flip");
  c.supervised.augment_opts.crop = get<bool>(s, "crop");
  c.supervised.augment_opts.pad = get<std::int64_t>(s, "pad");

  c.kd.tau = get<double>(full.at("kd"), "tau");
  c.kd.alpha = get<double>(full.at("kd"), "alpha");
  c.freeze_trained_backbone = get<bool>(full.at("freeze_head"), "trained_backbone");
  c.trials = get<int>(full, "trials");
  c.base_seed = get<std::uint64_t>(full, "base_seed");
  c.timing = get<bool>(full, "timing");
  c.validate();
  return c;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown config key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = value;
}

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string config_hash(const json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mir::harness
