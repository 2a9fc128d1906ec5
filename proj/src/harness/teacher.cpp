#include "mir/harness/teacher.h"

#include "mir/core/errors.h"
#include "mir/mimic/baselines.h"
#include "mir/net/zoo.h"

namespace mir::harness {

nlohmann::json to_json(const TeacherConfig& c) {
  return {{"model", c.model},
          {"dataset", to_json(c.dataset)},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"momentum", c.momentum},
          {"weight_decay", c.weight_decay},
          {"lr_decay_points", c.lr_decay_points},
          {"augment", c.augment},
          {"seed", c.seed}};
}

TeacherConfig teacher_config_from_json(const nlohmann::json& doc) {
  TeacherConfig c;
  c.model = doc.value("model", c.model);
  if (doc.contains("dataset")) c.dataset = dataset_spec_from_json(doc.at("dataset"));
  c.epochs = doc.value("epochs", c.epochs);
  c.batch_size = doc.value("batch_size", c.batch_size);
  c.lr = doc.value("lr", c.lr);
  c.momentum = doc.value("momentum", c.momentum);
  c.weight_decay = doc.value("weight_decay", c.weight_decay);
  c.lr_decay_points = doc.value("lr_decay_points", c.lr_decay_points);
  c.augment = doc.value("augment", c.augment);
  c.seed = doc.value("seed", c.seed);
  if (c.epochs < 0 || c.batch_size < 1) throw ConfigError("teacher: epochs must be >= 0 and batch_size positive");
  return c;
}

TeacherResult train_teacher(const TeacherConfig& cfg, const Splits& splits, const mimic::TrainHooks& hooks) {
  if (splits.train.size() == 0) throw ConfigError("teacher: empty training split");
  TeacherResult r{net::build_model(cfg.model, splits.train.num_classes, cfg.seed), {}, {}, {}};
  const auto& in = r.model.input_shape();
  if (in[0] != splits.train.channels || in[1] != splits.train.height || in[2] != splits.train.width) {
    throw ConfigError("teacher: model input " + shape_str(in) + " does not match the dataset geometry");
  }
  const std::size_t steps_per_epoch = (splits.train.size() + cfg.batch_size - 1) / cfg.batch_size;
  mimic::SupervisedConfig sup;
  sup.iterations = static_cast<int>(cfg.epochs * steps_per_epoch);
  sup.batch_size = cfg.batch_size;
  sup.lr = cfg.lr;
  sup.momentum = cfg.momentum;
  sup.weight_decay = cfg.weight_decay;
  sup.lr_decay_points = cfg.lr_decay_points;
  sup.augment = cfg.augment;
  r.log = mimic::train_supervised(r.model, splits.train, sup, cfg.seed, r.model.trainable_params(), nullptr, {}, hooks);
  r.train = evaluate(r.model, splits.train);
  r.test = evaluate(r.model, splits.test);
  return r;
}

}  // namespace mir::harness
