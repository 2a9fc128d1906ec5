#include "mir/harness/dataset_spec.h"

#include "mir/core/errors.h"
#include "mir/data/cifar.h"
#include "mir/data/synthetic.h"

namespace mir::harness {

Splits load_splits(const DatasetSpec& spec) {
  if (spec.kind == "synth") {
    auto s = data::synth_splits(spec.seed, spec.train_per_class, spec.test_per_class, spec.num_classes, spec.image_size);
    return {std::move(s.train), std::move(s.test)};
  }
  if (spec.kind == "cifar10") {
    if (spec.cifar_dir.empty()) throw ConfigError("dataset.cifar_dir is required for cifar10");
    auto s = data::load_cifar10(spec.cifar_dir);
    return {std::move(s.train), std::move(s.test)};
  }
  throw ConfigError("unknown dataset kind '" + spec.kind + "'");
}

nlohmann::json to_json(const DatasetSpec& spec) {
  return {{"kind", spec.kind},
          {"seed", spec.seed},
          {"train_per_class", spec.train_per_class},
          {"test_per_class", spec.test_per_class},
          {"num_classes", spec.num_classes},
          {"image_size", spec.image_size},
          {"cifar_dir", spec.cifar_dir}};
}

DatasetSpec dataset_spec_from_json(const nlohmann::json& doc) {
  DatasetSpec s;
  s.kind = doc.value("kind", s.kind);
  s.seed = doc.value("seed", s.seed);
  s.train_per_class = doc.value("train_per_class", s.train_per_class);
  s.test_per_class = doc.value("test_per_class", s.test_per_class);
  s.num_classes = doc.value("num_classes", s.num_classes);
  s.image_size = doc.value("image_size", s.image_size);
  s.cifar_dir = doc.value("cifar_dir", s.cifar_dir);
  if (s.train_per_class < 1 || s.test_per_class < 1 || s.num_classes < 1) {
    throw ConfigError("dataset: per-class counts and num_classes must be positive");
  }
  return s;
}

}  // namespace mir::harness
