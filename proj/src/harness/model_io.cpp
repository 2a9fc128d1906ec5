#include "mir/harness/model_io.h"

#include <fstream>

#include "mir/core/checkpoint.h"
#include "mir/core/errors.h"
#include "mir/net/arch_json.h"

namespace mir::harness {

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

void save_model(const std::filesystem::path& stem, const net::LayerGraph& graph) {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  std::ofstream arch(with_suffix(stem, ".arch.json"));
  if (!arch) throw ConfigError("cannot write " + with_suffix(stem, ".arch.json").string());
  arch << net::arch_to_json(graph).dump(2) << '\n';
  save_checkpoint(with_suffix(stem, ".ckpt"), graph.params());
}

void load_params(net::LayerGraph& graph, const std::filesystem::path& ckpt) {
  TensorMap saved = load_checkpoint(ckpt);
  if (saved.size() != graph.params().size()) {
    throw ParseError(ckpt.string() + ": " + std::to_string(saved.size()) + " tensors, architecture expects " +
                     std::to_string(graph.params().size()));
  }
  for (auto& [name, t] : saved) {
    if (!graph.params().count(name)) throw ParseError(ckpt.string() + ": unexpected tensor '" + name + "'");
    Tensor& dst = graph.param(name);
    if (dst.shape() != t.shape()) {
      throw ParseError(ckpt.string() + ": tensor '" + name + "' has shape " + shape_str(t.shape()) + ", expected " +
                       shape_str(dst.shape()));
    }
    dst = t;
  }
}

net::LayerGraph load_model(const std::filesystem::path& stem) {
  const auto arch_path = with_suffix(stem, ".arch.json");
  std::ifstream arch(arch_path);
  if (!arch) throw ConfigError("cannot read " + arch_path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(arch);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(arch_path.string() + ": " + e.what());
  }
  net::LayerGraph g = net::arch_from_json(doc);
  load_params(g, with_suffix(stem, ".ckpt"));
  return g;
}

}  // namespace mir::harness
