#include "mir/net/arch_json.h"

#include "mir/core/errors.h"

namespace mir::net {

using nlohmann::json;

json arch_to_json(const LayerGraph& graph) {
  json nodes = json::array();
  json edges = json::array();
  for (const auto& n : graph.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"kind", to_string(n.kind)},
                     {"inputs", n.inputs},
                     {"in_channels", n.in_channels},
                     {"out_channels", n.out_channels},
                     {"kernel", n.kernel},
                     {"stride", n.stride},
                     {"padding", n.padding},
                     {"groups", n.groups},
                     {"bias", n.bias},
                     {"block", n.block},
                     {"stage", n.stage}});
    for (const auto& in : n.inputs) edges.push_back({in, n.id});
  }
  return {{"format", "mir-arch"},
          {"version", 1},
          {"input", graph.input_shape()},
          {"num_classes", graph.num_classes()},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)}};
}

LayerGraph arch_from_json(const json& doc) {
  try {
    if (doc.at("format") != "mir-arch" || doc.at("version") != 1) throw ParseError("not a mir-arch v1 document");
    LayerGraph g(doc.at("input").get<Shape>(), doc.at("num_classes").get<std::int64_t>());
    for (const auto& j : doc.at("nodes")) {
      Node n;
      n.id = j.at("id").get<std::string>();
      n.kind = parse_node_kind(j.at("kind").get<std::string>());
      n.inputs = j.at("inputs").get<std::vector<std::string>>();
      n.in_channels = j.at("in_channels").get<std::int64_t>();
      n.out_channels = j.at("out_channels").get<std::int64_t>();
      n.kernel = j.value("kernel", std::int64_t{1});
      n.stride = j.value("stride", std::int64_t{1});
      n.padding = j.value("padding", std::int64_t{0});
      n.groups = j.value("groups", std::int64_t{1});
      n.bias = j.value("bias", false);
      n.block = j.value("block", -1);
      n.stage = j.value("stage", -1);
      g.add_node(std::move(n));
    }
    return g;
  } catch (const json::exception& e) {
    throw ParseError(std::string("arch json: ") + e.what());
  }
}

}  // namespace mir::net
