#pragma once

#include <string>

#include <json.hpp>

#include "mir/net/graph.h"

namespace mir::net {

// Architecture description (no weights):
// {"format": "mir-arch", "version": 1, "input": [C,H,W], "num_classes": K,
//  "nodes": [{"id", "kind", "inputs", "in_channels", "out_channels", "kernel",
//             "stride", "padding", "groups", "bias", "block", "stage"}...],
//  "edges": [[producer, consumer]...]}
nlohmann::json arch_to_json(const LayerGraph& graph);
// Rebuilds the structure; parameters get the add_node defaults.
LayerGraph arch_from_json(const nlohmann::json& doc);

}  // namespace mir::net
