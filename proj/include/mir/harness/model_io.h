#pragma once

#include <filesystem>

#include "mir/net/graph.h"

namespace mir::harness {

// A model is stored as two files sharing a stem: <stem>.arch.json holds the
// architecture and <stem>.ckpt the parameter archive.
void save_model(const std::filesystem::path& stem, const net::LayerGraph& graph);
net::LayerGraph load_model(const std::filesystem::path& stem);

// Copies checkpoint tensors into the graph; names and shapes must match exactly.
void load_params(net::LayerGraph& graph, const std::filesystem::path& ckpt);

}  // namespace mir::harness
