#pragma once

#include <map>
#include <string>
#include <vector>

#include "mir/core/tensor.h"
#include "mir/net/graph.h"

namespace mir::net {

enum class Mode { train, eval };

struct ForwardOptions {
  Mode mode = Mode::eval;
  std::vector<std::string> taps;
  // Stop after this node (logits are then left undefined).
  std::string stop_after;
};

struct ForwardResult {
  Tensor logits;
  std::map<std::string, Tensor> tapped;  // keyed by the requested tap name
};

// Runs the graph on an [N,C,H,W] batch. Train mode uses batch statistics in
// BN and updates the running statistics held in the graph's parameter store.
ForwardResult forward(const LayerGraph& graph, const Tensor& input, const ForwardOptions& opts = {});

// Executes nodes [first, last] with `env` providing every edge those nodes
// read that is produced outside the range. Returns env extended with the
// outputs of the executed nodes.
std::map<std::string, Tensor> run_nodes(const LayerGraph& graph, std::map<std::string, Tensor> env,
                                        std::size_t first, std::size_t last, Mode mode);

}  // namespace mir::net
