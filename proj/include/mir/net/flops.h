#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mir/net/graph.h"

namespace mir::net {

struct NodeCost {
  std::string id;
  std::int64_t macs = 0;
  std::int64_t params = 0;
};

struct FlopsReport {
  std::int64_t total_macs = 0;
  std::int64_t total_params = 0;
  std::vector<NodeCost> per_node;
};

// Conv: Cout*(Cin/groups)*K*K*H'*W'; linear: K*D; everything else 0 MACs.
// Params count conv/linear weights, linear bias and BN gamma/beta.
FlopsReport count_macs(const LayerGraph& graph);
std::int64_t count_params(const LayerGraph& graph);

}  // namespace mir::net
