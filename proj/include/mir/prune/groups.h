#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mir/net/graph.h"

namespace mir::prune {

enum class AxisRole { out, in };

struct AxisRef {
  std::string param;
  AxisRole role = AxisRole::out;
  auto operator<=>(const AxisRef&) const = default;
};

enum class GroupKind {
  input,     // the image channels
  internal,  // every edge produced and consumed inside one block
  coupled,   // crosses a block boundary (residual stage groups, stem, ...)
  logits,    // classifier output axis
};

std::string to_string(GroupKind kind);

/// Set of channel axes that must be pruned with the same index set.
struct ChannelGroup {
  int id = 0;
  std::int64_t channels = 0;
  GroupKind kind = GroupKind::coupled;
  bool feeds_pool = false;  // governs the before-pool edge
  int block = -1;           // owning block for internal groups
  int stage = -1;
  std::vector<AxisRef> members;    // sorted
  std::vector<std::string> edges;  // edges whose channel dim this group governs, in graph order
};

// Union-find over activation edges. Groups are numbered in order of their
// first edge ("input" first, then nodes in graph order).
std::vector<ChannelGroup> resolve_channel_groups(const net::LayerGraph& graph);

// Group id per edge: index 0 is "input", index i+1 is node i.
std::vector<int> edge_group_ids(const net::LayerGraph& graph);

}  // namespace mir::prune
