#include "mir/prune/groups.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "mir/core/errors.h"

namespace mir::prune {

using net::kInputEdge;
using net::LayerGraph;
using net::Node;
using net::NodeKind;

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

int edge_index(const LayerGraph& g, const std::string& edge) {
  return edge == kInputEdge ? 0 : static_cast<int>(g.index_of(edge)) + 1;
}

}  // namespace

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::input: return "input";
    case GroupKind::internal: return "internal";
    case GroupKind::coupled: return "coupled";
    case GroupKind::logits: return "logits";
  }
  return "?";
}

std::vector<int> edge_group_ids(const LayerGraph& g) {
  const auto& nodes = g.nodes();
  UnionFind uf(static_cast<int>(nodes.size()) + 1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    const int self = static_cast<int>(i) + 1;
    switch (n.kind) {
      case NodeKind::conv:
      case NodeKind::linear:
        break;  // fresh output group
      case NodeKind::add:
        if (g.edge_channels(n.inputs[0]) != g.edge_channels(n.inputs[1])) {
          throw DimensionError("add " + n.id + ": channel mismatch");
        }
        uf.unite(self, edge_index(g, n.inputs[0]));
        uf.unite(self, edge_index(g, n.inputs[1]));
        break;
      case NodeKind::flatten: {
        // only channel-preserving when the spatial extent is 1x1; otherwise the
        // flattened axis is not a channel axis and gets its own group
        const auto shapes = net::infer_shapes(g);
        const auto& in = n.inputs[0] == kInputEdge ? g.input_shape() : shapes[g.index_of(n.inputs[0])];
        if (in.size() == 1 || shape_numel(in) == in[0]) uf.unite(self, edge_index(g, n.inputs[0]));
        break;
      }
      default:  // depthwise conv, BN, ReLU, pools propagate
        uf.unite(self, edge_index(g, n.inputs[0]));
        break;
    }
  }
  std::vector<int> root(nodes.size() + 1);
  std::vector<int> id_of_root(nodes.size() + 1, -1);
  int next = 0;
  for (std::size_t e = 0; e <= nodes.size(); ++e) {
    const int r = uf.find(static_cast<int>(e));
    if (id_of_root[r] < 0) id_of_root[r] = next++;
    root[e] = id_of_root[r];
  }
  return root;
}

std::vector<ChannelGroup> resolve_channel_groups(const LayerGraph& g) {
  const auto& nodes = g.nodes();
  const std::vector<int> gid = edge_group_ids(g);
  const int count = *std::max_element(gid.begin(), gid.end()) + 1;
  std::vector<ChannelGroup> groups(count);
  for (int i = 0; i < count; ++i) groups[i].id = i;

  auto group_of = [&](const std::string& edge) -> ChannelGroup& { return groups[gid[edge_index(g, edge)]]; };

  group_of(kInputEdge).edges.push_back(kInputEdge);
  group_of(kInputEdge).channels = g.input_shape()[0];
  for (const Node& n : nodes) {
    ChannelGroup& out = group_of(n.id);
    out.edges.push_back(n.id);
    if (out.channels != 0 && out.channels != n.out_channels) {
      throw DimensionError("channel group " + std::to_string(out.id) + " has inconsistent extents at " + n.id);
    }
    out.channels = n.out_channels;
    switch (n.kind) {
      case NodeKind::conv:
        out.members.push_back({n.id + ".weight", AxisRole::out});
        group_of(n.inputs[0]).members.push_back({n.id + ".weight", AxisRole::in});
        break;
      case NodeKind::depthwise_conv:
        // [C,1,k,k]: the in axis is not a channel axis
        out.members.push_back({n.id + ".weight", AxisRole::out});
        break;
      case NodeKind::batchnorm:
        for (const auto& p : net::param_names(n)) out.members.push_back({p, AxisRole::out});
        break;
      case NodeKind::linear:
        out.members.push_back({n.id + ".weight", AxisRole::out});
        if (n.bias) out.members.push_back({n.id + ".bias", AxisRole::out});
        group_of(n.inputs[0]).members.push_back({n.id + ".weight", AxisRole::in});
        break;
      default:
        break;
    }
  }

  // Classification: an edge's producer block and all consumer blocks.
  std::vector<std::set<int>> blocks(count);
  std::vector<std::set<int>> stages(count);
  auto note = [&](int group, const std::string& edge) {
    const int pb = edge == kInputEdge ? -1 : g.node(edge).block;
    blocks[group].insert(pb);
    if (edge != kInputEdge) stages[group].insert(g.node(edge).stage);
    const auto cons = g.consumers(edge);
    if (cons.empty()) blocks[group].insert(-1);  // graph outputs leave every block
    for (std::size_t c : cons) blocks[group].insert(nodes[c].block);
  };
  note(gid[0], kInputEdge);
  for (std::size_t i = 0; i < nodes.size(); ++i) note(gid[i + 1], nodes[i].id);

  // fixtures without a pool or head have neither a logits nor a final group
  int logits_group = -1, pool_group = -1;
  for (const Node& n : nodes) {
    if (n.kind == NodeKind::linear) logits_group = gid[edge_index(g, n.id)];
    if (n.kind == NodeKind::global_avg_pool) pool_group = gid[edge_index(g, n.inputs[0])];
  }
  const int input_group = gid[0];
  for (auto& grp : groups) {
    std::sort(grp.members.begin(), grp.members.end());
    const auto& b = blocks[grp.id];
    if (grp.id == input_group) {
      grp.kind = GroupKind::input;
    } else if (grp.id == logits_group) {
      grp.kind = GroupKind::logits;
    } else if (b.size() == 1 && *b.begin() >= 0) {
      grp.kind = GroupKind::internal;
      grp.block = *b.begin();
      grp.stage = stages[grp.id].size() == 1 ? *stages[grp.id].begin() : -1;
    } else {
      grp.kind = GroupKind::coupled;
    }
    grp.feeds_pool = grp.id == pool_group;
  }
  return groups;
}

}  // namespace mir::prune
