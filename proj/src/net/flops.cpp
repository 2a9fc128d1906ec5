#include "mir/net/flops.h"

namespace mir::net {

FlopsReport count_macs(const LayerGraph& graph) {
  const auto shapes = infer_shapes(graph);
  FlopsReport rep;
  const auto& nodes = graph.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    NodeCost cost{n.id, 0, 0};
    switch (n.kind) {
      case NodeKind::conv:
      case NodeKind::depthwise_conv: {
        const std::int64_t per_pos = n.out_channels * (n.in_channels / n.groups) * n.kernel * n.kernel;
        cost.macs = per_pos * shapes[i][1] * shapes[i][2];
        cost.params = per_pos;
        break;
      }
      case NodeKind::linear:
        cost.macs = n.out_channels * n.in_channels;
        cost.params = cost.macs + (n.bias ? n.out_channels : 0);
        break;
      case NodeKind::batchnorm:
        cost.params = 2 * n.out_channels;
        break;
      default:
        break;
    }
    rep.total_macs += cost.macs;
    rep.total_params += cost.params;
    rep.per_node.push_back(std::move(cost));
  }
  return rep;
}

std::int64_t count_params(const LayerGraph& graph) { return count_macs(graph).total_params; }

}  // namespace mir::net
