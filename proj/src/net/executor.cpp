#include "mir/net/executor.h"

#include "mir/core/errors.h"
#include "mir/core/ops.h"

namespace mir::net {

namespace {

Tensor run_node(const LayerGraph& g, const Node& n, const std::map<std::string, Tensor>& env, Mode mode) {
  auto in = [&](std::size_t k) -> const Tensor& {
    auto it = env.find(n.inputs[k]);
    if (it == env.end()) throw ConfigError("node " + n.id + ": edge " + n.inputs[k] + " not available");
    return it->second;
  };
  switch (n.kind) {
    case NodeKind::conv:
    case NodeKind::depthwise_conv: {
      const Tensor& x = in(0);
      if (x.ndim() != 4 || x.dim(1) != n.in_channels) {
        throw DimensionError("node " + n.id + ": got " + shape_str(x.shape()) + ", expected " +
                             std::to_string(n.in_channels) + " channels");
      }
      return ops::conv2d(x, g.param(n.id + ".weight"), {n.stride, n.padding, n.groups});
    }
    case NodeKind::batchnorm: {
      // handles share storage with the store, so running stats update in place
      Tensor rm = g.param(n.id + ".running_mean");
      Tensor rv = g.param(n.id + ".running_var");
      return ops::batch_norm2d(in(0), g.param(n.id + ".weight"), g.param(n.id + ".bias"), rm, rv,
                               {mode == Mode::train, 0.1, 1e-5});
    }
    case NodeKind::relu:
      return ops::relu(in(0));
    case NodeKind::add:
      return ops::add(in(0), in(1));
    case NodeKind::max_pool:
      return ops::max_pool2d(in(0), n.kernel, n.stride, n.padding);
    case NodeKind::global_avg_pool:
      return ops::global_avg_pool(in(0));
    case NodeKind::flatten:
      return ops::flatten(in(0));
    case NodeKind::linear: {
      Tensor bias = n.bias ? g.param(n.id + ".bias") : Tensor();
      return ops::linear(in(0), g.param(n.id + ".weight"), bias);
    }
  }
  throw ConfigError("unhandled node kind");
}

}  // namespace

std::map<std::string, Tensor> run_nodes(const LayerGraph& graph, std::map<std::string, Tensor> env,
                                        std::size_t first, std::size_t last, Mode mode) {
  const auto& nodes = graph.nodes();
  if (last >= nodes.size() || first > last) throw ConfigError("run_nodes: bad node range");
  for (std::size_t i = first; i <= last; ++i) env.insert_or_assign(nodes[i].id, run_node(graph, nodes[i], env, mode));
  return env;
}

ForwardResult forward(const LayerGraph& graph, const Tensor& input, const ForwardOptions& opts) {
  const Shape& want = graph.input_shape();
  if (input.ndim() != 4 || input.dim(1) != want[0] || input.dim(2) != want[1] || input.dim(3) != want[2]) {
    throw DimensionError("forward: input " + shape_str(input.shape()) + " does not match graph input " +
                         shape_str(want));
  }
  std::vector<std::pair<std::string, std::string>> taps;  // tap name -> edge
  for (const auto& t : opts.taps) taps.emplace_back(t, graph.resolve_tap(t));

  const auto& nodes = graph.nodes();
  if (nodes.empty()) throw ConfigError("forward: empty graph");
  std::size_t last = nodes.size() - 1;
  if (!opts.stop_after.empty()) last = graph.index_of(opts.stop_after);

  std::map<std::string, Tensor> env{{kInputEdge, input}};
  env = run_nodes(graph, std::move(env), 0, last, opts.mode);

  ForwardResult res;
  for (const auto& [name, edge] : taps) {
    auto it = env.find(edge);
    if (it == env.end()) throw ConfigError("tap " + name + " lies after stop node " + opts.stop_after);
    res.tapped.emplace(name, it->second);
  }
  if (last == nodes.size() - 1) res.logits = env.at(nodes.back().id);
  return res;
}

}  // namespace mir::net
