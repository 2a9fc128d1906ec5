#include "mir/net/graph.h"

#include <algorithm>
#include <stdexcept>

#include "mir/core/errors.h"

namespace mir::net {

namespace {

constexpr std::pair<NodeKind, const char*> kKindNames[] = {
    {NodeKind::conv, "conv"},
    {NodeKind::depthwise_conv, "depthwise_conv"},
    {NodeKind::batchnorm, "batchnorm"},
    {NodeKind::relu, "relu"},
    {NodeKind::add, "add"},
    {NodeKind::max_pool, "max_pool"},
    {NodeKind::global_avg_pool, "global_avg_pool"},
    {NodeKind::flatten, "flatten"},
    {NodeKind::linear, "linear"},
};

bool is_conv(NodeKind k) { return k == NodeKind::conv || k == NodeKind::depthwise_conv; }

std::int64_t window_out(std::int64_t in, std::int64_t k, std::int64_t s, std::int64_t p, const std::string& id) {
  if (in + 2 * p < k) throw ConfigError("node " + id + ": kernel larger than padded input");
  return (in + 2 * p - k) / s + 1;
}

}  // namespace

std::string to_string(NodeKind kind) {
  for (auto [k, name] : kKindNames)
    if (k == kind) return name;
  return "?";
}

NodeKind parse_node_kind(const std::string& name) {
  for (auto [k, n] : kKindNames)
    if (name == n) return k;
  throw ParseError("unknown node kind '" + name + "'");
}

std::vector<std::string> param_names(const Node& node) {
  switch (node.kind) {
    case NodeKind::conv:
    case NodeKind::depthwise_conv:
      return {node.id + ".weight"};
    case NodeKind::batchnorm:
      return {node.id + ".weight", node.id + ".bias", node.id + ".running_mean", node.id + ".running_var"};
    case NodeKind::linear:
      if (node.bias) return {node.id + ".weight", node.id + ".bias"};
      return {node.id + ".weight"};
    default:
      return {};
  }
}

std::vector<std::string> trainable_param_names(const Node& node) {
  auto names = param_names(node);
  if (node.kind == NodeKind::batchnorm) names.resize(2);
  return names;
}

LayerGraph::LayerGraph(Shape input_shape, std::int64_t num_classes)
    : input_shape_(std::move(input_shape)), num_classes_(num_classes) {
  if (input_shape_.size() != 3) throw DimensionError("graph input shape must be [C,H,W]");
  shape_numel(input_shape_);
  if (num_classes_ < 1) throw ConfigError("num_classes must be positive");
}

void LayerGraph::add_node(Node n) {
  if (n.id.empty() || n.id == kInputEdge || index_.count(n.id)) {
    throw ConfigError("invalid or duplicate node id '" + n.id + "'");
  }
  const std::size_t arity = n.kind == NodeKind::add ? 2 : 1;
  if (n.inputs.size() != arity) {
    throw ConfigError("node " + n.id + " (" + to_string(n.kind) + ") needs " + std::to_string(arity) + " input(s)");
  }
  for (const auto& in : n.inputs) {
    if (in != kInputEdge && !index_.count(in)) throw ConfigError("node " + n.id + " reads unknown edge " + in);
  }
  const std::int64_t c = edge_channels(n.inputs[0]);
  switch (n.kind) {
    case NodeKind::conv:
    case NodeKind::depthwise_conv:
      if (n.in_channels != c) {
        throw DimensionError("node " + n.id + ": in_channels " + std::to_string(n.in_channels) +
                             " != producer channels " + std::to_string(c));
      }
      if (n.kind == NodeKind::depthwise_conv) {
        n.groups = c;
        if (n.out_channels != c) throw DimensionError("node " + n.id + ": depthwise conv must keep channel count");
      }
      if (n.groups < 1 || c % n.groups != 0 || n.out_channels % n.groups != 0 || n.out_channels < 1) {
        throw DimensionError("node " + n.id + ": channels not divisible by groups");
      }
      if (n.kernel < 1 || n.stride < 1 || n.padding < 0) throw ConfigError("node " + n.id + ": bad window");
      break;
    case NodeKind::add:
      if (edge_channels(n.inputs[1]) != c) {
        throw DimensionError("add " + n.id + ": channel mismatch " + std::to_string(c) + " vs " +
                             std::to_string(edge_channels(n.inputs[1])));
      }
      n.in_channels = n.out_channels = c;
      break;
    case NodeKind::linear:
      if (n.in_channels != c) throw DimensionError("linear " + n.id + ": in width != producer channels");
      if (n.out_channels < 1) throw ConfigError("linear " + n.id + ": bad output width");
      break;
    case NodeKind::max_pool:
      if (n.kernel < 1 || n.stride < 1 || n.padding < 0) throw ConfigError("node " + n.id + ": bad window");
      n.in_channels = n.out_channels = c;
      break;
    default:
      n.in_channels = n.out_channels = c;
      break;
  }

  if (is_conv(n.kind)) {
    params_.insert_or_assign(n.id + ".weight", Tensor({n.out_channels, n.in_channels / n.groups, n.kernel, n.kernel}));
  } else if (n.kind == NodeKind::batchnorm) {
    params_.insert_or_assign(n.id + ".weight", Tensor({c}, 1.0));
    params_.insert_or_assign(n.id + ".bias", Tensor({c}, 0.0));
    params_.insert_or_assign(n.id + ".running_mean", Tensor({c}, 0.0));
    params_.insert_or_assign(n.id + ".running_var", Tensor({c}, 1.0));
  } else if (n.kind == NodeKind::linear) {
    params_.insert_or_assign(n.id + ".weight", Tensor({n.out_channels, n.in_channels}));
    if (n.bias) params_.insert_or_assign(n.id + ".bias", Tensor({n.out_channels}));
  }
  index_.emplace(n.id, nodes_.size());
  nodes_.push_back(std::move(n));
}

const Node& LayerGraph::node(const std::string& id) const { return nodes_[index_of(id)]; }

std::size_t LayerGraph::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ConfigError("unknown node '" + id + "'");
  return it->second;
}

std::vector<std::size_t> LayerGraph::consumers(const std::string& edge) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (std::find(nodes_[i].inputs.begin(), nodes_[i].inputs.end(), edge) != nodes_[i].inputs.end()) out.push_back(i);
  }
  return out;
}

std::int64_t LayerGraph::edge_channels(const std::string& edge) const {
  if (edge == kInputEdge) return input_shape_.at(0);
  return node(edge).out_channels;
}

Tensor& LayerGraph::param(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& LayerGraph::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

const Node& LayerGraph::pool_node() const {
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->kind == NodeKind::global_avg_pool) return *it;
  }
  throw ConfigError("graph has no global average pool");
}

const Node& LayerGraph::head_node() const {
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->kind == NodeKind::linear) return *it;
  }
  throw ConfigError("graph has no linear head");
}

std::string LayerGraph::resolve_tap(const std::string& tap) const {
  if (tap == kBeforePool) return pool_node().inputs.at(0);
  if (tap == kAfterPool) return pool_node().id;
  if (tap == kInputEdge || has_node(tap)) return tap;
  throw ConfigError("unknown tap '" + tap + "'");
}

std::vector<Tensor> LayerGraph::trainable_params() const {
  std::vector<Tensor> out;
  for (const auto& n : nodes_)
    for (const auto& name : trainable_param_names(n)) out.push_back(params_.at(name));
  return out;
}

std::vector<Tensor> LayerGraph::backbone_params() const {
  const std::string& head = head_node().id;
  std::vector<Tensor> out;
  for (const auto& n : nodes_) {
    if (n.id == head) continue;
    for (const auto& name : trainable_param_names(n)) out.push_back(params_.at(name));
  }
  return out;
}

std::vector<Tensor> LayerGraph::head_params() const {
  std::vector<Tensor> out;
  for (const auto& name : trainable_param_names(head_node())) out.push_back(params_.at(name));
  return out;
}

int LayerGraph::num_blocks() const {
  int m = -1;
  for (const auto& n : nodes_) m = std::max(m, n.block);
  return m + 1;
}

void LayerGraph::validate() const {
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    for (const auto& in : n.inputs) {
      if (in != kInputEdge && (!seen.count(in))) throw ConfigError("node " + n.id + " is not topologically ordered");
    }
    seen.emplace(n.id, i);
    const std::int64_t c = edge_channels(n.inputs.at(0));
    if (n.in_channels != c) throw DimensionError("node " + n.id + ": in_channels does not match producer");
    if (n.kind == NodeKind::add && edge_channels(n.inputs.at(1)) != c) {
      throw DimensionError("add " + n.id + ": channel mismatch");
    }
    if (is_conv(n.kind)) {
      const Shape want{n.out_channels, n.in_channels / n.groups, n.kernel, n.kernel};
      if (param(n.id + ".weight").shape() != want) throw DimensionError("node " + n.id + ": weight shape mismatch");
    } else if (n.kind == NodeKind::batchnorm) {
      for (const auto& name : param_names(n)) {
        if (param(name).shape() != Shape{n.out_channels}) throw DimensionError(name + ": shape mismatch");
      }
    } else if (n.kind == NodeKind::linear) {
      if (param(n.id + ".weight").shape() != Shape{n.out_channels, n.in_channels}) {
        throw DimensionError("linear " + n.id + ": weight shape mismatch");
      }
      if (n.bias && param(n.id + ".bias").shape() != Shape{n.out_channels}) {
        throw DimensionError("linear " + n.id + ": bias shape mismatch");
      }
    }
  }
  infer_shapes(*this);
}

LayerGraph LayerGraph::clone() const {
  LayerGraph g = *this;
  for (auto& [name, t] : g.params_) t = t.clone();
  return g;
}

std::vector<Shape> infer_shapes(const LayerGraph& graph) {
  const auto& nodes = graph.nodes();
  std::vector<Shape> shapes(nodes.size());
  auto shape_of = [&](const std::string& edge) -> const Shape& {
    return edge == kInputEdge ? graph.input_shape() : shapes[graph.index_of(edge)];
  };
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    const Shape& in = shape_of(n.inputs[0]);
    const bool spatial = in.size() == 3;
    switch (n.kind) {
      case NodeKind::conv:
      case NodeKind::depthwise_conv:
      case NodeKind::max_pool:
        if (!spatial) throw DimensionError("node " + n.id + " needs a spatial input");
        shapes[i] = {n.out_channels, window_out(in[1], n.kernel, n.stride, n.padding, n.id),
                     window_out(in[2], n.kernel, n.stride, n.padding, n.id)};
        break;
      case NodeKind::batchnorm:
      case NodeKind::relu:
        shapes[i] = in;
        break;
      case NodeKind::add:
        if (shape_of(n.inputs[1]) != in) throw DimensionError("add " + n.id + ": operand shapes differ");
        shapes[i] = in;
        break;
      case NodeKind::global_avg_pool:
        if (!spatial) throw DimensionError("node " + n.id + " needs a spatial input");
        shapes[i] = {in[0]};
        break;
      case NodeKind::flatten:
        shapes[i] = {shape_numel(in)};
        break;
      case NodeKind::linear:
        if (in.size() != 1 || in[0] != n.in_channels) throw DimensionError("linear " + n.id + ": input width mismatch");
        shapes[i] = {n.out_channels};
        break;
    }
  }
  return shapes;
}

}  // namespace mir::net
