#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mir/core/checkpoint.h"
#include "mir/core/tensor.h"

namespace mir::net {

enum class NodeKind { conv, depthwise_conv, batchnorm, relu, add, max_pool, global_avg_pool, flatten, linear };

std::string to_string(NodeKind kind);
NodeKind parse_node_kind(const std::string& name);

// Name of the edge carrying the graph input.
inline constexpr const char* kInputEdge = "input";
inline constexpr const char* kBeforePool = "before_pool";
inline constexpr const char* kAfterPool = "after_pool";

struct Node {
  std::string id;
  NodeKind kind = NodeKind::relu;
  std::vector<std::string> inputs;
  // Channel counts; for linear these are the feature widths (D, K).
  std::int64_t in_channels = 0;
  std::int64_t out_channels = 0;
  std::int64_t kernel = 1;
  std::int64_t stride = 1;
  std::int64_t padding = 0;
  std::int64_t groups = 1;
  bool bias = false;  // linear only
  // Residual block / stage annotations, -1 when the node is outside any block.
  int block = -1;
  int stage = -1;
};

/// Names of the parameters owned by a node, in a fixed order.
std::vector<std::string> param_names(const Node& node);
/// The subset of param_names that are trained (excludes BN running stats).
std::vector<std::string> trainable_param_names(const Node& node);

/// DAG of typed layer nodes plus the parameter store.
///
/// Nodes are kept in insertion order, which must be topological: add_node
/// rejects references to unknown producers. The parameter store holds Tensor
/// handles, so copies of a LayerGraph share parameters; use clone() for an
/// independent model.
class LayerGraph {
 public:
  LayerGraph() = default;
  // input_shape is [C, H, W].
  LayerGraph(Shape input_shape, std::int64_t num_classes);

  // Validates inputs and channel counts, allocates zero-filled parameters
  // (BN: gamma 1, beta 0, running mean 0, running var 1).
  void add_node(Node node);

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(const std::string& id) const;
  std::size_t index_of(const std::string& id) const;
  bool has_node(const std::string& id) const { return index_.count(id) != 0; }
  // Nodes that list `edge` among their inputs.
  std::vector<std::size_t> consumers(const std::string& edge) const;
  // Channel count of an edge ("input" or a node id).
  std::int64_t edge_channels(const std::string& edge) const;

  const Shape& input_shape() const { return input_shape_; }
  std::int64_t num_classes() const { return num_classes_; }

  TensorMap& params() { return params_; }
  const TensorMap& params() const { return params_; }
  Tensor& param(const std::string& name);
  const Tensor& param(const std::string& name) const;

  // The final global-average-pool node and the linear head after it.
  const Node& pool_node() const;
  const Node& head_node() const;
  // Last backbone node; equals the pool node.
  const std::string& head_boundary() const { return pool_node().id; }
  // Resolves "before_pool", "after_pool" or a node id to the edge it names.
  std::string resolve_tap(const std::string& tap) const;

  std::vector<Tensor> trainable_params() const;
  std::vector<Tensor> backbone_params() const;  // trainable, excluding the head
  std::vector<Tensor> head_params() const;

  // Largest block index + 1.
  int num_blocks() const;

  // Structural checks on the node invariants; throws on violation.
  void validate() const;

  LayerGraph clone() const;

 private:
  Shape input_shape_;
  std::int64_t num_classes_ = 0;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  TensorMap params_;
};

// Output shape per node (without batch): [C,H,W] for maps, [D] for vectors.
std::vector<Shape> infer_shapes(const LayerGraph& graph);

}  // namespace mir::net
