#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mir/core/tensor.h"
#include "mir/net/graph.h"
#include "mir/prune/groups.h"

namespace mir::prune {

enum class Scheme { normal, residual, cd_style, unstructured };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

struct GroupKeep {
  std::int64_t channels = 0;       // original extent
  std::vector<std::int64_t> keep;  // sorted, unique
};

struct PruningPlan {
  Scheme scheme = Scheme::normal;
  double keep_ratio = 1.0;  // structured keep ratio, or 1 - sparsity
  std::map<int, GroupKeep> groups;  // touched groups only
  std::map<std::string, Tensor> masks;  // unstructured: param -> 0/1 mask
};

// Sum of |w| per output filter of a 4-D conv weight.
std::vector<double> score_filters_l1(const Tensor& weight);

// Group score: sum of member filter scores over the convs writing into it.
std::vector<double> group_scores(const net::LayerGraph& graph, const ChannelGroup& group);

// Indices of the ceil(ratio*n) largest scores, ties to the lower index, sorted.
std::vector<std::int64_t> top_k_indices(const std::vector<double>& scores, double ratio);
std::int64_t keep_count(double ratio, std::int64_t n);

// Groups eligible under a structured scheme (not yet scored).
std::vector<int> prunable_groups(const net::LayerGraph& graph, const std::vector<ChannelGroup>& groups, Scheme scheme);

PruningPlan make_plan(const net::LayerGraph& graph, Scheme scheme, double keep_ratio);

// Returns a new, smaller graph with its own parameter store (structured), or
// a masked copy (unstructured). The input graph is left untouched.
net::LayerGraph apply_plan(const net::LayerGraph& graph, const PruningPlan& plan);

nlohmann::json plan_to_json(const PruningPlan& plan);
PruningPlan plan_from_json(const nlohmann::json& doc);

}  // namespace mir::prune
