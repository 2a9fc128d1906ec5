#include "mir/prune/plan.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mir/core/errors.h"
#include "mir/prune/unstructured.h"

namespace mir::prune {

using net::LayerGraph;
using net::Node;
using net::NodeKind;

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::normal: return "normal";
    case Scheme::residual: return "residual";
    case Scheme::cd_style: return "cd_style";
    case Scheme::unstructured: return "unstructured";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "normal") return Scheme::normal;
  if (name == "residual") return Scheme::residual;
  if (name == "cd_style" || name == "cd") return Scheme::cd_style;
  if (name == "unstructured") return Scheme::unstructured;
  throw ConfigError("unknown pruning scheme '" + name + "'");
}

std::vector<double> score_filters_l1(const Tensor& w) {
  if (w.ndim() != 4) throw DimensionError("score_filters_l1: expected a 4-D conv weight, got " + shape_str(w.shape()));
  const std::int64_t cout = w.dim(0);
  const std::int64_t per = w.numel() / cout;
  std::vector<double> scores(cout, 0.0);
  auto d = w.data();
  for (std::int64_t c = 0; c < cout; ++c)
    for (std::int64_t i = 0; i < per; ++i) scores[c] += std::abs(d[c * per + i]);
  return scores;
}

std::vector<double> group_scores(const LayerGraph& graph, const ChannelGroup& group) {
  std::vector<double> total(group.channels, 0.0);
  for (const auto& m : group.members) {
    if (m.role != AxisRole::out) continue;
    const Tensor& w = graph.param(m.param);
    if (w.ndim() != 4) continue;  // BN and linear members do not vote
    const auto s = score_filters_l1(w);
    for (std::size_t i = 0; i < s.size(); ++i) total[i] += s[i];
  }
  return total;
}

std::int64_t keep_count(double ratio, std::int64_t n) {
  if (!(ratio > 0.0) || ratio > 1.0) throw ConfigError("keep ratio must lie in (0, 1]");
  const auto k = static_cast<std::int64_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
  return std::clamp<std::int64_t>(k, 1, n);
}

std::vector<std::int64_t> top_k_indices(const std::vector<double>& scores, double ratio) {
  const auto n = static_cast<std::int64_t>(scores.size());
  const auto k = keep_count(ratio, n);
  std::vector<std::int64_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::int64_t a, std::int64_t b) { return scores[a] > scores[b]; });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

std::set<int> cd_style_blocks(const LayerGraph& graph) {
  std::map<int, std::set<int>> blocks_by_stage;
  for (const Node& n : graph.nodes()) {
    if (n.block < 0) continue;
    if (n.stage < 0) throw ConfigError("cd_style: block " + std::to_string(n.block) + " has no stage annotation");
    blocks_by_stage[n.stage].insert(n.block);
  }
  if (blocks_by_stage.empty()) throw ConfigError("cd_style needs block-depth annotations; graph has none");
  std::set<int> chosen;
  const int last_stage = blocks_by_stage.rbegin()->first;
  for (const auto& [stage, blocks] : blocks_by_stage) {
    if (stage == last_stage) continue;
    const std::size_t take = 2 * blocks.size() / 3;
    auto it = blocks.begin();
    for (std::size_t i = 0; i < take; ++i, ++it) chosen.insert(*it);
  }
  return chosen;
}

Tensor slice(const Tensor& t, const std::vector<std::int64_t>* axis0, const std::vector<std::int64_t>* axis1) {
  Shape shape = t.shape();
  std::vector<std::int64_t> all0(shape[0]), all1;
  std::iota(all0.begin(), all0.end(), 0);
  const auto& i0 = axis0 ? *axis0 : all0;
  std::int64_t inner = 1;
  for (std::size_t d = 1; d < shape.size(); ++d) inner *= shape[d];
  std::int64_t d1 = 1, rest = inner;
  if (shape.size() >= 2) {
    d1 = shape[1];
    rest = inner / d1;
    all1.resize(d1);
    std::iota(all1.begin(), all1.end(), 0);
  }
  const auto& i1 = (axis1 && shape.size() >= 2) ? *axis1 : all1;
  Shape out_shape = shape;
  out_shape[0] = static_cast<std::int64_t>(i0.size());
  if (shape.size() >= 2) out_shape[1] = static_cast<std::int64_t>(i1.size());
  Tensor out(out_shape);
  auto src = t.data();
  auto dst = out.data();
  std::size_t k = 0;
  for (auto a : i0) {
    if (shape.size() < 2) {
      dst[k++] = src[a];
      continue;
    }
    for (auto b : i1)
      for (std::int64_t r = 0; r < rest; ++r) dst[k++] = src[(a * d1 + b) * rest + r];
  }
  return out;
}

}  // namespace

std::vector<int> prunable_groups(const LayerGraph& graph, const std::vector<ChannelGroup>& groups, Scheme scheme) {
  std::vector<int> out;
  std::set<int> cd_blocks;
  if (scheme == Scheme::cd_style) cd_blocks = cd_style_blocks(graph);
  if (scheme == Scheme::unstructured) throw ConfigError("unstructured plans have no channel groups");
  for (const auto& g : groups) {
    bool take = false;
    switch (scheme) {
      case Scheme::normal:
        take = g.kind == GroupKind::internal;
        break;
      case Scheme::residual:
        take = g.kind == GroupKind::internal || (g.kind == GroupKind::coupled && !g.feeds_pool);
        break;
      case Scheme::cd_style:
        take = g.kind == GroupKind::internal && cd_blocks.count(g.block);
        break;
      case Scheme::unstructured:
        break;
    }
    if (take) out.push_back(g.id);
  }
  return out;
}

PruningPlan make_plan(const LayerGraph& graph, Scheme scheme, double keep_ratio) {
  if (!(keep_ratio > 0.0) || keep_ratio > 1.0) throw ConfigError("keep ratio must lie in (0, 1]");
  PruningPlan plan;
  plan.scheme = scheme;
  plan.keep_ratio = keep_ratio;
  if (scheme == Scheme::unstructured) {
    plan.masks = magnitude_mask(graph, 1.0 - keep_ratio);
    return plan;
  }
  const auto groups = resolve_channel_groups(graph);
  for (int id : prunable_groups(graph, groups, scheme)) {
    const auto& g = groups[id];
    plan.groups[id] = GroupKeep{g.channels, top_k_indices(group_scores(graph, g), keep_ratio)};
  }
  return plan;
}

LayerGraph apply_plan(const LayerGraph& graph, const PruningPlan& plan) {
  if (plan.scheme == Scheme::unstructured || !plan.masks.empty()) {
    LayerGraph out = graph.clone();
    for (const auto& [name, mask] : plan.masks) {
      if (!out.params().count(name)) throw ConfigError("plan masks unknown parameter " + name);
      if (out.param(name).shape() != mask.shape()) throw DimensionError("mask shape mismatch for " + name);
    }
    apply_masks(out, plan.masks);
    return out;
  }

  const auto groups = resolve_channel_groups(graph);
  const auto gid = edge_group_ids(graph);
  std::vector<std::vector<std::int64_t>> keep(groups.size());
  for (const auto& g : groups) {
    keep[g.id].resize(g.channels);
    std::iota(keep[g.id].begin(), keep[g.id].end(), 0);
  }
  for (const auto& [id, gk] : plan.groups) {
    if (id < 0 || id >= static_cast<int>(groups.size())) throw ConfigError("plan references unknown group " + std::to_string(id));
    const auto& g = groups[id];
    if (g.channels != gk.channels) throw ConfigError("plan/graph mismatch: group " + std::to_string(id) + " extent");
    if (g.kind == GroupKind::input || g.kind == GroupKind::logits) {
      if (gk.keep.size() != static_cast<std::size_t>(g.channels)) {
        throw ConfigError("plan prunes the " + to_string(g.kind) + " axis");
      }
    }
    if (gk.keep.empty()) throw ConfigError("plan keeps no channel of group " + std::to_string(id));
    for (std::size_t i = 0; i < gk.keep.size(); ++i) {
      if (gk.keep[i] < 0 || gk.keep[i] >= g.channels) throw ConfigError("keep index out of range in group " + std::to_string(id));
      if (i > 0 && gk.keep[i] <= gk.keep[i - 1]) throw ConfigError("keep indices must be sorted and unique");
    }
    keep[id] = gk.keep;
  }

  auto group_of = [&](const std::string& edge) {
    return gid[edge == net::kInputEdge ? 0 : graph.index_of(edge) + 1];
  };
  LayerGraph out(graph.input_shape(), graph.num_classes());
  for (const Node& src : graph.nodes()) {
    Node n = src;
    const auto& kin = keep[group_of(n.inputs[0])];
    const auto& kout = keep[group_of(n.id)];
    n.in_channels = static_cast<std::int64_t>(kin.size());
    n.out_channels = static_cast<std::int64_t>(kout.size());
    if (n.kind == NodeKind::depthwise_conv) n.groups = n.out_channels;
    out.add_node(n);
    switch (n.kind) {
      case NodeKind::conv:
        if (src.groups != 1) throw ConfigError("apply_plan: grouped dense conv " + n.id + " is not supported");
        out.param(n.id + ".weight") = slice(graph.param(n.id + ".weight"), &kout, &kin);
        break;
      case NodeKind::depthwise_conv:
        out.param(n.id + ".weight") = slice(graph.param(n.id + ".weight"), &kout, nullptr);
        break;
      case NodeKind::batchnorm:
        for (const auto& p : net::param_names(n)) out.param(p) = slice(graph.param(p), &kout, nullptr);
        break;
      case NodeKind::linear:
        out.param(n.id + ".weight") = slice(graph.param(n.id + ".weight"), &kout, &kin);
        if (n.bias) out.param(n.id + ".bias") = slice(graph.param(n.id + ".bias"), &kout, nullptr);
        break;
      default:
        break;
    }
  }
  for (auto& [name, t] : out.params()) t.set_requires_grad(false);
  out.validate();
  return out;
}

nlohmann::json plan_to_json(const PruningPlan& plan) {
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [id, gk] : plan.groups) groups[std::to_string(id)] = {{"channels", gk.channels}, {"keep", gk.keep}};
  nlohmann::json masks = nlohmann::json::object();
  for (const auto& [name, m] : plan.masks) {
    std::vector<std::int64_t> zeros;
    auto d = m.data();
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d[i] == 0.0) zeros.push_back(static_cast<std::int64_t>(i));
    masks[name] = {{"shape", m.shape()}, {"zeros", zeros}};
  }
  return {{"scheme", to_string(plan.scheme)}, {"keep_ratio", plan.keep_ratio}, {"groups", groups}, {"masks", masks}};
}

PruningPlan plan_from_json(const nlohmann::json& doc) {
  try {
    PruningPlan plan;
    plan.scheme = parse_scheme(doc.at("scheme").get<std::string>());
    plan.keep_ratio = doc.at("keep_ratio").get<double>();
    for (const auto& [key, v] : doc.at("groups").items()) {
      plan.groups[std::stoi(key)] = GroupKeep{v.at("channels").get<std::int64_t>(), v.at("keep").get<std::vector<std::int64_t>>()};
    }
    if (doc.contains("masks")) {
      for (const auto& [name, v] : doc.at("masks").items()) {
        Tensor m(v.at("shape").get<Shape>(), 1.0);
        for (auto i : v.at("zeros").get<std::vector<std::int64_t>>()) {
          if (i < 0 || i >= m.numel()) throw ParseError("mask index out of range for " + name);
          m.data()[i] = 0.0;
        }
        plan.masks.emplace(name, m);
      }
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("plan json: ") + e.what());
  }
}

}  // namespace mir::prune
