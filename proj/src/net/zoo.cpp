#include "mir/net/zoo.h"

#include <cmath>
#include <random>

#include "mir/core/errors.h"

namespace mir::net {

namespace {

struct Builder {
  LayerGraph& g;
  int block = -1;
  int stage = -1;

  std::string conv(const std::string& id, const std::string& in, std::int64_t cout, std::int64_t k, std::int64_t s,
                   std::int64_t p) {
    Node n;
    n.id = id;
    n.kind = NodeKind::conv;
    n.inputs = {in};
    n.in_channels = g.edge_channels(in);
    n.out_channels = cout;
    n.kernel = k;
    n.stride = s;
    n.padding = p;
    return push(std::move(n));
  }
  std::string dwconv(const std::string& id, const std::string& in, std::int64_t k, std::int64_t s, std::int64_t p) {
    Node n;
    n.id = id;
    n.kind = NodeKind::depthwise_conv;
    n.inputs = {in};
    n.in_channels = n.out_channels = n.groups = g.edge_channels(in);
    n.kernel = k;
    n.stride = s;
    n.padding = p;
    return push(std::move(n));
  }
  std::string simple(const std::string& id, NodeKind kind, std::vector<std::string> inputs) {
    Node n;
    n.id = id;
    n.kind = kind;
    n.inputs = std::move(inputs);
    return push(std::move(n));
  }
  std::string bn(const std::string& id, const std::string& in) { return simple(id, NodeKind::batchnorm, {in}); }
  std::string relu(const std::string& id, const std::string& in) { return simple(id, NodeKind::relu, {in}); }
  std::string maxpool(const std::string& id, const std::string& in, std::int64_t k, std::int64_t s, std::int64_t p) {
    Node n;
    n.id = id;
    n.kind = NodeKind::max_pool;
    n.inputs = {in};
    n.kernel = k;
    n.stride = s;
    n.padding = p;
    return push(std::move(n));
  }
  std::string linear(const std::string& id, const std::string& in, std::int64_t k) {
    Node n;
    n.id = id;
    n.kind = NodeKind::linear;
    n.inputs = {in};
    n.in_channels = g.edge_channels(in);
    n.out_channels = k;
    n.bias = true;
    return push(std::move(n));
  }
  std::string push(Node n) {
    n.block = block;
    n.stage = stage;
    std::string id = n.id;
    g.add_node(std::move(n));
    return id;
  }
};

std::string basic_block(Builder& b, const std::string& prefix, const std::string& in, std::int64_t width,
                        std::int64_t stride) {
  std::string x = b.conv(prefix + ".conv1", in, width, 3, stride, 1);
  x = b.relu(prefix + ".relu1", b.bn(prefix + ".bn1", x));
  x = b.bn(prefix + ".bn2", b.conv(prefix + ".conv2", x, width, 3, 1, 1));
  std::string shortcut = in;
  if (stride != 1 || b.g.edge_channels(in) != width) {
    shortcut = b.bn(prefix + ".proj_bn", b.conv(prefix + ".proj", in, width, 1, stride, 0));
  }
  x = b.simple(prefix + ".add", NodeKind::add, {x, shortcut});
  return b.relu(prefix + ".relu2", x);
}

LayerGraph resnet(const std::vector<int>& stages, const std::vector<std::int64_t>& widths, bool imagenet_stem,
                  std::int64_t stem_stride, std::int64_t num_classes, std::uint64_t seed) {
  const std::int64_t size = imagenet_stem ? 224 : 32;
  LayerGraph g({3, size, size}, num_classes);
  Builder b{g};
  std::string x;
  if (imagenet_stem) {
    x = b.relu("stem.relu", b.bn("stem.bn", b.conv("stem.conv", kInputEdge, widths[0], 7, 2, 3)));
    x = b.maxpool("stem.pool", x, 3, 2, 1);
  } else {
    x = b.relu("stem.relu", b.bn("stem.bn", b.conv("stem.conv", kInputEdge, widths[0], 3, stem_stride, 1)));
  }
  int block = 0;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    b.stage = static_cast<int>(s);
    for (int i = 0; i < stages[s]; ++i) {
      b.block = block++;
      const std::int64_t stride = (s > 0 && i == 0) ? 2 : 1;
      x = basic_block(b, "layer" + std::to_string(s + 1) + "." + std::to_string(i), x, widths[s], stride);
    }
  }
  b.block = b.stage = -1;
  x = b.simple("pool", NodeKind::global_avg_pool, {x});
  b.linear("fc", x, num_classes);
  init_params(g, seed);
  return g;
}

std::int64_t make_divisible(double v, std::int64_t divisor = 8) {
  std::int64_t r = std::max<std::int64_t>(divisor, static_cast<std::int64_t>(v + divisor / 2.0) / divisor * divisor);
  if (r < 0.9 * v) r += divisor;
  return r;
}

}  // namespace

LayerGraph build_resnet(const std::string& depth, std::int64_t num_classes, std::uint64_t seed) {
  if (depth == "34") return resnet({3, 4, 6, 3}, {64, 128, 256, 512}, true, 2, num_classes, seed);
  if (depth == "56") return resnet({9, 9, 9}, {16, 32, 64}, false, 1, num_classes, seed);
  if (depth == "tiny-8" || depth == "tiny8") return resnet({1, 1, 1}, {8, 16, 32}, false, 2, num_classes, seed);
  throw ConfigError("unsupported resnet depth '" + depth + "' (use 34, 56 or tiny-8)");
}

LayerGraph build_mobilenetv2(double width, std::int64_t num_classes, std::uint64_t seed, std::int64_t image_size) {
  if (!(width > 0)) throw ConfigError("width multiplier must be positive");
  struct Row { std::int64_t t, c; int n; std::int64_t s; };
  const Row rows[] = {{1, 16, 1, 1}, {6, 24, 2, 2}, {6, 32, 3, 2}, {6, 64, 4, 2},
                      {6, 96, 3, 1}, {6, 160, 3, 2}, {6, 320, 1, 1}};
  LayerGraph g({3, image_size, image_size}, num_classes);
  Builder b{g};
  std::string x = b.relu("stem.relu", b.bn("stem.bn", b.conv("stem.conv", kInputEdge, make_divisible(32 * width), 3, 2, 1)));
  int block = 0;
  for (int r = 0; r < 7; ++r) {
    const Row& row = rows[r];
    const std::int64_t cout = make_divisible(row.c * width);
    b.stage = r;
    for (int i = 0; i < row.n; ++i) {
      b.block = block;
      const std::string p = "block" + std::to_string(block);
      ++block;
      const std::int64_t cin = g.edge_channels(x);
      const std::int64_t stride = i == 0 ? row.s : 1;
      std::string h = x;
      if (row.t != 1) h = b.relu(p + ".expand_relu", b.bn(p + ".expand_bn", b.conv(p + ".expand", x, cin * row.t, 1, 1, 0)));
      h = b.relu(p + ".dw_relu", b.bn(p + ".dw_bn", b.dwconv(p + ".dw", h, 3, stride, 1)));
      h = b.bn(p + ".project_bn", b.conv(p + ".project", h, cout, 1, 1, 0));
      if (stride == 1 && cin == cout) h = b.simple(p + ".add", NodeKind::add, {h, x});
      x = h;
    }
  }
  b.block = b.stage = -1;
  const std::int64_t last = make_divisible(1280 * std::max(1.0, width));
  x = b.relu("last.relu", b.bn("last.bn", b.conv("last.conv", x, last, 1, 1, 0)));
  x = b.simple("pool", NodeKind::global_avg_pool, {x});
  b.linear("fc", x, num_classes);
  init_params(g, seed);
  return g;
}

LayerGraph build_model(const std::string& id, std::int64_t num_classes, std::uint64_t seed) {
  if (id == "resnet34") return build_resnet("34", num_classes, seed);
  if (id == "resnet56") return build_resnet("56", num_classes, seed);
  if (id == "resnet-tiny-8" || id == "tiny-8" || id == "resnet-tiny8") return build_resnet("tiny-8", num_classes, seed);
  if (id == "mobilenetv2") return build_mobilenetv2(1.0, num_classes, seed);
  throw ConfigError("unknown model '" + id + "'");
}

void init_params(LayerGraph& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (const auto& n : g.nodes()) {
    if (n.kind == NodeKind::conv || n.kind == NodeKind::depthwise_conv) {
      Tensor& w = g.param(n.id + ".weight");
      const double fan_out = static_cast<double>(n.out_channels / n.groups * n.kernel * n.kernel);
      std::normal_distribution<double> d(0.0, std::sqrt(2.0 / fan_out));
      for (auto& v : w.data()) v = d(rng);
    } else if (n.kind == NodeKind::batchnorm) {
      for (auto& v : g.param(n.id + ".weight").data()) v = 1.0;
      for (auto& v : g.param(n.id + ".bias").data()) v = 0.0;
      for (auto& v : g.param(n.id + ".running_mean").data()) v = 0.0;
      for (auto& v : g.param(n.id + ".running_var").data()) v = 1.0;
    } else if (n.kind == NodeKind::linear) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(n.in_channels));
      std::uniform_real_distribution<double> d(-bound, bound);
      for (auto& v : g.param(n.id + ".weight").data()) v = d(rng);
      if (n.bias)
        for (auto& v : g.param(n.id + ".bias").data()) v = d(rng);
    }
  }
}

}  // namespace mir::net
