#include <gtest/gtest.h>

#include <cmath>

#include "mir/core/errors.h"
#include "mir/core/ops.h"
#include "mir/net/arch_json.h"
#include "mir/net/executor.h"
#include "mir/net/flops.h"
#include "mir/net/zoo.h"

using namespace mir;
using namespace mir::net;

namespace {

Tensor random_batch(std::int64_t n, const Shape& chw, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return Tensor::randn({n, chw[0], chw[1], chw[2]}, rng);
}

// Perturb BN statistics so identity-style checks are not trivially satisfied.
void randomize_bn(LayerGraph& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5), s(-0.2, 0.2);
  for (const auto& n : g.nodes()) {
    if (n.kind != NodeKind::batchnorm) continue;
    for (auto& v : g.param(n.id + ".weight").data()) v = u(rng);
    for (auto& v : g.param(n.id + ".bias").data()) v = s(rng);
    for (auto& v : g.param(n.id + ".running_mean").data()) v = s(rng);
    for (auto& v : g.param(n.id + ".running_var").data()) v = u(rng);
  }
}

}  // namespace

TEST(Zoo, ResNet34Accounting) {
  LayerGraph g = build_resnet("34", 1000);
  FlopsReport rep = count_macs(g);
  // published figures: 3.7G MACs, 21.8M params
  EXPECT_NEAR(rep.total_params / 21.8e6, 1.0, 0.03);
  EXPECT_NEAR(rep.total_macs / 3.7e9, 1.0, 0.05);
  // exact values from a standalone counting script
  EXPECT_EQ(rep.total_macs, 3663761408);
  EXPECT_EQ(rep.total_params, 21797672);
}

TEST(Zoo, MobileNetV2Accounting) {
  LayerGraph g = build_mobilenetv2(1.0, 1000);
  FlopsReport rep = count_macs(g);
  EXPECT_NEAR(rep.total_params / 3.5e6, 1.0, 0.05);
  EXPECT_EQ(rep.total_params, 3504872);
  EXPECT_EQ(rep.total_macs, 300774272);
  FlopsReport again = count_macs(build_mobilenetv2(1.0, 1000, 7));
  EXPECT_EQ(again.total_macs, rep.total_macs);
  EXPECT_EQ(again.total_params, rep.total_params);
  ASSERT_EQ(again.per_node.size(), rep.per_node.size());
  for (std::size_t i = 0; i < rep.per_node.size(); ++i) EXPECT_EQ(again.per_node[i].macs, rep.per_node[i].macs);
}

TEST(Zoo, ResNet56Geometry) {
  LayerGraph g = build_resnet("56", 10);
  int convs = 0;
  for (const auto& n : g.nodes())
    if (n.kind == NodeKind::conv && n.id.find("proj") == std::string::npos) ++convs;
  EXPECT_EQ(convs, 55);
  EXPECT_EQ(g.num_blocks(), 27);
  auto shapes = infer_shapes(g);
  EXPECT_EQ(shapes[g.index_of(g.resolve_tap(kBeforePool))], (Shape{64, 8, 8}));
}

TEST(Zoo, UnsupportedDepth) {
  EXPECT_THROW(build_resnet("18", 10), ConfigError);
  EXPECT_THROW(build_mobilenetv2(0.0, 10), ConfigError);
}

TEST(Flops, SinglePointConv) {
  LayerGraph g({1, 1, 1}, 1);
  Node n;
  n.id = "c";
  n.kind = NodeKind::conv;
  n.inputs = {kInputEdge};
  n.in_channels = n.out_channels = 1;
  g.add_node(n);
  FlopsReport rep = count_macs(g);
  EXPECT_EQ(rep.total_macs, 1);
  EXPECT_EQ(rep.total_params, 1);
}

TEST(Flops, TotalsEqualBreakdown) {
  for (const char* id : {"resnet34", "resnet56", "tiny-8", "mobilenetv2"}) {
    FlopsReport rep = count_macs(build_model(id, 10));
    std::int64_t m = 0, p = 0;
    for (const auto& c : rep.per_node) {
      EXPECT_GE(c.macs, 0);
      EXPECT_GE(c.params, 0);
      m += c.macs;
      p += c.params;
    }
    EXPECT_EQ(m, rep.total_macs);
    EXPECT_EQ(p, rep.total_params);
  }
}

TEST(Forward, TinyShapesAndTaps) {
  LayerGraph g = build_resnet("tiny-8", 10, 1);
  Tensor x = random_batch(2, g.input_shape(), 2);
  ForwardResult none = forward(g, x);
  EXPECT_EQ(none.logits.shape(), (Shape{2, 10}));
  EXPECT_TRUE(none.tapped.empty());
  ForwardResult r = forward(g, x, {Mode::eval, {kBeforePool, kAfterPool}, ""});
  EXPECT_EQ(r.tapped.at(kAfterPool).shape(), (Shape{2, 32}));
  const Tensor& bp = r.tapped.at(kBeforePool);
  ASSERT_EQ(bp.shape(), (Shape{2, 32, 4, 4}));
  // spatial mean of the before-pool map, summed directly
  for (int n = 0; n < 2; ++n)
    for (int c = 0; c < 32; ++c) {
      double s = 0;
      for (int i = 0; i < 16; ++i) s += bp.data()[(n * 32 + c) * 16 + i];
      EXPECT_NEAR(s / 16, r.tapped.at(kAfterPool).data()[n * 32 + c], 1e-10);
    }
}

TEST(Forward, TapConsistencyAllModels) {
  for (const char* id : {"resnet56", "tiny-8"}) {
    LayerGraph g = build_model(id, 10, 3);
    ForwardResult r = forward(g, random_batch(2, g.input_shape(), 4), {Mode::eval, {kBeforePool, kAfterPool}, ""});
    Tensor pooled = ops::global_avg_pool(r.tapped.at(kBeforePool));
    for (std::size_t i = 0; i < pooled.data().size(); ++i)
      EXPECT_NEAR(pooled.data()[i], r.tapped.at(kAfterPool).data()[i], 1e-12);
  }
  LayerGraph mb = build_mobilenetv2(0.35, 10, 1, 32);
  ForwardResult r = forward(mb, random_batch(1, mb.input_shape(), 5), {Mode::eval, {kBeforePool, kAfterPool}, ""});
  Tensor pooled = ops::global_avg_pool(r.tapped.at(kBeforePool));
  for (std::size_t i = 0; i < pooled.data().size(); ++i)
    EXPECT_NEAR(pooled.data()[i], r.tapped.at(kAfterPool).data()[i], 1e-12);
}

TEST(Forward, UnknownTapAndBadInput) {
  LayerGraph g = build_resnet("tiny-8", 10);
  Tensor x = random_batch(1, g.input_shape(), 1);
  EXPECT_THROW(forward(g, x, {Mode::eval, {"nowhere"}, ""}), ConfigError);
  EXPECT_THROW(forward(g, Tensor({1, 3, 16, 16}), {}), DimensionError);
}

TEST(Forward, EvalPurity) {
  LayerGraph g = build_resnet("tiny-8", 10, 9);
  randomize_bn(g, 10);
  Tensor x = random_batch(3, g.input_shape(), 11);
  auto before = g.clone();
  Tensor a = forward(g, x).logits;
  Tensor b = forward(g, x).logits;
  for (std::size_t i = 0; i < a.data().size(); ++i) EXPECT_EQ(a.data()[i], b.data()[i]);
  for (const auto& [name, t] : g.params())
    for (std::size_t i = 0; i < t.data().size(); ++i) EXPECT_EQ(t.data()[i], before.param(name).data()[i]);
}

TEST(Forward, TrainModeUpdatesRunningStats) {
  LayerGraph g = build_resnet("tiny-8", 10, 9);
  const double before = g.param("stem.bn.running_mean").data()[0];
  forward(g, random_batch(4, g.input_shape(), 12), {Mode::train, {}, ""});
  EXPECT_NE(g.param("stem.bn.running_mean").data()[0], before);
}

TEST(Forward, StopAfterAndRunNodes) {
  LayerGraph g = build_resnet("tiny-8", 10, 9);
  randomize_bn(g, 1);
  Tensor x = random_batch(2, g.input_shape(), 13);
  ForwardResult full = forward(g, x, {Mode::eval, {"layer1.0.relu2"}, ""});
  ForwardResult part = forward(g, x, {Mode::eval, {"layer1.0.relu2"}, "layer1.0.relu2"});
  EXPECT_FALSE(part.logits.defined());
  const auto& t1 = full.tapped.at("layer1.0.relu2");
  const auto& t2 = part.tapped.at("layer1.0.relu2");
  for (std::size_t i = 0; i < t1.data().size(); ++i) EXPECT_EQ(t1.data()[i], t2.data()[i]);
  // resume from the block output
  auto env = run_nodes(g, {{"layer1.0.relu2", t2}}, g.index_of("layer1.0.relu2") + 1, g.nodes().size() - 1, Mode::eval);
  const Tensor& logits = env.at("fc");
  for (std::size_t i = 0; i < logits.data().size(); ++i) EXPECT_EQ(logits.data()[i], full.logits.data()[i]);
}

TEST(Graph, InvariantsOnZoo) {
  for (const char* id : {"resnet34", "resnet56", "tiny-8", "mobilenetv2"}) {
    LayerGraph g = build_model(id, 10);
    EXPECT_NO_THROW(g.validate()) << id;
    EXPECT_EQ(g.head_boundary(), "pool");
    EXPECT_EQ(g.head_node().id, "fc");
    EXPECT_EQ(g.resolve_tap(kAfterPool), "pool");
  }
}

TEST(Graph, RejectsMalformed) {
  LayerGraph g({3, 8, 8}, 2);
  Node c;
  c.id = "c";
  c.kind = NodeKind::conv;
  c.inputs = {kInputEdge};
  c.in_channels = 4;  // producer has 3
  c.out_channels = 4;
  EXPECT_THROW(g.add_node(c), DimensionError);
  c.in_channels = 3;
  g.add_node(c);
  Node a;
  a.id = "a";
  a.kind = NodeKind::add;
  a.inputs = {"c", kInputEdge};
  EXPECT_THROW(g.add_node(a), DimensionError);
  a.inputs = {"c"};
  EXPECT_THROW(g.add_node(a), ConfigError);
  Node r;
  r.id = "r";
  r.kind = NodeKind::relu;
  r.inputs = {"missing"};
  EXPECT_THROW(g.add_node(r), ConfigError);
  r.inputs = {"c"};
  r.id = "c";
  EXPECT_THROW(g.add_node(r), ConfigError);
}

TEST(Graph, CloneIsIndependent) {
  LayerGraph g = build_resnet("tiny-8", 10, 1);
  LayerGraph h = g.clone();
  h.param("fc.weight").data()[0] += 1.0;
  EXPECT_NE(h.param("fc.weight").data()[0], g.param("fc.weight").data()[0]);
}

TEST(ArchJson, RoundTrip) {
  LayerGraph g = build_mobilenetv2(1.0, 1000);
  auto doc = arch_to_json(g);
  EXPECT_EQ(doc["format"], "mir-arch");
  LayerGraph back = arch_from_json(nlohmann::json::parse(doc.dump()));
  EXPECT_EQ(arch_to_json(back), doc);
  EXPECT_EQ(count_macs(back).total_macs, count_macs(g).total_macs);
  EXPECT_THROW(arch_from_json(nlohmann::json{{"format", "x"}}), ParseError);
}
