#pragma once

#include <cstdint>
#include <string>

#include "mir/net/graph.h"

namespace mir::net {

// depth: "34" (224x224 geometry), "56" (32x32), "tiny-8" (32x32, one block per stage).
LayerGraph build_resnet(const std::string& depth, std::int64_t num_classes, std::uint64_t seed = 0);

// Inverted-residual network on 224x224 inputs. ReLU stands in for ReLU6.
LayerGraph build_mobilenetv2(double width_multiplier, std::int64_t num_classes, std::uint64_t seed = 0,
                             std::int64_t image_size = 224);

// Dispatches on "resnet34", "resnet56", "resnet-tiny-8" / "tiny-8", "mobilenetv2".
LayerGraph build_model(const std::string& model_id, std::int64_t num_classes, std::uint64_t seed = 0);

// Kaiming (fan-out) normal conv weights, BN gamma 1 / beta 0, uniform linear.
void init_params(LayerGraph& graph, std::uint64_t seed);

}  // namespace mir::net
