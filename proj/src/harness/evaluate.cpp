#include "mir/harness/evaluate.h"

#include <algorithm>
#include <numeric>

#include "mir/core/errors.h"
#include "mir/data/augment.h"
#include "mir/net/executor.h"

namespace mir::harness {

bool topk_hit(std::span<const double> row, int label, int k) {
  if (label < 0 || static_cast<std::size_t>(label) >= row.size()) throw ConfigError("label outside the logit range");
  const double v = row[label];
  int ahead = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] > v || (row[j] == v && static_cast<int>(j) < label)) ++ahead;
  }
  return ahead < k;
}

EvalResult score_logits(std::span<const double> logits, std::size_t classes, std::span<const int> labels) {
  if (classes == 0 || logits.size() != classes * labels.size()) throw DimensionError("logits do not match labels");
  EvalResult r;
  r.count = labels.size();
  std::size_t h1 = 0, h5 = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto row = logits.subspan(i * classes, classes);
    h1 += topk_hit(row, labels[i], 1);
    h5 += topk_hit(row, labels[i], 5);
  }
  if (r.count) {
    r.top1 = static_cast<double>(h1) / r.count;
    r.top5 = static_cast<double>(h5) / r.count;
  }
  return r;
}

EvalResult evaluate(const net::LayerGraph& model, const data::Dataset& split, std::size_t batch) {
  std::size_t h1 = 0, h5 = 0;
  const auto classes = static_cast<std::size_t>(model.num_classes());
  for (std::size_t start = 0; start < split.size(); start += batch) {
    std::vector<std::size_t> idx(std::min(batch, split.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    data::Batch b = data::make_batch(split, idx, nullptr, nullptr);
    Tensor logits = net::forward(model, b.images).logits;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto row = logits.data().subspan(i * classes, classes);
      h1 += topk_hit(row, b.labels[i], 1);
      h5 += topk_hit(row, b.labels[i], 5);
    }
  }
  EvalResult r;
  r.count = split.size();
  if (r.count) {
    r.top1 = static_cast<double>(h1) / r.count;
    r.top5 = static_cast<double>(h5) / r.count;
  }
  return r;
}

}  // namespace mir::harness
