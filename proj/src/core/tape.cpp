#include "mir/core/tape.h"

#include <algorithm>
#include <cmath>

#include "mir/core/errors.h"

namespace mir {

namespace {
thread_local Tape* g_current_tape = nullptr;
}  // namespace

Tape* Tape::current() { return g_current_tape; }

Tape::Scope::Scope(Tape& tape) : prev_(g_current_tape) { g_current_tape = &tape; }

Tape::Scope::~Scope() { g_current_tape = prev_; }

void Tape::record(std::vector<Tensor> inputs, Tensor output, BackwardFn fn) {
  records_.push_back(Record{std::move(inputs), std::move(output), std::move(fn)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw DimensionError("backward() needs a scalar loss");
  }
  if (!std::isfinite(loss.item())) throw NumericError("backward() on a non-finite loss");

  for (auto& rec : records_) {
    rec.output.zero_grad();
    for (auto& in : rec.inputs) {
      if (in.defined() && in.requires_grad()) in.zero_grad();
    }
  }
  Tensor root = loss;
  if (!root.requires_grad()) return;  // loss is a constant: every tracked grad stays zero
  if (!root.has_grad()) root.zero_grad();
  root.grad()[0] = 1.0;

  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    const auto g = it->output.grad();
    if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) continue;
    it->fn();
  }
}

bool record_op(std::vector<Tensor> inputs, Tensor& output, Tape::BackwardFn fn) {
  Tape* tape = Tape::current();
  if (tape == nullptr) return false;
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [](const Tensor& t) { return t.defined() && t.requires_grad(); });
  if (!any) return false;
  output.set_requires_grad(true);
  tape->record(std::move(inputs), output, std::move(fn));
  return true;
}

}  // namespace mir
