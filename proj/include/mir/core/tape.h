#pragma once

#include <functional>
#include <vector>

#include "mir/core/tensor.h"

namespace mir {

/// Ordered record of the differentiable operations executed while the tape
/// is active on the current thread.
///
/// Operations record themselves only when at least one input requires a
/// gradient; their output is then marked as requiring one too. backward()
/// replays the records in reverse. Each call recomputes gradients from
/// scratch: every tensor touched by the tape (including leaves that do not
/// reach the loss) has its gradient zeroed first, so repeated calls yield
/// identical results and unreached leaves carry explicit zeros.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::vector<Tensor> inputs, Tensor output, BackwardFn fn);
  void backward(const Tensor& loss);
  void clear() { records_.clear(); }
  std::size_t size() const { return records_.size(); }

  // Tape recording on this thread, or nullptr.
  static Tape* current();

  class Scope {
   public:
    explicit Scope(Tape& tape);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* prev_;
  };

 private:
  struct Record {
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn fn;
  };
  std::vector<Record> records_;
};

// Records `fn` on the active tape when any input requires grad and marks the
// output accordingly. Returns true when recorded.
bool record_op(std::vector<Tensor> inputs, Tensor& output, Tape::BackwardFn fn);

}  // namespace mir
