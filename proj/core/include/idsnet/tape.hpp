#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "idsnet/tensor.hpp"

namespace idsnet {

// Record of executed operations for reverse-mode differentiation. Each
// entry is a closure that reads its output's gradient and accumulates into
// its inputs' gradients. A tape belongs to a single thread.
template <typename T>
class Tape {
 public:
  // A tape constructed with recording=false drops every entry; use it for
  // inference so no intermediates are retained.
  explicit Tape(bool recording = true) : recording_(recording) {}

  bool recording() const noexcept { return recording_; }

  void record(std::string_view op, std::function<void()> backward);

  // Seeds d(loss)/d(loss) = 1, runs every recorded entry in reverse order,
  // then clears the tape. Throws ShapeError for a non-scalar loss.
  void backward(Tensor<T>& loss);

  void clear() noexcept { entries_.clear(); }
  std::size_t size() const noexcept { return entries_.size(); }
  // Operation names in execution order; for diagnostics and tests.
  std::vector<std::string_view> ops() const;

 private:
  struct Entry {
    std::string_view op;
    std::function<void()> backward;
  };
  bool recording_;
  std::vector<Entry> entries_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace idsnet
