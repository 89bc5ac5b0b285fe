#include "idsnet/tape.hpp"

#include "idsnet/errors.hpp"

namespace idsnet {

template <typename T>
void Tape<T>::record(std::string_view op, std::function<void()> backward) {
  if (recording_) entries_.push_back({op, std::move(backward)});
}

template <typename T>
void Tape<T>::backward(Tensor<T>& loss) {
  if (loss.size() != 1) throw ShapeError("backward: loss of shape " + shape_str(loss.shape()) + " is not a scalar");
  loss.grad_mut()[0] += T{1};
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) it->backward();
  entries_.clear();
}

template <typename T>
std::vector<std::string_view> Tape<T>::ops() const {
  std::vector<std::string_view> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.op);
  return out;
}

template class Tape<float>;
template class Tape<double>;

}  // namespace idsnet
