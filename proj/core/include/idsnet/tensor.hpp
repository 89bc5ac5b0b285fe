#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace idsnet {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major array with an optional gradient buffer.
//
// Tensor is a handle: copies share the same storage, which is how layers,
// the tape and the optimizer all see one parameter. Use detach() for an
// independent copy. Rank-0 tensors (shape {}) hold one value.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor();
  explicit Tensor(Shape shape, T fill = T{0});
  Tensor(Shape shape, std::vector<T> values);

  static Tensor scalar(T v) { return Tensor(Shape{}, std::vector<T>{v}); }

  const Shape& shape() const noexcept { return data_->shape; }
  std::size_t rank() const noexcept { return data_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return data_->shape.at(axis); }
  std::size_t size() const noexcept { return data_->values.size(); }

  std::span<const T> values() const noexcept { return data_->values; }
  std::span<T> values() noexcept { return data_->values; }
  const T& operator[](std::size_t i) const { return data_->values[i]; }
  T& operator[](std::size_t i) { return data_->values[i]; }
  // Value of a one-element tensor.
  T item() const;

  bool requires_grad() const noexcept { return data_->requires_grad; }
  Tensor& set_requires_grad(bool on = true) {
    data_->requires_grad = on;
    return *this;
  }
  bool has_grad() const noexcept { return !data_->grad.empty(); }
  // Gradient buffer; empty until something accumulates into it.
  std::span<const T> grad() const noexcept { return data_->grad; }
  // Gradient buffer, allocated as zeros on first access. Const because the
  // handle, not the storage, is what constness applies to.
  std::span<T> grad_mut() const;
  void zero_grad() const;
  void drop_grad() const { std::vector<T>().swap(data_->grad); }

  Tensor detach() const;
  bool shares_storage(const Tensor& other) const noexcept { return data_ == other.data_; }

 private:
  struct Storage {
    Shape shape;
    std::vector<T> values;
    std::vector<T> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> data_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace idsnet
