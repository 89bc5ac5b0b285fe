#include "idsnet/tensor.hpp"

#include <algorithm>

#include "idsnet/errors.hpp"

namespace idsnet {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

template <typename T>
Tensor<T>::Tensor() : data_(std::make_shared<Storage>()) {
  data_->shape = {0};
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : data_(std::make_shared<Storage>()) {
  data_->values.assign(shape_size(shape), fill);
  data_->shape = std::move(shape);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : data_(std::make_shared<Storage>()) {
  if (values.size() != shape_size(shape))
    throw ShapeError("tensor: " + std::to_string(values.size()) + " values do not fill shape " + shape_str(shape));
  data_->shape = std::move(shape);
  data_->values = std::move(values);
}

template <typename T>
T Tensor<T>::item() const {
  if (size() != 1) throw ShapeError("item: tensor of shape " + shape_str(shape()) + " is not a scalar");
  return data_->values[0];
}

template <typename T>
std::span<T> Tensor<T>::grad_mut() const {
  if (data_->grad.size() != data_->values.size()) data_->grad.assign(data_->values.size(), T{0});
  return data_->grad;
}

template <typename T>
void Tensor<T>::zero_grad() const {
  if (!data_->grad.empty()) std::fill(data_->grad.begin(), data_->grad.end(), T{0});
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(data_->shape, data_->values);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace idsnet
