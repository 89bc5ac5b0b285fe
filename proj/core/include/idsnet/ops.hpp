#pragma once

#include <cstddef>
#include <span>

#include "idsnet/tape.hpp"
#include "idsnet/tensor.hpp"

// Differentiable tensor primitives. Every function returns a fresh tensor
// (nothing aliases its inputs) and, when the tape is recording and some
// input requires a gradient, records the matching backward step.
namespace idsnet::ops {

// Right-aligned broadcasting over extent-1 axes. Throws ShapeError naming
// `op` and both shapes when the shapes are incompatible.
Shape broadcast_shape(const Shape& a, const Shape& b, const char* op);

template <typename T> Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(Tape<T>& tape, const Tensor<T>& a, T factor);
template <typename T> Tensor<T> broadcast_to(Tape<T>& tape, const Tensor<T>& a, const Shape& shape);

// (m, k) x (k, n) -> (m, n)
template <typename T> Tensor<T> matmul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

template <typename T> Tensor<T> reshape(Tape<T>& tape, const Tensor<T>& a, const Shape& shape);
// Elements [begin, end) along `axis`.
template <typename T>
Tensor<T> slice(Tape<T>& tape, const Tensor<T>& a, std::size_t axis, std::size_t begin, std::size_t end);
template <typename T> Tensor<T> concat(Tape<T>& tape, std::span<const Tensor<T>> parts, std::size_t axis);

// Full reductions return rank-0 tensors; axis reductions drop the axis.
template <typename T> Tensor<T> reduce_sum(Tape<T>& tape, const Tensor<T>& a);
template <typename T> Tensor<T> reduce_sum(Tape<T>& tape, const Tensor<T>& a, std::size_t axis);
// Gradient flows to the first maximal element.
template <typename T> Tensor<T> reduce_max(Tape<T>& tape, const Tensor<T>& a);
template <typename T> Tensor<T> reduce_max(Tape<T>& tape, const Tensor<T>& a, std::size_t axis);

template <typename T> Tensor<T> exp(Tape<T>& tape, const Tensor<T>& a);
template <typename T> Tensor<T> log(Tape<T>& tape, const Tensor<T>& a);
template <typename T> Tensor<T> sigmoid(Tape<T>& tape, const Tensor<T>& a);
template <typename T> Tensor<T> tanh(Tape<T>& tape, const Tensor<T>& a);
// Subgradient 0 at x = 0.
template <typename T> Tensor<T> relu(Tape<T>& tape, const Tensor<T>& a);

}  // namespace idsnet::ops
