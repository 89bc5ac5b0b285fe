#pragma once

#include <cstddef>

#include "idsnet/tape.hpp"
#include "idsnet/tensor.hpp"

// Fused network kernels with hand-written backward passes. Activations are
// channel-last: (batch, length, channels).
namespace idsnet::ops {

// Valid-padding, stride-1 convolution.
// x (B, L, C), weight (K, C, F), bias (F) -> (B, L - K + 1, F).
template <typename T>
Tensor<T> conv1d(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

// Non-overlapping max pooling with stride == pool. x (B, L, C) ->
// (B, L / pool, C); a trailing remainder shorter than `pool` is dropped.
// Gradient goes to the first maximal position of each window.
template <typename T>
Tensor<T> max_pool1d(Tape<T>& tape, const Tensor<T>& x, std::size_t pool);

template <typename T>
struct BatchNormConfig {
  bool training = true;
  T momentum = T(0.99);
  T epsilon = T(1e-5);
};

// Per-channel normalisation over every axis but the last. In training the
// batch mean and (biased) variance are used and the running statistics move
// toward them: running = momentum * running + (1 - momentum) * batch.
// In inference the running statistics are used and left untouched.
template <typename T>
Tensor<T> batch_norm(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     Tensor<T>& running_mean, Tensor<T>& running_var, const BatchNormConfig<T>& cfg);

// LSTM recurrence over precomputed input projections, zero initial state.
// projected (B, S, 4H) = x W_in + bias, recurrent_weight (H, 4H) -> hidden
// states (B, S, H). Gate order along the 4H axis: input, forget, cell, output.
template <typename T>
Tensor<T> lstm_recurrence(Tape<T>& tape, const Tensor<T>& projected, const Tensor<T>& recurrent_weight);

template <typename T>
struct SoftmaxCrossEntropy {
  Tensor<T> loss;           // rank 0, mean over the batch
  Tensor<T> probabilities;  // (B, K), not differentiable
};

// Fused softmax + categorical cross-entropy. Each target row must be one-hot.
template <typename T>
SoftmaxCrossEntropy<T> softmax_cross_entropy(Tape<T>& tape, const Tensor<T>& logits, const Tensor<T>& onehot);

// Row-wise softmax of (B, K) logits with max shifting. Not recorded.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

}  // namespace idsnet::ops
