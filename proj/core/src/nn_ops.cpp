#include "idsnet/nn_ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "idsnet/errors.hpp"
#include "idsnet/parallel.hpp"

namespace idsnet::ops {

template <typename T>
Tensor<T> conv1d(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  if (x.rank() != 3 || weight.rank() != 3 || bias.rank() != 1 || weight.dim(1) != x.dim(2) ||
      bias.dim(0) != weight.dim(2))
    throw ShapeError("conv1d: incompatible shapes " + shape_str(x.shape()) + " and " + shape_str(weight.shape()) +
                     " (bias " + shape_str(bias.shape()) + ")");
  const std::size_t B = x.dim(0), L = x.dim(1), C = x.dim(2);
  const std::size_t K = weight.dim(0), F = weight.dim(2);
  if (L < K)
    throw ShapeError("conv1d: input length " + std::to_string(L) + " shorter than kernel " + std::to_string(K));
  const std::size_t Lo = L - K + 1;
  const std::size_t KC = K * C;

  Tensor<T> out({B, Lo, F});
  {
    const T* X = x.values().data();
    const T* W = weight.values().data();
    const T* bv = bias.values().data();
    T* Y = out.values().data();
    parallel_for(
        B,
        [=](std::size_t b0, std::size_t b1) {
          for (std::size_t b = b0; b < b1; ++b)
            for (std::size_t t = 0; t < Lo; ++t) {
              T* y = Y + (b * Lo + t) * F;
              const T* patch = X + (b * L + t) * C;
              std::copy_n(bv, F, y);
              for (std::size_t j = 0; j < KC; ++j) {
                const T xv = patch[j];
                const T* w = W + j * F;
                for (std::size_t f = 0; f < F; ++f) y[f] += xv * w[f];
              }
            }
        },
        4);
  }

  if (tape.recording() && (x.requires_grad() || weight.requires_grad() || bias.requires_grad())) {
    out.set_requires_grad();
    tape.record("conv1d", [x, weight, bias, out, B, L, C, Lo, KC, F]() {
      if (!out.has_grad()) return;
      const T* G = out.grad().data();
      const T* X = x.values().data();
      const T* W = weight.values().data();
      if (x.requires_grad()) {
        T* GX = x.grad_mut().data();
        parallel_for(
            B,
            [=](std::size_t b0, std::size_t b1) {
              for (std::size_t b = b0; b < b1; ++b)
                for (std::size_t t = 0; t < Lo; ++t) {
                  const T* g = G + (b * Lo + t) * F;
                  T* gpatch = GX + (b * L + t) * C;
                  for (std::size_t j = 0; j < KC; ++j) {
                    const T* w = W + j * F;
                    T acc{0};
                    for (std::size_t f = 0; f < F; ++f) acc += w[f] * g[f];
                    gpatch[j] += acc;
                  }
                }
            },
            4);
      }
      if (weight.requires_grad()) {
        T* GW = weight.grad_mut().data();
        parallel_for(
            KC,
            [=](std::size_t j0, std::size_t j1) {
              for (std::size_t b = 0; b < B; ++b)
                for (std::size_t t = 0; t < Lo; ++t) {
                  const T* g = G + (b * Lo + t) * F;
                  const T* patch = X + (b * L + t) * C;
                  for (std::size_t j = j0; j < j1; ++j) {
                    const T xv = patch[j];
                    T* gw = GW + j * F;
                    for (std::size_t f = 0; f < F; ++f) gw[f] += xv * g[f];
                  }
                }
            },
            8);
      }
      if (bias.requires_grad()) {
        T* GB = bias.grad_mut().data();
        for (std::size_t r = 0; r < B * Lo; ++r)
          for (std::size_t f = 0; f < F; ++f) GB[f] += G[r * F + f];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> max_pool1d(Tape<T>& tape, const Tensor<T>& x, std::size_t pool) {
  if (x.rank() != 3) throw ShapeError("max_pool1d: expected (batch, length, channels), got " + shape_str(x.shape()));
  if (pool == 0) throw ShapeError("max_pool1d: pool size must be positive");
  const std::size_t B = x.dim(0), L = x.dim(1), C = x.dim(2);
  if (L < pool)
    throw ShapeError("max_pool1d: input length " + std::to_string(L) + " shorter than pool " + std::to_string(pool));
  const std::size_t Lo = L / pool;
  Tensor<T> out({B, Lo, C});
  auto arg = std::make_shared<std::vector<std::size_t>>(out.size());
  const auto xv = x.values();
  auto ov = out.values();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < Lo; ++t)
      for (std::size_t c = 0; c < C; ++c) {
        std::size_t best = (b * L + t * pool) * C + c;
        for (std::size_t k = 1; k < pool; ++k) {
          const std::size_t idx = (b * L + t * pool + k) * C + c;
          if (xv[idx] > xv[best] || (std::isnan(xv[idx]) && !std::isnan(xv[best]))) best = idx;
        }
        const std::size_t o = (b * Lo + t) * C + c;
        ov[o] = xv[best];
        (*arg)[o] = best;
      }
  if (tape.recording() && x.requires_grad()) {
    out.set_requires_grad();
    tape.record("max_pool1d", [x, out, arg]() {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      auto gx = x.grad_mut();
      for (std::size_t i = 0; i < g.size(); ++i) gx[(*arg)[i]] += g[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> batch_norm(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     Tensor<T>& running_mean, Tensor<T>& running_var, const BatchNormConfig<T>& cfg) {
  if (x.rank() < 2) throw ShapeError("batch_norm: expected at least (batch, channels), got " + shape_str(x.shape()));
  const std::size_t C = x.shape().back();
  const Shape channel{C};
  if (gamma.shape() != channel || beta.shape() != channel || running_mean.shape() != channel ||
      running_var.shape() != channel)
    throw ShapeError("batch_norm: parameter shapes do not match " + std::to_string(C) + " channels");
  if (cfg.training && x.dim(0) < 2)
    throw ShapeError("batch_norm: training mode needs a batch of at least 2, got " + std::to_string(x.dim(0)));
  const std::size_t M = x.size() / C;
  const auto xv = x.values();

  std::vector<T> mean(C), inv_std(C);
  if (cfg.training) {
    std::vector<double> sum(C, 0.0), sq(C, 0.0);
    for (std::size_t r = 0; r < M; ++r)
      for (std::size_t c = 0; c < C; ++c) sum[c] += static_cast<double>(xv[r * C + c]);
    for (std::size_t c = 0; c < C; ++c) sum[c] /= static_cast<double>(M);
    for (std::size_t r = 0; r < M; ++r)
      for (std::size_t c = 0; c < C; ++c) {
        const double d = static_cast<double>(xv[r * C + c]) - sum[c];
        sq[c] += d * d;
      }
    auto rm = running_mean.values();
    auto rv = running_var.values();
    for (std::size_t c = 0; c < C; ++c) {
      const double var = sq[c] / static_cast<double>(M);
      mean[c] = static_cast<T>(sum[c]);
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(cfg.epsilon)));
      rm[c] = cfg.momentum * rm[c] + (T{1} - cfg.momentum) * static_cast<T>(sum[c]);
      rv[c] = cfg.momentum * rv[c] + (T{1} - cfg.momentum) * static_cast<T>(var);
    }
  } else {
    const auto rm = running_mean.values();
    const auto rv = running_var.values();
    for (std::size_t c = 0; c < C; ++c) {
      mean[c] = rm[c];
      inv_std[c] = T{1} / std::sqrt(rv[c] + cfg.epsilon);
    }
  }

  auto xhat = std::make_shared<std::vector<T>>(x.size());
  Tensor<T> out(x.shape());
  auto ov = out.values();
  const auto gv = gamma.values();
  const auto bv = beta.values();
  for (std::size_t r = 0; r < M; ++r)
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t i = r * C + c;
      const T h = (xv[i] - mean[c]) * inv_std[c];
      (*xhat)[i] = h;
      ov[i] = gv[c] * h + bv[c];
    }

  if (tape.recording() && (x.requires_grad() || gamma.requires_grad() || beta.requires_grad())) {
    out.set_requires_grad();
    const bool training = cfg.training;
    tape.record("batch_norm", [x, gamma, beta, out, xhat, inv_std, C, M, training]() {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      const auto gv = gamma.values();
      std::vector<T> sum_g(C, T{0}), sum_gh(C, T{0});
      for (std::size_t r = 0; r < M; ++r)
        for (std::size_t c = 0; c < C; ++c) {
          const std::size_t i = r * C + c;
          sum_g[c] += g[i];
          sum_gh[c] += g[i] * (*xhat)[i];
        }
      if (beta.requires_grad()) {
        auto gb = beta.grad_mut();
        for (std::size_t c = 0; c < C; ++c) gb[c] += sum_g[c];
      }
      if (gamma.requires_grad()) {
        auto gg = gamma.grad_mut();
        for (std::size_t c = 0; c < C; ++c) gg[c] += sum_gh[c];
      }
      if (x.requires_grad()) {
        auto gx = x.grad_mut();
        const T m = static_cast<T>(M);
        for (std::size_t r = 0; r < M; ++r)
          for (std::size_t c = 0; c < C; ++c) {
            const std::size_t i = r * C + c;
            if (training) {
              // d/dx of gamma * (x - mean) / sqrt(var + eps) with batch statistics.
              gx[i] += gv[c] * inv_std[c] / m * (m * g[i] - sum_g[c] - (*xhat)[i] * sum_gh[c]);
            } else {
              gx[i] += g[i] * gv[c] * inv_std[c];
            }
          }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax: expected (batch, classes), got " + shape_str(logits.shape()));
  const std::size_t B = logits.dim(0), K = logits.dim(1);
  Tensor<T> out(logits.shape());
  const auto z = logits.values();
  auto p = out.values();
  for (std::size_t b = 0; b < B; ++b) {
    const T* row = z.data() + b * K;
    const T mx = *std::max_element(row, row + K);
    T sum{0};
    for (std::size_t k = 0; k < K; ++k) {
      p[b * K + k] = std::exp(row[k] - mx);
      sum += p[b * K + k];
    }
    for (std::size_t k = 0; k < K; ++k) p[b * K + k] /= sum;
  }
  return out;
}

template <typename T>
SoftmaxCrossEntropy<T> softmax_cross_entropy(Tape<T>& tape, const Tensor<T>& logits, const Tensor<T>& onehot) {
  if (logits.rank() != 2 || logits.shape() != onehot.shape())
    throw ShapeError("softmax_cross_entropy: incompatible shapes " + shape_str(logits.shape()) + " and " +
                     shape_str(onehot.shape()));
  const std::size_t B = logits.dim(0), K = logits.dim(1);
  if (B == 0) throw ShapeError("softmax_cross_entropy: empty batch");
  const auto y = onehot.values();
  std::vector<std::size_t> target(B);
  for (std::size_t b = 0; b < B; ++b) {
    std::size_t ones = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const T v = y[b * K + k];
      if (v == T{1}) {
        ++ones;
        target[b] = k;
      } else if (v != T{0}) {
        ones = 2;
      }
    }
    if (ones != 1) throw InputError("softmax_cross_entropy: target row " + std::to_string(b) + " is not one-hot");
  }

  auto probs = softmax(logits);
  const auto z = logits.values();
  T total{0};
  for (std::size_t b = 0; b < B; ++b) {
    const T* row = z.data() + b * K;
    const T mx = *std::max_element(row, row + K);
    T sum{0};
    for (std::size_t k = 0; k < K; ++k) sum += std::exp(row[k] - mx);
    total -= row[target[b]] - mx - std::log(sum);
  }
  auto loss = Tensor<T>::scalar(total / static_cast<T>(B));

  if (tape.recording() && logits.requires_grad()) {
    loss.set_requires_grad();
    tape.record("softmax_cross_entropy", [logits, onehot, probs, loss, B]() {
      if (!loss.has_grad()) return;
      const T g = loss.grad()[0] / static_cast<T>(B);
      const auto p = probs.values();
      const auto y = onehot.values();
      auto gz = logits.grad_mut();
      for (std::size_t i = 0; i < gz.size(); ++i) gz[i] += g * (p[i] - y[i]);
    });
  }
  return {loss, probs};
}

template <typename T>
Tensor<T> lstm_recurrence(Tape<T>& tape, const Tensor<T>& projected, const Tensor<T>& recurrent_weight) {
  if (projected.rank() != 3 || recurrent_weight.rank() != 2 || recurrent_weight.dim(1) != 4 * recurrent_weight.dim(0) ||
      projected.dim(2) != recurrent_weight.dim(1))
    throw ShapeError("lstm_recurrence: incompatible shapes " + shape_str(projected.shape()) + " and " +
                     shape_str(recurrent_weight.shape()));
  const std::size_t B = projected.dim(0), S = projected.dim(1), H = recurrent_weight.dim(0), G = 4 * H;
  if (S == 0) throw ShapeError("lstm_recurrence: input has zero time steps");

  Tensor<T> out({B, S, H});
  // Gate activations (i, f, g, o) and cell states for the backward pass.
  auto gates = std::make_shared<std::vector<T>>(B * S * G);
  auto cells = std::make_shared<std::vector<T>>(B * S * H);
  auto cell_tanh = std::make_shared<std::vector<T>>(B * S * H);
  const T* P = projected.values().data();
  const T* W = recurrent_weight.values().data();
  T* Hs = out.values().data();
  T* Z = gates->data();
  T* Cs = cells->data();
  T* Ct = cell_tanh->data();
  const auto sig = [](T x) { return T{1} / (T{1} + std::exp(-x)); };

  parallel_for(
      B,
      [=](std::size_t b0, std::size_t b1) {
        std::vector<T> z(G);
        for (std::size_t b = b0; b < b1; ++b)
          for (std::size_t t = 0; t < S; ++t) {
            const T* p = P + (b * S + t) * G;
            std::copy(p, p + G, z.begin());
            if (t > 0) {
              const T* h = Hs + (b * S + t - 1) * H;
              for (std::size_t k = 0; k < H; ++k) {
                const T hk = h[k];
                const T* w = W + k * G;
                for (std::size_t j = 0; j < G; ++j) z[j] += hk * w[j];
              }
            }
            T* a = Z + (b * S + t) * G;
            T* c = Cs + (b * S + t) * H;
            T* tc = Ct + (b * S + t) * H;
            T* h = Hs + (b * S + t) * H;
            const T* c_prev = t > 0 ? Cs + (b * S + t - 1) * H : nullptr;
            for (std::size_t k = 0; k < H; ++k) {
              const T i = sig(z[k]), f = sig(z[H + k]), g = std::tanh(z[2 * H + k]), o = sig(z[3 * H + k]);
              a[k] = i;
              a[H + k] = f;
              a[2 * H + k] = g;
              a[3 * H + k] = o;
              c[k] = i * g + (c_prev ? f * c_prev[k] : T{0});
              tc[k] = std::tanh(c[k]);
              h[k] = o * tc[k];
            }
          }
      },
      4);

  if (tape.recording() && (projected.requires_grad() || recurrent_weight.requires_grad())) {
    out.set_requires_grad();
    tape.record("lstm_recurrence", [projected, recurrent_weight, out, gates, cells, cell_tanh, B, S, H, G]() {
      if (!out.has_grad()) return;
      const T* GH = out.grad().data();
      const T* Hs = out.values().data();
      const T* W = recurrent_weight.values().data();
      const T* Z = gates->data();
      const T* Cs = cells->data();
      const T* Ct = cell_tanh->data();
      // dz for every (b, t), then the weight gradient in one pass.
      std::vector<T> dz_all(B * S * G), w_t(G * H);
      T* DZ = dz_all.data();
      for (std::size_t k = 0; k < H; ++k)
        for (std::size_t j = 0; j < G; ++j) w_t[j * H + k] = W[k * G + j];
      const T* WT = w_t.data();
      parallel_for(
          B,
          [=](std::size_t b0, std::size_t b1) {
            std::vector<T> dc(H, T{0}), dh_next(H, T{0});
            for (std::size_t b = b0; b < b1; ++b) {
              std::fill(dh_next.begin(), dh_next.end(), T{0});
              std::fill(dc.begin(), dc.end(), T{0});
              for (std::size_t t = S; t-- > 0;) {
                const T* a = Z + (b * S + t) * G;
                const T* tcs = Ct + (b * S + t) * H;
                const T* g_out = GH + (b * S + t) * H;
                T* dz = DZ + (b * S + t) * G;
                for (std::size_t k = 0; k < H; ++k) {
                  const T i = a[k], f = a[H + k], g = a[2 * H + k], o = a[3 * H + k];
                  const T tc = tcs[k];
                  const T dhk = g_out[k] + dh_next[k];
                  const T dck = dc[k] + dhk * o * (T{1} - tc * tc);
                  const T c_prev = t > 0 ? Cs[(b * S + t - 1) * H + k] : T{0};
                  dz[k] = dck * g * i * (T{1} - i);
                  dz[H + k] = dck * c_prev * f * (T{1} - f);
                  dz[2 * H + k] = dck * i * (T{1} - g * g);
                  dz[3 * H + k] = dhk * tc * o * (T{1} - o);
                  dc[k] = dck * f;
                }
                std::fill(dh_next.begin(), dh_next.end(), T{0});
                for (std::size_t j = 0; j < G; ++j) {
                  const T d = dz[j];
                  const T* wt = WT + j * H;
                  for (std::size_t k = 0; k < H; ++k) dh_next[k] += d * wt[k];
                }
              }
            }
          },
          4);
      if (projected.requires_grad()) {
        auto gp = projected.grad_mut();
        for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += DZ[i];
      }
      if (recurrent_weight.requires_grad()) {
        T* GW = recurrent_weight.grad_mut().data();
        parallel_for(
            H,
            [=](std::size_t k0, std::size_t k1) {
              for (std::size_t b = 0; b < B; ++b)
                for (std::size_t t = 1; t < S; ++t) {
                  const T* h = Hs + (b * S + t - 1) * H;
                  const T* dz = DZ + (b * S + t) * G;
                  for (std::size_t k = k0; k < k1; ++k) {
                    const T hk = h[k];
                    T* gw = GW + k * G;
                    for (std::size_t j = 0; j < G; ++j) gw[j] += hk * dz[j];
                  }
                }
            },
            4);
      }
    });
  }
  return out;
}

#define IDSNET_INSTANTIATE_NN_OPS(T)                                                                        \
  template Tensor<T> conv1d(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                \
  template Tensor<T> max_pool1d(Tape<T>&, const Tensor<T>&, std::size_t);                                    \
  template Tensor<T> batch_norm(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&, \
                                Tensor<T>&, const BatchNormConfig<T>&);                                     \
  template SoftmaxCrossEntropy<T> softmax_cross_entropy(Tape<T>&, const Tensor<T>&, const Tensor<T>&);      \
  template Tensor<T> lstm_recurrence(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                         \
  template Tensor<T> softmax(const Tensor<T>&);

IDSNET_INSTANTIATE_NN_OPS(float)
IDSNET_INSTANTIATE_NN_OPS(double)

}  // namespace idsnet::ops
