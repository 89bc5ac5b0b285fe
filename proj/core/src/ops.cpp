#include "idsnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "idsnet/errors.hpp"
#include "idsnet/parallel.hpp"

namespace idsnet::ops {

namespace {

template <typename T>
bool tracks(const Tape<T>& tape, std::initializer_list<const Tensor<T>*> inputs) {
  if (!tape.recording()) return false;
  for (auto* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

[[noreturn]] void shape_fail(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

// Maps every linear index of `out` to the linear index of the broadcast
// source `in`. Empty result means the shapes are identical.
std::vector<std::size_t> broadcast_map(const Shape& out, const Shape& in) {
  if (out == in) return {};
  const std::size_t n = shape_size(out);
  const std::size_t m = shape_size(in);
  std::vector<std::size_t> map(n);
  // Fast path: `in` equals the trailing axes of `out`.
  bool suffix = in.size() <= out.size();
  for (std::size_t i = 0; suffix && i < in.size(); ++i)
    suffix = in[in.size() - 1 - i] == out[out.size() - 1 - i];
  if (suffix) {
    for (std::size_t i = 0; i < n; ++i) map[i] = m ? i % m : 0;
    return map;
  }
  const std::size_t rank = out.size();
  std::vector<std::size_t> stride(rank, 0);
  std::size_t s = 1;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const std::size_t axis_in = in.size() - 1 - i;
    const std::size_t axis_out = rank - 1 - i;
    stride[axis_out] = in[axis_in] == 1 ? 0 : s;
    s *= in[axis_in];
  }
  std::vector<std::size_t> idx(rank, 0);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    map[i] = offset;
    for (std::size_t ax = rank; ax-- > 0;) {
      ++idx[ax];
      offset += stride[ax];
      if (idx[ax] < out[ax]) break;
      offset -= stride[ax] * idx[ax];
      idx[ax] = 0;
    }
  }
  return map;
}

inline std::size_t at(const std::vector<std::size_t>& map, std::size_t i) { return map.empty() ? i : map[i]; }

// Shared implementation of the broadcasting binary primitives. `da` and `db`
// give the local partial derivatives from (a, b).
template <typename T, typename F, typename DA, typename DB>
Tensor<T> binary(Tape<T>& tape, const char* op, const Tensor<T>& a, const Tensor<T>& b, F f, DA da, DB db) {
  const Shape shape = broadcast_shape(a.shape(), b.shape(), op);
  auto ma = std::make_shared<std::vector<std::size_t>>(broadcast_map(shape, a.shape()));
  auto mb = std::make_shared<std::vector<std::size_t>>(broadcast_map(shape, b.shape()));
  Tensor<T> out(shape);
  auto ov = out.values();
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = f(av[at(*ma, i)], bv[at(*mb, i)]);
  if (tracks(tape, {&a, &b})) {
    out.set_requires_grad();
    tape.record(op, [a, b, out, ma, mb, da, db]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      const auto av = a.values();
      const auto bv = b.values();
      if (a.requires_grad()) {
        auto ga = a.grad_mut();
        for (std::size_t i = 0; i < g.size(); ++i) {
          const auto ia = at(*ma, i);
          ga[ia] += g[i] * da(av[ia], bv[at(*mb, i)]);
        }
      }
      if (b.requires_grad()) {
        auto gb = b.grad_mut();
        for (std::size_t i = 0; i < g.size(); ++i) {
          const auto ib = at(*mb, i);
          gb[ib] += g[i] * db(av[at(*ma, i)], bv[ib]);
        }
      }
    });
  }
  return out;
}

// Elementwise unary primitive; `df(x, y)` is dy/dx given input and output.
template <typename T, typename F, typename DF>
Tensor<T> unary(Tape<T>& tape, const char* op, const Tensor<T>& a, F f, DF df) {
  Tensor<T> out(a.shape());
  auto ov = out.values();
  const auto av = a.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = f(av[i]);
  if (tracks(tape, {&a})) {
    out.set_requires_grad();
    tape.record(op, [a, out, df]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      const auto av = a.values();
      const auto ov = out.values();
      auto ga = a.grad_mut();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(av[i], ov[i]);
    });
  }
  return out;
}

void check_axis(const char* op, const Shape& s, std::size_t axis) {
  if (axis >= s.size())
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for shape " + shape_str(s));
}

// outer x axis x inner decomposition around `axis`.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_at(const Shape& s, std::size_t axis) {
  AxisSplit out;
  for (std::size_t i = 0; i < axis; ++i) out.outer *= s[i];
  out.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) out.inner *= s[i];
  return out;
}

Shape drop_axis(const Shape& s, std::size_t axis) {
  Shape out = s;
  out.erase(out.begin() + static_cast<std::ptrdiff_t>(axis));
  return out;
}

}  // namespace

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t da = i < a.size() ? a[a.size() - 1 - i] : 1;
    const std::size_t db = i < b.size() ? b[b.size() - 1 - i] : 1;
    if (da != db && da != 1 && db != 1) shape_fail(op, a, b);
    out[rank - 1 - i] = da == 1 ? db : da;
  }
  return out;
}

template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  return binary(
      tape, "add", a, b, [](T x, T y) { return x + y; }, [](T, T) { return T{1}; }, [](T, T) { return T{1}; });
}

template <typename T>
Tensor<T> sub(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  return binary(
      tape, "sub", a, b, [](T x, T y) { return x - y; }, [](T, T) { return T{1}; }, [](T, T) { return T{-1}; });
}

template <typename T>
Tensor<T> mul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  return binary(
      tape, "mul", a, b, [](T x, T y) { return x * y; }, [](T, T y) { return y; }, [](T x, T) { return x; });
}

template <typename T>
Tensor<T> scale(Tape<T>& tape, const Tensor<T>& a, T factor) {
  return unary(
      tape, "scale", a, [factor](T x) { return x * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> broadcast_to(Tape<T>& tape, const Tensor<T>& a, const Shape& shape) {
  if (broadcast_shape(a.shape(), shape, "broadcast_to") != shape) shape_fail("broadcast_to", a.shape(), shape);
  auto map = std::make_shared<std::vector<std::size_t>>(broadcast_map(shape, a.shape()));
  Tensor<T> out(shape);
  auto ov = out.values();
  const auto av = a.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[at(*map, i)];
  if (tracks(tape, {&a})) {
    out.set_requires_grad();
    tape.record("broadcast_to", [a, out, map]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      auto ga = a.grad_mut();
      for (std::size_t i = 0; i < g.size(); ++i) ga[at(*map, i)] += g[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> matmul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) shape_fail("matmul", a.shape(), b.shape());
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor<T> out({m, n});
  {
    const T* A = a.values().data();
    const T* B = b.values().data();
    T* C = out.values().data();
    parallel_for(
        m,
        [=](std::size_t r0, std::size_t r1) {
          for (std::size_t i = r0; i < r1; ++i) {
            T* c = C + i * n;
            const T* arow = A + i * k;
            for (std::size_t p = 0; p < k; ++p) {
              const T av = arow[p];
              const T* brow = B + p * n;
              for (std::size_t j = 0; j < n; ++j) c[j] += av * brow[j];
            }
          }
        },
        16);
  }
  if (tracks(tape, {&a, &b})) {
    out.set_requires_grad();
    tape.record("matmul", [a, b, out, m, k, n]() mutable {
      if (!out.has_grad()) return;
      const T* G = out.grad().data();
      const T* A = a.values().data();
      const T* B = b.values().data();
      if (a.requires_grad()) {
        T* GA = a.grad_mut().data();
        parallel_for(
            m,
            [=](std::size_t r0, std::size_t r1) {
              for (std::size_t i = r0; i < r1; ++i) {
                const T* g = G + i * n;
                for (std::size_t p = 0; p < k; ++p) {
                  const T* brow = B + p * n;
                  T acc{0};
                  for (std::size_t j = 0; j < n; ++j) acc += g[j] * brow[j];
                  GA[i * k + p] += acc;
                }
              }
            },
            16);
      }
      if (b.requires_grad()) {
        T* GB = b.grad_mut().data();
        parallel_for(
            k,
            [=](std::size_t p0, std::size_t p1) {
              for (std::size_t i = 0; i < m; ++i) {
                const T* g = G + i * n;
                for (std::size_t p = p0; p < p1; ++p) {
                  const T av = A[i * k + p];
                  T* gb = GB + p * n;
                  for (std::size_t j = 0; j < n; ++j) gb[j] += av * g[j];
                }
              }
            },
            16);
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> reshape(Tape<T>& tape, const Tensor<T>& a, const Shape& shape) {
  if (shape_size(shape) != a.size()) shape_fail("reshape", a.shape(), shape);
  Tensor<T> out(shape, std::vector<T>(a.values().begin(), a.values().end()));
  if (tracks(tape, {&a})) {
    out.set_requires_grad();
    tape.record("reshape", [a, out]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      auto ga = a.grad_mut();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> slice(Tape<T>& tape, const Tensor<T>& a, std::size_t axis, std::size_t begin, std::size_t end) {
  check_axis("slice", a.shape(), axis);
  if (begin >= end || end > a.dim(axis))
    throw ShapeError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) + ") invalid for axis " +
                     std::to_string(axis) + " of shape " + shape_str(a.shape()));
  const auto sp = split_at(a.shape(), axis);
  const std::size_t len = end - begin;
  Shape shape = a.shape();
  shape[axis] = len;
  Tensor<T> out(shape);
  const auto av = a.values();
  auto ov = out.values();
  for (std::size_t o = 0; o < sp.outer; ++o)
    std::copy_n(av.begin() + static_cast<std::ptrdiff_t>((o * sp.extent + begin) * sp.inner), len * sp.inner,
                ov.begin() + static_cast<std::ptrdiff_t>(o * len * sp.inner));
  if (tracks(tape, {&a})) {
    out.set_requires_grad();
    tape.record("slice", [a, out, sp, begin, len]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      auto ga = a.grad_mut();
      for (std::size_t o = 0; o < sp.outer; ++o) {
        const std::size_t src = o * len * sp.inner;
        const std::size_t dst = (o * sp.extent + begin) * sp.inner;
        for (std::size_t i = 0; i < len * sp.inner; ++i) ga[dst + i] += g[src + i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> concat(Tape<T>& tape, std::span<const Tensor<T>> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& first = parts.front().shape();
  check_axis("concat", first, axis);
  Shape shape = first;
  shape[axis] = 0;
  bool grad = false;
  for (const auto& p : parts) {
    if (p.rank() != first.size()) shape_fail("concat", first, p.shape());
    for (std::size_t i = 0; i < first.size(); ++i)
      if (i != axis && p.dim(i) != first[i]) shape_fail("concat", first, p.shape());
    shape[axis] += p.dim(axis);
    grad = grad || p.requires_grad();
  }
  const auto sp = split_at(shape, axis);
  Tensor<T> out(shape);
  auto ov = out.values();
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const std::size_t len = p.dim(axis);
    const auto pv = p.values();
    for (std::size_t o = 0; o < sp.outer; ++o)
      std::copy_n(pv.begin() + static_cast<std::ptrdiff_t>(o * len * sp.inner), len * sp.inner,
                  ov.begin() + static_cast<std::ptrdiff_t>((o * sp.extent + offset) * sp.inner));
    offset += len;
  }
  if (tape.recording() && grad) {
    out.set_requires_grad();
    std::vector<Tensor<T>> held(parts.begin(), parts.end());
    tape.record("concat", [held, out, sp, offsets, axis]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      for (std::size_t k = 0; k < held.size(); ++k) {
        auto& p = held[k];
        if (!p.requires_grad()) continue;
        const std::size_t len = p.dim(axis);
        auto gp = p.grad_mut();
        for (std::size_t o = 0; o < sp.outer; ++o) {
          const std::size_t src = (o * sp.extent + offsets[k]) * sp.inner;
          const std::size_t dst = o * len * sp.inner;
          for (std::size_t i = 0; i < len * sp.inner; ++i) gp[dst + i] += g[src + i];
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> reduce_sum(Tape<T>& tape, const Tensor<T>& a) {
  T acc{0};
  for (auto v : a.values()) acc += v;
  auto out = Tensor<T>::scalar(acc);
  if (tracks(tape, {&a})) {
    out.set_requires_grad();
    tape.record("reduce_sum", [a, out]() mutable {
      if (!out.has_grad()) return;
      const T g = out.grad()[0];
      for (auto& x : a.grad_mut()) x += g;
    });
  }
  return out;
}

template <typename T>
Tensor<T> reduce_sum(Tape<T>& tape, const Tensor<T>& a, std::size_t axis) {
  check_axis("reduce_sum", a.shape(), axis);
  const auto sp = split_at(a.shape(), axis);
  Tensor<T> out(drop_axis(a.shape(), axis));
  const auto av = a.values();
  auto ov = out.values();
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t e = 0; e < sp.extent; ++e)
      for (std::size_t i = 0; i < sp.inner; ++i) ov[o * sp.inner + i] += av[(o * sp.extent + e) * sp.inner + i];
  if (tracks(tape, {&a})) {
    out.set_requires_grad();
    tape.record("reduce_sum", [a, out, sp]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      auto ga = a.grad_mut();
      for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t e = 0; e < sp.extent; ++e)
          for (std::size_t i = 0; i < sp.inner; ++i) ga[(o * sp.extent + e) * sp.inner + i] += g[o * sp.inner + i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> reduce_max(Tape<T>& tape, const Tensor<T>& a) {
  if (a.size() == 0) throw ShapeError("reduce_max: empty tensor");
  const auto av = a.values();
  std::size_t best = 0;
  for (std::size_t i = 1; i < av.size(); ++i)
    if (av[i] > av[best]) best = i;
  auto out = Tensor<T>::scalar(av[best]);
  if (tracks(tape, {&a})) {
    out.set_requires_grad();
    tape.record("reduce_max", [a, out, best]() mutable {
      if (!out.has_grad()) return;
      a.grad_mut()[best] += out.grad()[0];
    });
  }
  return out;
}

template <typename T>
Tensor<T> reduce_max(Tape<T>& tape, const Tensor<T>& a, std::size_t axis) {
  check_axis("reduce_max", a.shape(), axis);
  const auto sp = split_at(a.shape(), axis);
  if (sp.extent == 0) throw ShapeError("reduce_max: empty axis in shape " + shape_str(a.shape()));
  Tensor<T> out(drop_axis(a.shape(), axis));
  auto arg = std::make_shared<std::vector<std::size_t>>(out.size());
  const auto av = a.values();
  auto ov = out.values();
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t i = 0; i < sp.inner; ++i) {
      std::size_t best = o * sp.extent * sp.inner + i;
      for (std::size_t e = 1; e < sp.extent; ++e) {
        const std::size_t idx = (o * sp.extent + e) * sp.inner + i;
        if (av[idx] > av[best]) best = idx;
      }
      ov[o * sp.inner + i] = av[best];
      (*arg)[o * sp.inner + i] = best;
    }
  if (tracks(tape, {&a})) {
    out.set_requires_grad();
    tape.record("reduce_max", [a, out, arg]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      auto ga = a.grad_mut();
      for (std::size_t i = 0; i < g.size(); ++i) ga[(*arg)[i]] += g[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> exp(Tape<T>& tape, const Tensor<T>& a) {
  return unary(
      tape, "exp", a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> log(Tape<T>& tape, const Tensor<T>& a) {
  return unary(
      tape, "log", a, [](T x) { return std::log(x); }, [](T x, T) { return T{1} / x; });
}

template <typename T>
Tensor<T> sigmoid(Tape<T>& tape, const Tensor<T>& a) {
  return unary(
      tape, "sigmoid", a,
      [](T x) {
        if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
        const T e = std::exp(x);
        return e / (T{1} + e);
      },
      [](T, T y) { return y * (T{1} - y); });
}

template <typename T>
Tensor<T> tanh(Tape<T>& tape, const Tensor<T>& a) {
  return unary(
      tape, "tanh", a, [](T x) { return std::tanh(x); }, [](T, T y) { return T{1} - y * y; });
}

template <typename T>
Tensor<T> relu(Tape<T>& tape, const Tensor<T>& a) {
  return unary(
      tape, "relu", a, [](T x) { return x > T{0} || std::isnan(x) ? x : T{0}; }, [](T x, T) { return x > T{0} ? T{1} : T{0}; });
}

#define IDSNET_INSTANTIATE_OPS(T)                                                                   \
  template Tensor<T> add(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> sub(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> mul(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> scale(Tape<T>&, const Tensor<T>&, T);                                          \
  template Tensor<T> broadcast_to(Tape<T>&, const Tensor<T>&, const Shape&);                        \
  template Tensor<T> matmul(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> reshape(Tape<T>&, const Tensor<T>&, const Shape&);                             \
  template Tensor<T> slice(Tape<T>&, const Tensor<T>&, std::size_t, std::size_t, std::size_t);      \
  template Tensor<T> concat(Tape<T>&, std::span<const Tensor<T>>, std::size_t);                     \
  template Tensor<T> reduce_sum(Tape<T>&, const Tensor<T>&);                                        \
  template Tensor<T> reduce_sum(Tape<T>&, const Tensor<T>&, std::size_t);                           \
  template Tensor<T> reduce_max(Tape<T>&, const Tensor<T>&);                                        \
  template Tensor<T> reduce_max(Tape<T>&, const Tensor<T>&, std::size_t);                           \
  template Tensor<T> exp(Tape<T>&, const Tensor<T>&);                                               \
  template Tensor<T> log(Tape<T>&, const Tensor<T>&);                                               \
  template Tensor<T> sigmoid(Tape<T>&, const Tensor<T>&);                                           \
  template Tensor<T> tanh(Tape<T>&, const Tensor<T>&);                                              \
  template Tensor<T> relu(Tape<T>&, const Tensor<T>&);

IDSNET_INSTANTIATE_OPS(float)
IDSNET_INSTANTIATE_OPS(double)

}  // namespace idsnet::ops
