#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "idsnet/tape.hpp"
#include "idsnet/tensor.hpp"

namespace idsnet {

// A scalar-valued function of tensors evaluated on the given tape.
using ScalarFn = std::function<Tensor<double>(Tape<double>&)>;

// Compares reverse-mode gradients with central differences
// g_fd = (f(x + h e) - f(x - h e)) / 2h and returns the largest
// |g_ad - g_fd| / max(1, |g_ad|, |g_fd|) over the checked elements of
// `inputs`. At most `max_per_tensor` elements of each tensor are checked
// (chosen with `seed`); 0 checks all of them. Throws NumericalError if any
// evaluation is non-finite.
double gradcheck(const ScalarFn& f, std::span<Tensor<double>> inputs, double h = 1e-5,
                 std::size_t max_per_tensor = 0, std::uint64_t seed = 0);

// Single-input convenience form: f receives the tensor being perturbed.
double gradcheck(const std::function<Tensor<double>(Tape<double>&, const Tensor<double>&)>& f,
                 const Tensor<double>& x, double h = 1e-5);

}  // namespace idsnet
