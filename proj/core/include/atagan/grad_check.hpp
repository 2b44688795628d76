#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "atagan/tensor.hpp"

namespace atagan {

struct GradCheckOptions {
  double eps = 1e-5;
  double tol = 1e-4;
  /// Elements checked per tensor; 0 checks every element. Larger tensors are
  /// sampled without replacement from `seed`.
  std::size_t max_elements = 0;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  /// max |analytic - numeric| / max(1, |analytic| + |numeric|) over checked elements
  double max_error = 0.0;
  std::size_t checked = 0;
  bool passed = true;
  std::string worst;  // "tensor#i[j]: analytic a numeric n"
  std::vector<double> errors;
};

/// Central-difference check of every tensor in `wrt` against one reverse-mode
/// sweep of `f`, which must return a single-element tensor. The tensors are
/// perturbed in place and restored.
GradCheckReport grad_check(const std::function<Tensor()>& f, std::span<const Tensor> wrt,
                           const GradCheckOptions& options = {});

/// Single-input form: checks d f(x) / dx at the values of `x`.
GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                           double eps = 1e-5, double tol = 1e-4);

}  // namespace atagan
