#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "atagan/tensor.hpp"

namespace atagan {

struct AdamOptions {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment buffers mirroring a parameter list, plus step count.
struct AdamState {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  static AdamState for_params(std::span<const Tensor> params);
};

/// One bias-corrected Adam update of every tensor in `params` from its grad
/// buffer; a tensor without a grad buffer is updated with a zero gradient.
/// Grad buffers are left untouched.
void adam_step(std::span<const Tensor> params, AdamState& state, const AdamOptions& options);

}  // namespace atagan
