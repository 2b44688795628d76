#include "atagan/adam.hpp"

#include <cmath>
#include <string>

namespace atagan {

AdamState AdamState::for_params(std::span<const Tensor> params) {
  AdamState s;
  for (const Tensor& p : params) {
    s.m.emplace_back(p.numel(), 0.0);
    s.v.emplace_back(p.numel(), 0.0);
  }
  return s;
}

void adam_step(std::span<const Tensor> params, AdamState& state, const AdamOptions& options) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adam_step: optimizer state tracks " + std::to_string(state.m.size()) +
                     " tensors, got " + std::to_string(params.size()));
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(options.beta1, t);
  const double bc2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor p = params[i];
    auto values = p.data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (m.size() != values.size() || v.size() != values.size()) {
      throw ShapeError("adam_step: moment buffer size mismatch for tensor " + std::to_string(i));
    }
    const auto g = p.grad();
    const bool has_grad = !g.empty();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double gj = has_grad ? g[j] : 0.0;
      m[j] = options.beta1 * m[j] + (1.0 - options.beta1) * gj;
      v[j] = options.beta2 * v[j] + (1.0 - options.beta2) * gj * gj;
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      values[j] -= options.lr * m_hat / (std::sqrt(v_hat) + options.eps);
    }
  }
}

}  // namespace atagan
