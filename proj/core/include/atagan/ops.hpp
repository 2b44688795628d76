#pragma once

#include <cstddef>
#include <optional>

#include "atagan/tensor.hpp"

// Differentiable tensor operations. Shapes must match exactly; there is no
// implicit broadcasting (see broadcast_rows for the explicit form).
namespace atagan {

// Elementwise
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor log(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);

// Activations
Tensor leaky_relu(const Tensor& x, double slope);
Tensor sigmoid(const Tensor& x);
/// Softmax along the last axis of a [C] or [N,C] tensor, max-subtracted.
Tensor softmax(const Tensor& logits);

// Reductions
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// [N,K,h,w] -> [N,K] spatial mean.
Tensor global_avg_pool(const Tensor& x);

// Shape
Tensor reshape(const Tensor& a, Shape shape);
/// [M] -> [rows,M] by row replication.
Tensor broadcast_rows(const Tensor& row, std::size_t rows);
/// [m,n] -> [n,m]
Tensor transpose(const Tensor& a);

// Linear algebra
/// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);
/// [B,m,k] x [B,k,n] -> [B,m,n]
Tensor bmm(const Tensor& a, const Tensor& b);

/// Zero padding of `padding` before and `padding_end` (defaults to
/// `padding`) after each spatial axis. Uneven padding lets a 3x3 stride-2
/// layer halve an even input exactly.
struct ConvGeometry {
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::optional<std::size_t> padding_end;

  std::size_t pad_before() const { return padding; }
  std::size_t pad_after() const { return padding_end.value_or(padding); }
};

/// Cross-correlation (no kernel flip). input [N,C,H,W], kernel [F,C,kh,kw]
/// -> [N,F,H',W'] with H' = (H + pad_before + pad_after - kh)/s + 1, which
/// must be integral.
Tensor conv2d(const Tensor& input, const Tensor& kernel, ConvGeometry g);

/// Adjoint of conv2d with the same kernel and geometry. input [N,F,H,W],
/// kernel [F,C,kh,kw] -> [N,C,(H-1)s + kh - pad_before - pad_after, ...].
Tensor conv2d_transpose(const Tensor& input, const Tensor& kernel, ConvGeometry g);

/// Align-corners bilinear resampling of [N,C,h,w] to [N,C,out_h,out_w].
Tensor bilinear_resize(const Tensor& x, std::size_t out_h, std::size_t out_w);

/// Per-sample (leading axis) (v - min) / (max - min + eps). Subgradients of
/// min/max go to the first extremal element in row-major order.
Tensor minmax_normalize(const Tensor& x, double eps);

}  // namespace atagan
