#include "atagan/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "gemm.hpp"

namespace atagan {

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  }
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) +
                     ", got shape " + shape_str(t.shape()));
  }
}

// Elementwise unary op whose derivative is a function of (x, y).
template <class F, class D>
Tensor unary(const char* name, const Tensor& x, F f, D dfdx) {
  auto xs = x.data();
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = f(xs[i]);
  return record_op(x.shape(), std::move(out), name, {x},
                   [x, dfdx](const detail::TensorImpl& o, std::span<const double> g) {
                     auto gx = grad_accumulator(x);
                     auto xv = x.data();
                     for (std::size_t i = 0; i < gx.size(); ++i) {
                       gx[i] += g[i] * dfdx(xv[i], o.data[i]);
                     }
                   });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  auto as = a.data(), bs = b.data();
  std::vector<double> out(as.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = as[i] + bs[i];
  return record_op(a.shape(), std::move(out), "add", {a, b},
                   [a, b](const detail::TensorImpl&, std::span<const double> g) {
                     for (const Tensor* t : {&a, &b}) {
                       if (!t->requires_grad()) continue;
                       auto gt = grad_accumulator(*t);
                       for (std::size_t i = 0; i < gt.size(); ++i) gt[i] += g[i];
                     }
                   });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  auto as = a.data(), bs = b.data();
  std::vector<double> out(as.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = as[i] - bs[i];
  return record_op(a.shape(), std::move(out), "sub", {a, b},
                   [a, b](const detail::TensorImpl&, std::span<const double> g) {
                     if (a.requires_grad()) {
                       auto ga = grad_accumulator(a);
                       for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
                     }
                     if (b.requires_grad()) {
                       auto gb = grad_accumulator(b);
                       for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i];
                     }
                   });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  auto as = a.data(), bs = b.data();
  std::vector<double> out(as.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = as[i] * bs[i];
  return record_op(a.shape(), std::move(out), "mul", {a, b},
                   [a, b](const detail::TensorImpl&, std::span<const double> g) {
                     if (a.requires_grad()) {
                       auto ga = grad_accumulator(a);
                       auto bv = b.data();
                       for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * bv[i];
                     }
                     if (b.requires_grad()) {
                       auto gb = grad_accumulator(b);
                       auto av = a.data();
                       for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * av[i];
                     }
                   });
}

Tensor scale(const Tensor& a, double s) {
  return unary("scale", a, [s](double x) { return s * x; },
               [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary("add_scalar", a, [s](double x) { return x + s; },
               [](double, double) { return 1.0; });
}

Tensor log(const Tensor& a) {
  return unary("log", a, [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  if (!(lo <= hi)) throw ShapeError("clamp: lo must not exceed hi");
  return unary("clamp", a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
               [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary("leaky_relu", x, [slope](double v) { return v > 0.0 ? v : slope * v; },
               [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Tensor sigmoid(const Tensor& x) {
  return unary("sigmoid", x,
               [](double v) {
                 // Branch keeps exp() argument non-positive.
                 if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
                 const double e = std::exp(v);
                 return e / (1.0 + e);
               },
               [](double, double y) { return y * (1.0 - y); });
}

Tensor softmax(const Tensor& logits) {
  if (logits.rank() != 1 && logits.rank() != 2) {
    throw ShapeError("softmax: expected [C] or [N,C], got " + shape_str(logits.shape()));
  }
  const std::size_t cols = logits.shape().back();
  const std::size_t rows = logits.numel() / std::max<std::size_t>(cols, 1);
  auto x = logits.data();
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * cols;
    double* yr = out.data() + r * cols;
    const double mx = *std::max_element(xr, xr + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      yr[c] = std::exp(xr[c] - mx);
      z += yr[c];
    }
    for (std::size_t c = 0; c < cols; ++c) yr[c] /= z;
  }
  return record_op(logits.shape(), std::move(out), "softmax", {logits},
                   [logits, rows, cols](const detail::TensorImpl& o,
                                        std::span<const double> g) {
                     auto gx = grad_accumulator(logits);
                     for (std::size_t r = 0; r < rows; ++r) {
                       const double* y = o.data.data() + r * cols;
                       const double* gr = g.data() + r * cols;
                       double dot = 0.0;
                       for (std::size_t c = 0; c < cols; ++c) dot += gr[c] * y[c];
                       for (std::size_t c = 0; c < cols; ++c) {
                         gx[r * cols + c] += y[c] * (gr[c] - dot);
                       }
                     }
                   });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return record_op({1}, {s}, "sum", {a},
                   [a](const detail::TensorImpl&, std::span<const double> g) {
                     auto ga = grad_accumulator(a);
                     for (auto& v : ga) v += g[0];
                   });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw ShapeError("mean: empty tensor");
  const double n = static_cast<double>(a.numel());
  double s = 0.0;
  for (double v : a.data()) s += v;
  return record_op({1}, {s / n}, "mean", {a},
                   [a, n](const detail::TensorImpl&, std::span<const double> g) {
                     auto ga = grad_accumulator(a);
                     const double d = g[0] / n;
                     for (auto& v : ga) v += d;
                   });
}

Tensor global_avg_pool(const Tensor& x) {
  require_rank("global_avg_pool", x, 4);
  const std::size_t n = x.dim(0), k = x.dim(1), hw = x.dim(2) * x.dim(3);
  if (hw == 0) throw ShapeError("global_avg_pool: zero spatial size");
  auto xs = x.data();
  std::vector<double> out(n * k);
  for (std::size_t i = 0; i < n * k; ++i) {
    double s = 0.0;
    for (std::size_t p = 0; p < hw; ++p) s += xs[i * hw + p];
    out[i] = s / static_cast<double>(hw);
  }
  return record_op({n, k}, std::move(out), "global_avg_pool", {x},
                   [x, n, k, hw](const detail::TensorImpl&, std::span<const double> g) {
                     auto gx = grad_accumulator(x);
                     for (std::size_t i = 0; i < n * k; ++i) {
                       const double d = g[i] / static_cast<double>(hw);
                       for (std::size_t p = 0; p < hw; ++p) gx[i * hw + p] += d;
                     }
                   });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " +
                     shape_str(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return record_op(std::move(shape), std::move(out), "reshape", {a},
                   [a](const detail::TensorImpl&, std::span<const double> g) {
                     auto ga = grad_accumulator(a);
                     for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
                   });
}

Tensor broadcast_rows(const Tensor& row, std::size_t rows) {
  require_rank("broadcast_rows", row, 1);
  const std::size_t m = row.dim(0);
  auto r = row.data();
  std::vector<double> out(rows * m);
  for (std::size_t i = 0; i < rows; ++i) std::copy(r.begin(), r.end(), out.begin() + i * m);
  return record_op({rows, m}, std::move(out), "broadcast_rows", {row},
                   [row, rows, m](const detail::TensorImpl&, std::span<const double> g) {
                     auto gr = grad_accumulator(row);
                     for (std::size_t i = 0; i < rows; ++i) {
                       for (std::size_t j = 0; j < m; ++j) gr[j] += g[i * m + j];
                     }
                   });
}

Tensor transpose(const Tensor& a) {
  require_rank("transpose", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  auto as = a.data();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = as[i * n + j];
  return record_op({n, m}, std::move(out), "transpose", {a},
                   [a, m, n](const detail::TensorImpl&, std::span<const double> g) {
                     auto ga = grad_accumulator(a);
                     for (std::size_t i = 0; i < m; ++i)
                       for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
                   });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a.shape()) +
                     " x " + shape_str(b.shape()));
  }
  std::vector<double> out(m * n);
  detail::gemm(false, false, m, n, k, a.data().data(), b.data().data(), out.data(), false);
  return record_op({m, n}, std::move(out), "matmul", {a, b},
                   [a, b, m, k, n](const detail::TensorImpl&, std::span<const double> g) {
                     if (a.requires_grad()) {  // dA = dC * B^T
                       detail::gemm(false, true, m, k, n, g.data(), b.data().data(),
                                    grad_accumulator(a).data(), true);
                     }
                     if (b.requires_grad()) {  // dB = A^T * dC
                       detail::gemm(true, false, k, n, m, a.data().data(), g.data(),
                                    grad_accumulator(b).data(), true);
                     }
                   });
}

Tensor bmm(const Tensor& a, const Tensor& b) {
  require_rank("bmm", a, 3);
  require_rank("bmm", b, 3);
  const std::size_t batch = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
  if (b.dim(0) != batch || b.dim(1) != k) {
    throw ShapeError("bmm: incompatible shapes " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  }
  std::vector<double> out(batch * m * n);
  for (std::size_t i = 0; i < batch; ++i) {
    detail::gemm(false, false, m, n, k, a.data().data() + i * m * k,
                 b.data().data() + i * k * n, out.data() + i * m * n, false);
  }
  return record_op({batch, m, n}, std::move(out), "bmm", {a, b},
                   [a, b, batch, m, k, n](const detail::TensorImpl&,
                                          std::span<const double> g) {
                     for (std::size_t i = 0; i < batch; ++i) {
                       const double* gi = g.data() + i * m * n;
                       if (a.requires_grad()) {
                         detail::gemm(false, true, m, k, n, gi, b.data().data() + i * k * n,
                                      grad_accumulator(a).data() + i * m * k, true);
                       }
                       if (b.requires_grad()) {
                         detail::gemm(true, false, k, n, m, a.data().data() + i * m * k, gi,
                                      grad_accumulator(b).data() + i * k * n, true);
                       }
                     }
                   });
}

namespace {

struct ConvDims {
  std::size_t n, c, h, w;      // image side
  std::size_t kh, kw;
  std::size_t stride, pad;     // leading pad; the trailing pad only sizes oh/ow
  std::size_t oh, ow;          // conv2d output side
  std::size_t rows() const { return c * kh * kw; }
  std::size_t cols() const { return n * oh * ow; }
};

// Image [N,C,H,W] -> columns [C*kh*kw, N*oh*ow].
void im2col(const ConvDims& d, const double* img, double* cols) {
  const std::size_t ncols = d.cols(), plane = d.oh * d.ow;
  const auto h = static_cast<std::ptrdiff_t>(d.h), w = static_cast<std::ptrdiff_t>(d.w);
  const auto pad = static_cast<std::ptrdiff_t>(d.pad);
  for (std::size_t c = 0; c < d.c; ++c)
    for (std::size_t ky = 0; ky < d.kh; ++ky)
      for (std::size_t kx = 0; kx < d.kw; ++kx) {
        double* row = cols + ((c * d.kh + ky) * d.kw + kx) * ncols;
        for (std::size_t n = 0; n < d.n; ++n) {
          const double* src = img + (n * d.c + c) * d.h * d.w;
          double* dst = row + n * plane;
          for (std::size_t oy = 0; oy < d.oh; ++oy) {
            const auto iy = static_cast<std::ptrdiff_t>(oy * d.stride + ky) - pad;
            double* drow = dst + oy * d.ow;
            if (iy < 0 || iy >= h) {
              std::fill(drow, drow + d.ow, 0.0);
              continue;
            }
            const double* srow = src + iy * w;
            for (std::size_t ox = 0; ox < d.ow; ++ox) {
              const auto ix = static_cast<std::ptrdiff_t>(ox * d.stride + kx) - pad;
              drow[ox] = (ix < 0 || ix >= w) ? 0.0 : srow[ix];
            }
          }
        }
      }
}

// Adjoint of im2col: accumulates columns back into image [N,C,H,W].
void col2im(const ConvDims& d, const double* cols, double* img) {
  const std::size_t ncols = d.cols(), plane = d.oh * d.ow;
  const auto h = static_cast<std::ptrdiff_t>(d.h), w = static_cast<std::ptrdiff_t>(d.w);
  const auto pad = static_cast<std::ptrdiff_t>(d.pad);
  for (std::size_t c = 0; c < d.c; ++c)
    for (std::size_t ky = 0; ky < d.kh; ++ky)
      for (std::size_t kx = 0; kx < d.kw; ++kx) {
        const double* row = cols + ((c * d.kh + ky) * d.kw + kx) * ncols;
        for (std::size_t n = 0; n < d.n; ++n) {
          double* dst = img + (n * d.c + c) * d.h * d.w;
          const double* src = row + n * plane;
          for (std::size_t oy = 0; oy < d.oh; ++oy) {
            const auto iy = static_cast<std::ptrdiff_t>(oy * d.stride + ky) - pad;
            if (iy < 0 || iy >= h) continue;
            double* drow = dst + iy * w;
            const double* srow = src + oy * d.ow;
            for (std::size_t ox = 0; ox < d.ow; ++ox) {
              const auto ix = static_cast<std::ptrdiff_t>(ox * d.stride + kx) - pad;
              if (ix >= 0 && ix < w) drow[ix] += srow[ox];
            }
          }
        }
      }
}

// [N,F,P] <-> [F,N*P]
detail::Scratch to_channel_major(std::span<const double> x, std::size_t n,
                                 std::size_t f, std::size_t p) {
  detail::Scratch out(x.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < f; ++c)
      std::copy_n(x.data() + (i * f + c) * p, p, out.data() + (c * n + i) * p);
  return out;
}

void add_from_channel_major(std::span<const double> x, std::size_t n, std::size_t f,
                            std::size_t p, std::span<double> out) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < f; ++c) {
      const double* src = x.data() + (c * n + i) * p;
      double* dst = out.data() + (i * f + c) * p;
      for (std::size_t j = 0; j < p; ++j) dst[j] += src[j];
    }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, ConvGeometry g) {
  require_rank("conv2d", input, 4);
  require_rank("conv2d", kernel, 4);
  if (g.stride == 0) throw ShapeError("conv2d: stride must be positive");
  if (kernel.dim(1) != input.dim(1)) {
    throw ShapeError("conv2d: kernel " + shape_str(kernel.shape()) +
                     " does not match input channels of " + shape_str(input.shape()));
  }
  ConvDims d{input.dim(0), input.dim(1), input.dim(2), input.dim(3),
             kernel.dim(2), kernel.dim(3), g.stride, g.padding, 0, 0};
  const std::size_t ph = d.h + g.pad_before() + g.pad_after();
  const std::size_t pw = d.w + g.pad_before() + g.pad_after();
  if (d.kh > ph || d.kw > pw || d.kh == 0 || d.kw == 0) {
    throw ShapeError("conv2d: kernel " + shape_str(kernel.shape()) +
                     " larger than padded input " + shape_str(input.shape()));
  }
  if ((ph - d.kh) % d.stride != 0 || (pw - d.kw) % d.stride != 0) {
    throw ShapeError("conv2d: non-integral output size for input " +
                     shape_str(input.shape()) + ", kernel " + shape_str(kernel.shape()) +
                     ", stride " + std::to_string(d.stride) + ", padding " +
                     std::to_string(g.pad_before()) + "/" + std::to_string(g.pad_after()));
  }
  d.oh = (ph - d.kh) / d.stride + 1;
  d.ow = (pw - d.kw) / d.stride + 1;
  const std::size_t f = kernel.dim(0), plane = d.oh * d.ow;

  detail::Scratch cols(d.rows() * d.cols());
  im2col(d, input.data().data(), cols.data());
  detail::Scratch tmp(f * d.cols());
  detail::gemm(false, false, f, d.cols(), d.rows(), kernel.data().data(), cols.data(),
               tmp.data(), false);
  std::vector<double> out(d.n * f * plane, 0.0);
  add_from_channel_major(tmp, d.n, f, plane, out);

  if (!kernel.requires_grad()) detail::Scratch().swap(cols);
  return record_op(
      {d.n, f, d.oh, d.ow}, std::move(out), "conv2d", {input, kernel},
      [input, kernel, d, f, plane, cols = std::move(cols)](
          const detail::TensorImpl&, std::span<const double> gout) {
        const auto gr = to_channel_major(gout, d.n, f, plane);
        if (kernel.requires_grad()) {  // dK = G * cols^T
          detail::gemm(false, true, f, d.rows(), d.cols(), gr.data(), cols.data(),
                       grad_accumulator(kernel).data(), true);
        }
        if (input.requires_grad()) {  // dcols = K^T * G
          detail::Scratch dcols(d.rows() * d.cols());
          detail::gemm(true, false, d.rows(), d.cols(), f, kernel.data().data(), gr.data(),
                       dcols.data(), false);
          col2im(d, dcols.data(), grad_accumulator(input).data());
        }
      });
}

Tensor conv2d_transpose(const Tensor& input, const Tensor& kernel, ConvGeometry g) {
  require_rank("conv2d_transpose", input, 4);
  require_rank("conv2d_transpose", kernel, 4);
  if (g.stride == 0) throw ShapeError("conv2d_transpose: stride must be positive");
  if (kernel.dim(0) != input.dim(1)) {
    throw ShapeError("conv2d_transpose: kernel " + shape_str(kernel.shape()) +
                     " does not match input channels of " + shape_str(input.shape()));
  }
  const std::size_t n = input.dim(0), f = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t c = kernel.dim(1), kh = kernel.dim(2), kw = kernel.dim(3);
  if (h == 0 || w == 0 || kh == 0 || kw == 0) {
    throw ShapeError("conv2d_transpose: empty input or kernel");
  }
  const std::size_t full_h = (h - 1) * g.stride + kh, full_w = (w - 1) * g.stride + kw;
  const std::size_t total_pad = g.pad_before() + g.pad_after();
  if (full_h <= total_pad || full_w <= total_pad) {
    throw ShapeError("conv2d_transpose: padding " + std::to_string(total_pad) +
                     " leaves no output for input " + shape_str(input.shape()) +
                     " and kernel " + shape_str(kernel.shape()));
  }
  // Geometry of the forward conv2d this op is the adjoint of.
  ConvDims d{n, c, full_h - total_pad, full_w - total_pad, kh, kw,
             g.stride, g.pad_before(), h, w};
  const std::size_t plane = h * w;

  auto xr = to_channel_major(input.data(), n, f, plane);
  detail::Scratch dcols(d.rows() * d.cols());
  detail::gemm(true, false, d.rows(), d.cols(), f, kernel.data().data(), xr.data(),
               dcols.data(), false);
  std::vector<double> out(n * c * d.h * d.w, 0.0);
  col2im(d, dcols.data(), out.data());

  if (!kernel.requires_grad()) detail::Scratch().swap(xr);
  return record_op(
      {n, c, d.h, d.w}, std::move(out), "conv2d_transpose", {input, kernel},
      [input, kernel, d, f, plane, xr = std::move(xr)](const detail::TensorImpl&,
                                                       std::span<const double> gout) {
        detail::Scratch gcols(d.rows() * d.cols());
        im2col(d, gout.data(), gcols.data());
        if (kernel.requires_grad()) {  // dK = X * gcols^T
          detail::gemm(false, true, f, d.rows(), d.cols(), xr.data(), gcols.data(),
                       grad_accumulator(kernel).data(), true);
        }
        if (input.requires_grad()) {  // dX = K * gcols
          detail::Scratch gx(f * d.cols());
          detail::gemm(false, false, f, d.cols(), d.rows(), kernel.data().data(),
                       gcols.data(), gx.data(), false);
          add_from_channel_major(gx, d.n, f, plane, grad_accumulator(input));
        }
      });
}

namespace {

struct Lerp {
  std::size_t i0, i1;
  double t;
};

std::vector<Lerp> align_corners_taps(std::size_t in, std::size_t out) {
  std::vector<Lerp> taps(out);
  for (std::size_t i = 0; i < out; ++i) {
    // Integer numerator keeps the last tap exactly on the last source pixel.
    const double src = out > 1 ? static_cast<double>(i * (in - 1)) /
                                     static_cast<double>(out - 1)
                               : 0.0;
    const auto i0 = std::min(static_cast<std::size_t>(src), in - 1);
    const std::size_t i1 = std::min(i0 + 1, in - 1);
    taps[i] = {i0, i1, src - static_cast<double>(i0)};
  }
  return taps;
}

}  // namespace

Tensor bilinear_resize(const Tensor& x, std::size_t out_h, std::size_t out_w) {
  require_rank("bilinear_resize", x, 4);
  if (out_h < 1 || out_w < 1) {
    throw ShapeError("bilinear_resize: output size must be at least 1x1");
  }
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h < 1 || w < 1) throw ShapeError("bilinear_resize: empty input plane");
  auto ty = align_corners_taps(h, out_h);
  auto tx = align_corners_taps(w, out_w);
  auto xs = x.data();
  std::vector<double> out(planes * out_h * out_w);
  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = xs.data() + p * h * w;
    double* dst = out.data() + p * out_h * out_w;
    for (std::size_t i = 0; i < out_h; ++i) {
      const Lerp& a = ty[i];
      for (std::size_t j = 0; j < out_w; ++j) {
        const Lerp& b = tx[j];
        const double top = (1.0 - b.t) * src[a.i0 * w + b.i0] + b.t * src[a.i0 * w + b.i1];
        const double bot = (1.0 - b.t) * src[a.i1 * w + b.i0] + b.t * src[a.i1 * w + b.i1];
        dst[i * out_w + j] = (1.0 - a.t) * top + a.t * bot;
      }
    }
  }
  return record_op({x.dim(0), x.dim(1), out_h, out_w}, std::move(out), "bilinear_resize", {x},
                   [x, planes, h, w, out_h, out_w, ty = std::move(ty), tx = std::move(tx)](
                       const detail::TensorImpl&, std::span<const double> g) {
                     auto gx = grad_accumulator(x);
                     for (std::size_t p = 0; p < planes; ++p) {
                       double* dst = gx.data() + p * h * w;
                       const double* gp = g.data() + p * out_h * out_w;
                       for (std::size_t i = 0; i < out_h; ++i) {
                         const Lerp& a = ty[i];
                         for (std::size_t j = 0; j < out_w; ++j) {
                           const Lerp& b = tx[j];
                           const double v = gp[i * out_w + j];
                           dst[a.i0 * w + b.i0] += (1.0 - a.t) * (1.0 - b.t) * v;
                           dst[a.i0 * w + b.i1] += (1.0 - a.t) * b.t * v;
                           dst[a.i1 * w + b.i0] += a.t * (1.0 - b.t) * v;
                           dst[a.i1 * w + b.i1] += a.t * b.t * v;
                         }
                       }
                     }
                   });
}

Tensor minmax_normalize(const Tensor& x, double eps) {
  if (x.rank() < 1 || x.dim(0) == 0) throw ShapeError("minmax_normalize: empty tensor");
  const std::size_t n = x.dim(0), per = x.numel() / n;
  if (per == 0) throw ShapeError("minmax_normalize: empty samples");
  auto xs = x.data();
  std::vector<double> out(xs.size());
  std::vector<std::size_t> arg_min(n), arg_max(n);
  std::vector<double> denom(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double* v = xs.data() + s * per;
    const auto lo = std::min_element(v, v + per);  // first occurrence
    const auto hi = std::max_element(v, v + per);
    arg_min[s] = static_cast<std::size_t>(lo - v);
    arg_max[s] = static_cast<std::size_t>(hi - v);
    denom[s] = (*hi - *lo) + eps;
    for (std::size_t i = 0; i < per; ++i) out[s * per + i] = (v[i] - *lo) / denom[s];
  }
  return record_op(x.shape(), std::move(out), "minmax_normalize", {x},
                   [x, n, per, arg_min = std::move(arg_min), arg_max = std::move(arg_max),
                    denom = std::move(denom)](const detail::TensorImpl& o,
                                              std::span<const double> g) {
                     auto gx = grad_accumulator(x);
                     for (std::size_t s = 0; s < n; ++s) {
                       const double* y = o.data.data() + s * per;
                       const double* gs = g.data() + s * per;
                       double* dst = gx.data() + s * per;
                       double to_min = 0.0, to_max = 0.0;
                       for (std::size_t i = 0; i < per; ++i) {
                         dst[i] += gs[i] / denom[s];
                         to_min += gs[i] * (y[i] - 1.0);
                         to_max -= gs[i] * y[i];
                       }
                       dst[arg_min[s]] += to_min / denom[s];
                       dst[arg_max[s]] += to_max / denom[s];
                     }
                   });
}

}  // namespace atagan
