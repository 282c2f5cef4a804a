// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "lsrgan/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace lsrgan::ops {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

template <typename T>
using NodePtr = typename Tensor<T>::NodePtr;

[[noreturn]] void shape_error(const std::string& op, const std::string& what) {
  throw ShapeError(op + ": " + what);
}

template <typename T>
void require_rank(const char* op, const Tensor<T>& t, std::size_t rank, const char* name) {
  if (t.rank() != rank) {
    shape_error(op, std::string(name) + " must have rank " + std::to_string(rank) + ", got " +
                        to_string(t.shape()));
  }
}

enum class Broadcast { kNone, kLeftScalar, kRightScalar };

template <typename T>
Broadcast binary_mode(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() == b.shape()) return Broadcast::kNone;
  if (b.numel() == 1) return Broadcast::kRightScalar;
  if (a.numel() == 1) return Broadcast::kLeftScalar;
  shape_error(op, "shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
}

// Elementwise binary op. `df` returns the pair (d out/d x, d out/d y).
template <typename T, typename F, typename DF>
Tensor<T> binary(const char* op, const Tensor<T>& a, const Tensor<T>& b, F f, DF df) {
  const auto mode = binary_mode(op, a, b);
  const Shape shape = mode == Broadcast::kLeftScalar ? b.shape() : a.shape();
  const std::size_t n = shape_numel(shape);
  const auto av = a.data();
  const auto bv = b.data();
  auto ai = [&, mode](std::size_t i) { return mode == Broadcast::kLeftScalar ? av[0] : av[i]; };
  auto bi = [&, mode](std::size_t i) { return mode == Broadcast::kRightScalar ? bv[0] : bv[i]; };
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(ai(i), bi(i));
  NodePtr<T> an = a.node_ptr();
  NodePtr<T> bn = b.node_ptr();
  return Tensor<T>::record(op, shape, std::move(out), {a, b},
                           [an, bn, mode, n, df](std::span<const T> g) {
                             const auto& x = an->value;
                             const auto& y = bn->value;
                             T* ga = an->requires_grad ? an->grad_buffer().data() : nullptr;
                             T* gb = bn->requires_grad ? bn->grad_buffer().data() : nullptr;
                             for (std::size_t i = 0; i < n; ++i) {
                               const std::size_t ia = mode == Broadcast::kLeftScalar ? 0 : i;
                               const std::size_t ib = mode == Broadcast::kRightScalar ? 0 : i;
                               const auto [dx, dy] = df(x[ia], y[ib]);
                               if (ga) ga[ia] += g[i] * dx;
                               if (gb) gb[ib] += g[i] * dy;
                             }
                           });
}

// Elementwise unary op. `df(x, y)` is d out/d x given input x and output y.
template <typename T, typename F, typename DF>
Tensor<T> unary(const char* op, const Tensor<T>& a, F f, DF df) {
  const auto av = a.data();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  std::function<void(std::span<const T>)> rule;
  if (GradMode::enabled() && a.requires_grad()) {
    // Some rules need the output values; keep a copy only when recording.
    rule = [an = a.node_ptr(), y = out, df](std::span<const T> g) {
      auto& ga = an->grad_buffer();
      const auto& x = an->value;
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(x[i], y[i]);
    };
  }
  return Tensor<T>::record(op, a.shape(), std::move(out), {a}, std::move(rule));
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(
      "add", a, b, [](T x, T y) { return x + y; },
      [](T, T) { return std::pair<T, T>{T{1}, T{1}}; });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(
      "sub", a, b, [](T x, T y) { return x - y; },
      [](T, T) { return std::pair<T, T>{T{1}, T{-1}}; });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(
      "mul", a, b, [](T x, T y) { return x * y; },
      [](T x, T y) { return std::pair<T, T>{y, x}; });
}

template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
  for (auto v : b.data()) {
    if (v == T{0}) throw DomainError("div: division by zero");
  }
  return binary(
      "div", a, b, [](T x, T y) { return x / y; },
      [](T x, T y) { return std::pair<T, T>{T{1} / y, -x / (y * y)}; });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  return unary(
      "scale", a, [factor](T x) { return x * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T offset) {
  return unary(
      "add_scalar", a, [offset](T x) { return x + offset; }, [](T, T) { return T{1}; });
}

template <typename T>
Tensor<T> abs(const Tensor<T>& a) {
  return unary(
      "abs", a, [](T x) { return std::abs(x); },
      [](T x, T) { return x > T{0} ? T{1} : (x < T{0} ? T{-1} : T{0}); });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  return unary(
      "relu", a, [](T x) { return x > T{0} ? x : T{0}; },
      [](T x, T) { return x > T{0} ? T{1} : T{0}; });
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& a, T slope) {
  return unary(
      "leaky_relu", a, [slope](T x) { return x > T{0} ? x : slope * x; },
      [slope](T x, T) { return x > T{0} ? T{1} : slope; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  return unary(
      "sigmoid", a,
      [](T x) {
        if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
        const T e = std::exp(x);
        return e / (T{1} + e);
      },
      [](T, T y) { return y * (T{1} - y); });
}

template <typename T>
Tensor<T> log(const Tensor<T>& a) {
  for (auto v : a.data()) {
    if (!(v > T{0})) throw DomainError("log: non-positive argument " + std::to_string(v));
  }
  return unary(
      "log", a, [](T x) { return std::log(x); }, [](T x, T) { return T{1} / x; });
}

template <typename T>
Tensor<T> exp(const Tensor<T>& a) {
  return unary(
      "exp", a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> clamp(const Tensor<T>& a, T lo, T hi) {
  if (lo > hi) throw DomainError("clamp: lo > hi");
  return unary(
      "clamp", a, [lo, hi](T x) { return std::min(std::max(x, lo), hi); },
      [lo, hi](T x, T) { return (x >= lo && x <= hi) ? T{1} : T{0}; });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  T total{0};
  for (auto v : a.data()) total += v;
  NodePtr<T> an = a.node_ptr();
  return Tensor<T>::record("sum", {1}, {total}, {a}, [an](std::span<const T> g) {
    auto& ga = an->grad_buffer();
    for (auto& v : ga) v += g[0];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  T total{0};
  for (auto v : a.data()) total += v;
  const T n = static_cast<T>(a.numel());
  NodePtr<T> an = a.node_ptr();
  return Tensor<T>::record("mean", {1}, {total / n}, {a}, [an, n](std::span<const T> g) {
    auto& ga = an->grad_buffer();
    const T share = g[0] / n;
    for (auto& v : ga) v += share;
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    shape_error("reshape", "cannot view " + to_string(a.shape()) + " as " + to_string(shape));
  }
  NodePtr<T> an = a.node_ptr();
  return Tensor<T>::record("reshape", std::move(shape),
                           std::vector<T>(a.data().begin(), a.data().end()), {a},
                           [an](std::span<const T> g) {
                             auto& ga = an->grad_buffer();
                             for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                           });
}

template <typename T>
Tensor<T> flatten(const Tensor<T>& a) {
  if (a.rank() < 1) shape_error("flatten", "rank-0 input");
  return reshape(a, {a.dim(0), a.numel() / a.dim(0)});
}

namespace {

struct ConvGeometry {
  std::size_t n, c, h, w, o, kh, kw, stride, pad, oh, ow;
  std::size_t patch() const { return c * kh * kw; }
  std::size_t pixels() const { return oh * ow; }
};

// Valid output columns [lo, hi) for kernel column kx.
inline std::pair<std::size_t, std::size_t> valid_span(const ConvGeometry& g, std::size_t kx) {
  const std::size_t lo = kx >= g.pad ? 0 : (g.pad - kx + g.stride - 1) / g.stride;
  if (g.w + g.pad <= kx) return {lo, lo};
  const std::size_t hi = std::min(g.ow, (g.w - 1 + g.pad - kx) / g.stride + 1);
  return {std::min(lo, hi), hi};
}

// Unfolds one image into columns [patch, pixels] with row stride `ld`.
template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* cols, std::size_t ld) {
  for (std::size_t ci = 0; ci < g.c; ++ci) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        T* row = cols + ((ci * g.kh + ky) * g.kw + kx) * ld;
        const auto [lo, hi] = valid_span(g, kx);
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          T* dst = row + oy * g.ow;
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                          static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) {
            std::fill(dst, dst + g.ow, T{0});
            continue;
          }
          std::fill(dst, dst + lo, T{0});
          const T* src = x + (ci * g.h + static_cast<std::size_t>(iy)) * g.w + lo * g.stride + kx - g.pad;
          for (std::size_t ox = lo; ox < hi; ++ox, src += g.stride) dst[ox] = *src;
          std::fill(dst + hi, dst + g.ow, T{0});
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, const ConvGeometry& g, T* dx, std::size_t ld) {
  for (std::size_t ci = 0; ci < g.c; ++ci) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        const T* row = cols + ((ci * g.kh + ky) * g.kw + kx) * ld;
        const auto [lo, hi] = valid_span(g, kx);
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                          static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          const T* src = row + oy * g.ow;
          T* dst = dx + (ci * g.h + static_cast<std::size_t>(iy)) * g.w + lo * g.stride + kx - g.pad;
          for (std::size_t ox = lo; ox < hi; ++ox, dst += g.stride) *dst += src[ox];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& kernel, std::size_t stride,
                 std::size_t padding) {
  require_rank("conv2d", x, 4, "input");
  require_rank("conv2d", kernel, 4, "kernel");
  if (stride == 0) shape_error("conv2d", "stride must be positive");
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), kernel.dim(0), kernel.dim(2),
                 kernel.dim(3), stride, padding, 0, 0};
  if (kernel.dim(1) != g.c) {
    shape_error("conv2d", "input channels " + std::to_string(g.c) + " (input " +
                              to_string(x.shape()) + ") != kernel input channels " +
                              std::to_string(kernel.dim(1)) + " (kernel " +
                              to_string(kernel.shape()) + ")");
  }
  if (g.h + 2 * padding < g.kh || g.w + 2 * padding < g.kw) {
    shape_error("conv2d", "kernel " + to_string(kernel.shape()) + " larger than padded input " +
                              to_string(x.shape()));
  }
  g.oh = (g.h + 2 * padding - g.kh) / stride + 1;
  g.ow = (g.w + 2 * padding - g.kw) / stride + 1;

  // All images share one GEMM: columns are [patch, N * pixels].
  const std::size_t ld = g.n * g.pixels();
  std::vector<T> cols(g.patch() * ld);
  for (std::size_t n = 0; n < g.n; ++n) {
    im2col(x.data().data() + n * g.c * g.h * g.w, g, cols.data() + n * g.pixels(), ld);
  }
  ConstMatrixMap<T> weights(kernel.data().data(), g.o, g.patch());
  ConstMatrixMap<T> col_mat(cols.data(), g.patch(), ld);
  std::vector<T> prod(g.o * ld);
  MatrixMap<T>(prod.data(), g.o, ld).noalias() = weights * col_mat;
  std::vector<T> out(g.n * g.o * g.pixels());
  for (std::size_t n = 0; n < g.n; ++n) {
    for (std::size_t o = 0; o < g.o; ++o) {
      const T* src = prod.data() + o * ld + n * g.pixels();
      std::copy(src, src + g.pixels(), out.data() + (n * g.o + o) * g.pixels());
    }
  }

  NodePtr<T> xn = x.node_ptr();
  NodePtr<T> kn = kernel.node_ptr();
  const bool track = GradMode::enabled() && (x.requires_grad() || kernel.requires_grad());
  auto saved = std::make_shared<std::vector<T>>(track ? std::move(cols) : std::vector<T>{});
  return Tensor<T>::record(
      "conv2d", {g.n, g.o, g.oh, g.ow}, std::move(out), {x, kernel},
      [xn, kn, g, ld, saved](std::span<const T> grad) {
        std::vector<T> g_prod(g.o * ld);
        for (std::size_t n = 0; n < g.n; ++n) {
          for (std::size_t o = 0; o < g.o; ++o) {
            const T* src = grad.data() + (n * g.o + o) * g.pixels();
            std::copy(src, src + g.pixels(), g_prod.data() + o * ld + n * g.pixels());
          }
        }
        ConstMatrixMap<T> g_out(g_prod.data(), g.o, ld);
        if (kn->requires_grad) {
          ConstMatrixMap<T> col_mat(saved->data(), g.patch(), ld);
          MatrixMap<T> g_w(kn->grad_buffer().data(), g.o, g.patch());
          g_w.noalias() += g_out * col_mat.transpose();
        }
        if (xn->requires_grad) {
          ConstMatrixMap<T> weights(kn->value.data(), g.o, g.patch());
          std::vector<T> g_cols(g.patch() * ld);
          MatrixMap<T>(g_cols.data(), g.patch(), ld).noalias() = weights.transpose() * g_out;
          auto& dx = xn->grad_buffer();
          for (std::size_t n = 0; n < g.n; ++n) {
            col2im_add(g_cols.data() + n * g.pixels(), g, dx.data() + n * g.c * g.h * g.w, ld);
          }
        }
      });
}

template <typename T>
Tensor<T> add_channel_bias(const Tensor<T>& x, const Tensor<T>& bias) {
  require_rank("add_channel_bias", x, 4, "input");
  if (bias.numel() != x.dim(1)) {
    shape_error("add_channel_bias", "bias of " + std::to_string(bias.numel()) +
                                        " elements for input " + to_string(x.shape()));
  }
  const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  std::vector<T> out(x.data().begin(), x.data().end());
  const auto b = bias.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      T* p = out.data() + (i * c + ch) * hw;
      for (std::size_t k = 0; k < hw; ++k) p[k] += b[ch];
    }
  }
  NodePtr<T> xn = x.node_ptr();
  NodePtr<T> bn = bias.node_ptr();
  return Tensor<T>::record("add_channel_bias", x.shape(), std::move(out), {x, bias},
                           [xn, bn, n, c, hw](std::span<const T> g) {
                             if (xn->requires_grad) {
                               auto& gx = xn->grad_buffer();
                               for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                             }
                             if (bn->requires_grad) {
                               auto& gb = bn->grad_buffer();
                               for (std::size_t i = 0; i < n; ++i) {
                                 for (std::size_t ch = 0; ch < c; ++ch) {
                                   const T* p = g.data() + (i * c + ch) * hw;
                                   T acc{0};
                                   for (std::size_t k = 0; k < hw; ++k) acc += p[k];
                                   gb[ch] += acc;
                                 }
                               }
                             }
                           });
}

template <typename T>
Tensor<T> nearest_upsample(const Tensor<T>& x, std::size_t factor) {
  require_rank("nearest_upsample", x, 4, "input");
  if (factor == 0) shape_error("nearest_upsample", "factor must be positive");
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = h * factor, ow = w * factor;
  std::vector<T> out(planes * oh * ow);
  const auto in = x.data();
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        out[(p * oh + y) * ow + xx] = in[(p * h + y / factor) * w + xx / factor];
      }
    }
  }
  NodePtr<T> xn = x.node_ptr();
  return Tensor<T>::record("nearest_upsample", {x.dim(0), x.dim(1), oh, ow}, std::move(out), {x},
                           [xn, planes, h, w, oh, ow, factor](std::span<const T> g) {
                             auto& gx = xn->grad_buffer();
                             for (std::size_t p = 0; p < planes; ++p) {
                               for (std::size_t y = 0; y < oh; ++y) {
                                 for (std::size_t xx = 0; xx < ow; ++xx) {
                                   gx[(p * h + y / factor) * w + xx / factor] +=
                                       g[(p * oh + y) * ow + xx];
                                 }
                               }
                             }
                           });
}

template <typename T>
Tensor<T> fully_connected(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  require_rank("fully_connected", x, 2, "input");
  require_rank("fully_connected", weight, 2, "weight");
  const std::size_t n = x.dim(0), k = x.dim(1), o = weight.dim(0);
  if (weight.dim(1) != k) {
    shape_error("fully_connected", "input features " + std::to_string(k) + " != weight columns " +
                                       std::to_string(weight.dim(1)));
  }
  const bool has_bias = bias.defined();
  if (has_bias && bias.numel() != o) {
    shape_error("fully_connected", "bias of " + std::to_string(bias.numel()) + " elements for " +
                                       std::to_string(o) + " outputs");
  }
  std::vector<T> out(n * o);
  {
    ConstMatrixMap<T> xm(x.data().data(), n, k);
    ConstMatrixMap<T> wm(weight.data().data(), o, k);
    MatrixMap<T> om(out.data(), n, o);
    om.noalias() = xm * wm.transpose();
    if (has_bias) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < o; ++j) out[i * o + j] += bias.data()[j];
      }
    }
  }
  NodePtr<T> xn = x.node_ptr();
  NodePtr<T> wn = weight.node_ptr();
  NodePtr<T> bn = has_bias ? bias.node_ptr() : nullptr;
  std::vector<Tensor<T>> parents{x, weight};
  if (has_bias) parents.push_back(bias);
  return Tensor<T>::record(
      "fully_connected", {n, o}, std::move(out), std::move(parents),
      [xn, wn, bn, n, k, o](std::span<const T> grad) {
        ConstMatrixMap<T> gm(grad.data(), n, o);
        if (xn->requires_grad) {
          ConstMatrixMap<T> wm(wn->value.data(), o, k);
          MatrixMap<T> gx(xn->grad_buffer().data(), n, k);
          gx.noalias() += gm * wm;
        }
        if (wn->requires_grad) {
          ConstMatrixMap<T> xm(xn->value.data(), n, k);
          MatrixMap<T> gw(wn->grad_buffer().data(), o, k);
          gw.noalias() += gm.transpose() * xm;
        }
        if (bn && bn->requires_grad) {
          auto& gb = bn->grad_buffer();
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < o; ++j) gb[j] += grad[i * o + j];
          }
        }
      });
}

template <typename T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank("matmul_nt", a, 2, "lhs");
  require_rank("matmul_nt", b, 2, "rhs");
  const std::size_t n = a.dim(0), c = a.dim(1), m = b.dim(0);
  if (b.dim(1) != c) {
    shape_error("matmul_nt", "inner dimensions differ: " + to_string(a.shape()) + " vs " +
                                 to_string(b.shape()));
  }
  // Plain loops: the operands are small point sets and the summation order
  // stays obvious.
  std::vector<T> out(n * m);
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      T acc{0};
      for (std::size_t k = 0; k < c; ++k) acc += av[i * c + k] * bv[j * c + k];
      out[i * m + j] = acc;
    }
  }
  NodePtr<T> an = a.node_ptr();
  NodePtr<T> bn = b.node_ptr();
  return Tensor<T>::record("matmul_nt", {n, m}, std::move(out), {a, b},
                           [an, bn, n, c, m](std::span<const T> g) {
                             if (an->requires_grad) {
                               auto& ga = an->grad_buffer();
                               for (std::size_t i = 0; i < n; ++i) {
                                 for (std::size_t j = 0; j < m; ++j) {
                                   const T gij = g[i * m + j];
                                   for (std::size_t k = 0; k < c; ++k) {
                                     ga[i * c + k] += gij * bn->value[j * c + k];
                                   }
                                 }
                               }
                             }
                             if (bn->requires_grad) {
                               auto& gb = bn->grad_buffer();
                               for (std::size_t i = 0; i < n; ++i) {
                                 for (std::size_t j = 0; j < m; ++j) {
                                   const T gij = g[i * m + j];
                                   for (std::size_t k = 0; k < c; ++k) {
                                     gb[j * c + k] += gij * an->value[i * c + k];
                                   }
                                 }
                               }
                             }
                           });
}

template <typename T>
Tensor<T> mean_rows(const Tensor<T>& a) {
  require_rank("mean_rows", a, 2, "input");
  const std::size_t n = a.dim(0), c = a.dim(1);
  std::vector<T> out(c, T{0});
  const auto av = a.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < c; ++k) out[k] += av[i * c + k];
  }
  for (auto& v : out) v /= static_cast<T>(n);
  NodePtr<T> an = a.node_ptr();
  return Tensor<T>::record("mean_rows", {1, c}, std::move(out), {a},
                           [an, n, c](std::span<const T> g) {
                             auto& ga = an->grad_buffer();
                             for (std::size_t i = 0; i < n; ++i) {
                               for (std::size_t k = 0; k < c; ++k) {
                                 ga[i * c + k] += g[k] / static_cast<T>(n);
                               }
                             }
                           });
}

template <typename T>
Tensor<T> expand_rows(const Tensor<T>& row, std::size_t rows) {
  require_rank("expand_rows", row, 2, "row");
  if (row.dim(0) != 1) shape_error("expand_rows", "expects [1,C], got " + to_string(row.shape()));
  const std::size_t c = row.dim(1);
  std::vector<T> out(rows * c);
  for (std::size_t i = 0; i < rows; ++i) {
    std::copy(row.data().begin(), row.data().end(), out.begin() + i * c);
  }
  NodePtr<T> rn = row.node_ptr();
  return Tensor<T>::record("expand_rows", {rows, c}, std::move(out), {row},
                           [rn, rows, c](std::span<const T> g) {
                             auto& gr = rn->grad_buffer();
                             for (std::size_t i = 0; i < rows; ++i) {
                               for (std::size_t k = 0; k < c; ++k) gr[k] += g[i * c + k];
                             }
                           });
}

template <typename T>
Tensor<T> expand_cols(const Tensor<T>& column, std::size_t cols) {
  require_rank("expand_cols", column, 2, "column");
  if (column.dim(1) != 1) {
    shape_error("expand_cols", "expects [N,1], got " + to_string(column.shape()));
  }
  const std::size_t n = column.dim(0);
  std::vector<T> out(n * cols);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(out.begin() + i * cols, out.begin() + (i + 1) * cols, column.data()[i]);
  }
  NodePtr<T> cn = column.node_ptr();
  return Tensor<T>::record("expand_cols", {n, cols}, std::move(out), {column},
                           [cn, n, cols](std::span<const T> g) {
                             auto& gc = cn->grad_buffer();
                             for (std::size_t i = 0; i < n; ++i) {
                               for (std::size_t j = 0; j < cols; ++j) gc[i] += g[i * cols + j];
                             }
                           });
}

template <typename T>
Tensor<T> row_min(const Tensor<T>& a) {
  require_rank("row_min", a, 2, "input");
  const std::size_t n = a.dim(0), m = a.dim(1);
  std::vector<T> out(n);
  std::vector<std::size_t> arg(n);
  const auto av = a.data();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < m; ++j) {
      if (av[i * m + j] < av[i * m + best]) best = j;
    }
    arg[i] = best;
    out[i] = av[i * m + best];
  }
  NodePtr<T> an = a.node_ptr();
  return Tensor<T>::record("row_min", {n, 1}, std::move(out), {a},
                           [an, arg, m](std::span<const T> g) {
                             auto& ga = an->grad_buffer();
                             for (std::size_t i = 0; i < arg.size(); ++i) ga[i * m + arg[i]] += g[i];
                           });
}

template <typename T>
Tensor<T> col_max(const Tensor<T>& a) {
  require_rank("col_max", a, 2, "input");
  const std::size_t n = a.dim(0), m = a.dim(1);
  std::vector<T> out(m);
  std::vector<std::size_t> arg(m);
  const auto av = a.data();
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (av[i * m + j] > av[best * m + j]) best = i;
    }
    arg[j] = best;
    out[j] = av[best * m + j];
  }
  NodePtr<T> an = a.node_ptr();
  return Tensor<T>::record("col_max", {1, m}, std::move(out), {a},
                           [an, arg, m](std::span<const T> g) {
                             auto& ga = an->grad_buffer();
                             for (std::size_t j = 0; j < m; ++j) ga[arg[j] * m + j] += g[j];
                           });
}

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& a) {
  require_rank("softmax_rows", a, 2, "input");
  const std::size_t n = a.dim(0), m = a.dim(1);
  std::vector<T> out(n * m);
  const auto av = a.data();
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = av.data() + i * m;
    const T top = *std::max_element(row, row + m);
    T total{0};
    for (std::size_t j = 0; j < m; ++j) {
      out[i * m + j] = std::exp(row[j] - top);
      total += out[i * m + j];
    }
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] /= total;
  }
  NodePtr<T> an = a.node_ptr();
  std::vector<T> y = out;
  return Tensor<T>::record("softmax_rows", {n, m}, std::move(out), {a},
                           [an, y = std::move(y), n, m](std::span<const T> g) {
                             auto& ga = an->grad_buffer();
                             for (std::size_t i = 0; i < n; ++i) {
                               T dot{0};
                               for (std::size_t j = 0; j < m; ++j) dot += g[i * m + j] * y[i * m + j];
                               for (std::size_t j = 0; j < m; ++j) {
                                 ga[i * m + j] += y[i * m + j] * (g[i * m + j] - dot);
                               }
                             }
                           });
}

template <typename T>
Tensor<T> normalize_rows(const Tensor<T>& a) {
  require_rank("normalize_rows", a, 2, "input");
  const std::size_t n = a.dim(0), c = a.dim(1);
  std::vector<T> out(n * c);
  std::vector<T> norms(n);
  const auto av = a.data();
  for (std::size_t i = 0; i < n; ++i) {
    T sq{0};
    for (std::size_t k = 0; k < c; ++k) sq += av[i * c + k] * av[i * c + k];
    norms[i] = std::sqrt(sq);
    if (norms[i] == T{0}) {
      throw DegenerateInputError("normalize_rows: row " + std::to_string(i) + " has zero norm");
    }
    for (std::size_t k = 0; k < c; ++k) out[i * c + k] = av[i * c + k] / norms[i];
  }
  NodePtr<T> an = a.node_ptr();
  std::vector<T> y = out;
  return Tensor<T>::record("normalize_rows", {n, c}, std::move(out), {a},
                           [an, y = std::move(y), norms, n, c](std::span<const T> g) {
                             auto& ga = an->grad_buffer();
                             for (std::size_t i = 0; i < n; ++i) {
                               T dot{0};
                               for (std::size_t k = 0; k < c; ++k) dot += y[i * c + k] * g[i * c + k];
                               for (std::size_t k = 0; k < c; ++k) {
                                 ga[i * c + k] += (g[i * c + k] - y[i * c + k] * dot) / norms[i];
                               }
                             }
                           });
}

template <typename T>
Tensor<T> feature_points(const Tensor<T>& x, std::size_t index) {
  require_rank("feature_points", x, 4, "input");
  if (index >= x.dim(0)) {
    shape_error("feature_points", "batch index " + std::to_string(index) + " out of range for " +
                                      to_string(x.shape()));
  }
  const std::size_t c = x.dim(1), hw = x.dim(2) * x.dim(3);
  const std::size_t offset = index * c * hw;
  std::vector<T> out(hw * c);
  const auto xv = x.data();
  for (std::size_t p = 0; p < hw; ++p) {
    for (std::size_t k = 0; k < c; ++k) out[p * c + k] = xv[offset + k * hw + p];
  }
  NodePtr<T> xn = x.node_ptr();
  return Tensor<T>::record("feature_points", {hw, c}, std::move(out), {x},
                           [xn, offset, c, hw](std::span<const T> g) {
                             auto& gx = xn->grad_buffer();
                             for (std::size_t p = 0; p < hw; ++p) {
                               for (std::size_t k = 0; k < c; ++k) {
                                 gx[offset + k * hw + p] += g[p * c + k];
                               }
                             }
                           });
}

#define LSRGAN_INSTANTIATE_OPS(T)                                                          \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> div(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> scale(const Tensor<T>&, T);                                           \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                                      \
  template Tensor<T> abs(const Tensor<T>&);                                                \
  template Tensor<T> relu(const Tensor<T>&);                                               \
  template Tensor<T> leaky_relu(const Tensor<T>&, T);                                      \
  template Tensor<T> sigmoid(const Tensor<T>&);                                            \
  template Tensor<T> log(const Tensor<T>&);                                                \
  template Tensor<T> exp(const Tensor<T>&);                                                \
  template Tensor<T> clamp(const Tensor<T>&, T, T);                                        \
  template Tensor<T> sum(const Tensor<T>&);                                                \
  template Tensor<T> mean(const Tensor<T>&);                                               \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                     \
  template Tensor<T> flatten(const Tensor<T>&);                                            \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, std::size_t, std::size_t); \
  template Tensor<T> add_channel_bias(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> nearest_upsample(const Tensor<T>&, std::size_t);                      \
  template Tensor<T> fully_connected(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&); \
  template Tensor<T> matmul_nt(const Tensor<T>&, const Tensor<T>&);                        \
  template Tensor<T> mean_rows(const Tensor<T>&);                                          \
  template Tensor<T> expand_rows(const Tensor<T>&, std::size_t);                           \
  template Tensor<T> expand_cols(const Tensor<T>&, std::size_t);                           \
  template Tensor<T> row_min(const Tensor<T>&);                                            \
  template Tensor<T> col_max(const Tensor<T>&);                                            \
  template Tensor<T> softmax_rows(const Tensor<T>&);                                       \
  template Tensor<T> normalize_rows(const Tensor<T>&);                                     \
  template Tensor<T> feature_points(const Tensor<T>&, std::size_t);

LSRGAN_INSTANTIATE_OPS(float)
LSRGAN_INSTANTIATE_OPS(double)

#undef LSRGAN_INSTANTIATE_OPS

}  // namespace lsrgan::ops
