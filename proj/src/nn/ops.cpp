#include "daylight/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <fmt/format.h>

#include "daylight/errors.hpp"

namespace illum::nn {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;

// Upper bound on the im2col buffer, in elements.
constexpr std::size_t kColsBudget = std::size_t{1} << 16;

void require_rank(const Shape& s, std::size_t rank, const char* op, const char* what) {
  if (s.size() != rank) {
    throw DimensionError(fmt::format("{}: {} must have rank {}, got {}", op, what, rank, shape_to_string(s)));
  }
}

struct ConvGeometry {
  std::size_t batch, in_channels, height, width;
  std::size_t out_channels, kernel, padding, stride;
  std::size_t out_h, out_w;

  std::size_t patch() const { return in_channels * kernel * kernel; }
  std::size_t plane() const { return out_h * out_w; }
};

// Output columns [lo, hi) whose input column ox * stride + kx - padding
// lies inside [0, width).
struct ValidRange {
  std::size_t lo, hi;
};

ValidRange valid_range(std::size_t out, std::size_t in, std::size_t k, std::size_t pad, std::size_t stride) {
  const long p = static_cast<long>(pad), kk = static_cast<long>(k), st = static_cast<long>(stride);
  const long lo = p > kk ? (p - kk + st - 1) / st : 0;
  const long last = static_cast<long>(in) - 1 + p - kk;  // ox * stride <= last
  const long hi = last < 0 ? 0 : std::min(static_cast<long>(out), last / st + 1);
  return {static_cast<std::size_t>(std::min(lo, hi)), static_cast<std::size_t>(std::max(hi, 0L))};
}

// cols(r, s * plane + p) for samples [first, first + count).
template <typename T>
void im2col(const T* input, const ConvGeometry& g, std::size_t first, std::size_t count, T* cols) {
  const std::size_t P = g.plane();
  const std::size_t ld = count * P;
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      const ValidRange ry = valid_range(g.out_h, g.height, ky, g.padding, g.stride);
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        const ValidRange rx = valid_range(g.out_w, g.width, kx, g.padding, g.stride);
        T* row = cols + ((c * g.kernel + ky) * g.kernel + kx) * ld;
        for (std::size_t s = 0; s < count; ++s) {
          const T* plane = input + ((first + s) * g.in_channels + c) * g.height * g.width;
          T* dst = row + s * P;
          std::fill(dst, dst + ry.lo * g.out_w, T{0});
          std::fill(dst + ry.hi * g.out_w, dst + P, T{0});
          for (std::size_t oy = ry.lo; oy < ry.hi; ++oy) {
            const std::size_t iy = oy * g.stride + ky - g.padding;
            const T* srow = plane + iy * g.width + (rx.lo * g.stride + kx - g.padding);
            T* drow = dst + oy * g.out_w;
            std::fill(drow, drow + rx.lo, T{0});
            std::fill(drow + rx.hi, drow + g.out_w, T{0});
            if (g.stride == 1) {
              std::copy(srow, srow + (rx.hi - rx.lo), drow + rx.lo);
            } else {
              for (std::size_t ox = rx.lo; ox < rx.hi; ++ox) drow[ox] = srow[(ox - rx.lo) * g.stride];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, const ConvGeometry& g, std::size_t first, std::size_t count, T* input_grad) {
  const std::size_t P = g.plane();
  const std::size_t ld = count * P;
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      const ValidRange ry = valid_range(g.out_h, g.height, ky, g.padding, g.stride);
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        const ValidRange rx = valid_range(g.out_w, g.width, kx, g.padding, g.stride);
        const T* row = cols + ((c * g.kernel + ky) * g.kernel + kx) * ld;
        for (std::size_t s = 0; s < count; ++s) {
          T* plane = input_grad + ((first + s) * g.in_channels + c) * g.height * g.width;
          const T* src = row + s * P;
          for (std::size_t oy = ry.lo; oy < ry.hi; ++oy) {
            const std::size_t iy = oy * g.stride + ky - g.padding;
            T* drow = plane + iy * g.width + (rx.lo * g.stride + kx - g.padding);
            const T* srow = src + oy * g.out_w;
            for (std::size_t ox = rx.lo; ox < rx.hi; ++ox) drow[(ox - rx.lo) * g.stride] += srow[ox];
          }
        }
      }
    }
  }
}

std::size_t samples_per_chunk(const ConvGeometry& g) {
  const std::size_t per_sample = g.patch() * g.plane();
  return std::clamp<std::size_t>(kColsBudget / std::max<std::size_t>(per_sample, 1), 1, g.batch);
}

}  // namespace

std::size_t conv_output_size(std::size_t in, std::size_t kernel, std::size_t padding, std::size_t stride) {
  if (stride == 0) throw ParameterError("conv2d: stride must be >= 1");
  if (kernel == 0 || kernel > in + 2 * padding) {
    throw DimensionError(fmt::format("conv2d: kernel {} does not fit input {} with padding {}", kernel, in, padding));
  }
  return (in + 2 * padding - kernel) / stride + 1;
}

template <typename T>
Var conv2d(Tape<T>& tape, Var input, Var kernels, Var bias, std::size_t padding, std::size_t stride) {
  const auto& x = tape.value(input);
  const auto& w = tape.value(kernels);
  const auto& b = tape.value(bias);
  require_rank(x.shape(), 4, "conv2d", "input");
  require_rank(w.shape(), 4, "conv2d", "kernels");
  if (w.dim(2) != w.dim(3)) throw DimensionError("conv2d: kernels must be square");
  if (w.dim(1) != x.dim(1)) {
    throw DimensionError(fmt::format("conv2d: input has {} channels but kernels expect {}", x.dim(1), w.dim(1)));
  }
  if (b.numel() != w.dim(0)) {
    throw DimensionError(fmt::format("conv2d: bias has {} entries for {} output channels", b.numel(), w.dim(0)));
  }
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), padding, stride, 0, 0};
  g.out_h = conv_output_size(g.height, g.kernel, padding, stride);
  g.out_w = conv_output_size(g.width, g.kernel, padding, stride);

  Tensor<T> out(Shape{g.batch, g.out_channels, g.out_h, g.out_w});
  const std::size_t P = g.plane();
  const std::size_t chunk = samples_per_chunk(g);
  std::vector<T, AlignedAllocator<T>> cols(g.patch() * chunk * P);
  RowMatrix<T> prod;
  ConstMatMap<T> wmat(w.data(), static_cast<Eigen::Index>(g.out_channels), static_cast<Eigen::Index>(g.patch()));
  for (std::size_t first = 0; first < g.batch; first += chunk) {
    const std::size_t count = std::min(chunk, g.batch - first);
    im2col(x.data(), g, first, count, cols.data());
    ConstMatMap<T> cmat(cols.data(), static_cast<Eigen::Index>(g.patch()), static_cast<Eigen::Index>(count * P));
    if (count == 1) {
      // One sample: the product already has the output layout.
      MatMap<T> om(out.data() + first * g.out_channels * P, static_cast<Eigen::Index>(g.out_channels),
                   static_cast<Eigen::Index>(P));
      om.noalias() = wmat * cmat;
      om.colwise() += Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(b.data(), static_cast<Eigen::Index>(g.out_channels));
      continue;
    }
    prod.noalias() = wmat * cmat;
    for (std::size_t s = 0; s < count; ++s) {
      for (std::size_t co = 0; co < g.out_channels; ++co) {
        const T* src = prod.data() + co * count * P + s * P;
        T* dst = out.data() + ((first + s) * g.out_channels + co) * P;
        const T bv = b[co];
        for (std::size_t p = 0; p < P; ++p) dst[p] = src[p] + bv;
      }
    }
  }

  return tape.record(std::move(out), {input, kernels, bias}, [=](Tape<T>& t, const Tensor<T>& gout) {
    const auto& xv = t.value(input);
    const auto& wv = t.value(kernels);
    const bool need_x = t.requires_grad(input);
    const bool need_w = t.requires_grad(kernels);
    const bool need_b = t.requires_grad(bias);
    const std::size_t Pn = g.plane();
    if (need_b) {
      auto& gb = t.grad_mut(bias);
      for (std::size_t s = 0; s < g.batch; ++s) {
        for (std::size_t co = 0; co < g.out_channels; ++co) {
          const T* src = gout.data() + (s * g.out_channels + co) * Pn;
          gb[co] += Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(src, static_cast<Eigen::Index>(Pn)).sum();
        }
      }
    }
    if (!need_x && !need_w) return;
    const std::size_t ch = samples_per_chunk(g);
    std::vector<T, AlignedAllocator<T>> colbuf(g.patch() * ch * Pn);
    RowMatrix<T> gmat;
    RowMatrix<T> dcols;
    ConstMatMap<T> wm(wv.data(), static_cast<Eigen::Index>(g.out_channels), static_cast<Eigen::Index>(g.patch()));
    RowMatrix<T> wgrad;
    if (need_w) wgrad = RowMatrix<T>::Zero(static_cast<Eigen::Index>(g.out_channels), static_cast<Eigen::Index>(g.patch()));
    for (std::size_t first = 0; first < g.batch; first += ch) {
      const std::size_t count = std::min(ch, g.batch - first);
      const T* gsrc = gout.data() + first * g.out_channels * Pn;
      if (count > 1) {
        gmat.resize(static_cast<Eigen::Index>(g.out_channels), static_cast<Eigen::Index>(count * Pn));
        for (std::size_t s = 0; s < count; ++s) {
          for (std::size_t co = 0; co < g.out_channels; ++co) {
            const T* src = gout.data() + ((first + s) * g.out_channels + co) * Pn;
            std::copy(src, src + Pn, gmat.data() + co * count * Pn + s * Pn);
          }
        }
        gsrc = gmat.data();
      }
      ConstMatMap<T> gview(gsrc, static_cast<Eigen::Index>(g.out_channels), static_cast<Eigen::Index>(count * Pn));
      if (need_w) {
        im2col(xv.data(), g, first, count, colbuf.data());
        ConstMatMap<T> cm(colbuf.data(), static_cast<Eigen::Index>(g.patch()), static_cast<Eigen::Index>(count * Pn));
        wgrad.noalias() += gview * cm.transpose();
      }
      if (need_x) {
        dcols.noalias() = wm.transpose() * gview;
        col2im_add(dcols.data(), g, first, count, t.grad_mut(input).data());
      }
    }
    if (need_w) {
      auto& gw = t.grad_mut(kernels);
      for (std::size_t i = 0; i < gw.numel(); ++i) gw[i] += wgrad.data()[i];
    }
  });
}

template <typename T>
Var maxpool2d(Tape<T>& tape, Var input, std::size_t window) {
  const auto& x = tape.value(input);
  require_rank(x.shape(), 4, "maxpool2d", "input");
  if (window == 0) throw ParameterError("maxpool2d: window must be >= 1");
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (H % window != 0 || W % window != 0) {
    throw DimensionError(fmt::format("maxpool2d: {}x{} is not divisible by window {}", H, W, window));
  }
  if (window * window > 256) throw ParameterError("maxpool2d: window must be at most 16");
  const std::size_t OH = H / window, OW = W / window;
  Tensor<T> out(Shape{B, C, OH, OW});
  // Offset of the winner inside its window, dy * window + dx.
  std::vector<std::uint8_t> argmax(out.numel());
  if (window == 2) {
    // Hot path: two input rows per output row.
    std::size_t o = 0;
    for (std::size_t row = 0; row < B * C * OH; ++row) {
      const T* r0 = x.data() + row * 2 * W;
      const T* r1 = r0 + W;
      for (std::size_t ox = 0; ox < OW; ++ox, ++o) {
        const T a = r0[2 * ox], b = r0[2 * ox + 1], c = r1[2 * ox], d = r1[2 * ox + 1];
        // Integer arithmetic instead of selects: the comparisons are data
        // dependent and mispredict badly as branches.
        const std::uint8_t sb = b > a, sd = d > c;
        const T m0 = std::max(a, b), m1 = std::max(c, d);
        const std::uint8_t low = m1 > m0;
        out[o] = std::max(m0, m1);
        argmax[o] = static_cast<std::uint8_t>(sb + low * (2 + sd - sb));
      }
    }
  } else {
    for (std::size_t plane = 0; plane < B * C; ++plane) {
      const T* src = x.data() + plane * H * W;
      for (std::size_t oy = 0; oy < OH; ++oy) {
        for (std::size_t ox = 0; ox < OW; ++ox) {
          const T* cell = src + oy * window * W + ox * window;
          std::size_t best = 0;
          T best_v = cell[0];
          for (std::size_t dy = 0; dy < window; ++dy) {
            for (std::size_t dx = 0; dx < window; ++dx) {
              const T v = cell[dy * W + dx];
              const bool better = v > best_v;
              best_v = better ? v : best_v;
              best = better ? dy * window + dx : best;
            }
          }
          const std::size_t o = (plane * OH + oy) * OW + ox;
          out[o] = best_v;
          argmax[o] = static_cast<std::uint8_t>(best);
        }
      }
    }
  }
  return tape.record(std::move(out), {input}, [=, argmax = std::move(argmax)](Tape<T>& t, const Tensor<T>& g) {
    T* gx = t.grad_mut(input).data();
    std::vector<std::size_t> offset(window * window);
    for (std::size_t k = 0; k < offset.size(); ++k) offset[k] = (k / window) * W + k % window;
    std::size_t o = 0;
    for (std::size_t plane = 0; plane < B * C; ++plane) {
      T* dst = gx + plane * H * W;
      for (std::size_t oy = 0; oy < OH; ++oy) {
        T* cell = dst + oy * window * W;
        for (std::size_t ox = 0; ox < OW; ++ox, ++o) cell[ox * window + offset[argmax[o]]] += g[o];
      }
    }
  });
}

template <typename T>
Var dense(Tape<T>& tape, Var input, Var weights, Var bias) {
  const auto& x = tape.value(input);
  const auto& w = tape.value(weights);
  const auto& b = tape.value(bias);
  require_rank(x.shape(), 2, "dense", "input");
  require_rank(w.shape(), 2, "dense", "weights");
  const std::size_t B = x.dim(0), n = x.dim(1), m = w.dim(0);
  if (w.dim(1) != n) throw DimensionError(fmt::format("dense: input width {} but weights are {}", n, shape_to_string(w.shape())));
  if (b.numel() != m) throw DimensionError(fmt::format("dense: bias has {} entries for {} outputs", b.numel(), m));
  const auto Bi = static_cast<Eigen::Index>(B), ni = static_cast<Eigen::Index>(n), mi = static_cast<Eigen::Index>(m);

  Tensor<T> out(Shape{B, m});
  MatMap<T> om(out.data(), Bi, mi);
  om.noalias() = ConstMatMap<T>(x.data(), Bi, ni) * ConstMatMap<T>(w.data(), mi, ni).transpose();
  om.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(b.data(), mi);

  return tape.record(std::move(out), {input, weights, bias}, [=](Tape<T>& t, const Tensor<T>& g) {
    ConstMatMap<T> gm(g.data(), Bi, mi);
    if (t.requires_grad(input)) {
      MatMap<T>(t.grad_mut(input).data(), Bi, ni).noalias() += gm * ConstMatMap<T>(t.value(weights).data(), mi, ni);
    }
    if (t.requires_grad(weights)) {
      MatMap<T>(t.grad_mut(weights).data(), mi, ni).noalias() += gm.transpose() * ConstMatMap<T>(t.value(input).data(), Bi, ni);
    }
    if (t.requires_grad(bias)) {
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(t.grad_mut(bias).data(), mi) += gm.colwise().sum();
    }
  });
}

template <typename T>
Var relu(Tape<T>& tape, Var input) {
  const auto& x = tape.value(input);
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) out[i] = x[i] > T{0} ? x[i] : T{0};
  return tape.record(std::move(out), {input}, [input](Tape<T>& t, const Tensor<T>& g) {
    const auto& xv = t.value(input);
    auto& gx = t.grad_mut(input);
    for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += xv[i] > T{0} ? g[i] : T{0};
  });
}

template <typename T>
Var dropout(Tape<T>& tape, Var input, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ParameterError(fmt::format("dropout: rate {} outside [0, 1)", rate));
  if (!training || rate == 0.0) return input;
  const auto& x = tape.value(input);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  std::vector<T> mask(x.numel());
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    mask[i] = rng.uniform() < rate ? T{0} : keep_scale;
    out[i] = x[i] * mask[i];
  }
  return tape.record(std::move(out), {input}, [input, mask = std::move(mask)](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad_mut(input);
    for (std::size_t i = 0; i < mask.size(); ++i) gx[i] += g[i] * mask[i];
  });
}

template <typename T>
Var global_avg_pool(Tape<T>& tape, Var input) {
  const auto& x = tape.value(input);
  require_rank(x.shape(), 4, "global_avg_pool", "input");
  const std::size_t B = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
  Tensor<T> out(Shape{B, C});
  for (std::size_t plane = 0; plane < B * C; ++plane) {
    const T* src = x.data() + plane * HW;
    T acc{0};
    for (std::size_t i = 0; i < HW; ++i) acc += src[i];
    out[plane] = acc / static_cast<T>(HW);
  }
  return tape.record(std::move(out), {input}, [input, HW](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad_mut(input);
    const T inv = T{1} / static_cast<T>(HW);
    for (std::size_t plane = 0; plane < g.numel(); ++plane) {
      T* dst = gx.data() + plane * HW;
      const T v = g[plane] * inv;
      for (std::size_t i = 0; i < HW; ++i) dst[i] += v;
    }
  });
}

template <typename T>
Var concat_cols(Tape<T>& tape, Var left, Var right) {
  const auto& a = tape.value(left);
  const auto& b = tape.value(right);
  require_rank(a.shape(), 2, "concat_cols", "left");
  require_rank(b.shape(), 2, "concat_cols", "right");
  if (a.dim(0) != b.dim(0)) throw DimensionError(fmt::format("concat_cols: {} rows vs {} rows", a.dim(0), b.dim(0)));
  const std::size_t B = a.dim(0), p = a.dim(1), q = b.dim(1);
  Tensor<T> out(Shape{B, p + q});
  for (std::size_t r = 0; r < B; ++r) {
    std::copy_n(a.data() + r * p, p, out.data() + r * (p + q));
    std::copy_n(b.data() + r * q, q, out.data() + r * (p + q) + p);
  }
  return tape.record(std::move(out), {left, right}, [=](Tape<T>& t, const Tensor<T>& g) {
    if (t.requires_grad(left)) {
      auto& ga = t.grad_mut(left);
      for (std::size_t r = 0; r < B; ++r)
        for (std::size_t j = 0; j < p; ++j) ga[r * p + j] += g[r * (p + q) + j];
    }
    if (t.requires_grad(right)) {
      auto& gb = t.grad_mut(right);
      for (std::size_t r = 0; r < B; ++r)
        for (std::size_t j = 0; j < q; ++j) gb[r * q + j] += g[r * (p + q) + p + j];
    }
  });
}

template <typename T>
Var gather_rows(Tape<T>& tape, Var input, std::span<const std::size_t> rows) {
  const auto& x = tape.value(input);
  require_rank(x.shape(), 2, "gather_rows", "input");
  if (rows.empty()) throw DimensionError("gather_rows: no rows requested");
  const std::size_t n = x.dim(1);
  Tensor<T> out(Shape{rows.size(), n});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= x.dim(0)) throw DimensionError(fmt::format("gather_rows: row {} out of {}", rows[i], x.dim(0)));
    std::copy_n(x.data() + rows[i] * n, n, out.data() + i * n);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return tape.record(std::move(out), {input}, [input, n, idx = std::move(idx)](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad_mut(input);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < n; ++j) gx[idx[i] * n + j] += g[i * n + j];
  });
}

template <typename T>
Var mse_loss(Tape<T>& tape, Var pred, Var target) {
  const auto& p = tape.value(pred);
  const auto& y = tape.value(target);
  if (p.shape() != y.shape()) {
    throw DimensionError(fmt::format("mse_loss: prediction {} vs target {}", shape_to_string(p.shape()), shape_to_string(y.shape())));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.numel(); ++i) {
    const double d = static_cast<double>(p[i]) - static_cast<double>(y[i]);
    acc += d * d;
  }
  const std::size_t N = p.numel();
  return tape.record(Tensor<T>::scalar(static_cast<T>(acc / static_cast<double>(N))), {pred, target},
                     [pred, target, N](Tape<T>& t, const Tensor<T>& g) {
                       const T coef = T{2} * g[0] / static_cast<T>(N);
                       const auto& pv = t.value(pred);
                       const auto& yv = t.value(target);
                       if (t.requires_grad(pred)) {
                         auto& gp = t.grad_mut(pred);
                         for (std::size_t i = 0; i < N; ++i) gp[i] += coef * (pv[i] - yv[i]);
                       }
                       if (t.requires_grad(target)) {
                         auto& gy = t.grad_mut(target);
                         for (std::size_t i = 0; i < N; ++i) gy[i] -= coef * (pv[i] - yv[i]);
                       }
                     });
}

template <typename T>
Var sum(Tape<T>& tape, Var input) {
  const auto& x = tape.value(input);
  T acc{0};
  for (T v : x.values()) acc += v;
  return tape.record(Tensor<T>::scalar(acc), {input}, [input](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad_mut(input);
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += g[0];
  });
}

template <typename T>
Var scale(Tape<T>& tape, Var input, T factor) {
  const auto& x = tape.value(input);
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) out[i] = factor * x[i];
  return tape.record(std::move(out), {input}, [input, factor](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad_mut(input);
    for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += factor * g[i];
  });
}

template <typename T>
Var scale_by(Tape<T>& tape, Var scalar, Var input) {
  const auto& s = tape.value(scalar);
  const auto& x = tape.value(input);
  if (s.numel() != 1) throw DimensionError("scale_by: scalar operand must hold one element");
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) out[i] = s[0] * x[i];
  return tape.record(std::move(out), {scalar, input}, [scalar, input](Tape<T>& t, const Tensor<T>& g) {
    const auto& sv = t.value(scalar);
    const auto& xv = t.value(input);
    if (t.requires_grad(scalar)) {
      T acc{0};
      for (std::size_t i = 0; i < g.numel(); ++i) acc += g[i] * xv[i];
      t.grad_mut(scalar)[0] += acc;
    }
    if (t.requires_grad(input)) {
      auto& gx = t.grad_mut(input);
      for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += sv[0] * g[i];
    }
  });
}

#define DAYLIGHT_INSTANTIATE_OPS(T)                                                                 \
  template Var conv2d<T>(Tape<T>&, Var, Var, Var, std::size_t, std::size_t);                       \
  template Var maxpool2d<T>(Tape<T>&, Var, std::size_t);                                            \
  template Var dense<T>(Tape<T>&, Var, Var, Var);                                                   \
  template Var relu<T>(Tape<T>&, Var);                                                              \
  template Var dropout<T>(Tape<T>&, Var, double, bool, Rng&);                                       \
  template Var global_avg_pool<T>(Tape<T>&, Var);                                                   \
  template Var concat_cols<T>(Tape<T>&, Var, Var);                                                  \
  template Var gather_rows<T>(Tape<T>&, Var, std::span<const std::size_t>);                         \
  template Var mse_loss<T>(Tape<T>&, Var, Var);                                                     \
  template Var sum<T>(Tape<T>&, Var);                                                               \
  template Var scale<T>(Tape<T>&, Var, T);                                                          \
  template Var scale_by<T>(Tape<T>&, Var, Var);

DAYLIGHT_INSTANTIATE_OPS(float)
DAYLIGHT_INSTANTIATE_OPS(double)

#undef DAYLIGHT_INSTANTIATE_OPS

}  // namespace illum::nn
