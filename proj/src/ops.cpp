#include "dcdgan/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "dcdgan/errors.hpp"

namespace dcdgan::ops {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRow = Eigen::Map<RowMat>;
using ConstMapRow = Eigen::Map<const RowMat>;

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  }
}

template <typename F>
Tensor map_values(const Tensor& x, F f) {
  Tensor out(x.shape());
  const double* src = x.data();
  double* dst = out.data();
  for (std::int64_t i = 0, n = x.size(); i < n; ++i) dst[i] = f(src[i]);
  return out;
}

// Records y = f(x) with dy/dx computed from (x, y) by `df`.
template <typename F, typename DF>
Var unary(Var x, F f, DF df) {
  Tensor y = map_values(x.value(), f);
  Tape& tape = x.tape();
  auto out_id = static_cast<int>(tape.size());
  return tape.record(std::move(y), {x}, [x, df, out_id](Tape& t, const Tensor& g) {
    const Tensor& xv = x.value();
    const Tensor& yv = t.value(out_id);
    Tensor& gx = t.grad_buffer(x);
    for (std::int64_t i = 0, n = g.size(); i < n; ++i) gx[i] += g[i] * df(xv[i], yv[i]);
  });
}

void im2col(const double* x, std::int64_t cin, std::int64_t h, std::int64_t w, int k, int stride,
            int pad, std::int64_t oh, std::int64_t ow, double* col) {
  for (std::int64_t c = 0; c < cin; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = col + ((c * k + ky) * k + kx) * oh * ow;
        for (std::int64_t oy = 0; oy < oh; ++oy) {
          const std::int64_t iy = oy * stride - pad + ky;
          double* dst = row + oy * ow;
          if (iy < 0 || iy >= h) {
            std::fill_n(dst, ow, 0.0);
            continue;
          }
          const double* src = x + (c * h + iy) * w;
          for (std::int64_t ox = 0; ox < ow; ++ox) {
            const std::int64_t ix = ox * stride - pad + kx;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* col, std::int64_t cin, std::int64_t h, std::int64_t w, int k, int stride,
            int pad, std::int64_t oh, std::int64_t ow, double* x) {
  for (std::int64_t c = 0; c < cin; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = col + ((c * k + ky) * k + kx) * oh * ow;
        for (std::int64_t oy = 0; oy < oh; ++oy) {
          const std::int64_t iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          double* dst = x + (c * h + iy) * w;
          const double* src = row + oy * ow;
          for (std::int64_t ox = 0; ox < ow; ++ox) {
            const std::int64_t ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

// Per-axis bilinear sampling table: out index -> (i0, i1, weight of i1).
struct Interp {
  std::vector<std::int64_t> i0, i1;
  std::vector<double> frac;
};

Interp interp_table(std::int64_t in, std::int64_t out) {
  Interp t;
  t.i0.resize(static_cast<std::size_t>(out));
  t.i1.resize(static_cast<std::size_t>(out));
  t.frac.resize(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::int64_t o = 0; o < out; ++o) {
    double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
    src = std::max(src, 0.0);
    auto i0 = static_cast<std::int64_t>(std::floor(src));
    i0 = std::min(i0, in - 1);
    const std::int64_t i1 = std::min(i0 + 1, in - 1);
    t.i0[static_cast<std::size_t>(o)] = i0;
    t.i1[static_cast<std::size_t>(o)] = i1;
    t.frac[static_cast<std::size_t>(o)] = src - static_cast<double>(i0);
  }
  return t;
}

}  // namespace

std::int64_t conv_out_size(std::int64_t in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

Var detach(Var x) { return x.tape().constant(x.value()); }

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tensor y = a.value();
  const double* bv = b.value().data();
  for (std::int64_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Tensor y = a.value();
  const double* bv = b.value().data();
  for (std::int64_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    t.accumulate(a, g);
    if (b.requires_grad()) {
      Tensor& gb = t.grad_buffer(b);
      for (std::int64_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tensor y = a.value();
  const double* bv = b.value().data();
  for (std::int64_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (a.requires_grad()) {
      Tensor& ga = t.grad_buffer(a);
      const Tensor& bv = b.value();
      for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (b.requires_grad()) {
      Tensor& gb = t.grad_buffer(b);
      const Tensor& av = a.value();
      for (std::int64_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var x, double s) {
  return unary(x, [s](double v) { return s * v; }, [s](double, double) { return s; });
}

Var add_scalar(Var x, double s) {
  return unary(x, [s](double v) { return v + s; }, [](double, double) { return 1.0; });
}

Var abs(Var x) {
  return unary(
      x, [](double v) { return std::abs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Var square(Var x) {
  return unary(x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Var relu(Var x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(Var x, double slope) {
  return unary(
      x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Var tanh(Var x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var x) {
  return unary(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); }, [](double, double y) { return y * (1.0 - y); });
}

Var clamp(Var x, double lo, double hi) {
  return unary(
      x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v > lo && v < hi) ? 1.0 : 0.0; });
}

Var log(Var x) {
  return unary(
      x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  return x.tape().record(Tensor::scalar(s), {x}, [x](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_buffer(x);
    const double gv = g[0];
    for (std::int64_t i = 0; i < gx.size(); ++i) gx[i] += gv;
  });
}

Var mean(Var x) {
  const auto n = static_cast<double>(x.value().size());
  return scale(sum(x), 1.0 / n);
}

Var conv2d(Var x, Var w, Var bias, int stride, int pad) {
  const Shape xs = x.shape();
  const Shape ws = w.shape();
  if (ws.h != ws.w) throw ShapeError("conv2d: non-square kernel " + ws.str());
  if (xs.c != ws.c) {
    throw ShapeError("conv2d: input has " + std::to_string(xs.c) + " channels, kernel expects " +
                     std::to_string(ws.c));
  }
  const int k = static_cast<int>(ws.h);
  const std::int64_t oh = conv_out_size(xs.h, k, stride, pad);
  const std::int64_t ow = conv_out_size(xs.w, k, stride, pad);
  if (oh < 1 || ow < 1) throw ShapeError("conv2d: input " + xs.str() + " too small for kernel " + std::to_string(k));
  const std::int64_t cout = ws.n;
  const std::int64_t kdim = ws.c * k * k;
  const std::int64_t opix = oh * ow;

  Tensor y(Shape{xs.n, cout, oh, ow});
  std::vector<double, AlignedAllocator<double>> col(static_cast<std::size_t>(kdim * opix));
  ConstMapRow wm(w.value().data(), cout, kdim);
  for (std::int64_t n = 0; n < xs.n; ++n) {
    im2col(x.value().data() + n * xs.c * xs.h * xs.w, xs.c, xs.h, xs.w, k, stride, pad, oh, ow, col.data());
    ConstMapRow cm(col.data(), kdim, opix);
    MapRow ym(y.data() + n * cout * opix, cout, opix);
    ym.noalias() = wm * cm;
    if (bias.valid()) {
      const double* b = bias.value().data();
      for (std::int64_t c = 0; c < cout; ++c) ym.row(c).array() += b[c];
    }
  }

  return x.tape().record(std::move(y), {x, w, bias}, [=](Tape& t, const Tensor& g) {
    std::vector<double, AlignedAllocator<double>> colb(static_cast<std::size_t>(kdim * opix));
    ConstMapRow wmb(w.value().data(), cout, kdim);
    for (std::int64_t n = 0; n < xs.n; ++n) {
      ConstMapRow gm(g.data() + n * cout * opix, cout, opix);
      if (w.requires_grad()) {
        im2col(x.value().data() + n * xs.c * xs.h * xs.w, xs.c, xs.h, xs.w, k, stride, pad, oh, ow, colb.data());
        ConstMapRow cm(colb.data(), kdim, opix);
        MapRow gw(t.grad_buffer(w).data(), cout, kdim);
        gw.noalias() += gm * cm.transpose();
      }
      if (bias.valid() && bias.requires_grad()) {
        double* gb = t.grad_buffer(bias).data();
        for (std::int64_t c = 0; c < cout; ++c) gb[c] += gm.row(c).sum();
      }
      if (x.requires_grad()) {
        MapRow dcol(colb.data(), kdim, opix);
        dcol.noalias() = wmb.transpose() * gm;
        col2im(colb.data(), xs.c, xs.h, xs.w, k, stride, pad, oh, ow,
               t.grad_buffer(x).data() + n * xs.c * xs.h * xs.w);
      }
    }
  });
}

Var instance_norm(Var x, Var gamma, Var beta, double eps) {
  const Shape s = x.shape();
  if (gamma.shape() != Shape{1, s.c, 1, 1} || beta.shape() != Shape{1, s.c, 1, 1}) {
    throw ShapeError("instance_norm: affine parameters must be (1, " + std::to_string(s.c) + ", 1, 1)");
  }
  const std::int64_t hw = s.plane();
  Tensor xhat(s);
  std::vector<double> inv_std(static_cast<std::size_t>(s.n * s.c));
  Tensor y(s);
  const double* xv = x.value().data();
  const double* gv = gamma.value().data();
  const double* bv = beta.value().data();
  for (std::int64_t n = 0; n < s.n; ++n) {
    for (std::int64_t c = 0; c < s.c; ++c) {
      const std::int64_t off = (n * s.c + c) * hw;
      double mu = 0.0;
      for (std::int64_t i = 0; i < hw; ++i) mu += xv[off + i];
      mu /= static_cast<double>(hw);
      double var = 0.0;
      for (std::int64_t i = 0; i < hw; ++i) var += (xv[off + i] - mu) * (xv[off + i] - mu);
      var /= static_cast<double>(hw);
      const double is = 1.0 / std::sqrt(var + eps);
      inv_std[static_cast<std::size_t>(n * s.c + c)] = is;
      for (std::int64_t i = 0; i < hw; ++i) {
        const double xh = (xv[off + i] - mu) * is;
        xhat[off + i] = xh;
        y[off + i] = gv[c] * xh + bv[c];
      }
    }
  }
  return x.tape().record(
      std::move(y), {x, gamma, beta},
      [x, gamma, beta, s, hw, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& t, const Tensor& g) {
        const double* gv = gamma.value().data();
        for (std::int64_t n = 0; n < s.n; ++n) {
          for (std::int64_t c = 0; c < s.c; ++c) {
            const std::int64_t off = (n * s.c + c) * hw;
            double sum_g = 0.0;
            double sum_gx = 0.0;
            for (std::int64_t i = 0; i < hw; ++i) {
              sum_g += g[off + i];
              sum_gx += g[off + i] * xhat[off + i];
            }
            if (gamma.requires_grad()) t.grad_buffer(gamma)[c] += sum_gx;
            if (beta.requires_grad()) t.grad_buffer(beta)[c] += sum_g;
            if (x.requires_grad()) {
              Tensor& gx = t.grad_buffer(x);
              const double is = inv_std[static_cast<std::size_t>(n * s.c + c)];
              const double inv_hw = 1.0 / static_cast<double>(hw);
              const double mg = sum_g * inv_hw;
              const double mgx = sum_gx * inv_hw;
              for (std::int64_t i = 0; i < hw; ++i) {
                gx[off + i] += gv[c] * is * (g[off + i] - mg - xhat[off + i] * mgx);
              }
            }
          }
        }
      });
}

Var upsample_nearest2(Var x) {
  const Shape s = x.shape();
  Tensor y(Shape{s.n, s.c, 2 * s.h, 2 * s.w});
  const double* xv = x.value().data();
  for (std::int64_t p = 0; p < s.n * s.c; ++p) {
    for (std::int64_t i = 0; i < 2 * s.h; ++i) {
      for (std::int64_t j = 0; j < 2 * s.w; ++j) {
        y[(p * 2 * s.h + i) * 2 * s.w + j] = xv[(p * s.h + i / 2) * s.w + j / 2];
      }
    }
  }
  return x.tape().record(std::move(y), {x}, [x, s](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_buffer(x);
    for (std::int64_t p = 0; p < s.n * s.c; ++p) {
      for (std::int64_t i = 0; i < 2 * s.h; ++i) {
        for (std::int64_t j = 0; j < 2 * s.w; ++j) {
          gx[(p * s.h + i / 2) * s.w + j / 2] += g[(p * 2 * s.h + i) * 2 * s.w + j];
        }
      }
    }
  });
}

Var resize_bilinear(Var x, std::int64_t out_h, std::int64_t out_w) {
  const Shape s = x.shape();
  if (out_h < 1 || out_w < 1) throw ShapeError("resize_bilinear: empty target size");
  Interp ty = interp_table(s.h, out_h);
  Interp tx = interp_table(s.w, out_w);
  Tensor y(Shape{s.n, s.c, out_h, out_w});
  const double* xv = x.value().data();
  for (std::int64_t p = 0; p < s.n * s.c; ++p) {
    const double* src = xv + p * s.h * s.w;
    double* dst = y.data() + p * out_h * out_w;
    for (std::int64_t i = 0; i < out_h; ++i) {
      const auto yi = static_cast<std::size_t>(i);
      const double fy = ty.frac[yi];
      const double* r0 = src + ty.i0[yi] * s.w;
      const double* r1 = src + ty.i1[yi] * s.w;
      for (std::int64_t j = 0; j < out_w; ++j) {
        const auto xj = static_cast<std::size_t>(j);
        const double fx = tx.frac[xj];
        const double top = r0[tx.i0[xj]] * (1.0 - fx) + r0[tx.i1[xj]] * fx;
        const double bot = r1[tx.i0[xj]] * (1.0 - fx) + r1[tx.i1[xj]] * fx;
        dst[i * out_w + j] = top * (1.0 - fy) + bot * fy;
      }
    }
  }
  return x.tape().record(
      std::move(y), {x}, [x, s, out_h, out_w, ty = std::move(ty), tx = std::move(tx)](Tape& t, const Tensor& g) {
        Tensor& gx = t.grad_buffer(x);
        for (std::int64_t p = 0; p < s.n * s.c; ++p) {
          double* dst = gx.data() + p * s.h * s.w;
          const double* src = g.data() + p * out_h * out_w;
          for (std::int64_t i = 0; i < out_h; ++i) {
            const auto yi = static_cast<std::size_t>(i);
            const double fy = ty.frac[yi];
            double* r0 = dst + ty.i0[yi] * s.w;
            double* r1 = dst + ty.i1[yi] * s.w;
            for (std::int64_t j = 0; j < out_w; ++j) {
              const auto xj = static_cast<std::size_t>(j);
              const double fx = tx.frac[xj];
              const double gv = src[i * out_w + j];
              r0[tx.i0[xj]] += gv * (1.0 - fy) * (1.0 - fx);
              r0[tx.i1[xj]] += gv * (1.0 - fy) * fx;
              r1[tx.i0[xj]] += gv * fy * (1.0 - fx);
              r1[tx.i1[xj]] += gv * fy * fx;
            }
          }
        }
      });
}

Var gram(Var x) {
  const Shape s = x.shape();
  const std::int64_t hw = s.plane();
  if (hw < 1) throw ShapeError("gram: empty spatial extent");
  const double norm = 1.0 / static_cast<double>(s.c * hw);
  Tensor y(Shape{s.n, 1, s.c, s.c});
  for (std::int64_t n = 0; n < s.n; ++n) {
    ConstMapRow f(x.value().data() + n * s.c * hw, s.c, hw);
    MapRow gm(y.data() + n * s.c * s.c, s.c, s.c);
    gm.noalias() = f * f.transpose() * norm;
    // GEMM rounding can differ across the diagonal; mirror the upper triangle.
    for (std::int64_t a = 0; a < s.c; ++a)
      for (std::int64_t b = 0; b < a; ++b) gm(a, b) = gm(b, a);
  }
  return x.tape().record(std::move(y), {x}, [x, s, hw, norm](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_buffer(x);
    for (std::int64_t n = 0; n < s.n; ++n) {
      ConstMapRow f(x.value().data() + n * s.c * hw, s.c, hw);
      ConstMapRow gg(g.data() + n * s.c * s.c, s.c, s.c);
      MapRow df(gx.data() + n * s.c * hw, s.c, hw);
      df.noalias() += (gg + gg.transpose()) * f * norm;
    }
  });
}

Var global_avg_pool(Var x) {
  const Shape s = x.shape();
  const std::int64_t hw = s.plane();
  Tensor y(Shape{s.n, s.c, 1, 1});
  const double* xv = x.value().data();
  for (std::int64_t p = 0; p < s.n * s.c; ++p) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < hw; ++i) acc += xv[p * hw + i];
    y[p] = acc / static_cast<double>(hw);
  }
  return x.tape().record(std::move(y), {x}, [x, s, hw](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_buffer(x);
    const double inv = 1.0 / static_cast<double>(hw);
    for (std::int64_t p = 0; p < s.n * s.c; ++p) {
      for (std::int64_t i = 0; i < hw; ++i) gx[p * hw + i] += g[p] * inv;
    }
  });
}

}  // namespace dcdgan::ops
