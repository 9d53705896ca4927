#pragma once

#include "dcdgan/tape.hpp"

// Differentiable primitives over NCHW tensors. Each op records its output on
// the inputs' tape and a closure propagating gradients back to the inputs.
namespace dcdgan::ops {

/// Same value, cut from the graph.
Var detach(Var x);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double s);
Var add_scalar(Var x, double s);

Var abs(Var x);
Var square(Var x);
Var relu(Var x);
Var leaky_relu(Var x, double slope);
Var tanh(Var x);
Var sigmoid(Var x);
/// Elementwise clamp; gradient is zero where the clamp is active.
Var clamp(Var x, double lo, double hi);
Var log(Var x);

/// Mean / sum of all entries, as a scalar.
Var mean(Var x);
Var sum(Var x);

/// 2-D convolution with zero padding. `w` is (C_out, C_in, k, k); `bias` may be
/// an invalid Var for a bias-free convolution.
Var conv2d(Var x, Var w, Var bias, int stride, int pad);

/// Per-sample, per-channel normalization with an affine (gamma, beta) of shape (1, C, 1, 1).
Var instance_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

/// Nearest-neighbour 2x spatial upsampling.
Var upsample_nearest2(Var x);

/// Bilinear resize (half-pixel centers, no corner alignment).
Var resize_bilinear(Var x, std::int64_t out_h, std::int64_t out_w);

/// Per-sample Gram matrix F F^T / (C H W), returned with shape (N, 1, C, C).
Var gram(Var x);

/// Spatial mean, returned with shape (N, C, 1, 1).
Var global_avg_pool(Var x);

/// Output spatial extent of a convolution.
std::int64_t conv_out_size(std::int64_t in, int kernel, int stride, int pad);

}  // namespace dcdgan::ops
