// Shared helpers for the unit and acceptance suites: random fixtures, a
// central finite-difference gradient checker, and explicit-loop oracles that
// recompute the losses without the autodiff ops.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dcdgan/losses.hpp"
#include "dcdgan/nets.hpp"
#include "dcdgan/ops.hpp"
#include "dcdgan/params.hpp"
#include "dcdgan/rng.hpp"
#include "dcdgan/tape.hpp"

namespace dcdgan::testing {

inline Tensor random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(s);
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("dcdgan_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

/// Loss builder for the gradient checker: records a scalar on `tape` with one
/// binder per parameter group.
using GroupLossFn = std::function<Var(Tape& tape, std::vector<ParamBinder>& binders)>;
using LossFn = std::function<Var(Tape& tape, ParamBinder& binder)>;

struct GradCheckResult {
  int sampled = 0;
  int within = 0;
  double worst = 0.0;

  double fraction() const { return sampled == 0 ? 0.0 : static_cast<double>(within) / sampled; }
};

inline std::vector<ParamBinder> bind_all(Tape& tape, const std::vector<ParameterSet>& groups, BindMode mode) {
  std::vector<ParamBinder> out;
  for (const auto& g : groups) out.emplace_back(tape, g, mode);
  return out;
}

inline double eval_loss(const std::vector<ParameterSet>& groups, const GroupLossFn& fn) {
  Tape tape;
  auto binders = bind_all(tape, groups, BindMode::constant);
  return fn(tape, binders).value().item();
}

/// Analytic vs central-difference gradients on `samples` random coordinates
/// drawn from the non-frozen parameters of all groups. The error is relative
/// to max(|analytic|, |numeric|, floor * max(1, |L|)); the scaled floor sits
/// above the rounding noise of the difference quotient, which grows with |L|.
inline GradCheckResult check_gradients(std::vector<ParameterSet> groups, const GroupLossFn& fn, Rng& rng,
                                       int samples = 200, double tol = 1e-3, double h = 1e-7,
                                       double floor = 1e-5) {
  std::vector<Gradients> grads;
  double scale = 1.0;
  {
    Tape tape;
    auto binders = bind_all(tape, groups, BindMode::trainable);
    Var loss = fn(tape, binders);
    scale = std::max(1.0, std::abs(loss.value().item()));
    tape.backward(loss);
    for (const auto& b : binders) grads.push_back(b.gradients());
  }
  struct Coord {
    std::size_t group;
    std::string path;
    std::int64_t index;
  };
  std::vector<Coord> coords;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto& [path, p] : groups[g]) {
      if (p.frozen) continue;
      for (std::int64_t i = 0; i < p.value.size(); ++i) coords.push_back({g, path, i});
    }
  }
  GradCheckResult r;
  for (int s = 0; s < samples && !coords.empty(); ++s) {
    const Coord& c = coords[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(coords.size()) - 1))];
    const auto& gmap = grads[c.group];
    const double analytic = gmap.count(c.path) ? gmap.at(c.path)[c.index] : 0.0;
    double& x = groups[c.group].at(c.path).value[c.index];
    const double x0 = x;
    x = x0 + h;
    const double fp = eval_loss(groups, fn);
    x = x0 - h;
    const double fm = eval_loss(groups, fn);
    x = x0;
    const double numeric = (fp - fm) / (2 * h);
    const double err = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor * scale});
    r.worst = std::max(r.worst, err);
    ++r.sampled;
    if (err <= tol) ++r.within;
  }
  return r;
}

inline GradCheckResult check_gradients(const ParameterSet& params, const LossFn& fn, Rng& rng, int samples = 200,
                                       double tol = 1e-3) {
  return check_gradients(std::vector<ParameterSet>{params},
                         [&fn](Tape& t, std::vector<ParamBinder>& b) { return fn(t, b[0]); }, rng, samples, tol);
}

/// Tiny three-player setup on 8x8 images for gradient and oracle checks.
/// The student (plus its bank) and the discriminator each stay under 2k
/// parameters.
struct ToyWorld {
  Built<Generator> teacher;
  Built<Generator> student;
  Built<Discriminator> disc;
  Built<ProjectionBank> teacher_bank;
  Built<ProjectionBank> student_bank;
  Built<ProjectionBank> adapter;
  Built<FeatureExtractor> phi;
  std::vector<int> g_taps{3, 4};
  std::vector<int> d_taps{0, 1};
  std::vector<int> phi_taps{0, 1};
  Tensor x{};
  Tensor y{};

  static GeneratorSpec teacher_spec() {
    GeneratorSpec s;
    s.base_width = 2;
    s.n_resblocks = 2;
    return s;
  }

  static ToyWorld make(std::uint64_t seed, std::int64_t batch = 2) {
    Rng r(seed);
    auto teacher = build_generator(teacher_spec(), r);
    auto student = build_generator(teacher_spec().with_width(WidthFactor{1, 2}), r);
    DiscriminatorSpec ds;
    ds.widths = {4, 8};
    auto disc = build_discriminator(ds, r);
    const std::vector<int> g_taps{3, 4};
    std::vector<int> tc, sc;
    for (int t : g_taps) {
      tc.push_back(teacher.model.layer_channels()[static_cast<std::size_t>(t)]);
      sc.push_back(student.model.layer_channels()[static_cast<std::size_t>(t)]);
    }
    auto tb = build_bank(make_downsampler_bank(tc), r, true);
    auto sb = build_bank(make_downsampler_bank(sc), r, false);
    auto ad = build_bank(make_feature_adapter(sc, tc), r, false);
    FeatureExtractorSpec fs;
    fs.widths = {4, 4};
    fs.seed = seed + 1;
    auto phi = build_feature_extractor(fs);
    ToyWorld w{std::move(teacher), std::move(student), std::move(disc), std::move(tb), std::move(sb), std::move(ad),
               std::move(phi)};
    w.x = random_tensor(Shape{batch, 3, 8, 8}, r, -0.9, 0.9);
    w.y = random_tensor(Shape{batch, 3, 8, 8}, r, -0.9, 0.9);
    return w;
  }

};

// ---------------------------------------------------------------- oracles

inline double oracle_mean_abs(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

inline double oracle_mean_sq(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

/// G[n][c1][c2] = sum_{h,w} F[n][c1][h][w] F[n][c2][h][w] / (C H W).
inline std::vector<std::vector<std::vector<double>>> oracle_gram(const Tensor& f) {
  const Shape s = f.shape();
  std::vector<std::vector<std::vector<double>>> g(
      static_cast<std::size_t>(s.n),
      std::vector<std::vector<double>>(static_cast<std::size_t>(s.c), std::vector<double>(static_cast<std::size_t>(s.c))));
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t a = 0; a < s.c; ++a)
      for (std::int64_t b = 0; b < s.c; ++b) {
        double acc = 0.0;
        for (std::int64_t y = 0; y < s.h; ++y)
          for (std::int64_t x = 0; x < s.w; ++x) acc += f.at(n, a, y, x) * f.at(n, b, y, x);
        g[static_cast<std::size_t>(n)][static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
            acc / static_cast<double>(s.c * s.h * s.w);
      }
  return g;
}

inline double oracle_style(const std::vector<Tensor>& t, const std::vector<Tensor>& s) {
  double total = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    const auto gt = oracle_gram(t[j]);
    const auto gs = oracle_gram(s[j]);
    double acc = 0.0;
    for (std::size_t n = 0; n < gt.size(); ++n)
      for (std::size_t a = 0; a < gt[n].size(); ++a)
        for (std::size_t b = 0; b < gt[n].size(); ++b) acc += std::abs(gt[n][a][b] - gs[n][a][b]);
    total += acc / static_cast<double>(gt.size());
  }
  return total;
}

inline double oracle_feature_reconstruction(const std::vector<Tensor>& t, const std::vector<Tensor>& s) {
  double total = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    const Shape sh = t[j].shape();
    double acc = 0.0;
    for (std::int64_t n = 0; n < sh.n; ++n) {
      double per_sample = 0.0;
      for (std::int64_t c = 0; c < sh.c; ++c)
        for (std::int64_t y = 0; y < sh.h; ++y)
          for (std::int64_t x = 0; x < sh.w; ++x) per_sample += std::abs(t[j].at(n, c, y, x) - s[j].at(n, c, y, x));
      acc += per_sample / static_cast<double>(sh.c * sh.h * sh.w);
    }
    total += acc / static_cast<double>(sh.n);
  }
  return total;
}

inline double oracle_per_pixel(const std::vector<Tensor>& t, const std::vector<Tensor>& s, bool l2) {
  double total = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) total += l2 ? oracle_mean_sq(t[j], s[j]) : oracle_mean_abs(t[j], s[j]);
  return total;
}

/// 1x1 projection + tanh + bilinear resize (half-pixel centers), by loops.
inline Tensor oracle_feature_image(const Tensor& feat, const ParameterSet& bank, std::size_t entry, std::int64_t out_h,
                                   std::int64_t out_w) {
  const std::string p = "p" + std::to_string(entry);
  const Tensor& w = bank.at(p + ".weight").value;
  const Tensor& b = bank.at(p + ".bias").value;
  const Shape s = feat.shape();
  const std::int64_t oc = w.shape().n;
  Tensor proj(Shape{s.n, oc, s.h, s.w});
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t o = 0; o < oc; ++o)
      for (std::int64_t y = 0; y < s.h; ++y)
        for (std::int64_t x = 0; x < s.w; ++x) {
          double acc = b[o];
          for (std::int64_t c = 0; c < s.c; ++c) acc += w.at(o, c, 0, 0) * feat.at(n, c, y, x);
          proj.at(n, o, y, x) = std::tanh(acc);
        }
  Tensor out(Shape{s.n, oc, out_h, out_w});
  auto src = [](std::int64_t o, std::int64_t in, std::int64_t out_size) {
    double v = (static_cast<double>(o) + 0.5) * static_cast<double>(in) / static_cast<double>(out_size) - 0.5;
    return std::max(v, 0.0);
  };
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t o = 0; o < oc; ++o)
      for (std::int64_t y = 0; y < out_h; ++y)
        for (std::int64_t x = 0; x < out_w; ++x) {
          const double sy = src(y, s.h, out_h), sx = src(x, s.w, out_w);
          const auto y0 = static_cast<std::int64_t>(std::floor(sy)), x0 = static_cast<std::int64_t>(std::floor(sx));
          const std::int64_t y1 = std::min(y0 + 1, s.h - 1), x1 = std::min(x0 + 1, s.w - 1);
          const double fy = sy - static_cast<double>(y0), fx = sx - static_cast<double>(x0);
          out.at(n, o, y, x) = (1 - fy) * ((1 - fx) * proj.at(n, o, y0, x0) + fx * proj.at(n, o, y0, x1)) +
                               fy * ((1 - fx) * proj.at(n, o, y1, x0) + fx * proj.at(n, o, y1, x1));
        }
  return out;
}

/// Discriminator block responses of a constant image.
inline std::vector<Tensor> disc_features(const Discriminator& d, const ParameterSet& params, const Tensor& img,
                                         std::span<const int> taps) {
  Tape tape;
  ParamBinder b(tape, params, BindMode::constant);
  std::vector<Tensor> out;
  for (Var v : d.forward(b, tape.constant(img), taps).features) out.push_back(v.value());
  return out;
}

/// sum_i sum_k mean |D_k(f_T(t_i)) - D_k(f_S(s_i))|, with the projections and
/// distances done by loops.
inline double oracle_dcd(const std::vector<Tensor>& t_feats, const std::vector<Tensor>& s_feats,
                         const ParameterSet& t_bank, const ParameterSet& s_bank, const Discriminator& d,
                         const ParameterSet& d_params, std::span<const int> d_taps, std::int64_t h, std::int64_t w,
                         bool l2 = false) {
  double total = 0.0;
  for (std::size_t i = 0; i < t_feats.size(); ++i) {
    const auto rt = disc_features(d, d_params, oracle_feature_image(t_feats[i], t_bank, i, h, w), d_taps);
    const auto rs = disc_features(d, d_params, oracle_feature_image(s_feats[i], s_bank, i, h, w), d_taps);
    for (std::size_t k = 0; k < rt.size(); ++k) total += l2 ? oracle_mean_sq(rt[k], rs[k]) : oracle_mean_abs(rt[k], rs[k]);
  }
  return total;
}

/// Conv parameter/MAC counting straight from layer hyperparameters.
struct CountOracle {
  std::int64_t params = 0;
  std::int64_t macs = 0;

  void conv(std::int64_t k, std::int64_t cin, std::int64_t cout, std::int64_t hout, std::int64_t wout) {
    params += k * k * cin * cout + cout;
    macs += k * k * cin * cout * hout * wout;
  }
  void norm(std::int64_t c) { params += 2 * c; }
};

/// Teacher/student generator count: c7 stem, two stride-2 downs, n residual
/// blocks of two 3x3 convs, two nearest-up + 3x3 convs, c7 head.
inline CountOracle oracle_generator(int base, int n_res, int num, int den, std::int64_t res) {
  auto w = [&](int c) { return static_cast<std::int64_t>((static_cast<std::int64_t>(num) * c + den - 1) / den); };
  const std::int64_t c0 = w(base), c1 = w(2 * base), c2 = w(4 * base);
  CountOracle o;
  o.conv(7, 3, c0, res, res);
  o.norm(c0);
  o.conv(3, c0, c1, res / 2, res / 2);
  o.norm(c1);
  o.conv(3, c1, c2, res / 4, res / 4);
  o.norm(c2);
  for (int b = 0; b < n_res; ++b) {
    o.conv(3, c2, c2, res / 4, res / 4);
    o.norm(c2);
    o.conv(3, c2, c2, res / 4, res / 4);
    o.norm(c2);
  }
  o.conv(3, c2, c1, res / 2, res / 2);
  o.norm(c1);
  o.conv(3, c1, c0, res, res);
  o.norm(c0);
  o.conv(7, c0, 3, res, res);
  return o;
}

}  // namespace dcdgan::testing
