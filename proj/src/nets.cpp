#include "dcdgan/nets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dcdgan/errors.hpp"
#include "dcdgan/ops.hpp"
#include "dcdgan/weights_io.hpp"

namespace dcdgan {

namespace {

constexpr double kLeakySlope = 0.2;
constexpr double kConvInitStd = 0.02;

std::string layer_name(const char* prefix, int i) { return prefix + std::to_string(i); }

Var conv(ParamBinder& p, const std::string& name, Var x, int stride, int pad) {
  return ops::conv2d(x, p(name + ".weight"), p(name + ".bias"), stride, pad);
}

Var norm(ParamBinder& p, const std::string& name, Var x) {
  return ops::instance_norm(x, p(name + ".gamma"), p(name + ".beta"));
}

void add_conv(std::vector<std::pair<std::string, Shape>>& out, const std::string& name, int cin, int cout, int k) {
  out.emplace_back(name + ".weight", Shape{cout, cin, k, k});
  out.emplace_back(name + ".bias", Shape{1, cout, 1, 1});
}

void add_norm(std::vector<std::pair<std::string, Shape>>& out, const std::string& name, int c) {
  out.emplace_back(name + ".gamma", Shape{1, c, 1, 1});
  out.emplace_back(name + ".beta", Shape{1, c, 1, 1});
}

// Appends a conv descriptor and advances the running spatial size.
void desc_conv(std::vector<LayerDesc>& out, const std::string& name, int cin, int cout, int k, int stride, int pad,
               std::int64_t& h, std::int64_t& w) {
  LayerDesc d;
  d.name = name;
  d.kind = LayerKind::conv;
  d.op = "conv2d";
  d.in_channels = cin;
  d.out_channels = cout;
  d.kernel = k;
  d.stride = stride;
  d.pad = pad;
  d.bias = true;
  d.in_h = h;
  d.in_w = w;
  h = ops::conv_out_size(h, k, stride, pad);
  w = ops::conv_out_size(w, k, stride, pad);
  if (h < 1 || w < 1) throw ShapeError(name + ": input too small for " + std::to_string(k) + "x" + std::to_string(k) + " kernel");
  d.out_h = h;
  d.out_w = w;
  out.push_back(d);
}

void desc_simple(std::vector<LayerDesc>& out, const std::string& name, LayerKind kind, const std::string& op, int c,
                 std::int64_t in_h, std::int64_t in_w, std::int64_t out_h, std::int64_t out_w) {
  LayerDesc d;
  d.name = name;
  d.kind = kind;
  d.op = op;
  d.in_channels = c;
  d.out_channels = c;
  d.affine = kind == LayerKind::norm;
  d.in_h = in_h;
  d.in_w = in_w;
  d.out_h = out_h;
  d.out_w = out_w;
  out.push_back(d);
}

void desc_norm(std::vector<LayerDesc>& out, const std::string& name, int c, std::int64_t h, std::int64_t w) {
  desc_simple(out, name, LayerKind::norm, "instance_norm", c, h, w, h, w);
}

void desc_act(std::vector<LayerDesc>& out, const std::string& name, const std::string& op, int c, std::int64_t h,
              std::int64_t w) {
  desc_simple(out, name, LayerKind::activation, op, c, h, w, h, w);
}

ParameterSet init_params(const std::vector<std::pair<std::string, Shape>>& shapes, Rng& rng, double conv_std) {
  ParameterSet params;
  for (const auto& [name, shape] : shapes) {
    Tensor t(shape);
    if (name.ends_with(".weight")) {
      for (auto& v : t.values()) v = rng.normal(0.0, conv_std);
    } else if (name.ends_with(".gamma")) {
      std::fill(t.values().begin(), t.values().end(), 1.0);
    }
    params.add(name, std::move(t));
  }
  return params;
}

}  // namespace

WidthFactor WidthFactor::parse(const std::string& text) {
  WidthFactor wf;
  try {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
      wf.num = std::stoi(text.substr(0, slash));
      wf.den = std::stoi(text.substr(slash + 1));
    } else if (text.find('.') != std::string::npos) {
      const double v = std::stod(text);
      wf.den = 1000000;
      wf.num = static_cast<int>(std::lround(v * wf.den));
      const int g = std::gcd(wf.num, wf.den);
      wf.num /= g;
      wf.den /= g;
    } else {
      wf.num = std::stoi(text);
      wf.den = 1;
    }
  } catch (const std::exception&) {
    throw ConfigError("invalid width factor '" + text + "'");
  }
  if (wf.num <= 0 || wf.den <= 0 || wf.num > wf.den) {
    throw ConfigError("width factor must lie in (0, 1], got '" + text + "'");
  }
  return wf;
}

void validate_taps(std::span<const int> taps, int limit, const std::string& what, bool allow_empty) {
  if (!allow_empty && taps.empty()) throw ConfigError(what + ": tap list must be non-empty");
  for (std::size_t i = 0; i < taps.size(); ++i) {
    if (taps[i] < 0 || taps[i] >= limit) {
      throw ConfigError(what + ": tap index " + std::to_string(taps[i]) + " out of range [0, " +
                        std::to_string(limit) + ")");
    }
    if (i > 0 && taps[i] <= taps[i - 1]) {
      throw ConfigError(what + ": taps must be strictly increasing");
    }
  }
}

// ---------------------------------------------------------------- Generator

Generator::Generator(GeneratorSpec spec) : spec_(spec) {
  if (spec_.base_width < 1 || spec_.n_resblocks < 0 || spec_.in_channels < 1 || spec_.out_channels < 1) {
    throw ConfigError("invalid generator spec");
  }
  w0_ = spec_.width_factor.apply(spec_.base_width);
  w1_ = spec_.width_factor.apply(2 * spec_.base_width);
  w2_ = spec_.width_factor.apply(4 * spec_.base_width);
}

std::vector<int> Generator::layer_channels() const {
  std::vector<int> ch{w0_, w1_, w2_};
  for (int r = 0; r < spec_.n_resblocks; ++r) ch.push_back(w2_);
  ch.push_back(w1_);
  ch.push_back(w0_);
  ch.push_back(spec_.out_channels);
  return ch;
}

std::vector<int> Generator::default_taps() const {
  const int first = 3;
  const int n = spec_.n_resblocks;
  if (n == 0) return {2};
  const int count = std::min(4, n);
  std::vector<int> taps;
  for (int i = 0; i < count; ++i) {
    const double pos = count == 1 ? 0.0 : static_cast<double>(i) * (n - 1) / (count - 1);
    taps.push_back(first + static_cast<int>(std::lround(pos)));
  }
  return taps;
}

std::vector<std::pair<std::string, Shape>> Generator::parameter_shapes() const {
  std::vector<std::pair<std::string, Shape>> out;
  const int n = spec_.n_resblocks;
  add_conv(out, "l0.conv", spec_.in_channels, w0_, 7);
  add_norm(out, "l0.norm", w0_);
  add_conv(out, "l1.conv", w0_, w1_, 3);
  add_norm(out, "l1.norm", w1_);
  add_conv(out, "l2.conv", w1_, w2_, 3);
  add_norm(out, "l2.norm", w2_);
  for (int r = 0; r < n; ++r) {
    const std::string l = layer_name("l", 3 + r);
    add_conv(out, l + ".conv1", w2_, w2_, 3);
    add_norm(out, l + ".norm1", w2_);
    add_conv(out, l + ".conv2", w2_, w2_, 3);
    add_norm(out, l + ".norm2", w2_);
  }
  add_conv(out, layer_name("l", n + 3) + ".conv", w2_, w1_, 3);
  add_norm(out, layer_name("l", n + 3) + ".norm", w1_);
  add_conv(out, layer_name("l", n + 4) + ".conv", w1_, w0_, 3);
  add_norm(out, layer_name("l", n + 4) + ".norm", w0_);
  add_conv(out, layer_name("l", n + 5) + ".conv", w0_, spec_.out_channels, 7);
  return out;
}

Generator::Output Generator::forward(ParamBinder& p, Var x, std::span<const int> taps) const {
  const Shape s = x.shape();
  if (s.c != spec_.in_channels) {
    throw ShapeError("generator expects " + std::to_string(spec_.in_channels) + " input channels, got " +
                     std::to_string(s.c));
  }
  if (s.h % 4 != 0 || s.w % 4 != 0) {
    throw ShapeError("generator input spatial size must be a multiple of 4, got " + s.str());
  }
  validate_taps(taps, num_layers(), "generator_taps");

  Output out;
  std::size_t next_tap = 0;
  auto emit = [&](int layer, Var h) {
    if (next_tap < taps.size() && taps[next_tap] == layer) {
      out.features.push_back(h);
      ++next_tap;
    }
  };

  const int n = spec_.n_resblocks;
  Var h = ops::relu(norm(p, "l0.norm", conv(p, "l0.conv", x, 1, 3)));
  emit(0, h);
  h = ops::relu(norm(p, "l1.norm", conv(p, "l1.conv", h, 2, 1)));
  emit(1, h);
  h = ops::relu(norm(p, "l2.norm", conv(p, "l2.conv", h, 2, 1)));
  emit(2, h);
  for (int r = 0; r < n; ++r) {
    const std::string l = layer_name("l", 3 + r);
    Var branch = ops::relu(norm(p, l + ".norm1", conv(p, l + ".conv1", h, 1, 1)));
    branch = norm(p, l + ".norm2", conv(p, l + ".conv2", branch, 1, 1));
    h = ops::add(h, branch);
    emit(3 + r, h);
  }
  for (int u = 0; u < 2; ++u) {
    const std::string l = layer_name("l", n + 3 + u);
    h = ops::relu(norm(p, l + ".norm", conv(p, l + ".conv", ops::upsample_nearest2(h), 1, 1)));
    emit(n + 3 + u, h);
  }
  h = ops::tanh(conv(p, layer_name("l", n + 5) + ".conv", h, 1, 3));
  emit(n + 5, h);
  out.image = h;
  return out;
}

std::vector<LayerDesc> Generator::describe(std::int64_t h, std::int64_t w) const {
  if (h % 4 != 0 || w % 4 != 0) throw ShapeError("generator reference size must be a multiple of 4");
  std::vector<LayerDesc> d;
  const int n = spec_.n_resblocks;
  auto conv_block = [&](const std::string& l, int cin, int cout, int k, int stride, int pad, bool act) {
    desc_conv(d, l + ".conv", cin, cout, k, stride, pad, h, w);
    desc_norm(d, l + ".norm", cout, h, w);
    if (act) desc_act(d, l + ".relu", "relu", cout, h, w);
  };
  conv_block("l0", spec_.in_channels, w0_, 7, 1, 3, true);
  conv_block("l1", w0_, w1_, 3, 2, 1, true);
  conv_block("l2", w1_, w2_, 3, 2, 1, true);
  for (int r = 0; r < n; ++r) {
    const std::string l = layer_name("l", 3 + r);
    desc_conv(d, l + ".conv1", w2_, w2_, 3, 1, 1, h, w);
    desc_norm(d, l + ".norm1", w2_, h, w);
    desc_act(d, l + ".relu", "relu", w2_, h, w);
    desc_conv(d, l + ".conv2", w2_, w2_, 3, 1, 1, h, w);
    desc_norm(d, l + ".norm2", w2_, h, w);
    desc_act(d, l + ".add", "residual_add", w2_, h, w);
  }
  int cin = w2_;
  for (int u = 0; u < 2; ++u) {
    const std::string l = layer_name("l", n + 3 + u);
    const int cout = u == 0 ? w1_ : w0_;
    desc_simple(d, l + ".up", LayerKind::resize, "nearest2", cin, h, w, 2 * h, 2 * w);
    h *= 2;
    w *= 2;
    conv_block(l, cin, cout, 3, 1, 1, true);
    cin = cout;
  }
  const std::string l = layer_name("l", n + 5);
  desc_conv(d, l + ".conv", w0_, spec_.out_channels, 7, 1, 3, h, w);
  desc_act(d, l + ".tanh", "tanh", spec_.out_channels, h, w);
  return d;
}

Built<Generator> build_generator(const GeneratorSpec& spec, Rng& rng) {
  Generator g(spec);
  return {g, init_params(g.parameter_shapes(), rng, kConvInitStd)};
}

// ------------------------------------------------------------ Discriminator

Discriminator::Discriminator(DiscriminatorSpec spec) : spec_(std::move(spec)) {
  if (spec_.in_channels != 3) throw ShapeError("discriminator input channel count must be 3");
  if (spec_.widths.empty()) throw ConfigError("discriminator needs at least one conv block");
  for (int w : spec_.widths) {
    if (w < 1) throw ConfigError("discriminator widths must be positive");
  }
}

std::vector<int> Discriminator::default_taps() const {
  std::vector<int> taps(spec_.widths.size());
  for (std::size_t i = 0; i < taps.size(); ++i) taps[i] = static_cast<int>(i);
  return taps;
}

std::vector<std::pair<std::string, Shape>> Discriminator::parameter_shapes() const {
  std::vector<std::pair<std::string, Shape>> out;
  int cin = spec_.in_channels;
  for (int b = 0; b < num_blocks(); ++b) {
    const std::string l = layer_name("b", b);
    const int w = spec_.widths[static_cast<std::size_t>(b)];
    add_conv(out, l + ".conv", cin, w, 4);
    if (b > 0) add_norm(out, l + ".norm", w);
    cin = w;
  }
  add_conv(out, "head.conv", cin, 1, 4);
  return out;
}

Discriminator::Output Discriminator::forward(ParamBinder& p, Var img, std::span<const int> taps) const {
  if (img.shape().c != 3) {
    throw ShapeError("discriminator input must have 3 channels, got " + std::to_string(img.shape().c));
  }
  require_image_range(img.value(), "discriminator input");
  validate_taps(taps, num_blocks(), "discriminator_taps");
  Output out;
  std::size_t next_tap = 0;
  Var h = img;
  const int m = num_blocks();
  for (int b = 0; b < m; ++b) {
    const std::string l = layer_name("b", b);
    const int stride = (b == m - 1 && m > 1) ? 1 : 2;
    h = conv(p, l + ".conv", h, stride, 1);
    if (b > 0) h = norm(p, l + ".norm", h);
    h = ops::leaky_relu(h, kLeakySlope);
    if (next_tap < taps.size() && taps[next_tap] == b) {
      out.features.push_back(h);
      ++next_tap;
    }
  }
  out.scores = conv(p, "head.conv", h, 1, 1);
  return out;
}

std::vector<LayerDesc> Discriminator::describe(std::int64_t h, std::int64_t w) const {
  std::vector<LayerDesc> d;
  int cin = spec_.in_channels;
  const int m = num_blocks();
  for (int b = 0; b < m; ++b) {
    const std::string l = layer_name("b", b);
    const int cout = spec_.widths[static_cast<std::size_t>(b)];
    const int stride = (b == m - 1 && m > 1) ? 1 : 2;
    desc_conv(d, l + ".conv", cin, cout, 4, stride, 1, h, w);
    if (b > 0) desc_norm(d, l + ".norm", cout, h, w);
    desc_act(d, l + ".lrelu", "leaky_relu", cout, h, w);
    cin = cout;
  }
  desc_conv(d, "head.conv", cin, 1, 4, 1, 1, h, w);
  return d;
}

Built<Discriminator> build_discriminator(const DiscriminatorSpec& spec, Rng& rng) {
  Discriminator d(spec);
  return {d, init_params(d.parameter_shapes(), rng, kConvInitStd)};
}

// ----------------------------------------------------------- ProjectionBank

ProjectionBank::ProjectionBank(std::vector<int> in_channels, std::vector<int> out_channels, bool image_head)
    : in_(std::move(in_channels)), out_(std::move(out_channels)), image_head_(image_head) {
  if (in_.size() != out_.size()) throw ConfigError("projection bank: mismatched entry lists");
}

ProjectionBank make_downsampler_bank(const std::vector<int>& tap_channels) {
  return ProjectionBank(tap_channels, std::vector<int>(tap_channels.size(), 3), true);
}

ProjectionBank make_feature_adapter(const std::vector<int>& student_channels, const std::vector<int>& teacher_channels) {
  return ProjectionBank(student_channels, teacher_channels, false);
}

std::vector<std::pair<std::string, Shape>> ProjectionBank::parameter_shapes() const {
  std::vector<std::pair<std::string, Shape>> out;
  for (std::size_t i = 0; i < in_.size(); ++i) add_conv(out, layer_name("p", static_cast<int>(i)), in_[i], out_[i], 1);
  return out;
}

Var ProjectionBank::project(ParamBinder& p, std::size_t entry, Var feat, std::int64_t out_h, std::int64_t out_w) const {
  if (entry >= in_.size()) {
    throw ConfigError("projection bank has " + std::to_string(in_.size()) + " entries, requested tap " +
                      std::to_string(entry));
  }
  if (feat.shape().c != in_[entry]) {
    throw ConfigError("projection bank entry " + std::to_string(entry) + " expects " + std::to_string(in_[entry]) +
                      " channels, got " + std::to_string(feat.shape().c));
  }
  Var h = conv(p, layer_name("p", static_cast<int>(entry)), feat, 1, 0);
  if (!image_head_) return h;
  h = ops::tanh(h);
  if (out_h > 0 && out_w > 0 && (h.shape().h != out_h || h.shape().w != out_w)) {
    h = ops::resize_bilinear(h, out_h, out_w);
  }
  return h;
}

std::vector<LayerDesc> ProjectionBank::describe(std::span<const Shape> feature_shapes) const {
  std::vector<LayerDesc> d;
  for (std::size_t i = 0; i < in_.size(); ++i) {
    std::int64_t h = i < feature_shapes.size() ? feature_shapes[i].h : 1;
    std::int64_t w = i < feature_shapes.size() ? feature_shapes[i].w : 1;
    const std::string l = layer_name("p", static_cast<int>(i));
    desc_conv(d, l, in_[i], out_[i], 1, 1, 0, h, w);
    if (image_head_) desc_act(d, l + ".tanh", "tanh", out_[i], h, w);
  }
  return d;
}

Built<ProjectionBank> build_bank(ProjectionBank bank, Rng& rng, bool frozen) {
  ParameterSet params;
  for (const auto& [name, shape] : bank.parameter_shapes()) {
    Tensor t(shape);
    if (name.ends_with(".weight")) {
      const double std = 1.0 / std::sqrt(static_cast<double>(shape.c));
      for (auto& v : t.values()) v = rng.normal(0.0, std);
    }
    params.add(name, std::move(t), frozen);
  }
  return {std::move(bank), std::move(params)};
}

Var downsample_to_image(const ProjectionBank& bank, ParamBinder& params, std::size_t tap_index, Var feat,
                        std::int64_t target_h, std::int64_t target_w) {
  if (!bank.image_head()) throw ConfigError("downsample_to_image requires a downsampler bank");
  return bank.project(params, tap_index, feat, target_h, target_w);
}

// --------------------------------------------------------- FeatureExtractor

FeatureExtractor::FeatureExtractor(FeatureExtractorSpec spec) : spec_(std::move(spec)) {
  if (spec_.widths.empty()) throw ConfigError("feature extractor needs at least one block");
}

std::vector<std::pair<std::string, Shape>> FeatureExtractor::parameter_shapes() const {
  std::vector<std::pair<std::string, Shape>> out;
  int cin = 3;
  for (int b = 0; b < num_blocks(); ++b) {
    const int w = spec_.widths[static_cast<std::size_t>(b)];
    add_conv(out, layer_name("b", b) + ".conv", cin, w, 3);
    cin = w;
  }
  return out;
}

std::vector<Var> FeatureExtractor::forward(ParamBinder& p, Var img, std::span<const int> taps) const {
  if (img.shape().c != 3) throw ShapeError("feature extractor input must have 3 channels");
  validate_taps(taps, num_blocks(), "extractor_taps");
  std::vector<Var> feats;
  std::size_t next_tap = 0;
  Var h = img;
  const int last = taps.empty() ? -1 : taps.back();
  for (int b = 0; b <= last; ++b) {
    h = ops::relu(conv(p, layer_name("b", b) + ".conv", h, 2, 1));
    if (next_tap < taps.size() && taps[next_tap] == b) {
      feats.push_back(h);
      ++next_tap;
    }
  }
  return feats;
}

std::vector<LayerDesc> FeatureExtractor::describe(std::int64_t h, std::int64_t w) const {
  std::vector<LayerDesc> d;
  int cin = 3;
  for (int b = 0; b < num_blocks(); ++b) {
    const int cout = spec_.widths[static_cast<std::size_t>(b)];
    desc_conv(d, layer_name("b", b) + ".conv", cin, cout, 3, 2, 1, h, w);
    desc_act(d, layer_name("b", b) + ".relu", "relu", cout, h, w);
    cin = cout;
  }
  return d;
}

Built<FeatureExtractor> build_feature_extractor(const FeatureExtractorSpec& spec) {
  FeatureExtractor f(spec);
  ParameterSet params;
  if (spec.source == FeatureExtractorSpec::Source::file) {
    params = load_weights(spec.path);
    for (const auto& [name, shape] : f.parameter_shapes()) {
      if (!params.contains(name)) throw ConfigError("extractor weights missing parameter " + name);
      if (params.at(name).value.shape() != shape) {
        throw ConfigError("extractor weights: " + name + " has shape " + params.at(name).value.shape().str() +
                          ", expected " + shape.str());
      }
    }
    if (params.size() != f.parameter_shapes().size()) throw ConfigError("extractor weights: unexpected extra parameters");
  } else {
    Rng rng(derive_seed(spec.seed, "extractor"));
    for (const auto& [name, shape] : f.parameter_shapes()) {
      Tensor t(shape);
      if (name.ends_with(".weight")) {
        const double std = spec.init_gain * std::sqrt(2.0 / static_cast<double>(shape.c * shape.h * shape.w));
        for (auto& v : t.values()) v = rng.normal(0.0, std);
      }
      params.add(name, std::move(t));
    }
  }
  params.freeze_all(true);
  return {f, std::move(params)};
}

Tensor run_generator(const Generator& g, const ParameterSet& params, const Tensor& x) {
  Tape tape;
  ParamBinder p(tape, params, BindMode::constant);
  return g.forward(p, tape.constant(x)).image.value();
}

std::vector<Tensor> run_extractor(const FeatureExtractor& f, const ParameterSet& params, const Tensor& img,
                                  std::span<const int> taps) {
  Tape tape;
  ParamBinder p(tape, params, BindMode::constant);
  std::vector<Tensor> out;
  for (const Var& v : f.forward(p, tape.constant(img), taps)) out.push_back(v.value());
  return out;
}

}  // namespace dcdgan
