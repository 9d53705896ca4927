#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dcdgan/params.hpp"
#include "dcdgan/rng.hpp"

namespace dcdgan {

/// Ratio of student to teacher channel counts, kept exact.
struct WidthFactor {
  int num = 1;
  int den = 1;

  double value() const { return static_cast<double>(num) / den; }
  /// ceil(num * width / den).
  int apply(int width) const { return static_cast<int>((static_cast<std::int64_t>(num) * width + den - 1) / den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
  /// Parses "1/4", "0.25" (decimals up to 6 digits) or "1".
  static WidthFactor parse(const std::string& text);
  bool operator==(const WidthFactor&) const = default;
};

enum class LayerKind { conv, norm, activation, resize, other };

/// Static description of one layer at a reference input size; drives
/// complexity accounting.
struct LayerDesc {
  std::string name;
  LayerKind kind = LayerKind::other;
  std::string op;  // relu, leaky_relu, tanh, nearest2, bilinear, instance_norm, ...
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  int pad = 0;
  bool bias = false;
  bool affine = false;
  std::int64_t in_h = 0, in_w = 0, out_h = 0, out_w = 0;
};

struct GeneratorSpec {
  int base_width = 16;
  int n_resblocks = 6;
  WidthFactor width_factor{1, 1};
  int in_channels = 3;
  int out_channels = 3;

  /// Same spec with the width factor replaced.
  GeneratorSpec with_width(WidthFactor wf) const {
    GeneratorSpec s = *this;
    s.width_factor = wf;
    return s;
  }
};

/// ResNet image-to-image generator:
///   layer 0        7x7 conv, norm, ReLU                 (w0)
///   layers 1, 2    3x3 stride-2 conv, norm, ReLU        (w1 = 2 w0, w2 = 4 w0)
///   layers 3..3+n  residual blocks at w2
///   layers n+3,n+4 nearest 2x upsample, 3x3 conv, norm, ReLU
///   layer n+5      7x7 conv, tanh
/// Channel widths are ceil(width_factor * teacher width).
class Generator {
 public:
  explicit Generator(GeneratorSpec spec);

  struct Output {
    Var image;
    std::vector<Var> features;
  };

  const GeneratorSpec& spec() const { return spec_; }
  int num_layers() const { return spec_.n_resblocks + 6; }
  /// Output channel count of every layer.
  std::vector<int> layer_channels() const;
  /// Four evenly spaced residual-trunk layers (fewer for shallow trunks).
  std::vector<int> default_taps() const;

  /// Forward pass returning raw activations of the tapped layers in tap order.
  Output forward(ParamBinder& params, Var x, std::span<const int> taps = {}) const;
  std::vector<LayerDesc> describe(std::int64_t h, std::int64_t w) const;

  /// Parameter shapes in initialization order.
  std::vector<std::pair<std::string, Shape>> parameter_shapes() const;

 private:
  GeneratorSpec spec_;
  int w0_, w1_, w2_;
};

struct DiscriminatorSpec {
  /// Conv-block widths; the last block uses stride 1, the others stride 2.
  std::vector<int> widths{16, 32, 64, 128};
  int in_channels = 3;
};

/// PatchGAN-style discriminator: 4x4 conv blocks with leaky-ReLU (norm on all
/// but the first), then a 4x4 conv head producing a raw score map.
class Discriminator {
 public:
  explicit Discriminator(DiscriminatorSpec spec);

  struct Output {
    Var scores;
    std::vector<Var> features;
  };

  const DiscriminatorSpec& spec() const { return spec_; }
  int num_blocks() const { return static_cast<int>(spec_.widths.size()); }
  std::vector<int> default_taps() const;

  /// Validates the input is 3-channel with entries in [-1, 1].
  Output forward(ParamBinder& params, Var img, std::span<const int> taps = {}) const;
  std::vector<LayerDesc> describe(std::int64_t h, std::int64_t w) const;
  std::vector<std::pair<std::string, Shape>> parameter_shapes() const;

 private:
  DiscriminatorSpec spec_;
};

/// Per-tap 1x1 projections. With `image_head` the output passes through tanh
/// and is resized to a target resolution (feature-images for the
/// discriminator); without it the projection is a plain affine channel map.
class ProjectionBank {
 public:
  ProjectionBank(std::vector<int> in_channels, std::vector<int> out_channels, bool image_head);

  std::size_t entries() const { return in_.size(); }
  int in_channels(std::size_t entry) const { return in_.at(entry); }
  int out_channels(std::size_t entry) const { return out_.at(entry); }
  bool image_head() const { return image_head_; }

  /// Projects `feat` through entry `entry`. For image heads the result is
  /// resized to (out_h, out_w); plain banks ignore the target size.
  Var project(ParamBinder& params, std::size_t entry, Var feat, std::int64_t out_h = 0, std::int64_t out_w = 0) const;
  std::vector<LayerDesc> describe(std::span<const Shape> feature_shapes) const;
  std::vector<std::pair<std::string, Shape>> parameter_shapes() const;

 private:
  std::vector<int> in_;
  std::vector<int> out_;
  bool image_head_;
};

/// Downsampler bank f(.): every entry maps C_i channels to 3 with tanh.
ProjectionBank make_downsampler_bank(const std::vector<int>& tap_channels);
/// Per-pixel distillation adapter: student channels to teacher channels.
ProjectionBank make_feature_adapter(const std::vector<int>& student_channels, const std::vector<int>& teacher_channels);

struct FeatureExtractorSpec {
  enum class Source { fixed_random, file };
  std::vector<int> widths{8, 16, 32, 64};
  Source source = Source::fixed_random;
  std::uint64_t seed = 1234;
  std::string path;
  /// Multiplier on the He-normal init standard deviation.
  double init_gain = 1.0;
};

/// Fixed feature network: 3x3 stride-2 conv + ReLU blocks. Always frozen.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FeatureExtractorSpec spec);

  const FeatureExtractorSpec& spec() const { return spec_; }
  int num_blocks() const { return static_cast<int>(spec_.widths.size()); }
  std::vector<Var> forward(ParamBinder& params, Var img, std::span<const int> taps) const;
  std::vector<LayerDesc> describe(std::int64_t h, std::int64_t w) const;
  std::vector<std::pair<std::string, Shape>> parameter_shapes() const;

 private:
  FeatureExtractorSpec spec_;
};

template <typename Model>
struct Built {
  Model model;
  ParameterSet params;
};

Built<Generator> build_generator(const GeneratorSpec& spec, Rng& rng);
Built<Discriminator> build_discriminator(const DiscriminatorSpec& spec, Rng& rng);
/// Projection weights ~ N(0, 1/C_in), zero bias. `frozen` marks every parameter.
Built<ProjectionBank> build_bank(ProjectionBank bank, Rng& rng, bool frozen);
/// Fixed-random or file-loaded extractor; parameters are always frozen.
Built<FeatureExtractor> build_feature_extractor(const FeatureExtractorSpec& spec);

/// Throws ConfigError unless taps are strictly increasing and within [0, limit).
void validate_taps(std::span<const int> taps, int limit, const std::string& what, bool allow_empty = true);

/// Projects one generator tap to a feature-image (1x1 conv, tanh, bilinear
/// resize to `target_h` x `target_w`).
Var downsample_to_image(const ProjectionBank& bank, ParamBinder& params, std::size_t tap_index, Var feat,
                        std::int64_t target_h, std::int64_t target_w);

/// Gradient-free forward helpers.
Tensor run_generator(const Generator& g, const ParameterSet& params, const Tensor& x);
std::vector<Tensor> run_extractor(const FeatureExtractor& f, const ParameterSet& params, const Tensor& img,
                                  std::span<const int> taps);

}  // namespace dcdgan
