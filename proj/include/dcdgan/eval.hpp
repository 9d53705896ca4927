#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dcdgan/nets.hpp"

namespace dcdgan {

/// Mean and unbiased covariance of embedded samples.
struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::int64_t n = 0;
};

/// Global-average-pooled final block of the embedder, one row per image.
/// Throws ValidationError if any pixel lies outside [-1, 1].
Eigen::MatrixXd embed_batch(const FeatureExtractor& embedder, const ParameterSet& params, const Tensor& imgs);

/// Sample mean and (S + S^T)/2-symmetrized unbiased covariance; rows are samples.
GaussianStats gaussian_stats(const Eigen::MatrixXd& vectors);

/// Negative eigenvalues down to -kPsdTolerance * max(1, |lambda_max|) are clipped.
inline constexpr double kPsdTolerance = 1e-8;

/// Symmetric PSD square root by eigendecomposition. Throws ValidationError if
/// the matrix is not PSD within tolerance.
Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m);

/// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^{1/2} S_b S_a^{1/2})^{1/2}).
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

struct FidReport {
  double desk_fid = 0.0;
  std::int64_t n_samples = 0;
  std::string embedder_digest;
};

using ImageMap = std::function<Tensor(const Tensor&)>;

/// Fréchet distance between embeddings of generate(x_i) and real y_i over the
/// first n_samples items of each stream. Scores are only comparable under the
/// same embedder (its digest is reported).
FidReport desk_fid(const ImageMap& generate, std::span<const Tensor> eval_x, std::span<const Tensor> real_y,
                   const FeatureExtractor& embedder, const ParameterSet& embedder_params, std::int64_t n_samples);

struct LayerCost {
  std::string name;
  std::string op;
  std::int64_t params = 0;
  std::int64_t macs = 0;
};

struct ComplexityReport {
  std::int64_t total_params = 0;
  std::int64_t total_macs = 0;
  std::int64_t resolution = 0;
  std::vector<LayerCost> layers;

  std::string to_json() const;
};

/// conv: params k*k*C_in*C_out (+ C_out bias), MACs k*k*C_in*C_out*H_out*W_out;
/// affine norm: 2C params; activations and resizes are free. Layers of
/// unknown kind throw ConfigError naming the layer.
ComplexityReport count_complexity(std::span<const LayerDesc> layers);

ComplexityReport count_params(const Generator& g);
ComplexityReport count_macs(const Generator& g, std::int64_t resolution);
ComplexityReport count_params(const Discriminator& d);
ComplexityReport count_macs(const Discriminator& d, std::int64_t resolution);

/// Writes each sample of G(inputs) as `sample_<tag>_s<step>_i<k>.png`.
void dump_samples(const Generator& g, const ParameterSet& params, const Tensor& inputs,
                  const std::filesystem::path& out_dir, std::int64_t step, const std::string& tag);

/// Writes per-tap feature-images as `feature_<tag>_s<step>_t<tap>_i<k>.png`.
void dump_feature_images(const ProjectionBank& bank, const ParameterSet& bank_params, std::span<const Tensor> feats,
                         std::int64_t out_h, std::int64_t out_w, const std::filesystem::path& out_dir,
                         std::int64_t step, const std::string& tag);

/// One generator's output plus the feature-images of its taps.
void dump_generator_state(const Generator& g, const ParameterSet& params, const ProjectionBank& bank,
                          const ParameterSet& bank_params, std::span<const int> taps, const Tensor& inputs,
                          const std::filesystem::path& out_dir, std::int64_t step, const std::string& tag);

}  // namespace dcdgan
