#include "dcdgan/eval.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "dcdgan/errors.hpp"
#include "dcdgan/image_io.hpp"
#include "dcdgan/ops.hpp"

namespace dcdgan {

namespace fs = std::filesystem;

Eigen::MatrixXd embed_batch(const FeatureExtractor& embedder, const ParameterSet& params, const Tensor& imgs) {
  require_image_range(imgs, "embed_batch");
  const int last = embedder.num_blocks() - 1;
  Tape tape;
  ParamBinder p(tape, params, BindMode::constant);
  const std::vector<int> taps{last};
  Var feat = embedder.forward(p, tape.constant(imgs), taps).front();
  const Tensor pooled = ops::global_avg_pool(feat).value();
  const Shape s = pooled.shape();
  Eigen::MatrixXd out(s.n, s.c);
  for (std::int64_t n = 0; n < s.n; ++n) {
    for (std::int64_t c = 0; c < s.c; ++c) out(n, c) = pooled[n * s.c + c];
  }
  return out;
}

GaussianStats gaussian_stats(const Eigen::MatrixXd& vectors) {
  if (vectors.rows() < 2) throw ValidationError("gaussian_stats needs at least 2 samples");
  if (vectors.cols() < 1) throw ValidationError("gaussian_stats needs dimension >= 1");
  GaussianStats s;
  s.n = vectors.rows();
  s.mean = vectors.colwise().mean().transpose();
  const Eigen::MatrixXd centered = vectors.rowwise() - s.mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(s.n - 1);
  s.cov = 0.5 * (cov + cov.transpose());
  return s;
}

Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw ValidationError("eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < 0.0) {
      if (ev(i) < -kPsdTolerance * scale) {
        throw ValidationError("matrix is not positive semidefinite (eigenvalue " + std::to_string(ev(i)) + ")");
      }
      ev(i) = 0.0;
    }
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  if (a.mean.size() != b.mean.size() || a.cov.rows() != b.cov.rows()) {
    throw ValidationError("frechet_distance: dimension mismatch (" + std::to_string(a.mean.size()) + " vs " +
                          std::to_string(b.mean.size()) + ")");
  }
  const Eigen::MatrixXd sa = sqrtm_psd(a.cov);
  sqrtm_psd(b.cov);  // PSD check on the second covariance
  const Eigen::MatrixXd inner = sa * b.cov * sa;
  const Eigen::MatrixXd cross = sqrtm_psd(inner);
  const double mean_term = (a.mean - b.mean).squaredNorm();
  const double trace_term = a.cov.trace() + b.cov.trace() - 2.0 * cross.trace();
  return std::max(0.0, mean_term + trace_term);
}

FidReport desk_fid(const ImageMap& generate, std::span<const Tensor> eval_x, std::span<const Tensor> real_y,
                   const FeatureExtractor& embedder, const ParameterSet& embedder_params, std::int64_t n_samples) {
  if (n_samples < 2) throw ValidationError("desk_fid needs n_samples >= 2");
  if (static_cast<std::int64_t>(eval_x.size()) < n_samples || static_cast<std::int64_t>(real_y.size()) < n_samples) {
    throw ValidationError("desk_fid: fewer than n_samples evaluation items");
  }
  constexpr std::int64_t kChunk = 8;
  const std::int64_t d = embedder.spec().widths.back();
  Eigen::MatrixXd fake(n_samples, d);
  Eigen::MatrixXd real(n_samples, d);
  for (std::int64_t start = 0; start < n_samples; start += kChunk) {
    const std::int64_t count = std::min(kChunk, n_samples - start);
    const auto xs = eval_x.subspan(static_cast<std::size_t>(start), static_cast<std::size_t>(count));
    const auto ys = real_y.subspan(static_cast<std::size_t>(start), static_cast<std::size_t>(count));
    fake.middleRows(start, count) = embed_batch(embedder, embedder_params, generate(stack(xs)));
    real.middleRows(start, count) = embed_batch(embedder, embedder_params, stack(ys));
  }
  FidReport r;
  r.desk_fid = frechet_distance(gaussian_stats(fake), gaussian_stats(real));
  r.n_samples = n_samples;
  r.embedder_digest = parameter_digest(embedder_params);
  return r;
}

std::string ComplexityReport::to_json() const {
  nlohmann::json j;
  j["total_params"] = total_params;
  j["total_macs"] = total_macs;
  j["resolution"] = resolution;
  j["layers"] = nlohmann::json::array();
  for (const auto& l : layers) {
    j["layers"].push_back({{"name", l.name}, {"op", l.op}, {"params", l.params}, {"macs", l.macs}});
  }
  return j.dump(2);
}

ComplexityReport count_complexity(std::span<const LayerDesc> layers) {
  ComplexityReport r;
  for (const auto& l : layers) {
    LayerCost c{l.name, l.op, 0, 0};
    switch (l.kind) {
      case LayerKind::conv: {
        const std::int64_t kk = static_cast<std::int64_t>(l.kernel) * l.kernel;
        c.params = kk * l.in_channels * l.out_channels + (l.bias ? l.out_channels : 0);
        c.macs = kk * l.in_channels * l.out_channels * l.out_h * l.out_w;
        break;
      }
      case LayerKind::norm:
        c.params = l.affine ? 2 * static_cast<std::int64_t>(l.out_channels) : 0;
        break;
      case LayerKind::activation:
      case LayerKind::resize:
        break;
      case LayerKind::other:
        throw ConfigError("unsupported layer '" + l.name + "' (" + l.op + ") in complexity accounting");
    }
    r.total_params += c.params;
    r.total_macs += c.macs;
    r.layers.push_back(std::move(c));
  }
  if (!layers.empty()) r.resolution = layers.front().in_h;
  return r;
}

// Parameter counts do not depend on resolution; 256 is large enough for every
// supported architecture's shape algebra.
ComplexityReport count_params(const Generator& g) { return count_complexity(g.describe(256, 256)); }
ComplexityReport count_macs(const Generator& g, std::int64_t resolution) {
  return count_complexity(g.describe(resolution, resolution));
}
ComplexityReport count_params(const Discriminator& d) { return count_complexity(d.describe(256, 256)); }
ComplexityReport count_macs(const Discriminator& d, std::int64_t resolution) {
  return count_complexity(d.describe(resolution, resolution));
}

namespace {

std::string dump_name(const std::string& kind, const std::string& tag, std::int64_t step, int tap, std::int64_t k) {
  char buf[160];
  if (tap >= 0) {
    std::snprintf(buf, sizeof(buf), "%s_%s_s%06lld_t%02d_i%02lld.png", kind.c_str(), tag.c_str(),
                  static_cast<long long>(step), tap, static_cast<long long>(k));
  } else {
    std::snprintf(buf, sizeof(buf), "%s_%s_s%06lld_i%02lld.png", kind.c_str(), tag.c_str(),
                  static_cast<long long>(step), static_cast<long long>(k));
  }
  return buf;
}

}  // namespace

void dump_samples(const Generator& g, const ParameterSet& params, const Tensor& inputs, const fs::path& out_dir,
                  std::int64_t step, const std::string& tag) {
  const Tensor out = run_generator(g, params, inputs);
  for (std::int64_t k = 0; k < out.shape().n; ++k) write_png(out_dir / dump_name("sample", tag, step, -1, k), out, k);
}

void dump_feature_images(const ProjectionBank& bank, const ParameterSet& bank_params, std::span<const Tensor> feats,
                         std::int64_t out_h, std::int64_t out_w, const fs::path& out_dir, std::int64_t step,
                         const std::string& tag) {
  Tape tape;
  ParamBinder p(tape, bank_params, BindMode::constant);
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const Tensor img = downsample_to_image(bank, p, i, tape.constant(feats[i]), out_h, out_w).value();
    for (std::int64_t k = 0; k < img.shape().n; ++k) {
      write_png(out_dir / dump_name("feature", tag, step, static_cast<int>(i), k), img, k);
    }
  }
}

void dump_generator_state(const Generator& g, const ParameterSet& params, const ProjectionBank& bank,
                          const ParameterSet& bank_params, std::span<const int> taps, const Tensor& inputs,
                          const fs::path& out_dir, std::int64_t step, const std::string& tag) {
  Tape tape;
  ParamBinder p(tape, params, BindMode::constant);
  const auto out = g.forward(p, tape.constant(inputs), taps);
  for (std::int64_t k = 0; k < out.image.shape().n; ++k) {
    write_png(out_dir / dump_name("sample", tag, step, -1, k), out.image.value(), k);
  }
  std::vector<Tensor> feats;
  for (const Var& f : out.features) feats.push_back(f.value());
  dump_feature_images(bank, bank_params, feats, inputs.shape().h, inputs.shape().w, out_dir, step, tag);
}

}  // namespace dcdgan
