#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dcdgan/config.hpp"
#include "dcdgan/nets.hpp"
#include "dcdgan/tape.hpp"

namespace dcdgan {

/// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-7;

/// Maps raw discriminator scores to what the adversarial losses consume:
/// sigmoid probabilities for vanilla/non-saturating, raw scores for least squares.
Var discriminator_output(Var raw_scores, GanVariant variant);

struct WeightedScores {
  Var scores;
  double weight = 1.0;
};

/// Discriminator loss to minimize. For log-likelihood variants this is
///   -( E log D(y) + sum_f w_f E log(1 - D(f)) ),
/// for least squares E (D(y) - 1)^2 + sum_f w_f E D(f)^2.
/// With fakes = {(teacher, 1), (student, lambda_stu)} this is the collaborative
/// objective; with a single unit-weight fake it is the plain GAN objective.
Var adversarial_d_loss(Var d_real, std::span<const WeightedScores> fakes, GanVariant variant);

/// Generator loss: non-saturating -E log D(G(x)); least squares E (D(G(x)) - 1)^2;
/// vanilla E log(1 - D(G(x))).
Var adversarial_g_loss(Var d_fake, GanVariant variant);

/// Mean elementwise distance between two equally shaped tensors.
Var mean_distance(Var a, Var b, DistanceVariant variant);

/// Sum over taps of mean_distance(teacher_i, student_i). Shape mismatches are
/// reported with the tap position.
Var per_pixel_distill(std::span<const Var> teacher_feats, std::span<const Var> student_feats_projected,
                      DistanceVariant variant);

/// Per-sample Gram matrix F F^T / (C H W), shape (N, 1, C, C).
Var gram(Var feat);

/// sum_j || gram(t_j) - gram(s_j) ||_1, averaged over the batch.
Var style_loss(std::span<const Var> t_feats, std::span<const Var> s_feats);

/// sum_j (1 / (C_j H_j W_j)) || t_j - s_j ||_1, averaged over the batch.
Var feature_reconstruction_loss(std::span<const Var> t_feats, std::span<const Var> s_feats);

struct PerceptualTerms {
  Var total;
  Var fea;
  Var sty;
};

/// lambda_fea * L_fea + lambda_sty * L_sty on extractor features of both
/// images. The extractor is always bound as constant.
PerceptualTerms perceptual_loss(Var t_img, Var s_img, const FeatureExtractor& extractor,
                                const ParameterSet& extractor_params, std::span<const int> taps, double lambda_fea,
                                double lambda_sty);

/// Inputs of the discriminator-cooperated distillation loss.
struct DcdInputs {
  std::span<const Var> teacher_feats;
  std::span<const Var> student_feats;
  const ProjectionBank* teacher_bank = nullptr;
  const ParameterSet* teacher_bank_params = nullptr;
  const ProjectionBank* student_bank = nullptr;
  ParamBinder* student_bank_binder = nullptr;
  const Discriminator* discriminator = nullptr;
  const ParameterSet* discriminator_params = nullptr;
  std::span<const int> discriminator_taps;
  /// Spatial size of the feature-images fed to the discriminator.
  std::int64_t image_h = 0;
  std::int64_t image_w = 0;
  DistanceVariant distance = DistanceVariant::l1;
  /// Let gradients reach the teacher features (off: the teacher branch is a constant).
  bool teacher_grad = false;
};

/// sum_{k in I_D} sum_{i in I_G} mean_distance(D_k(f_T(G_i^T)), D_k(f_S(G_i^S))).
/// The teacher bank and the discriminator are bound as constants, so neither
/// receives gradient; the teacher features are used as given (callers pass
/// detached features for the stop-gradient reading).
Var dcd_loss(const DcdInputs& in);

/// Scalar terms of one training step.
struct LossReport {
  double gan_d = 0.0;
  double gan_g_teacher = 0.0;
  double gan_g_student = 0.0;
  double fea_dis = 0.0;
  double fea = 0.0;
  double sty = 0.0;
  double per = 0.0;
  double dcd = 0.0;
  double total_student = 0.0;
  double total_teacher = 0.0;
  double total_discriminator = 0.0;

  std::map<std::string, double> as_map() const;
  /// Throws DivergenceError naming the first non-finite term.
  void require_finite() const;
};

/// Student-generator objective term handles; invalid Vars are absent terms.
struct StudentTerms {
  Var gan_g;
  Var per;
  Var dcd;
  Var fea_dis;
};

/// lambda_stu * L_adv + L_per + lambda_dcd * L_dcd (+ lambda_fea_dis * L_fea_dis)
/// restricted to the active loss set.
Var student_objective(const StudentTerms& terms, const HyperParams& hp);

/// Assembles totals from named component values (gan_d, gan_g_teacher,
/// gan_g_student, per, dcd, and fea_dis when fitnet is active). A component
/// required by the active loss set that is missing throws ConfigError.
LossReport total_objective(const std::map<std::string, double>& components, const HyperParams& hp);

}  // namespace dcdgan
