#include "dcdgan/losses.hpp"

#include <cmath>

#include "dcdgan/errors.hpp"
#include "dcdgan/ops.hpp"

namespace dcdgan {

namespace {

void require_finite_scores(Var v, const char* what) {
  if (!v.value().all_finite()) throw ValidationError(std::string(what) + ": NaN or infinite score");
}

Var log_prob(Var p) { return ops::log(ops::clamp(p, kProbClamp, 1.0 - kProbClamp)); }

Var log_one_minus(Var p) {
  return ops::log(ops::clamp(ops::add_scalar(ops::scale(p, -1.0), 1.0), kProbClamp, 1.0 - kProbClamp));
}

void require_pairs(std::span<const Var> a, std::span<const Var> b, const char* what) {
  if (a.size() != b.size()) {
    throw ConfigError(std::string(what) + ": " + std::to_string(a.size()) + " teacher taps vs " +
                      std::to_string(b.size()) + " student taps");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].shape() != b[i].shape()) {
      throw ConfigError(std::string(what) + ": shape mismatch at tap " + std::to_string(i) + ": " +
                        a[i].shape().str() + " vs " + b[i].shape().str());
    }
  }
}

}  // namespace

Var discriminator_output(Var raw_scores, GanVariant variant) {
  return variant == GanVariant::least_squares ? raw_scores : ops::sigmoid(raw_scores);
}

Var adversarial_d_loss(Var d_real, std::span<const WeightedScores> fakes, GanVariant variant) {
  require_finite_scores(d_real, "adversarial_d_loss");
  for (const auto& f : fakes) {
    require_finite_scores(f.scores, "adversarial_d_loss");
    if (!(f.weight >= 0.0)) throw ConfigError("adversarial_d_loss: negative fake weight");
  }
  if (variant == GanVariant::least_squares) {
    Var loss = ops::mean(ops::square(ops::add_scalar(d_real, -1.0)));
    for (const auto& f : fakes) loss = ops::add(loss, ops::scale(ops::mean(ops::square(f.scores)), f.weight));
    return loss;
  }
  Var ll = ops::mean(log_prob(d_real));
  for (const auto& f : fakes) ll = ops::add(ll, ops::scale(ops::mean(log_one_minus(f.scores)), f.weight));
  return ops::scale(ll, -1.0);
}

Var adversarial_g_loss(Var d_fake, GanVariant variant) {
  require_finite_scores(d_fake, "adversarial_g_loss");
  switch (variant) {
    case GanVariant::nonsaturating: return ops::scale(ops::mean(log_prob(d_fake)), -1.0);
    case GanVariant::least_squares: return ops::mean(ops::square(ops::add_scalar(d_fake, -1.0)));
    case GanVariant::vanilla: return ops::mean(log_one_minus(d_fake));
  }
  throw ConfigError("unknown gan variant");
}

Var mean_distance(Var a, Var b, DistanceVariant variant) {
  Var diff = ops::sub(a, b);
  return ops::mean(variant == DistanceVariant::l1 ? ops::abs(diff) : ops::square(diff));
}

Var per_pixel_distill(std::span<const Var> teacher_feats, std::span<const Var> student_feats_projected,
                      DistanceVariant variant) {
  require_pairs(teacher_feats, student_feats_projected, "per_pixel_distill");
  if (teacher_feats.empty()) throw ConfigError("per_pixel_distill: no taps");
  Var total = mean_distance(teacher_feats[0], student_feats_projected[0], variant);
  for (std::size_t i = 1; i < teacher_feats.size(); ++i) {
    total = ops::add(total, mean_distance(teacher_feats[i], student_feats_projected[i], variant));
  }
  return total;
}

Var gram(Var feat) { return ops::gram(feat); }

Var style_loss(std::span<const Var> t_feats, std::span<const Var> s_feats) {
  require_pairs(t_feats, s_feats, "style_loss");
  if (t_feats.empty()) throw ConfigError("style_loss: no taps");
  Var total;
  for (std::size_t j = 0; j < t_feats.size(); ++j) {
    const double batch = static_cast<double>(t_feats[j].shape().n);
    Var term = ops::scale(ops::sum(ops::abs(ops::sub(ops::gram(t_feats[j]), ops::gram(s_feats[j])))), 1.0 / batch);
    total = total.valid() ? ops::add(total, term) : term;
  }
  return total;
}

Var feature_reconstruction_loss(std::span<const Var> t_feats, std::span<const Var> s_feats) {
  require_pairs(t_feats, s_feats, "feature_reconstruction_loss");
  if (t_feats.empty()) throw ConfigError("feature_reconstruction_loss: no taps");
  Var total;
  for (std::size_t j = 0; j < t_feats.size(); ++j) {
    Var term = mean_distance(t_feats[j], s_feats[j], DistanceVariant::l1);
    total = total.valid() ? ops::add(total, term) : term;
  }
  return total;
}

PerceptualTerms perceptual_loss(Var t_img, Var s_img, const FeatureExtractor& extractor,
                                const ParameterSet& extractor_params, std::span<const int> taps, double lambda_fea,
                                double lambda_sty) {
  if (t_img.shape() != s_img.shape()) {
    throw ShapeError("perceptual_loss: image shapes differ " + t_img.shape().str() + " vs " + s_img.shape().str());
  }
  ParamBinder phi(s_img.tape(), extractor_params, BindMode::constant);
  const std::vector<Var> tf = extractor.forward(phi, t_img, taps);
  const std::vector<Var> sf = extractor.forward(phi, s_img, taps);
  PerceptualTerms out;
  out.fea = feature_reconstruction_loss(tf, sf);
  out.sty = style_loss(tf, sf);
  out.total = ops::add(ops::scale(out.fea, lambda_fea), ops::scale(out.sty, lambda_sty));
  return out;
}

Var dcd_loss(const DcdInputs& in) {
  if (!in.teacher_bank || !in.teacher_bank_params || !in.student_bank || !in.student_bank_binder ||
      !in.discriminator || !in.discriminator_params) {
    throw ConfigError("dcd_loss: incomplete inputs");
  }
  if (in.teacher_feats.size() != in.student_feats.size()) {
    throw ConfigError("dcd_loss: " + std::to_string(in.teacher_feats.size()) + " teacher taps vs " +
                      std::to_string(in.student_feats.size()) + " student taps");
  }
  if (in.teacher_bank->entries() != in.teacher_feats.size() || in.student_bank->entries() != in.student_feats.size()) {
    throw ConfigError("dcd_loss: downsampler bank entries do not match generator taps");
  }
  if (in.teacher_feats.empty()) throw ConfigError("dcd_loss: no generator taps");
  if (in.discriminator_taps.empty()) throw ConfigError("dcd_loss: no discriminator taps");

  Tape& tape = in.student_feats[0].tape();
  ParamBinder teacher_bank(tape, *in.teacher_bank_params, BindMode::constant);
  ParamBinder disc(tape, *in.discriminator_params, BindMode::constant);

  Var total;
  for (std::size_t i = 0; i < in.teacher_feats.size(); ++i) {
    Var t_feat = in.teacher_grad ? in.teacher_feats[i] : ops::detach(in.teacher_feats[i]);
    Var t_img = downsample_to_image(*in.teacher_bank, teacher_bank, i, t_feat, in.image_h, in.image_w);
    Var s_img =
        downsample_to_image(*in.student_bank, *in.student_bank_binder, i, in.student_feats[i], in.image_h, in.image_w);
    const auto t_resp = in.discriminator->forward(disc, t_img, in.discriminator_taps).features;
    const auto s_resp = in.discriminator->forward(disc, s_img, in.discriminator_taps).features;
    for (std::size_t k = 0; k < t_resp.size(); ++k) {
      Var term = mean_distance(t_resp[k], s_resp[k], in.distance);
      total = total.valid() ? ops::add(total, term) : term;
    }
  }
  return total;
}

std::map<std::string, double> LossReport::as_map() const {
  return {{"gan_d", gan_d},
          {"gan_g_teacher", gan_g_teacher},
          {"gan_g_student", gan_g_student},
          {"fea_dis", fea_dis},
          {"fea", fea},
          {"sty", sty},
          {"per", per},
          {"dcd", dcd},
          {"total_student", total_student},
          {"total_teacher", total_teacher},
          {"total_discriminator", total_discriminator}};
}

void LossReport::require_finite() const {
  for (const auto& [name, v] : as_map()) {
    if (!std::isfinite(v)) throw DivergenceError("non-finite loss term '" + name + "'");
  }
}

Var student_objective(const StudentTerms& terms, const HyperParams& hp) {
  const LossSet& ls = hp.loss_set;
  Var total;
  auto add = [&total](Var term, double weight) {
    if (!term.valid()) throw ConfigError("student_objective: active term missing");
    Var scaled = weight == 1.0 ? term : ops::scale(term, weight);
    total = total.valid() ? ops::add(total, scaled) : scaled;
  };
  if (ls.gan) add(terms.gan_g, hp.lambda_stu);
  if (ls.per) add(terms.per, 1.0);
  if (ls.dcd) add(terms.dcd, hp.lambda_dcd);
  if (ls.fitnet) add(terms.fea_dis, hp.lambda_fea_dis);
  if (!total.valid()) throw ConfigError("student_objective: empty loss set");
  return total;
}

LossReport total_objective(const std::map<std::string, double>& components, const HyperParams& hp) {
  auto get = [&components](const char* name, bool required) {
    auto it = components.find(name);
    if (it == components.end()) {
      if (required) throw ConfigError(std::string("total_objective: missing component '") + name + "'");
      return 0.0;
    }
    return it->second;
  };
  const LossSet& ls = hp.loss_set;
  LossReport r;
  r.gan_d = get("gan_d", true);
  r.gan_g_teacher = get("gan_g_teacher", true);
  r.gan_g_student = get("gan_g_student", ls.gan);
  r.per = get("per", ls.per);
  r.fea = get("fea", false);
  r.sty = get("sty", false);
  r.dcd = get("dcd", ls.dcd);
  r.fea_dis = get("fea_dis", ls.fitnet);
  r.total_student = (ls.gan ? hp.lambda_stu * r.gan_g_student : 0.0) + (ls.per ? r.per : 0.0) +
                    (ls.dcd ? hp.lambda_dcd * r.dcd : 0.0) + (ls.fitnet ? hp.lambda_fea_dis * r.fea_dis : 0.0);
  r.total_teacher = r.gan_g_teacher;
  r.total_discriminator = r.gan_d;
  return r;
}

}  // namespace dcdgan
