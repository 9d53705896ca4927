// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--out DIR] [--only N]...

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "dcdgan/cli.hpp"
#include "dcdgan/data.hpp"
#include "dcdgan/errors.hpp"
#include "dcdgan/eval.hpp"
#include "dcdgan/trainer.hpp"
#include "dcdgan/weights_io.hpp"
#include "support.hpp"

using namespace dcdgan;
using namespace dcdgan::testing;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  std::string failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures += " [failed: " + what + "]";
    }
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<Var> consts(Tape& t, const std::vector<Tensor>& ts) {
  std::vector<Var> out;
  for (const auto& x : ts) out.push_back(t.constant(x));
  return out;
}

std::vector<Tensor> values(const std::vector<Var>& vs) {
  std::vector<Tensor> out;
  for (Var v : vs) out.push_back(v.value());
  return out;
}

DcdInputs dcd_inputs(const ToyWorld& w, std::span<const Var> tf, std::span<const Var> sf, ParamBinder& sbank) {
  DcdInputs in;
  in.teacher_feats = tf;
  in.student_feats = sf;
  in.teacher_bank = &w.teacher_bank.model;
  in.teacher_bank_params = &w.teacher_bank.params;
  in.student_bank = &w.student_bank.model;
  in.student_bank_binder = &sbank;
  in.discriminator = &w.disc.model;
  in.discriminator_params = &w.disc.params;
  in.discriminator_taps = w.d_taps;
  in.image_h = w.x.shape().h;
  in.image_w = w.x.shape().w;
  return in;
}

// Small but real training configuration for the structural criteria.
RunConfig small_config(const fs::path& out) {
  RunConfig c;
  c.set("base_width", "4");
  c.set("n_resblocks", "2");
  c.set("resolution", "32");
  c.set("n_train", "16");
  c.set("n_eval", "8");
  c.set("fid_samples", "8");
  c.out_dir = out.string();
  return c;
}

// ------------------------------------------------------------------ 1

Verdict gradient_suite() {
  Verdict v;
  ToyWorld w = ToyWorld::make(101);
  const std::int64_t sizes[] = {w.student.params.scalar_count() + w.student_bank.params.scalar_count() +
                                    w.adapter.params.scalar_count(),
                                w.disc.params.scalar_count()};
  v.require(sizes[0] <= 2000 && sizes[1] <= 2000, "toy nets exceed 2k parameters");
  const Tensor t_img = run_generator(w.teacher.model, w.teacher.params, w.x);
  std::vector<Tensor> t_feats;
  {
    Tape t;
    ParamBinder b(t, w.teacher.params, BindMode::constant);
    t_feats = values(w.teacher.model.forward(b, t.constant(w.x), w.g_taps).features);
  }

  struct Case {
    std::string name;
    std::vector<ParameterSet> groups;
    GroupLossFn fn;
  };
  std::vector<Case> cases;

  for (GanVariant gv : {GanVariant::vanilla, GanVariant::nonsaturating, GanVariant::least_squares}) {
    cases.push_back({"adversarial/" + to_string(gv), {w.disc.params, w.student.params},
                     [&w, &t_img, gv](Tape& t, std::vector<ParamBinder>& b) {
                       const auto s = w.student.model.forward(b[1], t.constant(w.x), w.g_taps);
                       const Discriminator& D = w.disc.model;
                       Var real = discriminator_output(D.forward(b[0], t.constant(w.y)).scores, gv);
                       Var ft = discriminator_output(D.forward(b[0], t.constant(t_img)).scores, gv);
                       Var fs = discriminator_output(D.forward(b[0], s.image).scores, gv);
                       const std::vector<WeightedScores> fakes{{ft, 1.0}, {fs, 0.7}};
                       return ops::add(adversarial_d_loss(real, fakes, gv), adversarial_g_loss(fs, gv));
                     }});
  }
  auto phi_pair = [&w, &t_img](Tape& t, Var s_img) {
    ParamBinder phi(t, w.phi.params, BindMode::constant);
    return std::pair{w.phi.model.forward(phi, t.constant(t_img), w.phi_taps),
                     w.phi.model.forward(phi, s_img, w.phi_taps)};
  };
  cases.push_back({"per_pixel_distill", {w.student.params, w.adapter.params},
                   [&](Tape& t, std::vector<ParamBinder>& b) {
                     const auto s = w.student.model.forward(b[0], t.constant(w.x), w.g_taps);
                     std::vector<Var> adapted;
                     for (std::size_t i = 0; i < s.features.size(); ++i)
                       adapted.push_back(w.adapter.model.project(b[1], i, s.features[i]));
                     return per_pixel_distill(consts(t, t_feats), adapted, DistanceVariant::l1);
                   }});
  cases.push_back({"feature_reconstruction", {w.student.params}, [&](Tape& t, std::vector<ParamBinder>& b) {
                     const auto s = w.student.model.forward(b[0], t.constant(w.x), w.g_taps);
                     const auto [ft, fs] = phi_pair(t, s.image);
                     return feature_reconstruction_loss(ft, fs);
                   }});
  cases.push_back({"style_loss", {w.student.params}, [&](Tape& t, std::vector<ParamBinder>& b) {
                     const auto s = w.student.model.forward(b[0], t.constant(w.x), w.g_taps);
                     const auto [ft, fs] = phi_pair(t, s.image);
                     return style_loss(ft, fs);
                   }});
  cases.push_back({"perceptual", {w.student.params}, [&](Tape& t, std::vector<ParamBinder>& b) {
                     const auto s = w.student.model.forward(b[0], t.constant(w.x), w.g_taps);
                     return perceptual_loss(t.constant(t_img), s.image, w.phi.model, w.phi.params, w.phi_taps, 10.0,
                                            1e4)
                         .total;
                   }});
  cases.push_back({"dcd_loss", {w.student.params, w.student_bank.params}, [&](Tape& t, std::vector<ParamBinder>& b) {
                     const auto s = w.student.model.forward(b[0], t.constant(w.x), w.g_taps);
                     const auto tf = consts(t, t_feats);
                     return dcd_loss(dcd_inputs(w, tf, s.features, b[1]));
                   }});
  cases.push_back({"total_objective", {w.student.params, w.student_bank.params, w.adapter.params},
                   [&](Tape& t, std::vector<ParamBinder>& b) {
                     const auto s = w.student.model.forward(b[0], t.constant(w.x), w.g_taps);
                     const auto tf = consts(t, t_feats);
                     ParamBinder disc(t, w.disc.params, BindMode::constant);
                     StudentTerms terms;
                     terms.gan_g = adversarial_g_loss(
                         discriminator_output(w.disc.model.forward(disc, s.image).scores, GanVariant::nonsaturating),
                         GanVariant::nonsaturating);
                     terms.per =
                         perceptual_loss(t.constant(t_img), s.image, w.phi.model, w.phi.params, w.phi_taps, 10.0, 1e4)
                             .total;
                     terms.dcd = dcd_loss(dcd_inputs(w, tf, s.features, b[1]));
                     std::vector<Var> adapted;
                     for (std::size_t i = 0; i < s.features.size(); ++i)
                       adapted.push_back(w.adapter.model.project(b[2], i, s.features[i]));
                     terms.fea_dis = per_pixel_distill(tf, adapted, DistanceVariant::l1);
                     HyperParams hp;
                     hp.loss_set = LossSet::parse("per,dcd,gan,fitnet");
                     return student_objective(terms, hp);
                   }});

  Rng rng(7);
  double worst_fraction = 1.0;
  std::string worst_name;
  for (const auto& c : cases) {
    const GradCheckResult r = check_gradients(c.groups, c.fn, rng, 200, 1e-3);
    if (r.sampled != 200) v.require(false, c.name + " sampled " + std::to_string(r.sampled));
    if (r.fraction() < worst_fraction) {
      worst_fraction = r.fraction();
      worst_name = c.name;
    }
    v.require(r.fraction() >= 0.99, c.name + " " + fmt(r.fraction() * 100) + "% within 1e-3");
  }
  v.detail << cases.size() << " losses x 200 coords, toy params " << sizes[0] << "/" << sizes[1]
           << ", worst " << fmt(worst_fraction * 100) << "% within 1e-3" << (worst_name.empty() ? "" : " (" + worst_name + ")");
  return v;
}

// ------------------------------------------------------------------ 2

Verdict loss_oracles() {
  Verdict v;
  Rng r(202);
  double worst = 0.0, worst_zero = 0.0;
  auto track = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
  for (int inst = 0; inst < 50; ++inst) {
    const std::int64_t n = r.uniform_int(1, 3);
    std::vector<Tensor> t, s;
    for (int j = 0, taps = static_cast<int>(r.uniform_int(1, 3)); j < taps; ++j) {
      const Shape sh{n, r.uniform_int(1, 6), r.uniform_int(1, 5), r.uniform_int(1, 5)};
      t.push_back(random_tensor(sh, r, -2, 2));
      s.push_back(random_tensor(sh, r, -2, 2));
    }
    Tape tape;
    const auto tv = consts(tape, t), sv = consts(tape, s);
    track(per_pixel_distill(tv, sv, DistanceVariant::l1).value().item(), oracle_per_pixel(t, s, false));
    track(per_pixel_distill(tv, sv, DistanceVariant::l2).value().item(), oracle_per_pixel(t, s, true));
    track(feature_reconstruction_loss(tv, sv).value().item(), oracle_feature_reconstruction(t, s));
    track(style_loss(tv, sv).value().item(), oracle_style(t, s));
    const Tensor g = gram(tv[0]).value();
    const auto og = oracle_gram(t[0]);
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t a = 0; a < t[0].shape().c; ++a)
        for (std::int64_t b = 0; b < t[0].shape().c; ++b)
          track(g.at(i, 0, a, b), og[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
    worst_zero = std::max({worst_zero, std::abs(per_pixel_distill(tv, tv, DistanceVariant::l1).value().item()),
                           std::abs(per_pixel_distill(tv, tv, DistanceVariant::l2).value().item()),
                           std::abs(feature_reconstruction_loss(tv, tv).value().item()),
                           std::abs(style_loss(tv, tv).value().item())});

    // dcd on a fresh toy world per instance.
    ToyWorld w = ToyWorld::make(1000 + static_cast<std::uint64_t>(inst), 1 + inst % 2);
    std::vector<Tensor> tf, sf;
    {
      ParamBinder tb(tape, w.teacher.params, BindMode::constant), sb(tape, w.student.params, BindMode::constant);
      tf = values(w.teacher.model.forward(tb, tape.constant(w.x), w.g_taps).features);
      sf = values(w.student.model.forward(sb, tape.constant(w.x), w.g_taps).features);
    }
    ParamBinder sbank(tape, w.student_bank.params, BindMode::constant);
    const auto tfv = consts(tape, tf), sfv = consts(tape, sf);
    const bool l2 = inst % 3 == 0;
    DcdInputs in = dcd_inputs(w, tfv, sfv, sbank);
    in.distance = l2 ? DistanceVariant::l2 : DistanceVariant::l1;
    track(dcd_loss(in).value().item(), oracle_dcd(tf, sf, w.teacher_bank.params, w.student_bank.params, w.disc.model,
                                                  w.disc.params, w.d_taps, 8, 8, l2));
    // Identical inputs: same bank, same features.
    ParamBinder tbank(tape, w.teacher_bank.params, BindMode::constant);
    DcdInputs same = dcd_inputs(w, tfv, tfv, tbank);
    same.student_bank = &w.teacher_bank.model;
    worst_zero = std::max(worst_zero, std::abs(dcd_loss(same).value().item()));
  }
  v.require(worst <= 1e-6, "oracle deviation " + fmt(worst));
  v.require(worst_zero <= 1e-9, "zero case " + fmt(worst_zero));
  v.detail << "50 instances x {per_pixel l1/l2, feature_reconstruction, style, gram, dcd}, max |diff| " << fmt(worst, 3)
           << ", max zero-case " << fmt(worst_zero, 3);
  return v;
}

// ------------------------------------------------------------------ 3

Verdict dcd_invariants(const fs::path& out) {
  Verdict v;
  // Gradient of dcd_loss w.r.t. the teacher generator (and hence the bank input).
  ToyWorld w = ToyWorld::make(303);
  Tape t;
  ParamBinder teacher(t, w.teacher.params, BindMode::trainable);
  ParamBinder student(t, w.student.params, BindMode::trainable);
  ParamBinder sbank(t, w.student_bank.params, BindMode::trainable);
  const auto tout = w.teacher.model.forward(teacher, t.constant(w.x), w.g_taps);
  const auto sout = w.student.model.forward(student, t.constant(w.x), w.g_taps);
  t.backward(dcd_loss(dcd_inputs(w, tout.features, sout.features, sbank)));
  double teacher_abs = 0.0, sbank_abs = 0.0;
  for (const auto& [_, g] : teacher.gradients())
    for (double x : g.values()) teacher_abs += std::abs(x);
  for (Var f : tout.features) {
    const Tensor g = t.grad(f);
    for (double x : g.values()) teacher_abs += std::abs(x);
  }
  for (const auto& [_, g] : sbank.gradients())
    for (double x : g.values()) sbank_abs += std::abs(x);
  v.require(teacher_abs == 0.0, "teacher gradient " + fmt(teacher_abs));
  v.require(sbank_abs > 0.0, "student bank receives no gradient");

  // 100 training steps: the frozen teacher bank never moves.
  const RunConfig cfg = small_config(out / "dcd_invariants");
  Models m = build_models(cfg);
  const std::string bank0 = parameter_digest(m.teacher_bank.params);
  const std::string sbank0 = parameter_digest(m.student_bank.params);
  std::int64_t steps = 0;
  bool bank_constant = true;
  bool sbank_moved_at_1 = false;
  TrainState st = init_state(m);
  const Dataset ds = load_run_dataset(cfg);
  for (; steps < 100; ++steps) {
    const std::size_t i = static_cast<std::size_t>(steps) % ds.train.a.size();
    train_step(st, ds.train.a[i], ds.train.b[i], m, cfg.hp, cfg.hp.lr_initial);
    if (parameter_digest(m.teacher_bank.params) != bank0) bank_constant = false;
    if (steps == 0) sbank_moved_at_1 = parameter_digest(m.student_bank.params) != sbank0;
  }
  v.require(bank_constant, "teacher bank digest changed");
  v.require(sbank_moved_at_1, "student bank unchanged after 1 step");
  v.detail << "sum|dL/dteacher| = " << teacher_abs << ", teacher bank digest constant over " << steps
           << " steps, student bank moved at step 1 (lambda_dcd = " << fmt(cfg.hp.lambda_dcd) << ")";
  return v;
}

// ------------------------------------------------------------------ 4

Verdict collaborative_reduction() {
  Verdict v;
  ToyWorld w = ToyWorld::make(404);
  const Tensor t_img = run_generator(w.teacher.model, w.teacher.params, w.x);
  const Tensor s_img = run_generator(w.student.model, w.student.params, w.x);
  bool leaf_zero = true, disc_equal = true;
  for (GanVariant gv : {GanVariant::vanilla, GanVariant::nonsaturating, GanVariant::least_squares}) {
    auto disc_grads = [&](bool with_student) {
      Tape t;
      ParamBinder d(t, w.disc.params, BindMode::trainable);
      Var real = discriminator_output(w.disc.model.forward(d, t.constant(w.y)).scores, gv);
      Var ft = discriminator_output(w.disc.model.forward(d, t.constant(t_img)).scores, gv);
      Var s_leaf = t.leaf(s_img, true);
      Var fs = discriminator_output(w.disc.model.forward(d, s_leaf).scores, gv);
      std::vector<WeightedScores> fakes{{ft, 1.0}};
      if (with_student) fakes.push_back({fs, 0.0});
      t.backward(adversarial_d_loss(real, fakes, gv));
      const Tensor gs = t.grad(s_leaf);
      for (double x : gs.values()) leaf_zero = leaf_zero && x == 0.0;
      return d.gradients();
    };
    const Gradients with = disc_grads(true), without = disc_grads(false);
    for (const auto& [path, g] : with) {
      const Tensor& h = without.at(path);
      for (std::int64_t i = 0; i < g.size(); ++i) disc_equal = disc_equal && g[i] == h[i];
    }
  }
  v.require(leaf_zero, "student batch gradient nonzero");
  v.require(disc_equal, "discriminator gradient depends on the student batch");

  Tape t;
  const Shape s{2, 1, 3, 3};
  const std::vector<WeightedScores> fakes{{t.constant(Tensor(s, 0.5)), 1.0}, {t.constant(Tensor(s, 0.5)), 1.0}};
  const double value = adversarial_d_loss(t.constant(Tensor(s, 0.5)), fakes, GanVariant::vanilla).value().item();
  const double expected = -3.0 * std::log(0.5);
  v.require(std::abs(value - expected) <= 1e-9, "uniform loss " + fmt(value, 17));
  v.detail << "lambda_stu=0: student-batch gradient exactly 0 (3 variants), D gradients bitwise equal to teacher-only; "
           << "uniform 0.5 loss " << fmt(value, 12) << " vs -3 log 0.5 = " << fmt(expected, 12);
  return v;
}

// ------------------------------------------------------------------ 5

Eigen::MatrixXd random_spd(Rng& r, int d) {
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = r.normal();
  return a * a.transpose() / d + 0.1 * Eigen::MatrixXd::Identity(d, d);
}

GaussianStats random_stats(Rng& r, int d) {
  GaussianStats g;
  g.mean = Eigen::VectorXd(d);
  for (int i = 0; i < d; ++i) g.mean(i) = r.normal();
  g.cov = random_spd(r, d);
  g.n = 100;
  return g;
}

Verdict frechet_checks() {
  Verdict v;
  Rng r(505);
  const int d = 64;
  double ident = 0.0, asym = 0.0, closed = 0.0, recon = 0.0;
  for (int k = 0; k < 5; ++k) {
    const GaussianStats a = random_stats(r, d), b = random_stats(r, d);
    ident = std::max(ident, std::abs(frechet_distance(a, a)));
    const double ab = frechet_distance(a, b), ba = frechet_distance(b, a);
    asym = std::max(asym, std::abs(ab - ba) / std::max(1.0, std::abs(ab)));
    const Eigen::MatrixXd m = random_spd(r, d);
    const Eigen::MatrixXd root = sqrtm_psd(m);
    recon = std::max(recon, (root * root - m).norm() / m.norm());
  }
  for (int k = 0; k < 20; ++k) {
    GaussianStats a, b;
    a.mean = Eigen::VectorXd::Constant(1, r.normal() * 3);
    b.mean = Eigen::VectorXd::Constant(1, r.normal() * 3);
    const double s1 = 0.1 + std::abs(r.normal()), s2 = 0.1 + std::abs(r.normal());
    a.cov = Eigen::MatrixXd::Constant(1, 1, s1 * s1);
    b.cov = Eigen::MatrixXd::Constant(1, 1, s2 * s2);
    const double mu = a.mean(0) - b.mean(0);
    closed = std::max(closed, std::abs(frechet_distance(a, b) - (mu * mu + (s1 - s2) * (s1 - s2))));
  }
  v.require(ident <= 1e-6, "identical stats " + fmt(ident));
  v.require(asym <= 1e-8, "symmetry " + fmt(asym));
  v.require(closed <= 1e-9, "1-D closed form " + fmt(closed));
  v.require(recon <= 1e-8, "sqrtm reconstruction " + fmt(recon));
  v.detail << "d=64: identical " << fmt(ident, 3) << ", symmetry " << fmt(asym, 3) << ", 1-D closed form "
           << fmt(closed, 3) << ", sqrtm rel. error " << fmt(recon, 3);
  return v;
}

// ------------------------------------------------------------------ 6

std::int64_t serialized_count(const ParameterSet& params, const fs::path& dir) {
  save_weights(params, dir, Dtype::f64);
  std::int64_t bytes = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".bin") bytes += static_cast<std::int64_t>(e.file_size());
  return bytes / 8;
}

Verdict complexity(const fs::path& out) {
  Verdict v;
  Rng r(606);
  int exact = 0;
  for (int k = 0; k < 10; ++k) {
    GeneratorSpec g;
    g.base_width = static_cast<int>(r.uniform_int(2, 24));
    g.n_resblocks = static_cast<int>(r.uniform_int(1, 9));
    g.width_factor = WidthFactor{static_cast<int>(r.uniform_int(1, 4)), static_cast<int>(r.uniform_int(4, 8))};
    DiscriminatorSpec ds;
    ds.widths.clear();
    for (int i = 0, n = static_cast<int>(r.uniform_int(2, 5)); i < n; ++i)
      ds.widths.push_back(static_cast<int>(r.uniform_int(2, 40)));
    Rng init(static_cast<std::uint64_t>(k));
    const auto gen = build_generator(g, init);
    const auto disc = build_discriminator(ds, init);
    const fs::path dir = out / ("arch_" + std::to_string(k));
    fs::remove_all(dir);
    const std::int64_t gs = serialized_count(gen.params, dir / "g");
    const std::int64_t dsz = serialized_count(disc.params, dir / "d");
    const bool ok = count_params(gen.model).total_params == gs && count_params(disc.model).total_params == dsz &&
                    gs == gen.params.scalar_count();
    exact += ok;
  }
  v.require(exact == 10, std::to_string(exact) + "/10 architectures exact");

  const RunConfig cfg;
  Rng init(0);
  const auto teacher = build_generator(cfg.generator, init);
  const auto student = build_generator(cfg.student_spec(), init);
  const int res = cfg.data.resolution;
  const CountOracle ot = oracle_generator(cfg.generator.base_width, cfg.generator.n_resblocks, 1, 1, res);
  const CountOracle os = oracle_generator(cfg.generator.base_width, cfg.generator.n_resblocks, cfg.student_width.num,
                                          cfg.student_width.den, res);
  const auto tp = count_params(teacher.model), sp = count_params(student.model);
  const auto tm = count_macs(teacher.model, res), sm = count_macs(student.model, res);
  v.require(tp.total_params == ot.params && sp.total_params == os.params, "params disagree with the analytic oracle");
  v.require(tm.total_macs == ot.macs && sm.total_macs == os.macs, "MACs disagree with the analytic oracle");
  const double pr = static_cast<double>(ot.params) / static_cast<double>(os.params);
  const double mr = static_cast<double>(ot.macs) / static_cast<double>(os.macs);
  v.require(pr >= 14 && pr <= 17, "param ratio " + fmt(pr));
  v.require(mr >= 12 && mr <= 17, "MAC ratio " + fmt(mr));
  v.detail << exact << "/10 random architectures exact; width " << cfg.student_width.str() << " @" << res
           << ": params " << tp.total_params << "/" << sp.total_params << " = " << fmt(pr) << "x, MACs "
           << tm.total_macs << "/" << sm.total_macs << " = " << fmt(mr) << "x";
  return v;
}

// ------------------------------------------------------------------ 7

Verdict desk_benefit(const fs::path& out, int steps) {
  Verdict v;
  if (steps % RunConfig{}.data.n_train != 0) {
    v.require(false, "steps must be a multiple of n_train");
    return v;
  }
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> base, with_dcd;
  int improved = 0;
  std::ostringstream rows;
  for (int seed = 0; seed < 3; ++seed) {
    for (const char* ls : {"per,gan", "per,dcd,gan"}) {
      RunConfig cfg;
      cfg.set("task", "paired_edges2blobs");
      cfg.set("resolution", "64");
      cfg.set("seed", std::to_string(seed));
      cfg.set("loss_set", ls);
      cfg.set("epochs", std::to_string(steps / cfg.data.n_train));
      cfg.log_every = 50;
      cfg.out_dir = (out / "desk" / (std::string(ls) + "_seed" + std::to_string(seed))).string();
      fs::remove_all(cfg.out_dir);
      const FitResult r = fit(cfg);
      const double fid = r.final_fid ? r.final_fid->desk_fid : std::nan("");
      (std::string(ls) == "per,gan" ? base : with_dcd).push_back(fid);
      v.require(r.steps <= 2000, "more than 2000 steps");
    }
    const bool better = with_dcd.back() < base.back();
    improved += better;
    rows << " seed " << seed << ": " << fmt(base.back()) << " -> " << fmt(with_dcd.back()) << (better ? "" : " (worse)");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double mb = std::accumulate(base.begin(), base.end(), 0.0) / 3;
  const double md = std::accumulate(with_dcd.begin(), with_dcd.end(), 0.0) / 3;
  v.require(md <= mb, "mean desk-FID did not improve");
  v.require(improved >= 2, "improved in " + std::to_string(improved) + "/3 seeds");
  v.require(secs <= 1800, "budget exceeded: " + fmt(secs) + " s");
  v.detail << "paired_edges2blobs 64x64, " << steps << " steps/run, mean desk-FID per+gan " << fmt(mb)
           << " vs per+dcd+gan " << fmt(md) << ";" << rows.str() << "; " << fmt(secs, 3) << " s";
  return v;
}

// ------------------------------------------------------------------ 8

Verdict ablation_structure(const fs::path& out) {
  Verdict v;
  const fs::path dir = out / "ablation";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "small.cfg";
  std::ofstream(cfg) << small_config(dir).to_text();
  std::ostringstream o, e;
  const int code = cli::run({"ablate", "--config", cfg.string(), "--max-steps", "30", "--out", (dir / "out").string()},
                            o, e);
  v.require(code == cli::kExitOk, "ablate exit code " + std::to_string(code) + ": " + e.str());
  std::istringstream csv(slurp(dir / "out" / "ablation.csv"));
  std::string line;
  std::getline(csv, line);
  std::vector<std::string> combos, overrides, statuses;
  std::vector<double> fids;
  while (std::getline(csv, line)) {
    // "combo","overrides",seed,steps,fid,"status"
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char ch : line) {
      if (ch == '"') quoted = !quoted;
      else if (ch == ',' && !quoted) cells.push_back(std::exchange(cell, ""));
      else cell += ch;
    }
    cells.push_back(cell);
    if (cells.size() != 6) {
      v.require(false, "malformed row: " + line);
      continue;
    }
    combos.push_back(cells[0]);
    overrides.push_back(cells[1]);
    fids.push_back(std::stod(cells[4]));
    statuses.push_back(cells[5]);
  }
  const std::vector<std::string> want_combos{"per",     "dcd",     "gan",        "per,dcd",
                                             "per,gan", "dcd,gan", "per,dcd,gan"};
  const std::vector<std::string> want_sweeps{"lambda_dcd=0.1", "lambda_dcd=1", "lambda_dcd=5", "lambda_dcd=10",
                                             "lambda_stu=0.1", "lambda_stu=1", "lambda_stu=10"};
  v.require(combos.size() == 14, std::to_string(combos.size()) + " rows");
  if (combos.size() == 14) {
    for (std::size_t i = 0; i < 7; ++i) {
      v.require(combos[i] == want_combos[i] && overrides[i].empty(), "loss row " + std::to_string(i));
      v.require(overrides[7 + i] == want_sweeps[i] && combos[7 + i] == "per,dcd,gan", "sweep row " + want_sweeps[i]);
    }
  }
  for (std::size_t i = 0; i < statuses.size(); ++i) v.require(statuses[i] == "ok", combos[i] + ": " + statuses[i]);
  double with_per = 0, without_per = 0;
  int nw = 0, nwo = 0;
  for (std::size_t i = 0; i < std::min<std::size_t>(7, fids.size()); ++i) {
    if (combos[i].find("per") != std::string::npos) with_per += fids[i], ++nw;
    else without_per += fids[i], ++nwo;
  }
  v.detail << combos.size() << " rows (7 loss combinations + lambda_dcd {0.1,1,5,10} + lambda_stu {0.1,1,10}), all "
           << "finished; report-only mean desk-FID at 30 steps with L_per " << fmt(with_per / std::max(nw, 1))
           << ", without " << fmt(without_per / std::max(nwo, 1));
  return v;
}

// ------------------------------------------------------------------ 9

Verdict reproducibility(const fs::path& out) {
  Verdict v;
  const fs::path dir = out / "repro";
  fs::remove_all(dir);

  RunConfig cfg = small_config(dir / "a");
  const DatasetSpec spec = DatasetSpec::from_config(cfg);
  write_dataset(make_dataset(spec), spec, dir / "data_a");
  write_dataset(make_dataset(spec), spec, dir / "data_b");
  v.require(slurp(dir / "data_a" / "manifest.txt") == slurp(dir / "data_b" / "manifest.txt"), "dataset manifests differ");

  v.require(models_digest(build_models(cfg)) == models_digest(build_models(cfg)), "initial digests differ");

  cfg.hp.epochs = 13;  // 16 items -> 208 steps, stopped at 200
  FitOptions stop200;
  stop200.stop_after = 200;
  const FitResult a = fit(cfg, stop200);
  RunConfig cfg_b = cfg;
  cfg_b.out_dir = (dir / "b").string();
  const FitResult b = fit(cfg_b, stop200);
  v.require(a.steps == 200 && b.steps == 200, "runs did not reach step 200");
  v.require(a.final_digest == b.final_digest, "step-200 digests differ");

  RunConfig cfg_c = cfg;
  cfg_c.out_dir = (dir / "c").string();
  FitOptions stop120;
  stop120.stop_after = 120;
  fit(cfg_c, stop120);
  FitOptions resume;
  resume.resume = true;
  resume.stop_after = 200;
  const FitResult c = fit(cfg_c, resume);
  v.require(c.final_digest == a.final_digest, "resumed digest differs");
  v.require(slurp(dir / "c" / "metrics.jsonl") == slurp(dir / "a" / "metrics.jsonl"), "resumed metrics differ");
  v.detail << "dataset manifests, initial digests and step-200 digest (" << a.final_digest.substr(0, 12)
           << ") identical; resume at 120 -> 200 bitwise equal incl. metrics log";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dcdgan acceptance suite"};
  std::string out = "acceptance_runs";
  std::vector<int> only;
  int steps = 1280;
  app.add_option("--out", out, "Scratch directory for runs");
  app.add_option("--only", only, "Run only these criteria");
  app.add_option("--desk-steps", steps, "Steps per desk-scale run");
  CLI11_PARSE(app, argc, argv);
  const fs::path dir = fs::absolute(out);
  fs::create_directories(dir);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"gradient suite", gradient_suite},
      {"loss oracles", loss_oracles},
      {"dcd structural invariants", [&] { return dcd_invariants(dir); }},
      {"collaborative-loss reduction", collaborative_reduction},
      {"frechet metric", frechet_checks},
      {"complexity accounting", [&] { return complexity(dir); }},
      {"desk-scale dcd benefit", [&] { return desk_benefit(dir, steps); }},
      {"ablation harness structure", [&] { return ablation_structure(dir); }},
      {"reproducibility", [&] { return reproducibility(dir); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.failures += std::string(" [exception: ") + e.what() + "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << v.detail.str() << v.failures << " ("
              << fmt(secs, 3) << " s)" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
