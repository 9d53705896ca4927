#include "dcdgan/trainer.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dcdgan/errors.hpp"
#include "dcdgan/ops.hpp"
#include "dcdgan/weights_io.hpp"

namespace dcdgan {

namespace fs = std::filesystem;

std::map<std::string, ParameterSet*> Models::checkpointed() {
  return {{"teacher", &teacher.params},           {"student", &student.params},
          {"disc", &disc.params},                 {"teacher_bank", &teacher_bank.params},
          {"student_bank", &student_bank.params}, {"adapter", &adapter.params}};
}

std::map<std::string, const ParameterSet*> Models::checkpointed() const {
  return {{"teacher", &teacher.params},           {"student", &student.params},
          {"disc", &disc.params},                 {"teacher_bank", &teacher_bank.params},
          {"student_bank", &student_bank.params}, {"adapter", &adapter.params}};
}

Models build_models(const RunConfig& cfg) {
  cfg.validate();
  const TapSpec taps = cfg.resolved_taps();
  auto rng = [&cfg](const char* purpose) { return seeded_rng(cfg.seed, purpose); };

  Rng r_teacher = rng("init_teacher");
  Rng r_student = rng("init_student");
  Rng r_disc = rng("init_disc");
  Rng r_tbank = rng("init_teacher_bank");
  Rng r_sbank = rng("init_student_bank");
  Rng r_adapter = rng("init_adapter");

  Built<Generator> teacher = build_generator(cfg.generator, r_teacher);
  Built<Generator> student = build_generator(cfg.student_spec(), r_student);
  Built<Discriminator> disc = build_discriminator(cfg.discriminator, r_disc);

  const std::vector<int> t_ch = teacher.model.layer_channels();
  const std::vector<int> s_ch = student.model.layer_channels();
  std::vector<int> t_tap_ch, s_tap_ch;
  for (int t : taps.generator) {
    t_tap_ch.push_back(t_ch[static_cast<std::size_t>(t)]);
    s_tap_ch.push_back(s_ch[static_cast<std::size_t>(t)]);
  }
  Built<ProjectionBank> teacher_bank = build_bank(make_downsampler_bank(t_tap_ch), r_tbank, true);
  Built<ProjectionBank> student_bank = build_bank(make_downsampler_bank(s_tap_ch), r_sbank, false);
  Built<ProjectionBank> adapter = build_bank(make_feature_adapter(s_tap_ch, t_tap_ch), r_adapter, false);

  Models m{std::move(teacher),
           std::move(student),
           std::move(disc),
           std::move(teacher_bank),
           std::move(student_bank),
           std::move(adapter),
           build_feature_extractor(cfg.extractor),
           build_feature_extractor(cfg.embedder),
           taps};

  if (!cfg.teacher_checkpoint.empty()) {
    const Checkpoint pre = load_checkpoint(cfg.teacher_checkpoint);
    if (parameter_digest(pre.models.teacher.params).empty()) throw CorruptionError("empty teacher checkpoint");
    for (auto& [path, p] : m.teacher.params) {
      if (!pre.models.teacher.params.contains(path) ||
          pre.models.teacher.params.at(path).value.shape() != p.value.shape()) {
        throw ConfigError("teacher checkpoint does not match the configured teacher architecture");
      }
      p.value = pre.models.teacher.params.at(path).value;
    }
    m.teacher.params.freeze_all(true);
  }
  return m;
}

TrainState init_state(const Models& m) {
  TrainState s;
  s.frozen_digests["teacher_bank"] = parameter_digest(m.teacher_bank.params);
  s.frozen_digests["extractor"] = parameter_digest(m.extractor.params);
  s.frozen_digests["embedder"] = parameter_digest(m.embedder.params);
  bool teacher_frozen = true;
  for (const auto& [_, p] : m.teacher.params) teacher_frozen = teacher_frozen && p.frozen;
  if (teacher_frozen) s.frozen_digests["teacher"] = parameter_digest(m.teacher.params);
  return s;
}

void check_frozen(const Models& m, const TrainState& s) {
  const std::map<std::string, const ParameterSet*> groups{{"teacher_bank", &m.teacher_bank.params},
                                                          {"extractor", &m.extractor.params},
                                                          {"embedder", &m.embedder.params},
                                                          {"teacher", &m.teacher.params}};
  for (const auto& [name, digest] : s.frozen_digests) {
    auto it = groups.find(name);
    if (it == groups.end()) continue;
    if (parameter_digest(*it->second) != digest) throw DivergenceError("frozen group '" + name + "' changed");
  }
}

double lr_at_epoch(double epoch, const HyperParams& hp) {
  const double total = hp.epochs;
  if (!(epoch >= 0.0 && epoch <= total)) {
    throw ConfigError("epoch " + format_double(epoch) + " outside [0, " + std::to_string(hp.epochs) + "]");
  }
  const double decay_start = total / 2.0;
  if (epoch <= decay_start) return hp.lr_initial;
  return hp.lr_initial * (total - epoch) / (total - decay_start);
}

namespace {

std::vector<Var> detach_all(const std::vector<Var>& vs) {
  std::vector<Var> out;
  for (const Var& v : vs) out.push_back(ops::detach(v));
  return out;
}

double checked(Var v, const char* name) {
  const double x = v.value().item();
  if (!std::isfinite(x)) throw DivergenceError(std::string("non-finite loss term '") + name + "'");
  return x;
}

}  // namespace

LossReport train_step(TrainState& state, const Tensor& batch_x, const Tensor& batch_y, Models& m,
                      const HyperParams& hp, double lr) {
  require_image_range(batch_x, "batch_x");
  require_image_range(batch_y, "batch_y");
  const LossSet& ls = hp.loss_set;
  const GanVariant gv = hp.gan_variant;
  const AdamConfig adam{hp.adam_beta1, hp.adam_beta2};
  const Discriminator& D = m.disc.model;

  Tape tape;
  ParamBinder teacher_p(tape, m.teacher.params, BindMode::trainable);
  ParamBinder student_p(tape, m.student.params, BindMode::trainable);
  ParamBinder sbank_p(tape, m.student_bank.params, BindMode::trainable);
  ParamBinder adapter_p(tape, m.adapter.params, BindMode::trainable);
  Var x = tape.constant(batch_x);
  Var y = tape.constant(batch_y);
  const auto t_out = m.teacher.model.forward(teacher_p, x, m.taps.generator);
  const auto s_out = m.student.model.forward(student_p, x, m.taps.generator);
  if (!t_out.image.value().all_finite()) throw DivergenceError("non-finite teacher generator output");
  if (!s_out.image.value().all_finite()) throw DivergenceError("non-finite student generator output");

  LossReport report;
  std::map<std::string, double> comps;
  auto scores = [&D, gv](ParamBinder& b, Var img, const char* what) {
    Var out = D.forward(b, img).scores;
    if (!out.value().all_finite()) throw DivergenceError(std::string("non-finite discriminator scores on ") + what);
    return discriminator_output(out, gv);
  };

  // Discriminator step; generator outputs enter as constants.
  {
    ParamBinder disc_p(tape, m.disc.params, BindMode::trainable);
    Var real = scores(disc_p, y, "real");
    Var fake_t = scores(disc_p, ops::detach(t_out.image), "teacher fake");
    std::vector<WeightedScores> fakes{{fake_t, 1.0}};
    if (ls.gan && hp.adversarial_objective == AdversarialObjective::collaborative) {
      Var fake_s = scores(disc_p, ops::detach(s_out.image), "student fake");
      fakes.push_back({fake_s, hp.lambda_stu});
    }
    Var loss_d = adversarial_d_loss(real, fakes, gv);
    comps["gan_d"] = checked(loss_d, "gan_d");
    tape.backward(loss_d);
    adam_step(m.disc.params, disc_p.gradients(), state.optim["disc"], lr, adam);
  }

  // Generator step with the updated discriminator held constant.
  ParamBinder disc_c(tape, m.disc.params, BindMode::constant);
  Var adv_t = adversarial_g_loss(scores(disc_c, t_out.image, "teacher fake"), gv);
  comps["gan_g_teacher"] = checked(adv_t, "gan_g_teacher");

  Var t_image = t_out.image;
  std::vector<Var> t_feats = t_out.features;
  if (hp.update_mode == UpdateMode::sequential) {
    tape.backward(adv_t);
    adam_step(m.teacher.params, teacher_p.gradients(), state.optim["teacher"], lr, adam);
    ParamBinder teacher_c(tape, m.teacher.params, BindMode::constant);
    const auto t_new = m.teacher.model.forward(teacher_c, x, m.taps.generator);
    t_image = t_new.image;
    t_feats = t_new.features;
  } else if (!hp.teacher_distill_grad) {
    t_image = ops::detach(t_image);
    t_feats = detach_all(t_feats);
  }

  StudentTerms terms;
  if (ls.gan) {
    terms.gan_g = adversarial_g_loss(scores(disc_c, s_out.image, "student fake"), gv);
    comps["gan_g_student"] = checked(terms.gan_g, "gan_g_student");
  }
  if (ls.per) {
    const PerceptualTerms per = perceptual_loss(t_image, s_out.image, m.extractor.model, m.extractor.params,
                                                m.taps.extractor, hp.lambda_fea, hp.lambda_sty);
    terms.per = per.total;
    comps["per"] = checked(per.total, "per");
    comps["fea"] = checked(per.fea, "fea");
    comps["sty"] = checked(per.sty, "sty");
  }
  if (ls.dcd) {
    DcdInputs in;
    in.teacher_feats = t_feats;
    in.student_feats = s_out.features;
    in.teacher_bank = &m.teacher_bank.model;
    in.teacher_bank_params = &m.teacher_bank.params;
    in.student_bank = &m.student_bank.model;
    in.student_bank_binder = &sbank_p;
    in.discriminator = &D;
    in.discriminator_params = &m.disc.params;
    in.discriminator_taps = m.taps.discriminator;
    in.image_h = batch_x.shape().h;
    in.image_w = batch_x.shape().w;
    in.distance = hp.distance_variant;
    in.teacher_grad = hp.teacher_distill_grad && hp.update_mode == UpdateMode::combined;
    terms.dcd = dcd_loss(in);
    comps["dcd"] = checked(terms.dcd, "dcd");
  }
  if (ls.fitnet) {
    std::vector<Var> adapted;
    for (std::size_t i = 0; i < s_out.features.size(); ++i) {
      adapted.push_back(m.adapter.model.project(adapter_p, i, s_out.features[i]));
    }
    terms.fea_dis = per_pixel_distill(t_feats, adapted, hp.distance_variant);
    comps["fea_dis"] = checked(terms.fea_dis, "fea_dis");
  }
  Var student_total = student_objective(terms, hp);
  report = total_objective(comps, hp);
  report.require_finite();

  if (hp.update_mode == UpdateMode::sequential) {
    tape.backward(student_total);
  } else {
    tape.backward(ops::add(adv_t, student_total));
    adam_step(m.teacher.params, teacher_p.gradients(), state.optim["teacher"], lr, adam);
  }
  adam_step(m.student.params, student_p.gradients(), state.optim["student"], lr, adam);
  adam_step(m.student_bank.params, sbank_p.gradients(), state.optim["student_bank"], lr, adam);
  if (ls.fitnet) adam_step(m.adapter.params, adapter_p.gradients(), state.optim["adapter"], lr, adam);
  return report;
}

// -------------------------------------------------------------- checkpoints

namespace {

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream os(file);
  if (!os) throw IoError("cannot write " + file.string());
  os << text;
}

std::string read_text(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw CorruptionError("missing checkpoint file " + file.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ParameterSet moments_as_params(const std::map<std::string, Tensor>& moments) {
  ParameterSet p;
  for (const auto& [k, v] : moments) p.add(k, v);
  return p;
}

std::map<std::string, Tensor> params_as_moments(const ParameterSet& p) {
  std::map<std::string, Tensor> out;
  for (const auto& [k, v] : p) out.emplace(k, v.value);
  return out;
}

}  // namespace

std::string models_digest(const Models& m) {
  std::string all;
  for (const auto& [name, p] : m.checkpointed()) all += name + ":" + parameter_digest(*p) + "\n";
  return sha256_hex(all);
}

void save_checkpoint(const TrainState& state, const Models& m, const RunConfig& cfg, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory " + dir.string() + ": " + ec.message());
  write_text(dir / "config.txt", cfg.to_text());
  std::ostringstream st;
  st << "step " << state.step << "\nepoch " << state.epoch << "\nbatch_in_epoch " << state.batch_in_epoch << "\n";
  for (const auto& [name, opt] : state.optim) st << "optim_steps " << name << " " << opt.steps << "\n";
  for (const auto& [name, d] : state.frozen_digests) st << "frozen " << name << " " << d << "\n";
  write_text(dir / "state.txt", st.str());

  std::ostringstream manifest;
  manifest << "# dcdgan checkpoint v1\n";
  for (const auto& [name, p] : m.checkpointed()) {
    const fs::path sub = fs::path("weights") / name;
    save_weights(*p, dir / sub, Dtype::f64);
    manifest << "component " << sub.generic_string() << " " << parameter_digest(*p) << "\n";
  }
  for (const auto& [name, opt] : state.optim) {
    for (const auto& [kind, moments] : {std::pair{"m", &opt.m}, std::pair{"v", &opt.v}}) {
      const ParameterSet ps = moments_as_params(*moments);
      const fs::path sub = fs::path("optimizer") / name / kind;
      save_weights(ps, dir / sub, Dtype::f64);
      manifest << "component " << sub.generic_string() << " " << parameter_digest(ps) << "\n";
    }
  }
  manifest << "state " << sha256_hex(st.str()) << "\n";
  manifest << "config " << sha256_hex(cfg.to_text()) << "\n";
  write_text(dir / "manifest.txt", manifest.str());
}

Checkpoint load_checkpoint(const fs::path& dir) {
  const std::string manifest = read_text(dir / "manifest.txt");
  std::map<std::string, std::string> components;
  std::string state_digest, config_digest;
  {
    std::istringstream is(manifest);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string key, a, b;
      ls >> key >> a;
      if (key == "component") {
        ls >> b;
        components[a] = b;
      } else if (key == "state") {
        state_digest = a;
      } else if (key == "config") {
        config_digest = a;
      } else {
        throw CorruptionError("unknown checkpoint manifest key '" + key + "'");
      }
    }
  }
  const std::string cfg_text = read_text(dir / "config.txt");
  if (sha256_hex(cfg_text) != config_digest) throw CorruptionError("checkpoint config digest mismatch");
  const std::string state_text = read_text(dir / "state.txt");
  if (sha256_hex(state_text) != state_digest) throw CorruptionError("checkpoint state digest mismatch");

  RunConfig cfg = RunConfig::parse(cfg_text);
  // A checkpoint carries its own teacher; do not chase the original pretrained path.
  const std::string teacher_ckpt = cfg.teacher_checkpoint;
  cfg.teacher_checkpoint.clear();
  Checkpoint ck{cfg, build_models(cfg), TrainState{}};
  ck.config.teacher_checkpoint = teacher_ckpt;

  auto load_component = [&](const std::string& sub) {
    auto it = components.find(sub);
    if (it == components.end()) throw CorruptionError("checkpoint manifest lacks entry " + sub);
    ParameterSet p = load_weights(dir / sub);
    if (parameter_digest(p) != it->second) throw CorruptionError("digest mismatch for checkpoint component " + sub);
    return p;
  };

  for (auto& [name, p] : ck.models.checkpointed()) {
    ParameterSet loaded = load_component((fs::path("weights") / name).generic_string());
    for (const auto& [path, param] : *p) {
      if (!loaded.contains(path)) throw CorruptionError("checkpoint lacks parameter " + name + "/" + path);
    }
    if (loaded.size() != p->size()) throw CorruptionError("checkpoint has unexpected parameters in " + name);
    *p = std::move(loaded);
  }

  std::istringstream ss(state_text);
  std::string key;
  while (ss >> key) {
    if (key == "step") {
      ss >> ck.state.step;
    } else if (key == "epoch") {
      ss >> ck.state.epoch;
    } else if (key == "batch_in_epoch") {
      ss >> ck.state.batch_in_epoch;
    } else if (key == "optim_steps") {
      std::string name;
      std::int64_t steps = 0;
      ss >> name >> steps;
      AdamState& opt = ck.state.optim[name];
      opt.steps = steps;
      opt.m = params_as_moments(load_component((fs::path("optimizer") / name / "m").generic_string()));
      opt.v = params_as_moments(load_component((fs::path("optimizer") / name / "v").generic_string()));
    } else if (key == "frozen") {
      std::string name, digest;
      ss >> name >> digest;
      ck.state.frozen_digests[name] = digest;
    } else {
      throw CorruptionError("unknown checkpoint state key '" + key + "'");
    }
  }
  check_frozen(ck.models, ck.state);
  return ck;
}

// ---------------------------------------------------------------------- fit

std::optional<fs::path> latest_checkpoint(const fs::path& run_dir) {
  const fs::path root = run_dir / "checkpoints";
  if (!fs::is_directory(root)) return std::nullopt;
  std::optional<fs::path> best;
  for (const auto& e : fs::directory_iterator(root)) {
    if (!e.is_directory() || !fs::exists(e.path() / "manifest.txt")) continue;
    if (!best || e.path().filename() > best->filename()) best = e.path();
  }
  return best;
}

Dataset load_run_dataset(const RunConfig& cfg) {
  if (!cfg.data.dataset_dir.empty()) {
    DatasetSpec spec;
    Dataset ds = read_dataset(cfg.data.dataset_dir, &spec);
    if (spec.resolution != cfg.data.resolution) {
      throw ConfigError("dataset resolution " + std::to_string(spec.resolution) + " does not match configured " +
                        std::to_string(cfg.data.resolution));
    }
    return ds;
  }
  return make_dataset(DatasetSpec::from_config(cfg));
}

namespace {

FidReport evaluate_generator(const Built<Generator>& g, const Models& m, const Dataset& ds, std::int64_t n_samples) {
  auto gen = [&g](const Tensor& x) { return run_generator(g.model, g.params, x); };
  return desk_fid(gen, ds.eval.a, ds.eval.b, m.embedder.model, m.embedder.params, n_samples);
}

fs::path checkpoint_dir(const fs::path& run_dir, std::int64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step_%08lld", static_cast<long long>(step));
  return run_dir / "checkpoints" / buf;
}

// Keeps only JSON lines whose "step" is <= max_step.
void truncate_log(const fs::path& file, std::int64_t max_step) {
  std::ifstream is(file);
  if (!is) return;
  std::string kept, line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (!j.is_discarded() && j.contains("step") && j["step"].get<std::int64_t>() <= max_step) kept += line + "\n";
  }
  is.close();
  write_text(file, kept);
}

}  // namespace

FidReport evaluate_student(const Models& m, const Dataset& ds, std::int64_t n_samples) {
  return evaluate_generator(m.student, m, ds, n_samples);
}

FidReport evaluate_teacher(const Models& m, const Dataset& ds, std::int64_t n_samples) {
  return evaluate_generator(m.teacher, m, ds, n_samples);
}

std::string metrics_line(std::int64_t step, std::int64_t epoch, double lr, const LossReport& r) {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["epoch"] = epoch;
  j["lr"] = lr;
  j["gan_d"] = r.gan_d;
  j["gan_g_teacher"] = r.gan_g_teacher;
  j["gan_g_student"] = r.gan_g_student;
  j["fea"] = r.fea;
  j["sty"] = r.sty;
  j["per"] = r.per;
  j["dcd"] = r.dcd;
  j["total_student"] = r.total_student;
  return j.dump();
}

FitResult fit(const RunConfig& cfg_in, const FitOptions& opts) {
  RunConfig cfg = cfg_in;
  cfg.validate();
  if (cfg.fid_samples > cfg.data.n_eval) throw ConfigError("fid_samples exceeds n_eval");
  const Dataset ds = load_run_dataset(cfg);
  const fs::path run_dir = cfg.out_dir;

  Models m = build_models(cfg);
  TrainState state = init_state(m);
  if (opts.resume) {
    const auto ck_dir = latest_checkpoint(run_dir);
    if (!ck_dir) throw ConfigError("no checkpoint to resume from in " + run_dir.string());
    Checkpoint ck = load_checkpoint(*ck_dir);
    RunConfig a = ck.config, b = cfg;
    a.out_dir = b.out_dir = "";
    if (a.to_text() != b.to_text()) throw ConfigError("resume config differs from the checkpointed config");
    m = std::move(ck.models);
    state = std::move(ck.state);
  }

  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) throw IoError("cannot create run directory " + run_dir.string() + ": " + ec.message());
  write_text(run_dir / "config.txt", cfg.to_text());

  const fs::path metrics_file = run_dir / "metrics.jsonl";
  const fs::path eval_file = run_dir / "eval.jsonl";
  if (opts.resume) {
    truncate_log(metrics_file, state.step);
    truncate_log(eval_file, state.step);
  } else {
    write_text(metrics_file, "");
    write_text(eval_file, "");
  }
  std::ofstream metrics(metrics_file, std::ios::app);
  std::ofstream evals(eval_file, std::ios::app);
  if (!metrics || !evals) throw IoError("cannot open metric logs in " + run_dir.string());

  const std::size_t n_train = ds.train.a.size();
  const std::size_t nb = batches_per_epoch(n_train, cfg.hp.batch_size);
  const std::uint64_t shuffle_a = derive_seed(cfg.seed.value, "shuffle");
  const std::uint64_t shuffle_b = ds.paired ? shuffle_a : derive_seed(cfg.seed.value, "shuffle_b");

  FitResult result;
  result.metrics_file = metrics_file;

  auto run_eval = [&](std::int64_t step) {
    FidReport student = evaluate_student(m, ds, cfg.fid_samples);
    FidReport teacher = evaluate_teacher(m, ds, cfg.fid_samples);
    nlohmann::ordered_json j;
    j["step"] = step;
    j["desk_fid"] = student.desk_fid;
    j["teacher_desk_fid"] = teacher.desk_fid;
    j["n_samples"] = student.n_samples;
    j["embedder_digest"] = student.embedder_digest;
    evals << j.dump() << "\n";
    evals.flush();
    const Tensor probe = ds.eval.a.front();
    dump_generator_state(m.student.model, m.student.params, m.student_bank.model, m.student_bank.params,
                         m.taps.generator, probe, run_dir / "samples", step, "student");
    dump_generator_state(m.teacher.model, m.teacher.params, m.teacher_bank.model, m.teacher_bank.params,
                         m.taps.generator, probe, run_dir / "samples", step, "teacher");
    result.final_fid = student;
    result.final_teacher_fid = teacher;
  };

  bool stopped = false;
  while (state.epoch < cfg.hp.epochs && !stopped) {
    const auto order_a = epoch_order(n_train, shuffle_a, state.epoch);
    const auto order_b = epoch_order(ds.train.b.size(), shuffle_b, state.epoch);
    const double lr = lr_at_epoch(static_cast<double>(state.epoch), cfg.hp);
    while (state.batch_in_epoch < static_cast<std::int64_t>(nb)) {
      const auto b = static_cast<std::size_t>(state.batch_in_epoch);
      const Tensor bx = gather_batch(ds.train.a, order_a, b, cfg.hp.batch_size);
      const Tensor by = gather_batch(ds.train.b, order_b, b, cfg.hp.batch_size);
      const LossReport r = train_step(state, bx, by, m, cfg.hp, lr);
      check_frozen(m, state);
      state.step += 1;
      state.batch_in_epoch += 1;
      if (state.step % cfg.log_every == 0) {
        metrics << metrics_line(state.step, state.epoch, lr, r) << "\n";
        metrics.flush();
      }
      if (opts.on_step) opts.on_step(state.step, r);
      if (cfg.eval_every > 0 && state.step % cfg.eval_every == 0) run_eval(state.step);
      if (cfg.checkpoint_every > 0 && state.step % cfg.checkpoint_every == 0) {
        save_checkpoint(state, m, cfg, checkpoint_dir(run_dir, state.step));
      }
      if (opts.stop_after > 0 && state.step >= opts.stop_after) {
        stopped = true;
        break;
      }
    }
    if (!stopped) {
      state.epoch += 1;
      state.batch_in_epoch = 0;
    }
  }

  if (!stopped && !(cfg.eval_every > 0 && state.step % cfg.eval_every == 0 && state.step > 0)) run_eval(state.step);
  result.steps = state.step;
  result.final_checkpoint = checkpoint_dir(run_dir, state.step);
  if (!fs::exists(result.final_checkpoint / "manifest.txt")) save_checkpoint(state, m, cfg, result.final_checkpoint);
  result.final_digest = models_digest(m);
  return result;
}

}  // namespace dcdgan
