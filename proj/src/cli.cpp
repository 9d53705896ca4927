#include "dcdgan/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dcdgan/data.hpp"
#include "dcdgan/errors.hpp"
#include "dcdgan/eval.hpp"
#include "dcdgan/trainer.hpp"

namespace dcdgan::cli {

namespace fs = std::filesystem;

namespace {

struct ConfigArgs {
  std::string config_file;
  std::vector<std::string> sets;
};

void add_config_args(CLI::App* app, ConfigArgs& a) {
  app->add_option("--config", a.config_file, "Config file of key = value lines");
  app->add_option("--set", a.sets, "Override one key: --set key=value (repeatable)");
}

void apply_sets(RunConfig& cfg, const std::vector<std::string>& sets) {
  for (const std::string& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
}

RunConfig make_config(const ConfigArgs& a, const RunConfig& base = {}) {
  RunConfig cfg = a.config_file.empty() ? base : RunConfig::load(a.config_file);
  apply_sets(cfg, a.sets);
  return cfg;
}

void write_file(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
    if (ec) throw IoError("cannot create " + file.parent_path().string() + ": " + ec.message());
  }
  std::ofstream os(file, std::ios::binary);
  if (!os) throw IoError("cannot write " + file.string());
  os << text;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string multiplier(double ratio) {
  std::string s = fmt("%.1f", ratio);
  if (s.size() > 2 && s.substr(s.size() - 2) == ".0") s.resize(s.size() - 2);
  return s + "×";
}

// ------------------------------------------------------------------ gen-data

struct GenDataArgs {
  ConfigArgs cfg;
  std::string task, out, folder_a, folder_b;
  int n = -1, n_eval = -1, resolution = -1;
  long long seed = -1;
  double hue_offset = -1;
};

int cmd_gen_data(const GenDataArgs& a, std::ostream& out) {
  RunConfig cfg = make_config(a.cfg);
  if (!a.task.empty()) cfg.set("task", a.task);
  if (a.n >= 0) cfg.data.n_train = a.n;
  if (a.n_eval >= 0) cfg.data.n_eval = a.n_eval;
  if (a.resolution >= 0) cfg.data.resolution = a.resolution;
  if (a.seed >= 0) cfg.seed.value = static_cast<std::uint64_t>(a.seed);
  if (a.hue_offset >= 0) cfg.data.hue_offset = a.hue_offset;
  if (!a.folder_a.empty()) cfg.data.folder_a = a.folder_a;
  if (!a.folder_b.empty()) cfg.data.folder_b = a.folder_b;
  const DatasetSpec spec = DatasetSpec::from_config(cfg);
  spec.validate();
  const Dataset ds = make_dataset(spec);
  const std::string digest = write_dataset(ds, spec, a.out);
  out << "wrote " << ds.train.a.size() << " train and " << ds.eval.a.size() << " eval items to " << a.out << "\n"
      << "content_digest " << digest << "\n";
  return kExitOk;
}

// --------------------------------------------------------------------- train

struct TrainArgs {
  ConfigArgs cfg;
  std::string loss_set, resume, out;
  long long max_steps = 0;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  RunConfig base;
  if (!a.resume.empty()) {
    const fs::path echo = fs::path(a.resume) / "config.txt";
    if (!fs::exists(echo)) throw ConfigError("no run to resume in " + a.resume);
    base = RunConfig::load(echo);
  }
  RunConfig cfg = make_config(a.cfg, base);
  if (!a.loss_set.empty()) cfg.hp.loss_set = LossSet::parse(a.loss_set);
  if (!a.out.empty()) cfg.out_dir = a.out;
  if (!a.resume.empty()) cfg.out_dir = a.resume;
  cfg.validate();
  DatasetSpec::from_config(cfg).validate();

  out << cfg.to_text();
  FitOptions opts;
  opts.resume = !a.resume.empty();
  opts.stop_after = a.max_steps;
  const FitResult r = fit(cfg, opts);
  out << "steps " << r.steps << "\n";
  if (r.final_fid) {
    out << "desk_fid " << format_double(r.final_fid->desk_fid) << " (embedder " << r.final_fid->embedder_digest.substr(0, 12)
        << ")\n";
  }
  out << "checkpoint " << r.final_checkpoint.string() << "\n";
  return kExitOk;
}

// -------------------------------------------------------------------- ablate

struct AblateArgs {
  ConfigArgs cfg;
  std::vector<std::string> grids;
  std::vector<std::string> sweeps;
  std::string out;
  long long max_steps = 0;
};

int cmd_ablate(const AblateArgs& a, std::ostream& out) {
  RunConfig base = make_config(a.cfg);
  base.validate();
  std::vector<AblationRow> rows;
  std::vector<std::string> grids = a.grids;
  if (grids.empty() && a.sweeps.empty()) grids = {"losses", "lambda_dcd", "lambda_stu"};
  for (const std::string& g : grids) {
    std::vector<AblationRow> add;
    if (g == "losses") {
      add = loss_grid();
    } else if (g == "lambda_dcd") {
      add = lambda_sweep("lambda_dcd", {"0.1", "1", "5", "10"});
    } else if (g == "lambda_stu") {
      add = lambda_sweep("lambda_stu", {"0.1", "1", "10"});
    } else {
      throw ConfigError("unknown grid '" + g + "' (valid: losses, lambda_dcd, lambda_stu)");
    }
    rows.insert(rows.end(), add.begin(), add.end());
  }
  for (const std::string& s : a.sweeps) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--sweep expects key=v1,v2,..., got '" + s + "'");
    std::vector<std::string> values;
    std::stringstream ss(s.substr(eq + 1));
    for (std::string v; std::getline(ss, v, ',');) values.push_back(v);
    if (values.empty()) throw ConfigError("--sweep " + s.substr(0, eq) + " has no values");
    const auto add = lambda_sweep(s.substr(0, eq), values);
    rows.insert(rows.end(), add.begin(), add.end());
  }
  if (rows.empty()) throw ConfigError("ablation grid is empty");

  // Validate every row before running any of them.
  std::vector<RunConfig> configs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    RunConfig c = base;
    c.hp.loss_set = rows[i].loss_set;
    for (const auto& [k, v] : rows[i].overrides) c.set(k, v);
    c.seed.value = base.seed.value + i;
    char name[32];
    std::snprintf(name, sizeof(name), "row_%02zu", i);
    c.out_dir = (fs::path(a.out) / name).string();
    c.validate();
    configs.push_back(c);
  }

  std::vector<AblationResult> results;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    AblationResult r{rows[i], configs[i].seed.value, 0, std::nan(""), "ok"};
    try {
      FitOptions opts;
      opts.stop_after = a.max_steps;
      opts.on_step = [&r](std::int64_t step, const LossReport&) { r.steps = step; };
      const FitResult fr = fit(configs[i], opts);
      r.steps = fr.steps;
      if (!fr.final_fid) {
        const Checkpoint ck = load_checkpoint(fr.final_checkpoint);
        r.desk_fid = evaluate_student(ck.models, load_run_dataset(configs[i]), configs[i].fid_samples).desk_fid;
      } else {
        r.desk_fid = fr.final_fid->desk_fid;
      }
    } catch (const DivergenceError& e) {
      r.status = std::string("diverged: ") + e.what();
    } catch (const std::exception& e) {
      r.status = std::string("failed: ") + e.what();
    }
    out << "row " << i << " [" << r.row.combo << (r.row.overrides.empty() ? "" : " " + r.row.overrides_str())
        << "] steps " << r.steps << " desk_fid " << format_double(r.desk_fid) << " " << r.status << "\n";
    out.flush();
    results.push_back(r);
  }
  write_file(fs::path(a.out) / "ablation.csv", ablation_csv(results));
  const std::string table = ablation_table(results);
  write_file(fs::path(a.out) / "ablation.txt", table);
  out << table;
  return kExitOk;
}

// ---------------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint, dataset, out;
  int n_samples = 0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  fs::path ck_dir = a.checkpoint;
  if (!fs::exists(ck_dir / "manifest.txt")) {
    const auto latest = latest_checkpoint(ck_dir);
    if (!latest) throw IoError("no checkpoint found at " + a.checkpoint);
    ck_dir = *latest;
  }
  const Checkpoint ck = load_checkpoint(ck_dir);
  const RunConfig& cfg = ck.config;
  Dataset ds;
  if (!a.dataset.empty()) {
    DatasetSpec spec;
    ds = read_dataset(a.dataset, &spec);
    if (spec.resolution != cfg.data.resolution) {
      throw ConfigError("dataset resolution " + std::to_string(spec.resolution) + " does not match checkpoint resolution " +
                        std::to_string(cfg.data.resolution));
    }
  } else {
    ds = load_run_dataset(cfg);
  }
  const std::int64_t n = a.n_samples > 0 ? a.n_samples : std::min<std::int64_t>(cfg.fid_samples, ds.eval.a.size());
  const FidReport fid = evaluate_student(ck.models, ds, n);
  nlohmann::ordered_json j;
  j["desk_fid"] = fid.desk_fid;
  j["n_samples"] = fid.n_samples;
  j["embedder_digest"] = fid.embedder_digest;
  j["checkpoint_digest"] = models_digest(ck.models);
  j["note"] = "desk-FID uses a small fixed random embedder; compare values only within the same embedder digest";
  j["student_params"] = nlohmann::json::parse(count_params(ck.models.student.model).to_json());
  j["student_macs"] = nlohmann::json::parse(count_macs(ck.models.student.model, cfg.data.resolution).to_json());
  const std::string text = j.dump(2) + "\n";
  if (!a.out.empty()) write_file(a.out, text);
  out << text;
  return kExitOk;
}

// --------------------------------------------------------------------- count

struct CountArgs {
  ConfigArgs cfg;
  int resolution = 0;
  bool layers = false;
  std::string json;
};

void print_layers(std::ostream& out, const ComplexityReport& r) {
  std::int64_t p = 0, m = 0;
  for (const LayerCost& l : r.layers) {
    out << "  " << std::left << std::setw(20) << l.name << std::setw(14) << l.op << std::right << std::setw(10)
        << l.params << std::setw(14) << l.macs << "\n";
    p += l.params;
    m += l.macs;
  }
  out << "  layer sum: params " << p << ", MACs " << m << "\n";
}

int cmd_count(const CountArgs& a, std::ostream& out) {
  RunConfig cfg = make_config(a.cfg);
  if (a.resolution > 0) cfg.data.resolution = a.resolution;
  cfg.validate();
  const int res = cfg.data.resolution;
  const Generator teacher(cfg.generator);
  const Generator student(cfg.student_spec());
  const ComplexityReport tp = count_params(teacher), sp = count_params(student);
  const ComplexityReport tm = count_macs(teacher, res), sm = count_macs(student, res);
  out << "teacher: params " << tp.total_params << ", MACs " << tm.total_macs << " @ " << res << "x" << res << "\n";
  out << "student (width " << cfg.student_width.str() << "): params " << sp.total_params << ", MACs "
      << sm.total_macs << " @ " << res << "x" << res << "\n";
  out << "params ≈ " << multiplier(static_cast<double>(tp.total_params) / sp.total_params) << "\n";
  out << "MACs ≈ " << multiplier(static_cast<double>(tm.total_macs) / sm.total_macs) << "\n";
  if (a.layers) {
    out << "teacher layers @ " << res << ":\n";
    print_layers(out, tm);
    out << "student layers @ " << res << ":\n";
    print_layers(out, sm);
  }
  if (!a.json.empty()) {
    nlohmann::ordered_json j;
    j["teacher_params"] = nlohmann::json::parse(tp.to_json());
    j["teacher_macs"] = nlohmann::json::parse(tm.to_json());
    j["student_params"] = nlohmann::json::parse(sp.to_json());
    j["student_macs"] = nlohmann::json::parse(sm.to_json());
    write_file(a.json, j.dump(2) + "\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------- plot

struct PlotArgs {
  std::vector<std::string> inputs;
  std::string out;
};

int cmd_plot(const PlotArgs& a, std::ostream& out) {
  std::vector<fs::path> files;
  for (const std::string& in : a.inputs) {
    const fs::path p = in;
    if (fs::is_directory(p)) {
      files.push_back(p / "metrics.jsonl");
      if (fs::exists(p / "eval.jsonl") && fs::file_size(p / "eval.jsonl") > 0) files.push_back(p / "eval.jsonl");
    } else {
      files.push_back(p);
    }
  }
  // Read everything first so a malformed input writes nothing.
  std::vector<std::pair<fs::path, std::map<std::string, std::vector<std::pair<double, double>>>>> all;
  for (const fs::path& f : files) all.emplace_back(f, read_series(f));
  for (const auto& [file, series] : all) {
    for (const auto& [name, points] : series) {
      const fs::path target = fs::path(a.out) / (file.stem().string() + "_" + name + ".svg");
      write_file(target, render_svg(file.stem().string() + ": " + name, points));
      out << "wrote " << target.string() << " (" << points.size() << " points)\n";
    }
  }
  return kExitOk;
}

}  // namespace

// ------------------------------------------------------------------ ablation

std::string AblationRow::overrides_str() const {
  std::string s;
  for (const auto& [k, v] : overrides) s += (s.empty() ? "" : ";") + k + "=" + v;
  return s;
}

std::vector<AblationRow> loss_grid() {
  const std::vector<std::string> combos{"per", "dcd", "gan", "per,dcd", "per,gan", "dcd,gan", "per,dcd,gan"};
  std::vector<AblationRow> rows;
  for (const std::string& c : combos) rows.push_back({c, LossSet::parse(c), {}});
  return rows;
}

std::vector<AblationRow> lambda_sweep(const std::string& key, const std::vector<std::string>& values) {
  std::vector<AblationRow> rows;
  for (const std::string& v : values) rows.push_back({"per,dcd,gan", LossSet::parse("per,dcd,gan"), {{key, v}}});
  return rows;
}

std::string ablation_csv(const std::vector<AblationResult>& results) {
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::string s = "combo,lambda_overrides,seed,steps,desk_fid,status\n";
  for (const AblationResult& r : results) {
    s += quote(r.row.combo) + "," + quote(r.row.overrides_str()) + "," + std::to_string(r.seed) + "," +
         std::to_string(r.steps) + "," + (std::isfinite(r.desk_fid) ? format_double(r.desk_fid) : "nan") + "," +
         quote(r.status) + "\n";
  }
  return s;
}

std::string ablation_table(const std::vector<AblationResult>& results) {
  std::ostringstream os;
  os << std::left << std::setw(7) << "L_per" << std::setw(7) << "L_dcd" << std::setw(7) << "L_gan" << std::setw(20)
     << "overrides" << std::right << std::setw(8) << "steps" << std::setw(12) << "desk-FID"
     << "  status\n";
  for (const AblationResult& r : results) {
    auto mark = [](bool on) { return on ? std::string("x") : std::string(""); };
    os << std::left << std::setw(7) << mark(r.row.loss_set.per) << std::setw(7) << mark(r.row.loss_set.dcd)
       << std::setw(7) << mark(r.row.loss_set.gan) << std::setw(20) << r.row.overrides_str() << std::right
       << std::setw(8) << r.steps << std::setw(12) << (std::isfinite(r.desk_fid) ? fmt("%.3f", r.desk_fid) : "-")
       << "  " << r.status << "\n";
  }
  os << "desk-FID uses a small fixed random embedder; only compare rows of this table.\n";
  return os.str();
}

// ---------------------------------------------------------------------- plot

std::map<std::string, std::vector<std::pair<double, double>>> read_series(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw IoError("cannot read " + file.string());
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::string line;
  int lineno = 0, records = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    const std::string where = file.string() + " line " + std::to_string(lineno);
    if (j.is_discarded() || !j.is_object()) throw ValidationError(where + ": not a JSON object");
    if (!j.contains("step") || !j["step"].is_number()) throw ValidationError(where + ": missing numeric 'step'");
    const double step = j["step"].get<double>();
    for (const auto& [k, v] : j.items()) {
      if (k == "step" || k == "epoch" || !v.is_number()) continue;
      series[k].emplace_back(step, v.get<double>());
    }
    ++records;
  }
  if (records == 0) throw ValidationError(file.string() + ": no records to plot");
  return series;
}

std::string render_svg(const std::string& title, const std::vector<std::pair<double, double>>& points) {
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const auto& [x, y] : points) {
    if (!std::isfinite(y)) continue;
    if (first) {
      x0 = x1 = x;
      y0 = y1 = y;
      first = false;
    }
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" font-family=\"sans-serif\" "
        "font-size=\"12\">\n"
     << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n"
     << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
     << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << fmt("%g", x0) << "</text>\n"
     << "<text x=\"" << W - R << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << fmt("%g", x1)
     << "</text>\n"
     << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">step</text>\n"
     << "<text x=\"" << L - 6 << "\" y=\"" << H - B << "\" text-anchor=\"end\">" << fmt("%.4g", y0) << "</text>\n"
     << "<text x=\"" << L - 6 << "\" y=\"" << T + 4 << "\" text-anchor=\"end\">" << fmt("%.4g", y1) << "</text>\n"
     << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (const auto& [x, y] : points) {
    if (std::isfinite(y)) os << fmt("%.2f", px(x)) << "," << fmt("%.2f", py(y)) << " ";
  }
  os << "\"/>\n</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------- main

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discriminator-cooperated distillation for image-to-image GANs, desk scale", "dcdgan"};
  app.require_subcommand(1);

  GenDataArgs gd;
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset folder with a manifest");
  add_config_args(gen, gd.cfg);
  gen->add_option("--task", gd.task, "paired_edges2blobs | unpaired_palette_shift | folder");
  gen->add_option("--n", gd.n, "Training items");
  gen->add_option("--n-eval", gd.n_eval, "Evaluation items");
  gen->add_option("--resolution", gd.resolution, "Image side length");
  gen->add_option("--seed", gd.seed, "Data seed");
  gen->add_option("--hue-offset", gd.hue_offset, "Domain B hue offset in degrees");
  gen->add_option("--folder-a", gd.folder_a, "Domain A image folder (task folder)");
  gen->add_option("--folder-b", gd.folder_b, "Domain B image folder (task folder)");
  gen->add_option("--out", gd.out, "Output folder")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train teacher, student and discriminator together");
  add_config_args(train, tr.cfg);
  train->add_option("--loss-set", tr.loss_set, "Active student losses, e.g. per,gan");
  train->add_option("--resume", tr.resume, "Run directory to continue from its last checkpoint");
  train->add_option("--out", tr.out, "Run directory");
  train->add_option("--max-steps", tr.max_steps, "Stop after this many total steps");

  AblateArgs ab;
  auto* ablate = app.add_subcommand("ablate", "Run loss-combination and lambda sweeps");
  add_config_args(ablate, ab.cfg);
  ablate->add_option("--grid", ab.grids, "losses | lambda_dcd | lambda_stu (repeatable; default all)");
  ablate->add_option("--sweep", ab.sweeps, "Custom sweep key=v1,v2,... (repeatable)");
  ablate->add_option("--max-steps", ab.max_steps, "Steps per row");
  ablate->add_option("--out", ab.out, "Output directory")->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Report student desk-FID and complexity for a checkpoint");
  eval->add_option("--checkpoint", ev.checkpoint, "Checkpoint or run directory")->required();
  eval->add_option("--dataset", ev.dataset, "Dataset folder from gen-data");
  eval->add_option("--n-samples", ev.n_samples, "Evaluation samples");
  eval->add_option("--out", ev.out, "Write the JSON report here too");

  CountArgs co;
  auto* count = app.add_subcommand("count", "Count parameters and MACs of teacher and student");
  add_config_args(count, co.cfg);
  count->add_option("--resolution", co.resolution, "Reference resolution for MACs");
  count->add_flag("--layers", co.layers, "Print the per-layer breakdown");
  count->add_option("--json", co.json, "Write full reports as JSON");

  PlotArgs pl;
  auto* plot = app.add_subcommand("plot", "Write one SVG curve per logged series");
  plot->add_option("inputs", pl.inputs, "metrics.jsonl, eval.jsonl or run directories")->required();
  plot->add_option("--out", pl.out, "Output directory")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gd, out);
    if (train->parsed()) return cmd_train(tr, out);
    if (ablate->parsed()) return cmd_ablate(ab, out);
    if (eval->parsed()) return cmd_eval(ev, out);
    if (count->parsed()) return cmd_count(co, out);
    if (plot->parsed()) return cmd_plot(pl, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    err << "diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitConfig;
}

}  // namespace dcdgan::cli
