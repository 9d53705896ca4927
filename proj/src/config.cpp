#include "dcdgan/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "dcdgan/errors.hpp"

namespace dcdgan {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string& key, const std::string&)> set;
};

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
#define DCD_REAL(name, member)                                                                        \
  t[name] = Field{[](const RunConfig& c) { return format_double(c.member); },                         \
                  [](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_double(k, v); }}
#define DCD_INT(name, member)                                                                         \
  t[name] = Field{[](const RunConfig& c) { return std::to_string(c.member); },                        \
                  [](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_int(k, v); }}
#define DCD_U64(name, member)                                                                         \
  t[name] = Field{[](const RunConfig& c) { return std::to_string(c.member); },                        \
                  [](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_u64(k, v); }}
#define DCD_STR(name, member)                                                                         \
  t[name] = Field{[](const RunConfig& c) { return c.member; },                                        \
                  [](RunConfig& c, const std::string&, const std::string& v) { c.member = v; }}
#define DCD_BOOL(name, member)                                                                        \
  t[name] = Field{[](const RunConfig& c) { return std::string(c.member ? "true" : "false"); },        \
                  [](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_bool(k, v); }}
#define DCD_LIST(name, member)                                                                        \
  t[name] = Field{[](const RunConfig& c) { return format_int_list(c.member); },                       \
                  [](RunConfig& c, const std::string&, const std::string& v) { c.member = parse_int_list(v); }}

    DCD_REAL("lambda_dcd", hp.lambda_dcd);
    DCD_REAL("lambda_fea", hp.lambda_fea);
    DCD_REAL("lambda_sty", hp.lambda_sty);
    DCD_REAL("lambda_stu", hp.lambda_stu);
    DCD_REAL("lambda_fea_dis", hp.lambda_fea_dis);
    DCD_REAL("lr_initial", hp.lr_initial);
    DCD_INT("epochs", hp.epochs);
    DCD_INT("batch_size", hp.batch_size);
    DCD_REAL("adam_beta1", hp.adam_beta1);
    DCD_REAL("adam_beta2", hp.adam_beta2);
    DCD_BOOL("teacher_distill_grad", hp.teacher_distill_grad);
    t["gan_variant"] = Field{[](const RunConfig& c) { return to_string(c.hp.gan_variant); },
                             [](RunConfig& c, const std::string&, const std::string& v) {
                               c.hp.gan_variant = parse_gan_variant(v);
                             }};
    t["distance_variant"] = Field{[](const RunConfig& c) { return to_string(c.hp.distance_variant); },
                                  [](RunConfig& c, const std::string&, const std::string& v) {
                                    c.hp.distance_variant = parse_distance_variant(v);
                                  }};
    t["loss_set"] = Field{[](const RunConfig& c) { return c.hp.loss_set.str(); },
                          [](RunConfig& c, const std::string&, const std::string& v) {
                            c.hp.loss_set = LossSet::parse(v);
                          }};
    t["adversarial_objective"] = Field{
        [](const RunConfig& c) {
          return std::string(c.hp.adversarial_objective == AdversarialObjective::plain ? "plain" : "collaborative");
        },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "plain") {
            c.hp.adversarial_objective = AdversarialObjective::plain;
          } else if (v == "collaborative") {
            c.hp.adversarial_objective = AdversarialObjective::collaborative;
          } else {
            throw ConfigError("key '" + k + "': expected collaborative|plain, got '" + v + "'");
          }
        }};
    t["update_mode"] = Field{
        [](const RunConfig& c) { return std::string(c.hp.update_mode == UpdateMode::sequential ? "sequential" : "combined"); },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "sequential") {
            c.hp.update_mode = UpdateMode::sequential;
          } else if (v == "combined") {
            c.hp.update_mode = UpdateMode::combined;
          } else {
            throw ConfigError("key '" + k + "': expected combined|sequential, got '" + v + "'");
          }
        }};

    DCD_INT("base_width", generator.base_width);
    DCD_INT("n_resblocks", generator.n_resblocks);
    t["width_factor"] = Field{[](const RunConfig& c) { return c.student_width.str(); },
                              [](RunConfig& c, const std::string&, const std::string& v) {
                                c.student_width = WidthFactor::parse(v);
                              }};
    DCD_LIST("disc_widths", discriminator.widths);
    DCD_LIST("extractor_widths", extractor.widths);
    DCD_U64("extractor_seed", extractor.seed);
    DCD_REAL("extractor_gain", extractor.init_gain);
    t["extractor_weights"] = Field{[](const RunConfig& c) { return c.extractor.path; },
                                   [](RunConfig& c, const std::string&, const std::string& v) {
                                     c.extractor.path = v;
                                     c.extractor.source = v.empty() ? FeatureExtractorSpec::Source::fixed_random
                                                                    : FeatureExtractorSpec::Source::file;
                                   }};
    DCD_LIST("embedder_widths", embedder.widths);
    DCD_U64("embedder_seed", embedder.seed);
    DCD_LIST("generator_taps", taps.generator);
    DCD_LIST("discriminator_taps", taps.discriminator);
    DCD_LIST("extractor_taps", taps.extractor);

    t["task"] = Field{[](const RunConfig& c) { return to_string(c.data.task); },
                      [](RunConfig& c, const std::string&, const std::string& v) { c.data.task = parse_task(v); }};
    DCD_INT("resolution", data.resolution);
    DCD_INT("n_train", data.n_train);
    DCD_INT("n_eval", data.n_eval);
    DCD_STR("dataset_dir", data.dataset_dir);
    DCD_STR("folder_a", data.folder_a);
    DCD_STR("folder_b", data.folder_b);
    DCD_BOOL("paired", data.paired);
    DCD_REAL("hue_offset", data.hue_offset);

    t["seed"] = Field{[](const RunConfig& c) { return std::to_string(c.seed.value); },
                      [](RunConfig& c, const std::string& k, const std::string& v) { c.seed.value = parse_u64(k, v); }};
    DCD_STR("out_dir", out_dir);
    DCD_INT("eval_every", eval_every);
    DCD_INT("checkpoint_every", checkpoint_every);
    DCD_INT("fid_samples", fid_samples);
    DCD_INT("log_every", log_every);
    DCD_STR("teacher_checkpoint", teacher_checkpoint);
#undef DCD_REAL
#undef DCD_INT
#undef DCD_U64
#undef DCD_STR
#undef DCD_BOOL
#undef DCD_LIST
    return t;
  }();
  return table;
}

}  // namespace

LossSet LossSet::parse(const std::string& text) {
  LossSet s{false, false, false, false};
  std::stringstream ss(text);
  std::string item;
  bool any = false;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    any = true;
    if (item == "per") {
      s.per = true;
    } else if (item == "dcd") {
      s.dcd = true;
    } else if (item == "gan") {
      s.gan = true;
    } else if (item == "fitnet") {
      s.fitnet = true;
    } else {
      throw ConfigError("unknown loss term '" + item + "' (valid: per, dcd, gan, fitnet)");
    }
  }
  if (!any) throw ConfigError("loss_set must name at least one term");
  return s;
}

std::string LossSet::str() const {
  std::vector<std::string> parts;
  if (per) parts.emplace_back("per");
  if (dcd) parts.emplace_back("dcd");
  if (gan) parts.emplace_back("gan");
  if (fitnet) parts.emplace_back("fitnet");
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out;
}

void HyperParams::validate() const {
  for (auto [name, v] : {std::pair{"lambda_dcd", lambda_dcd}, std::pair{"lambda_fea", lambda_fea},
                         std::pair{"lambda_sty", lambda_sty}, std::pair{"lambda_stu", lambda_stu},
                         std::pair{"lambda_fea_dis", lambda_fea_dis}}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be a finite value >= 0");
  }
  if (!(lr_initial > 0.0)) throw ConfigError("lr_initial must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : fields()) out.push_back(k);
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(*this, key, value);
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  for (const auto& [k, f] : fields()) os << k << " = " << f.get(*this) << "\n";
  return os.str();
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot read config file " + file.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

TapSpec RunConfig::resolved_taps() const {
  TapSpec t = taps;
  if (t.generator.empty()) t.generator = Generator(generator).default_taps();
  if (t.discriminator.empty()) t.discriminator = Discriminator(discriminator).default_taps();
  if (t.extractor.empty()) {
    for (int i = 0; i < static_cast<int>(extractor.widths.size()); ++i) t.extractor.push_back(i);
  }
  return t;
}

void RunConfig::validate() const {
  hp.validate();
  if (data.resolution < 4 || data.resolution % 4 != 0) throw ConfigError("resolution must be a positive multiple of 4");
  if (data.n_train < 1 || data.n_eval < 1) throw ConfigError("n_train and n_eval must be >= 1");
  if (hp.batch_size > data.n_train) throw ConfigError("batch_size exceeds n_train");
  if (fid_samples < 2) throw ConfigError("fid_samples must be >= 2");
  if (eval_every < 0 || checkpoint_every < 0 || log_every < 1) throw ConfigError("intervals must be non-negative");
  if (data.task == Task::folder && (data.folder_a.empty() || data.folder_b.empty()) && data.dataset_dir.empty()) {
    throw ConfigError("task folder requires folder_a and folder_b");
  }
  const Generator teacher(generator);
  const Generator student(student_spec());
  const Discriminator disc(discriminator);
  const FeatureExtractor extractor_model(extractor);
  const FeatureExtractor embedder_model(embedder);
  const TapSpec t = resolved_taps();
  validate_taps(t.generator, teacher.num_layers(), "generator_taps", false);
  validate_taps(t.discriminator, disc.num_blocks(), "discriminator_taps", false);
  validate_taps(t.extractor, extractor_model.num_blocks(), "extractor_taps", false);
  // Dry-run the shape algebra so undersized inputs fail before any compute.
  teacher.describe(data.resolution, data.resolution);
  disc.describe(data.resolution, data.resolution);
  extractor_model.describe(data.resolution, data.resolution);
  embedder_model.describe(data.resolution, data.resolution);
}

std::string to_string(GanVariant v) {
  switch (v) {
    case GanVariant::vanilla: return "vanilla";
    case GanVariant::nonsaturating: return "nonsaturating";
    case GanVariant::least_squares: return "least_squares";
  }
  return "?";
}

std::string to_string(DistanceVariant v) { return v == DistanceVariant::l1 ? "l1" : "l2"; }

std::string to_string(Task t) {
  switch (t) {
    case Task::paired_edges2blobs: return "paired_edges2blobs";
    case Task::unpaired_palette_shift: return "unpaired_palette_shift";
    case Task::folder: return "folder";
  }
  return "?";
}

GanVariant parse_gan_variant(const std::string& s) {
  if (s == "vanilla") return GanVariant::vanilla;
  if (s == "nonsaturating") return GanVariant::nonsaturating;
  if (s == "least_squares") return GanVariant::least_squares;
  throw ConfigError("unknown gan_variant '" + s + "' (valid: vanilla, nonsaturating, least_squares)");
}

DistanceVariant parse_distance_variant(const std::string& s) {
  if (s == "l1") return DistanceVariant::l1;
  if (s == "l2") return DistanceVariant::l2;
  throw ConfigError("unknown distance_variant '" + s + "' (valid: l1, l2)");
}

Task parse_task(const std::string& s) {
  if (s == "paired_edges2blobs") return Task::paired_edges2blobs;
  if (s == "unpaired_palette_shift") return Task::unpaired_palette_shift;
  if (s == "folder") return Task::folder;
  throw ConfigError("unknown task '" + s + "' (valid: paired_edges2blobs, unpaired_palette_shift, folder)");
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_int("list", item));
  }
  return out;
}

std::string format_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

}  // namespace dcdgan
