#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dcdgan/nets.hpp"
#include "dcdgan/rng.hpp"

namespace dcdgan {

enum class GanVariant { vanilla, nonsaturating, least_squares };
enum class DistanceVariant { l1, l2 };
/// collaborative: the discriminator also judges student fakes, weighted by
/// lambda_stu. plain: it only sees teacher fakes.
enum class AdversarialObjective { collaborative, plain };
enum class UpdateMode { combined, sequential };

/// Which student loss terms are active. `fitnet` is the per-pixel
/// feature-distillation baseline.
struct LossSet {
  bool per = true;
  bool dcd = true;
  bool gan = true;
  bool fitnet = false;

  static LossSet parse(const std::string& text);
  std::string str() const;
  bool operator==(const LossSet&) const = default;
};

struct HyperParams {
  double lambda_dcd = 1.0;
  double lambda_fea = 10.0;
  double lambda_sty = 1e4;
  double lambda_stu = 1.0;
  double lambda_fea_dis = 1.0;
  double lr_initial = 2e-4;
  int epochs = 1;
  int batch_size = 1;
  GanVariant gan_variant = GanVariant::nonsaturating;
  DistanceVariant distance_variant = DistanceVariant::l1;
  LossSet loss_set;
  AdversarialObjective adversarial_objective = AdversarialObjective::collaborative;
  /// Literal reading of the joint min over both generators: the teacher also
  /// receives gradients from the distillation terms.
  bool teacher_distill_grad = false;
  UpdateMode update_mode = UpdateMode::combined;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;

  /// Throws ConfigError if any lambda is negative, lr <= 0, or counts < 1.
  void validate() const;
};

struct TapSpec {
  std::vector<int> generator;
  std::vector<int> discriminator;
  std::vector<int> extractor;
};

enum class Task { paired_edges2blobs, unpaired_palette_shift, folder };

struct DataConfig {
  Task task = Task::paired_edges2blobs;
  int resolution = 64;
  int n_train = 64;
  int n_eval = 128;
  /// Directory written by gen-data; when set, data is read from it instead of
  /// being generated in memory.
  std::string dataset_dir;
  std::string folder_a;
  std::string folder_b;
  bool paired = true;
  double hue_offset = 180.0;
};

/// Everything a run needs. Serialized as `key = value` lines; see
/// RunConfig::keys() for the full list.
struct RunConfig {
  HyperParams hp;
  GeneratorSpec generator;
  WidthFactor student_width{1, 4};
  DiscriminatorSpec discriminator;
  /// The gain puts lambda_fea * L_fea and lambda_sty * L_sty on the same scale
  /// at initialization on the desk datasets.
  FeatureExtractorSpec extractor{{8, 16, 32, 64}, FeatureExtractorSpec::Source::fixed_random, 1234, "", 0.001};
  FeatureExtractorSpec embedder{{8, 16, 32, 64}, FeatureExtractorSpec::Source::fixed_random, 4321, "", 1.0};
  /// Empty lists mean "use the model's default taps".
  TapSpec taps;
  DataConfig data;
  RngSeed seed{0};
  std::string out_dir = "runs/default";
  int eval_every = 0;
  int checkpoint_every = 0;
  int fid_samples = 128;
  int log_every = 1;
  std::string teacher_checkpoint;

  /// Applies one `key=value` assignment; unknown keys throw ConfigError.
  void set(const std::string& key, const std::string& value);
  /// Canonical echo: one `key = value` line per known key, sorted by key.
  std::string to_text() const;
  /// Throws ConfigError on any inconsistency (ranges, taps, widths).
  void validate() const;

  /// Taps with defaults resolved against the configured architectures.
  TapSpec resolved_taps() const;
  GeneratorSpec student_spec() const { return generator.with_width(student_width); }

  static std::vector<std::string> keys();
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& file);
};

std::string to_string(GanVariant v);
std::string to_string(DistanceVariant v);
std::string to_string(Task t);
GanVariant parse_gan_variant(const std::string& s);
DistanceVariant parse_distance_variant(const std::string& s);
Task parse_task(const std::string& s);

std::vector<int> parse_int_list(const std::string& s);
std::string format_int_list(const std::vector<int>& v);
/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace dcdgan
