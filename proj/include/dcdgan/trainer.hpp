#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "dcdgan/config.hpp"
#include "dcdgan/data.hpp"
#include "dcdgan/eval.hpp"
#include "dcdgan/losses.hpp"
#include "dcdgan/nets.hpp"

namespace dcdgan {

/// Every network of a run. The teacher bank, extractor and embedder are frozen.
struct Models {
  Built<Generator> teacher;
  Built<Generator> student;
  Built<Discriminator> disc;
  Built<ProjectionBank> teacher_bank;
  Built<ProjectionBank> student_bank;
  /// Student-to-teacher 1x1 adapter for the per-pixel baseline.
  Built<ProjectionBank> adapter;
  Built<FeatureExtractor> extractor;
  Built<FeatureExtractor> embedder;
  TapSpec taps;

  /// Trainable/checkpointed parameter sets by name.
  std::map<std::string, ParameterSet*> checkpointed();
  std::map<std::string, const ParameterSet*> checkpointed() const;
};

/// Seeds one independent init stream per network from cfg.seed.
Models build_models(const RunConfig& cfg);

struct TrainState {
  std::int64_t step = 0;
  std::int64_t epoch = 0;
  std::int64_t batch_in_epoch = 0;
  /// Adam moments keyed by model name (teacher, student, student_bank, adapter, disc).
  std::map<std::string, AdamState> optim;
  /// Digests of frozen groups recorded at initialization.
  std::map<std::string, std::string> frozen_digests;
};

TrainState init_state(const Models& m);

/// Throws DivergenceError if any frozen group's digest changed.
void check_frozen(const Models& m, const TrainState& s);

/// lr_initial for the first half of training, then linear decay reaching 0 at
/// hp.epochs. Throws ConfigError outside [0, hp.epochs].
double lr_at_epoch(double epoch, const HyperParams& hp);

/// One alternating update:
///  1. discriminator step on real y, detached teacher fakes, and detached
///     student fakes weighted by lambda_stu;
///  2. generator step with the discriminator held constant: the teacher
///     minimizes its adversarial loss; the student and its bank minimize the
///     active student objective with the teacher branch stop-gradded.
/// Throws DivergenceError naming the first non-finite term.
LossReport train_step(TrainState& state, const Tensor& batch_x, const Tensor& batch_y, Models& m,
                      const HyperParams& hp, double lr);

/// Checkpoint layout: `config.txt` (config echo), `state.txt`, one weights
/// directory per model under `weights/` and per optimizer moment under
/// `optimizer/`, and `manifest.txt` listing every component with its digest.
void save_checkpoint(const TrainState& state, const Models& m, const RunConfig& cfg, const std::filesystem::path& dir);

struct Checkpoint {
  RunConfig config;
  Models models;
  TrainState state;
};

/// Throws CorruptionError on a missing manifest entry or digest mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// Newest `step_*` checkpoint under `<run_dir>/checkpoints`, if any.
std::optional<std::filesystem::path> latest_checkpoint(const std::filesystem::path& run_dir);

/// Digest over every checkpointed parameter set.
std::string models_digest(const Models& m);

struct FitOptions {
  /// Continue from the latest checkpoint under `<out_dir>/checkpoints`.
  bool resume = false;
  /// Stop after this many total steps (0 = run all epochs). The stopped run
  /// writes a checkpoint, so it can be resumed.
  std::int64_t stop_after = 0;
  /// Per-step observer (step, report).
  std::function<void(std::int64_t, const LossReport&)> on_step;
};

struct FitResult {
  std::int64_t steps = 0;
  std::filesystem::path final_checkpoint;
  std::filesystem::path metrics_file;
  std::optional<FidReport> final_fid;
  std::optional<FidReport> final_teacher_fid;
  std::string final_digest;
};

/// Loads or generates the dataset described by `cfg`.
Dataset load_run_dataset(const RunConfig& cfg);

/// Runs epochs x batches of train_step, logging one JSON line per step to
/// `<out_dir>/metrics.jsonl` and desk-FID lines to `<out_dir>/eval.jsonl`.
FitResult fit(const RunConfig& cfg, const FitOptions& opts = {});

/// Student desk-FID on the evaluation split.
FidReport evaluate_student(const Models& m, const Dataset& ds, std::int64_t n_samples);
FidReport evaluate_teacher(const Models& m, const Dataset& ds, std::int64_t n_samples);

/// Metrics JSON line for one step.
std::string metrics_line(std::int64_t step, std::int64_t epoch, double lr, const LossReport& r);

}  // namespace dcdgan
