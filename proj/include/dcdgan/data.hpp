#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dcdgan/config.hpp"
#include "dcdgan/tensor.hpp"

namespace dcdgan {

struct DatasetSpec {
  Task task = Task::paired_edges2blobs;
  int resolution = 64;
  int n_train = 64;
  int n_eval = 32;
  RngSeed seed{0};
  /// Hue shift (degrees) of domain B relative to domain A for the unpaired task.
  double hue_offset = 180.0;
  std::string folder_a;
  std::string folder_b;
  bool paired = true;

  static DatasetSpec from_config(const RunConfig& cfg);
  /// One `key = value` line per field.
  std::string echo() const;
  void validate() const;
};

/// Items are (1, 3, H, W) tensors in [-1, 1]. For paired data a[i] and b[i]
/// correspond; for unpaired data the two domains are independent.
struct Split {
  std::vector<Tensor> a;
  std::vector<Tensor> b;
};

struct Dataset {
  bool paired = true;
  Split train;
  Split eval;
};

/// Hue centre (degrees) of the domain-A palette in the unpaired task.
inline constexpr double kDomainAHue = 30.0;

/// Edge maps -> filled colour scenes. x is +1 on object boundaries, -1
/// elsewhere (all three channels equal); y is the coloured scene.
Split gen_paired_split(int resolution, int count, std::uint64_t seed);

/// The same scene family under two disjoint hue palettes.
Split gen_unpaired_split(int resolution, int count, std::uint64_t seed, double hue_offset);

/// Binary edge map of a label image: +1 where a 4-neighbour has a different
/// label. Labels are row-major, size resolution^2.
Tensor edge_map(const std::vector<int>& labels, int resolution);

/// Decodes every *.png in lexicographic order, resizes bilinearly to
/// `resolution` and maps [0, 255] to [-1, 1].
std::vector<Tensor> load_image_folder(const std::filesystem::path& dir, int resolution);

/// Builds train/eval splits for any task; bit-identical for identical specs.
Dataset make_dataset(const DatasetSpec& spec);

/// Writes `<dir>/{train,eval}/{a,b}/NNNNNN.png` plus `<dir>/manifest.txt`
/// (spec echo + content digest). Returns the content digest.
std::string write_dataset(const Dataset& ds, const DatasetSpec& spec, const std::filesystem::path& dir);

/// Reads a directory produced by write_dataset, checking the content digest.
Dataset read_dataset(const std::filesystem::path& dir, DatasetSpec* spec_out = nullptr);

/// SHA-256 over (relative path, bytes) of every dataset image in order.
std::string dataset_content_digest(const std::filesystem::path& dir);

/// Deterministic permutation of [0, n) for (shuffle_seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t shuffle_seed, std::int64_t epoch);

/// Number of full batches; the final partial batch is dropped.
std::size_t batches_per_epoch(std::size_t n, int batch_size);

/// All full batches of one epoch in shuffled order. Throws ConfigError if
/// batch_size < 1 or exceeds the item count.
std::vector<Tensor> batch_iterator(std::span<const Tensor> items, int batch_size, std::uint64_t shuffle_seed,
                                   std::int64_t epoch);

/// Stacks items[order[b * batch_size + j]] for j in [0, batch_size).
Tensor gather_batch(std::span<const Tensor> items, const std::vector<std::size_t>& order, std::size_t batch_index,
                    int batch_size);

/// Circular mean hue (degrees in [0, 360)) over pixels with saturation above
/// `min_saturation`.
double mean_hue(std::span<const Tensor> images, double min_saturation = 0.3);

}  // namespace dcdgan
