#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dcdgan/params.hpp"

namespace dcdgan {

enum class Dtype { f32, f64 };

/// One `param` line of a weights manifest.
struct ManifestEntry {
  std::string path;
  Shape shape;
  bool frozen = false;
  std::string digest;
};

struct WeightsManifest {
  Dtype dtype = Dtype::f32;
  std::string set_digest;
  std::vector<ManifestEntry> entries;
};

/// Writes one raw little-endian array file per parameter (`<dir>/<path>.bin`)
/// and `<dir>/manifest.txt`:
///
///   # dcdgan weights v1
///   dtype f32|f64
///   set_digest <parameter_digest of the stored values>
///   param <path> <n> <c> <h> <w> <frozen> <tensor_digest>
///
/// Digests are taken over the values as stored (after float32 rounding), so a
/// reloaded set digests to `set_digest`.
void save_weights(const ParameterSet& params, const std::filesystem::path& dir, Dtype dtype);

WeightsManifest read_manifest(const std::filesystem::path& dir);

/// Loads and verifies every entry; throws CorruptionError on any missing file,
/// size mismatch, or digest mismatch.
ParameterSet load_weights(const std::filesystem::path& dir);

/// Rounds every value through float32.
ParameterSet round_to_f32(const ParameterSet& params);

}  // namespace dcdgan
