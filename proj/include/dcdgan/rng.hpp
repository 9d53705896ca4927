#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace dcdgan {

struct RngSeed {
  std::uint64_t value = 0;
};

/// Deterministic random stream. Uniform and normal draws are computed from the
/// raw 64-bit engine output so sequences do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal(double mean = 0.0, double stddev = 1.0);

  std::string save_state() const;
  void restore_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

/// Stream for a named purpose ("data", "init", "shuffle", ...). Different
/// purposes or seeds give unrelated sequences.
Rng seeded_rng(RngSeed seed, std::string_view purpose);

/// Mixes a seed with a purpose label (splitmix64 over FNV-1a of the label).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose);

}  // namespace dcdgan
