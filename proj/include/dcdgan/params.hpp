#pragma once

#include <map>
#include <string>
#include <vector>

#include "dcdgan/tape.hpp"

namespace dcdgan {

struct Parameter {
  Tensor value;
  /// Frozen parameters are never updated and always expose zero gradients.
  bool frozen = false;
};

/// Named parameter arrays, ordered by path.
class ParameterSet {
 public:
  void add(const std::string& path, Tensor value, bool frozen = false);
  bool contains(const std::string& path) const { return entries_.count(path) != 0; }
  const Parameter& at(const std::string& path) const;
  Parameter& at(const std::string& path);

  void freeze_all(bool frozen = true);
  /// Total number of scalar entries.
  std::int64_t scalar_count() const;
  std::size_t size() const { return entries_.size(); }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

 private:
  std::map<std::string, Parameter> entries_;
};

/// Gradient per parameter path (same shapes as the parameters).
using Gradients = std::map<std::string, Tensor>;

/// SHA-256 over the canonical serialization: for each path in order, the
/// UTF-8 path, a NUL byte, the four shape extents as little-endian int64, and
/// the values as little-endian IEEE-754 float64. Throws ValidationError
/// ("non-finite parameter") on NaN/Inf.
std::string parameter_digest(const ParameterSet& params);

/// Digest of a single named array under the same serialization.
std::string tensor_digest(const std::string& path, const Tensor& value);

/// SHA-256 hex of raw bytes.
std::string sha256_hex(std::string_view bytes);

enum class BindMode {
  /// Non-frozen parameters become gradient-tracking leaves.
  trainable,
  /// Every parameter enters the graph as a constant.
  constant,
};

/// Binds a ParameterSet's arrays onto a tape for one forward pass. Repeated
/// lookups of the same path reuse one leaf, so gradients from every use
/// accumulate in one place.
class ParamBinder {
 public:
  ParamBinder(Tape& tape, const ParameterSet& params, BindMode mode)
      : tape_(&tape), params_(&params), mode_(mode) {}

  Var operator()(const std::string& path);
  BindMode mode() const { return mode_; }
  Tape& tape() const { return *tape_; }

  /// Gradients from the tape's last backward pass, zero-filled for frozen,
  /// constant-bound, or unused parameters.
  Gradients gradients() const;

 private:
  Tape* tape_;
  const ParameterSet* params_;
  BindMode mode_;
  std::map<std::string, Var> bound_;
};

/// Adam moments for one parameter group.
struct AdamState {
  std::int64_t steps = 0;
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;
};

struct AdamConfig {
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// One decoupled-weight-decay Adam step over every non-frozen parameter.
/// Frozen parameters are skipped entirely.
void adam_step(ParameterSet& params, const Gradients& grads, AdamState& state, double lr,
               const AdamConfig& cfg = {});

}  // namespace dcdgan
