#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dcdgan/config.hpp"

namespace dcdgan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitIo = 4;

/// Entry point shared by the binary and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// One ablation row: a loss combination plus key=value overrides.
struct AblationRow {
  std::string combo;
  LossSet loss_set;
  std::vector<std::pair<std::string, std::string>> overrides;

  std::string overrides_str() const;
};

/// The seven non-empty {per, dcd, gan} combinations, in table order.
std::vector<AblationRow> loss_grid();
/// One row per value of `key`, all losses on.
std::vector<AblationRow> lambda_sweep(const std::string& key, const std::vector<std::string>& values);

struct AblationResult {
  AblationRow row;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  double desk_fid = 0.0;
  std::string status;
};

std::string ablation_csv(const std::vector<AblationResult>& results);
std::string ablation_table(const std::vector<AblationResult>& results);

/// Numeric series of a JSONL log keyed by field name, in file order.
/// Throws ValidationError naming the line on malformed input and on an empty file.
std::map<std::string, std::vector<std::pair<double, double>>> read_series(const std::filesystem::path& file);

/// Self-contained SVG line plot of one series.
std::string render_svg(const std::string& title, const std::vector<std::pair<double, double>>& points);

}  // namespace dcdgan::cli
