#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "odegrow/cli/config.hpp"
#include "odegrow/core.hpp"
#include "odegrow/evaluate.hpp"

namespace odegrow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Runs the command line `args` (args[0] is the program name). Reports go to
/// `out`, diagnostics to `err`. Returns 0 on success, 1 for usage, input or
/// I/O errors, 2 for Diverged fits and NoUsableLesions.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "all" or a comma-separated list of model names. Throws
/// Error(UnknownModel) listing the valid names, Error(InvalidConfig) on
/// duplicates or an empty list.
[[nodiscard]] std::vector<ModelSpec> parse_model_list(const std::string& text);

/// Files written by the battle command.
void write_ranking_csv(std::ostream& out, const BattleReport& report);
void write_matchups_csv(std::ostream& out, const BattleReport& report);
void write_per_lesion_csv(std::ostream& out, const BattleReport& report);

/// Config file that reproduces the battle, plus a [run] record of the
/// inputs and lesion accounting.
void write_manifest(std::ostream& out, const std::filesystem::path& input, const BattleReport& report,
                    const BattleConfig& battle, unsigned threads);

/// `<stem>_truth.csv` next to `cohort_path`.
[[nodiscard]] std::filesystem::path truth_sidecar_path(const std::filesystem::path& cohort_path);

}  // namespace odegrow::cli
