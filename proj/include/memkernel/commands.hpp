#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "memkernel/config.hpp"

namespace memkernel {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitCompatibility = 3,
  kExitNoConvergence = 4,
};

struct CommandFlags {
  std::optional<std::filesystem::path> out;  // overrides output.dir
  bool force = false;                        // run invert past a failed compatibility check
  bool twin = false;                         // invert: synthesize f from k_true in process
  std::optional<SignVariant> sign;
  FieldFormat field_format = FieldFormat::Long;  // u.csv and v.csv
};

// Each command writes config.resolved.ini and its CSV files into the output
// directory, prints key=value summary lines to `out` and warnings to `err`.
// Errors propagate as exceptions; exit_code_for maps them.
int cmd_direct(const RunConfig& cfg, const CommandFlags& flags, std::ostream& out, std::ostream& err);
int cmd_synth(const RunConfig& cfg, const CommandFlags& flags, std::ostream& out, std::ostream& err);
int cmd_invert(const RunConfig& cfg, const CommandFlags& flags, std::ostream& out, std::ostream& err);
int cmd_check(const RunConfig& cfg, const CommandFlags& flags, std::ostream& out, std::ostream& err);
int cmd_energy(const RunConfig& cfg, const CommandFlags& flags, std::ostream& out, std::ostream& err);

// Dispatch by name; catches library errors, reports them on `err` and
// returns the matching exit code.
int run_command(const std::string& name, const RunConfig& cfg, const CommandFlags& flags, std::ostream& out,
                std::ostream& err);

int exit_code_for(const std::exception& e);

}  // namespace memkernel
