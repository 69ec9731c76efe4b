#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hvinfer/types.hpp"

namespace hvinfer::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kInputError = 2,
  kNumericalError = 3,
  kConfigError = 4,
};

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

/// Flat key=value text. Blank lines and lines starting with '#' are skipped,
/// surrounding whitespace is trimmed and repeated keys are kept in order.
/// Throws ConfigError naming the offending line.
std::vector<ConfigEntry> parse_config_text(std::string_view text);

/// Splices config entries in as `--key=value` tokens right after the
/// subcommand. Keys also given as flags in `args` are dropped, so flags win.
std::vector<std::string> merge_config(const std::vector<ConfigEntry>& entries,
                                      const std::vector<std::string>& args);

/// Entry specs "i:j" (1-based, comma-separated within a token) or "all",
/// returned 0-based. Throws ConfigError on an empty list, malformed tokens
/// or indices outside [1, p] x [1, m], listing every offender.
std::vector<std::pair<Index, Index>> parse_entries(const std::vector<std::string>& specs,
                                                   Index p, Index m);

/// 1-based index list (comma-separated within a token) or "all", returned
/// 0-based. An empty list means all indices.
std::vector<Index> parse_index_list(const std::vector<std::string>& specs, Index limit,
                                    const std::string& what);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Runs one invocation (arguments without the program name) and returns the
/// process exit code. Progress goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hvinfer::cli
