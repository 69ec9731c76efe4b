#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>

#include "hvinfer/error.hpp"
#include "hvinfer_cli/cli.hpp"

namespace hvinfer::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_commas(const std::vector<std::string>& specs) {
  std::vector<std::string> tokens;
  for (const auto& spec : specs) {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto t = trim(item);
      if (!t.empty()) tokens.emplace_back(t);
    }
  }
  return tokens;
}

bool parse_positive(std::string_view s, long long& out) {
  if (s.empty() || s.size() > 18) return false;
  out = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    out = out * 10 + (c - '0');
  }
  return true;
}

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (std::size_t k = 0; k < items.size(); ++k) s += (k ? ", " : "") + items[k];
  return s;
}

}  // namespace

std::vector<ConfigEntry> parse_config_text(std::string_view text) {
  std::vector<ConfigEntry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const auto line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (key == "config")
      throw ConfigError("config line " + std::to_string(line_no) + ": nested config files are not supported");
    entries.push_back({std::string(key), std::string(value), line_no});
  }
  return entries;
}

std::vector<std::string> merge_config(const std::vector<ConfigEntry>& entries,
                                      const std::vector<std::string>& args) {
  std::set<std::string> on_command_line;
  for (const auto& a : args) {
    if (a.size() > 2 && a.compare(0, 2, "--") == 0)
      on_command_line.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos
                                                                           : a.find('=') - 2));
  }
  std::vector<std::string> from_file;
  for (const auto& e : entries)
    if (!on_command_line.count(e.key)) from_file.push_back("--" + e.key + "=" + e.value);

  const auto sub = std::find_if(args.begin(), args.end(),
                                [](const std::string& a) { return a.empty() || a[0] != '-'; });
  std::vector<std::string> merged(args.begin(), sub == args.end() ? sub : sub + 1);
  merged.insert(merged.end(), from_file.begin(), from_file.end());
  if (sub != args.end()) merged.insert(merged.end(), sub + 1, args.end());
  return merged;
}

std::vector<std::pair<Index, Index>> parse_entries(const std::vector<std::string>& specs,
                                                   Index p, Index m) {
  const auto tokens = split_commas(specs);
  if (tokens.empty()) throw ConfigError("no Theta entries requested");
  std::vector<std::pair<Index, Index>> out;
  if (tokens.size() == 1 && tokens[0] == "all") {
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < m; ++j) out.emplace_back(i, j);
    return out;
  }
  std::vector<std::string> bad;
  for (const auto& t : tokens) {
    const auto colon = t.find(':');
    long long i = 0, j = 0;
    if (colon == std::string::npos || !parse_positive(t.substr(0, colon), i) ||
        !parse_positive(t.substr(colon + 1), j) || i < 1 || j < 1 || i > p || j > m) {
      bad.push_back(t);
      continue;
    }
    out.emplace_back(static_cast<Index>(i - 1), static_cast<Index>(j - 1));
  }
  if (!bad.empty())
    throw ConfigError("unknown Theta entries (p = " + std::to_string(p) + ", m = " +
                      std::to_string(m) + "): " + join(bad));
  return out;
}

std::vector<Index> parse_index_list(const std::vector<std::string>& specs, Index limit,
                                    const std::string& what) {
  const auto tokens = split_commas(specs);
  std::vector<Index> out;
  if (tokens.empty() || (tokens.size() == 1 && tokens[0] == "all")) {
    for (Index k = 0; k < limit; ++k) out.push_back(k);
    return out;
  }
  std::vector<std::string> bad;
  for (const auto& t : tokens) {
    long long v = 0;
    if (!parse_positive(t, v) || v < 1 || v > limit) {
      bad.push_back(t);
      continue;
    }
    out.push_back(static_cast<Index>(v - 1));
  }
  if (!bad.empty())
    throw ConfigError("unknown " + what + " indices (valid 1.." + std::to_string(limit) +
                      "): " + join(bad));
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace hvinfer::cli
