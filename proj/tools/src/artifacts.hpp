#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace hvinfer::cli {

using Json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path);

/// Writes files into one output directory and records their FNV-1a hashes.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  void write(const std::string& name, std::string_view content);
  void write_json(const std::string& name, const Json& value);
  const Json& hashes() const noexcept { return hashes_; }

  /// manifest.json: tool, version, command, resolved config, seed, input and
  /// artifact hashes and a UTC timestamp.
  void write_manifest(const std::string& command, const Json& config, std::uint64_t seed,
                      const Json& inputs, const Json& summary);

 private:
  std::filesystem::path dir_;
  Json hashes_ = Json::object();
};

/// Hash record of an input file.
Json input_record(const std::filesystem::path& path);

/// Writes a JSON error record to `dir`/error.json, ignoring I/O failures.
void write_error_record(const std::filesystem::path& dir, const Json& record);

}  // namespace hvinfer::cli
