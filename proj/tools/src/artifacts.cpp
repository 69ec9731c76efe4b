#include "artifacts.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <Eigen/Core>

#include "hvinfer/error.hpp"
#include "hvinfer_cli/cli.hpp"

namespace hvinfer::cli {
namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_bytes(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec || !std::filesystem::is_directory(dir_))
    throw InputError("cannot create output directory " + dir_.string());
}

void ArtifactWriter::write(const std::string& name, std::string_view content) {
  write_bytes(dir_ / name, content);
  hashes_[name] = "fnv1a64:" + hex64(fnv1a64(content));
}

void ArtifactWriter::write_json(const std::string& name, const Json& value) {
  write(name, value.dump(2) + "\n");
}

void ArtifactWriter::write_manifest(const std::string& command, const Json& config,
                                    std::uint64_t seed, const Json& inputs, const Json& summary) {
  Json m;
  m["tool"] = "hvinfer";
  m["version"] = HVINFER_VERSION;
  m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                       std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
  m["command"] = command;
  m["seed"] = seed;
  m["config"] = config;
  m["inputs"] = inputs;
  m["artifacts"] = hashes_;
  m["summary"] = summary;
  m["created_utc"] = utc_timestamp();
  write_bytes(dir_ / "manifest.json", m.dump(2) + "\n");
}

Json input_record(const std::filesystem::path& path) {
  Json r;
  r["path"] = path.string();
  r["hash"] = "fnv1a64:" + hex64(fnv1a64(read_file(path)));
  return r;
}

void write_error_record(const std::filesystem::path& dir, const Json& record) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return;
  std::ofstream out(dir / "error.json", std::ios::trunc);
  if (out) out << record.dump(2) << "\n";
}

}  // namespace hvinfer::cli
