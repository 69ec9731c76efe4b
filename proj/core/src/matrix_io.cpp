#include "hvinfer/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hvinfer/error.hpp"

namespace hvinfer {
namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t end = line.find(',', start);
    if (end == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view field, std::size_t row, std::size_t col) {
  std::string_view f = trim(field);
  if (!f.empty() && f.front() == '+') f.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
  if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
    throw ParseError("non-numeric field '" + std::string(field) + "' at row " +
                         std::to_string(row) + ", column " + std::to_string(col),
                     row, col);
  }
  if (!std::isfinite(value)) {
    throw ParseError("non-finite field at row " + std::to_string(row) + ", column " +
                         std::to_string(col),
                     row, col);
  }
  return value;
}

}  // namespace

LabeledMatrix parse_matrix_csv(std::string_view text, bool has_header) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError("empty CSV input", 0, 0);

  LabeledMatrix out;
  std::size_t first = 0;
  if (has_header) {
    for (auto f : split_fields(lines[0])) out.labels.emplace_back(trim(f));
    first = 1;
  }
  const std::size_t rows = lines.size() - first;
  if (rows == 0) throw ParseError("CSV has a header but no data rows", 1, 0);

  const std::size_t cols =
      has_header ? out.labels.size() : split_fields(lines[first]).size();
  out.values.resize(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t file_row = r + first + 1;
    const auto fields = split_fields(lines[r + first]);
    if (fields.size() != cols) {
      throw ParseError("ragged row " + std::to_string(file_row) + ": expected " +
                           std::to_string(cols) + " fields, found " +
                           std::to_string(fields.size()),
                       file_row, 0);
    }
    for (std::size_t c = 0; c < cols; ++c) {
      out.values(static_cast<Index>(r), static_cast<Index>(c)) =
          parse_field(fields[c], file_row, c + 1);
    }
  }
  return out;
}

LabeledMatrix load_matrix_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_matrix_csv(buf.str(), has_header);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.row(), e.col());
  }
}

std::string format_real(double v) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return std::string(buf, static_cast<std::size_t>(len));
}

void write_matrix_csv(std::ostream& out, const Matrix& m,
                      const std::vector<std::string>& labels) {
  if (!labels.empty()) {
    for (std::size_t c = 0; c < labels.size(); ++c) out << (c ? "," : "") << labels[c];
    out << '\n';
  }
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_real(m(r, c));
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_matrix_csv(out, m, labels);
}

}  // namespace hvinfer
