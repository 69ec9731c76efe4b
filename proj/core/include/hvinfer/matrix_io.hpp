#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hvinfer/types.hpp"

namespace hvinfer {

/// Dense matrix plus the column labels taken from an optional header row.
struct LabeledMatrix {
  Matrix values;
  std::vector<std::string> labels;
};

/// Parses comma-separated numeric text. Accepts LF or CRLF line endings and
/// trailing blank lines. Throws ParseError on ragged rows, non-numeric or
/// non-finite fields, and empty input.
LabeledMatrix parse_matrix_csv(std::string_view text, bool has_header);

LabeledMatrix load_matrix_csv(const std::filesystem::path& path, bool has_header);

/// Writes with 17 significant digits so that parsing the output reproduces
/// every value bit-for-bit.
void write_matrix_csv(std::ostream& out, const Matrix& m,
                      const std::vector<std::string>& labels = {});
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& labels = {});

/// Round-trip formatting of a single value (shared by all CSV emitters).
std::string format_real(double v);

}  // namespace hvinfer
