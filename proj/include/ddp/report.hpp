#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ddp/types.hpp"

namespace ddp {

/// Writes `bytes` to `<path>.tmp` and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

/// Binary 8-bit PGM (P5). Row-major, maxval 255.
std::string encode_pgm(const std::vector<std::uint8_t>& pixels, int height, int width);

/// |img| mapped linearly so its 99th percentile lands on 255.
std::string pgm_magnitude(const ComplexImage& img);
/// Phase in [-pi, pi] mapped to [0, 255].
std::string pgm_phase(const ComplexImage& img);
/// Signed map clipped to [-clip, clip] and mapped to [0, 255].
std::string pgm_signed(const RealImage& values, double clip);

/// Minimal CSV table: fixed header, rows of already formatted cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

  static std::string header_line(const std::vector<std::string>& header);
  static std::string format_row(const std::vector<std::string>& cells);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Shortest round-trippable decimal form of `v` ("" for NaN).
std::string format_double(double v);

}  // namespace ddp
