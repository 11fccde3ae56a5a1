#include "ddp/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ddp/errors.hpp"

namespace ddp {

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename onto '" + path.string() + "'");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string encode_pgm(const std::vector<std::uint8_t>& pixels, int height, int width) {
  if (static_cast<std::size_t>(height) * width != pixels.size()) throw ShapeError("pgm pixel count mismatch");
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
  return out;
}

namespace {

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

}  // namespace

std::string pgm_magnitude(const ComplexImage& img) {
  RealImage mag = img.abs();
  const double scale = mag.size() > 0 ? percentile_nearest_rank(mag, 99.0) : 0.0;
  std::vector<std::uint8_t> px(mag.size());
  for (Eigen::Index i = 0; i < mag.size(); ++i) px[i] = scale > 0 ? to_byte(255.0 * mag.data()[i] / scale) : 0;
  return encode_pgm(px, static_cast<int>(img.rows()), static_cast<int>(img.cols()));
}

std::string pgm_phase(const ComplexImage& img) {
  std::vector<std::uint8_t> px(img.size());
  for (Eigen::Index i = 0; i < img.size(); ++i)
    px[i] = to_byte(255.0 * (std::arg(img.data()[i]) + std::numbers::pi) / (2.0 * std::numbers::pi));
  return encode_pgm(px, static_cast<int>(img.rows()), static_cast<int>(img.cols()));
}

std::string pgm_signed(const RealImage& values, double clip) {
  std::vector<std::uint8_t> px(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = std::clamp(values.data()[i], -clip, clip);
    px[i] = to_byte(255.0 * (v + clip) / (2.0 * clip));
  }
  return encode_pgm(px, static_cast<int>(values.rows()), static_cast<int>(values.cols()));
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw ShapeError("csv row width does not match header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::header_line(const std::vector<std::string>& header) { return format_row(header); }

std::string CsvTable::format_row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

std::string CsvTable::str() const {
  std::string out = header_line(header_);
  for (const auto& r : rows_) out += format_row(r);
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace ddp
