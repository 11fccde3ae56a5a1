#include "ddp/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ddp/errors.hpp"
#include "ddp/report.hpp"
#include "ddp/rng.hpp"

namespace ddp {

static_assert(std::endian::native == std::endian::little, "DDPT payloads are written in native little-endian order");

namespace {

constexpr std::string_view kMagic = "DDPT";

template <class T>
bool all_finite(const std::vector<T>& v) {
  for (const auto& x : v) {
    if constexpr (std::is_same_v<T, cplx>) {
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

std::size_t checked_size(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_unsigned()) throw FormatError(std::string("header entry missing '") + key + "'");
  return j[key].get<std::size_t>();
}

}  // namespace

std::string_view dtype_name(DType dt) {
  switch (dt) {
    case DType::Real64: return "real64";
    case DType::Real32: return "real32";
    case DType::Complex128: return "complex128";
    case DType::UInt8: return "uint8";
  }
  return "?";
}

DType dtype_from_name(std::string_view name) {
  if (name == "real64") return DType::Real64;
  if (name == "real32") return DType::Real32;
  if (name == "complex128") return DType::Complex128;
  if (name == "uint8") return DType::UInt8;
  throw DTypeError("unknown dtype '" + std::string(name) + "'");
}

std::size_t dtype_size(DType dt) {
  switch (dt) {
    case DType::Real64: return 8;
    case DType::Real32: return 4;
    case DType::Complex128: return 16;
    case DType::UInt8: return 1;
  }
  return 0;
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) { validate(); }
Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) { validate(); }
Tensor::Tensor(Shape shape, std::vector<cplx> data) : shape_(std::move(shape)), data_(std::move(data)) { validate(); }
Tensor::Tensor(Shape shape, std::vector<std::uint8_t> data) : shape_(std::move(shape)), data_(std::move(data)) {
  validate();
}

void Tensor::validate() const {
  const std::size_t n = std::visit([](const auto& v) { return v.size(); }, data_);
  if (n != shape_numel(shape_)) throw ShapeError("tensor data length does not match its shape");
  if (!std::visit([](const auto& v) { return all_finite(v); }, data_))
    throw NonFiniteError("tensor contains non-finite values");
}

DType Tensor::dtype() const { return static_cast<DType>(data_.index()); }

const std::vector<double>& Tensor::real64() const {
  if (auto* v = std::get_if<std::vector<double>>(&data_)) return *v;
  throw DTypeError("expected real64 tensor, got " + std::string(dtype_name(dtype())));
}
const std::vector<float>& Tensor::real32() const {
  if (auto* v = std::get_if<std::vector<float>>(&data_)) return *v;
  throw DTypeError("expected real32 tensor, got " + std::string(dtype_name(dtype())));
}
const std::vector<cplx>& Tensor::complex128() const {
  if (auto* v = std::get_if<std::vector<cplx>>(&data_)) return *v;
  throw DTypeError("expected complex128 tensor, got " + std::string(dtype_name(dtype())));
}
const std::vector<std::uint8_t>& Tensor::uint8() const {
  if (auto* v = std::get_if<std::vector<std::uint8_t>>(&data_)) return *v;
  throw DTypeError("expected uint8 tensor, got " + std::string(dtype_name(dtype())));
}

std::vector<double> Tensor::as_real() const {
  return std::visit(
      [](const auto& v) -> std::vector<double> {
        using T = typename std::decay_t<decltype(v)>::value_type;
        if constexpr (std::is_same_v<T, cplx>) {
          throw DTypeError("expected a real tensor, got complex128");
        } else {
          return std::vector<double>(v.begin(), v.end());
        }
      },
      data_);
}

namespace {

template <class Img>
Shape image_shape(const Img& img) {
  return {static_cast<std::size_t>(img.rows()), static_cast<std::size_t>(img.cols())};
}

void require_2d(const Tensor& t) {
  if (t.shape().size() != 2) throw ShapeError("expected a 2D tensor");
}

}  // namespace

Tensor to_tensor(const RealImage& img) {
  return Tensor(image_shape(img), std::vector<double>(img.data(), img.data() + img.size()));
}
Tensor to_tensor(const ComplexImage& img) {
  return Tensor(image_shape(img), std::vector<cplx>(img.data(), img.data() + img.size()));
}
Tensor to_tensor(const LabelImage& img) {
  return Tensor(image_shape(img), std::vector<std::uint8_t>(img.data(), img.data() + img.size()));
}
Tensor to_tensor(const BoolImage& img) {
  std::vector<std::uint8_t> v(img.size());
  for (Eigen::Index i = 0; i < img.size(); ++i) v[i] = img.data()[i] ? 1 : 0;
  return Tensor(image_shape(img), std::move(v));
}

RealImage to_real_image(const Tensor& t) {
  require_2d(t);
  const auto v = t.as_real();
  RealImage img(t.shape()[0], t.shape()[1]);
  std::copy(v.begin(), v.end(), img.data());
  return img;
}

ComplexImage to_complex_image(const Tensor& t) {
  require_2d(t);
  ComplexImage img(t.shape()[0], t.shape()[1]);
  if (t.dtype() == DType::Complex128) {
    const auto& v = t.complex128();
    std::copy(v.begin(), v.end(), img.data());
  } else {
    const auto v = t.as_real();
    for (std::size_t i = 0; i < v.size(); ++i) img.data()[i] = v[i];
  }
  return img;
}

LabelImage to_label_image(const Tensor& t) {
  require_2d(t);
  const auto& v = t.uint8();
  LabelImage img(t.shape()[0], t.shape()[1]);
  std::copy(v.begin(), v.end(), img.data());
  return img;
}

BoolImage to_bool_image(const Tensor& t) {
  require_2d(t);
  const auto v = t.as_real();
  BoolImage img(t.shape()[0], t.shape()[1]);
  for (std::size_t i = 0; i < v.size(); ++i) img.data()[i] = v[i] != 0.0;
  return img;
}

const Tensor& TensorFile::at(std::string_view name) const {
  if (const Tensor* t = find(name)) return *t;
  throw FormatError("container has no entry '" + std::string(name) + "'");
}

const Tensor* TensorFile::find(std::string_view name) const {
  for (const auto& [n, t] : entries)
    if (n == name) return &t;
  return nullptr;
}

void TensorFile::add(std::string name, Tensor t) { entries.emplace_back(std::move(name), std::move(t)); }

std::string encode_tensor_file(const TensorFile& file) {
  nlohmann::json header;
  header["format_version"] = kTensorFormatVersion;
  header["rng"] = Rng::kAlgorithm;
  header["meta"] = file.meta;
  header["entries"] = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& [name, t] : file.entries) {
    const std::size_t nbytes = t.numel() * dtype_size(t.dtype());
    header["entries"].push_back(
        {{"name", name}, {"dtype", dtype_name(t.dtype())}, {"shape", t.shape()}, {"offset", offset}, {"nbytes", nbytes}});
    offset += nbytes;
  }

  std::string out;
  out.reserve(offset + 256);
  out += kMagic;
  out += '\n';
  out += header.dump();
  out += '\n';
  for (const auto& entry : file.entries) {
    std::visit(
        [&out](const auto& v) {
          out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(v[0]));
        },
        entry.second.storage());
  }
  return out;
}

TensorFile decode_tensor_file(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 1 || bytes.substr(0, kMagic.size()) != kMagic || bytes[kMagic.size()] != '\n')
    throw MagicError("not a DDPT container (bad magic)");
  const std::size_t header_begin = kMagic.size() + 1;
  const std::size_t header_end = bytes.find('\n', header_begin);
  if (header_end == std::string_view::npos) throw TruncatedError("container header is truncated");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(header_begin, header_end - header_begin));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("container header is not valid JSON: ") + e.what());
  }
  if (!header.is_object() || !header.contains("entries") || !header["entries"].is_array())
    throw FormatError("container header has no entry list");

  TensorFile file;
  if (header.contains("meta")) file.meta = header["meta"];
  const std::string_view payload = bytes.substr(header_end + 1);

  for (const auto& e : header["entries"]) {
    if (!e.contains("name") || !e["name"].is_string() || !e.contains("dtype") || !e["dtype"].is_string() ||
        !e.contains("shape") || !e["shape"].is_array())
      throw FormatError("malformed container entry");
    const DType dt = dtype_from_name(e["dtype"].get<std::string>());
    const Shape shape = e["shape"].get<Shape>();
    const std::size_t offset = checked_size(e, "offset");
    const std::size_t nbytes = shape_numel(shape) * dtype_size(dt);
    if (e.contains("nbytes") && checked_size(e, "nbytes") != nbytes)
      throw DTypeError("entry '" + e["name"].get<std::string>() + "' byte count does not match its dtype");
    if (offset > payload.size() || payload.size() - offset < nbytes)
      throw TruncatedError("payload for entry '" + e["name"].get<std::string>() + "' is truncated");

    const char* src = payload.data() + offset;
    auto load = [&](auto tag) {
      using T = decltype(tag);
      std::vector<T> v(shape_numel(shape));
      std::memcpy(v.data(), src, nbytes);
      return Tensor(shape, std::move(v));
    };
    switch (dt) {
      case DType::Real64: file.add(e["name"], load(double{})); break;
      case DType::Real32: file.add(e["name"], load(float{})); break;
      case DType::Complex128: file.add(e["name"], load(cplx{})); break;
      case DType::UInt8: file.add(e["name"], load(std::uint8_t{})); break;
    }
  }
  return file;
}

void tensor_io_write(const std::filesystem::path& path, const TensorFile& file) {
  write_file_atomic(path, encode_tensor_file(file));
}

TensorFile tensor_io_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_tensor_file(ss.str());
}

}  // namespace ddp
