#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ddp/types.hpp"

namespace ddp {

enum class DType { Real64, Real32, Complex128, UInt8 };

std::string_view dtype_name(DType dt);
DType dtype_from_name(std::string_view name);
std::size_t dtype_size(DType dt);

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);

/// Dense row-major array with a runtime dtype.
class Tensor {
 public:
  using Storage = std::variant<std::vector<double>, std::vector<float>, std::vector<cplx>,
                               std::vector<std::uint8_t>>;

  Tensor() : Tensor(Shape{0}, std::vector<double>{}) {}
  Tensor(Shape shape, std::vector<double> data);
  Tensor(Shape shape, std::vector<float> data);
  Tensor(Shape shape, std::vector<cplx> data);
  Tensor(Shape shape, std::vector<std::uint8_t> data);

  DType dtype() const;
  const Shape& shape() const { return shape_; }
  std::size_t numel() const { return shape_numel(shape_); }

  // Typed access; throws DTypeError if the dtype differs.
  const std::vector<double>& real64() const;
  const std::vector<float>& real32() const;
  const std::vector<cplx>& complex128() const;
  const std::vector<std::uint8_t>& uint8() const;

  /// Values converted to double; complex tensors are rejected.
  std::vector<double> as_real() const;

  const Storage& storage() const { return data_; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  void validate() const;

  Shape shape_;
  Storage data_;
};

Tensor to_tensor(const RealImage& img);
Tensor to_tensor(const ComplexImage& img);
Tensor to_tensor(const LabelImage& img);
Tensor to_tensor(const BoolImage& img);

RealImage to_real_image(const Tensor& t);
ComplexImage to_complex_image(const Tensor& t);
LabelImage to_label_image(const Tensor& t);
/// Accepts real64, real32 or uint8 0/1 tensors.
BoolImage to_bool_image(const Tensor& t);

/// Named tensors plus free-form JSON metadata stored in the header.
struct TensorFile {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, Tensor>> entries;

  const Tensor& at(std::string_view name) const;
  const Tensor* find(std::string_view name) const;
  void add(std::string name, Tensor t);
};

inline constexpr int kTensorFormatVersion = 1;

/// Serialises to the DDPT layout: "DDPT\n", one JSON header line, then the
/// little-endian payloads back to back in entry order.
std::string encode_tensor_file(const TensorFile& file);
TensorFile decode_tensor_file(std::string_view bytes);

/// Writes through a temporary file and renames on success.
void tensor_io_write(const std::filesystem::path& path, const TensorFile& file);
TensorFile tensor_io_read(const std::filesystem::path& path);

}  // namespace ddp
