#include "ddp/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ddp/errors.hpp"

namespace ddp {

void require_finite(const ComplexImage& img, const char* what) {
  if (!img.real().allFinite() || !img.imag().allFinite())
    throw NonFiniteError(std::string(what) + " contains non-finite values");
}

void require_finite(const RealImage& img, const char* what) {
  if (!img.allFinite()) throw NonFiniteError(std::string(what) + " contains non-finite values");
}

double percentile_nearest_rank(const RealImage& values, double q) {
  if (!(q > 0.0 && q <= 100.0)) throw InvalidArgument("percentile must lie in (0, 100]");
  if (values.size() == 0) throw InvalidArgument("percentile of an empty image");
  std::vector<double> v(values.data(), values.data() + values.size());
  const auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(v.size())));
  const std::size_t idx = std::clamp<std::size_t>(rank, 1, v.size()) - 1;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx), v.end());
  return v[idx];
}

}  // namespace ddp
