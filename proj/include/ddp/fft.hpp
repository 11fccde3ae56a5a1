#pragma once

#include <span>
#include <vector>

#include "ddp/types.hpp"

namespace ddp {

enum class FftDirection { Forward, Inverse };

/// Orthonormal 2D DFT (1/sqrt(N) in both directions), DC at index (0, 0).
/// Forward uses exp(-2*pi*i*...), inverse exp(+2*pi*i*...).
ComplexImage fft2(const ComplexImage& img, FftDirection dir);

/// Orthonormal 1D DFT of a contiguous sequence.
std::vector<cplx> fft1(std::span<const cplx> x, FftDirection dir);

}  // namespace ddp
