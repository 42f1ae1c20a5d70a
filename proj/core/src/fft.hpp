#pragma once

#include <cstddef>
#include <span>

#include "ucahrpe/matrix.hpp"

namespace uca::detail {

enum class FftSign { forward = -1, backward = +1 };

/// Unnormalized in-place DFT: X_n = sum_k x_k exp(sign * j 2 pi k n / N).
void fft(std::span<Complex> data, FftSign sign);

/// Unnormalized in-place 2D DFT of a row-major rows x cols buffer.
void fft2(std::span<Complex> data, std::size_t rows, std::size_t cols, FftSign sign);

}  // namespace uca::detail
