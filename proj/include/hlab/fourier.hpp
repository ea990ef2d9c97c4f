#pragma once

#include "hlab/lattice.hpp"

namespace hlab::fourier {

/// Normalised coefficients c_k = N^{-n} sum_x f(x) e^{-2 pi i k.x}, stored in
/// FFT bin order.
Vector forward(const TorusGrid& grid, const Vector& samples);

/// Inverse of forward(): f(x) = sum_k c_k e^{2 pi i k.x}.
Vector inverse(const TorusGrid& grid, const Vector& coefficients);

/// Multiplier prod_j (2 pi i k_j)^{alpha_j} for every bin.
Vector derivative_multiplier(const TorusGrid& grid, const MultiIndex& alpha);

/// Integer frequency vector of a bin (second entry zero in 1D).
std::array<int, 2> bin_frequency(const TorusGrid& grid, std::size_t bin);

}  // namespace hlab::fourier
