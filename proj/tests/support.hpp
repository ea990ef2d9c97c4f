#pragma once

#include "hlab/lattice.hpp"

#include <cmath>

namespace hlab::test {

inline GridFunction fourier_mode(const TorusGrid& grid, int k0, int k1 = 0) {
    Vector v(static_cast<Eigen::Index>(grid.total_points()));
    for (std::size_t s = 0; s < grid.total_points(); ++s) {
        const auto x = grid.position(s);
        v[static_cast<Eigen::Index>(s)] = std::polar(1.0, 2.0 * M_PI * (k0 * x[0] + k1 * x[1]));
    }
    return GridFunction(grid, v);
}

inline double relative_error(const GridFunction& a, const GridFunction& b) { return l2_norm(a - b) / l2_norm(b); }

inline double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace hlab::test
