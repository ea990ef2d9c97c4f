#pragma once

// Discrete parabolic cones Gamma^lambda(x) = {(y, t) : |y - x| < lambda t},
// geometric time grids and tent-space functionals.

#include "hlab/funcalc.hpp"

#include <vector>

namespace hlab {

/// t_j = t_min rho^j, j = 0..J-1, with dt/t weight log_weight = ln rho.
struct TimeGrid {
    double t_min = 0.0;
    double t_max = 0.0;
    int levels = 0;
    double ratio = 1.0;
    double log_weight = 0.0;
    std::vector<double> samples;
};

inline constexpr int kMinTimeLevels = 8;

TimeGrid make_time_grid(double t_min, double t_max, int levels);

/// t_min = h, t_max = 1/4.
TimeGrid default_time_grid(const TorusGrid& grid, int levels = 16);

class ConeSampling {
public:
    ConeSampling(const TorusGrid& grid, const TimeGrid& times, double aperture);

    double aperture() const noexcept { return aperture_; }
    const TorusGrid& grid() const noexcept { return grid_; }
    const TimeGrid& time_grid() const noexcept { return times_; }
    /// Lattice offsets o with |o| < aperture * t_j; always contains 0.
    const std::vector<std::size_t>& offsets(int level) const { return offsets_[static_cast<std::size_t>(level)]; }
    /// Set when aperture * t_j reached 1/2 and the cone section is the whole torus.
    bool clamped(int level) const { return clamped_[static_cast<std::size_t>(level)]; }

private:
    TorusGrid grid_;
    TimeGrid times_;
    double aperture_;
    std::vector<std::vector<std::size_t>> offsets_;
    std::vector<bool> clamped_;
};

/// F(y, t_j) sampled on grid x time grid.
class TentField {
public:
    TentField(const TorusGrid& grid, const TimeGrid& times, std::vector<Vector> levels);

    const TorusGrid& grid() const noexcept { return grid_; }
    const TimeGrid& time_grid() const noexcept { return times_; }
    const Vector& level(int j) const { return levels_[static_cast<std::size_t>(j)]; }
    const std::vector<Vector>& levels() const noexcept { return levels_; }

    /// h^n sum_y |F(y, t_j)|^2 per level.
    std::vector<double> level_energies() const;

    TentField operator*(Complex scale) const;

private:
    TorusGrid grid_;
    TimeGrid times_;
    std::vector<Vector> levels_;
};

enum class GeneratorKind {
    Semigroup,        // e^{-t^{2m} L} f
    PowerSemigroup,   // (t^{2m} L)^k e^{-t^{2m} L} f
    GradientPower,    // |(t nabla)^m (t^{2m} L)^k e^{-t^{2m} L} f|
};

struct Generator {
    GeneratorKind kind = GeneratorKind::PowerSemigroup;
    int k = 1;

    static Generator semigroup() { return {GeneratorKind::Semigroup, 0}; }
    static Generator power(int k) { return {GeneratorKind::PowerSemigroup, k}; }
    static Generator gradient(int k) { return {GeneratorKind::GradientPower, k}; }
};

TentField build_tent_field(const SpectralFactorization& fact, const GridFunction& f, Generator generator,
                           const TimeGrid& times);

/// One matrix function per level, shared by every function in the batch.
std::vector<TentField> build_tent_fields(const SpectralFactorization& fact, const std::vector<GridFunction>& fs,
                                         Generator generator, const TimeGrid& times);

/// (sum_j Delta sum_{o in cone_j} h^n |F(x + o, t_j)|^2 / t_j^n)^{1/2}
double a_functional(const TentField& F, const ConeSampling& cone, std::size_t x);
RealVector a_functional(const TentField& F, const ConeSampling& cone);

/// ||A(F)||_{L^p}
double tent_quasinorm(const TentField& F, double p, const ConeSampling& cone);

}  // namespace hlab
