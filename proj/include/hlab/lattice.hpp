#pragma once

// Periodic lattice on the unit torus, multi-index calculus, spectral
// differentiation and discrete L^p quasi-norms.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace hlab {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Uniform N^n lattice on the unit torus [0,1)^n, n in {1, 2}.
class TorusGrid {
public:
    TorusGrid(int dimension, int points_per_axis);

    int dimension() const noexcept { return n_; }
    int points_per_axis() const noexcept { return N_; }
    double spacing() const noexcept { return 1.0 / N_; }
    std::size_t total_points() const noexcept { return total_; }
    /// h^n, the quadrature weight of one site.
    double cell_volume() const noexcept;

    std::array<int, 2> coords(std::size_t site) const noexcept;
    std::size_t site(int i0, int i1 = 0) const noexcept;
    std::array<double, 2> position(std::size_t site) const noexcept;
    /// Site reached from `site` by the lattice offset `offset` (both site indices).
    std::size_t translate(std::size_t site, std::size_t offset) const noexcept;

    /// Squared periodic distance in lattice units (integer).
    long squared_lattice_distance(std::size_t a, std::size_t b) const noexcept;
    double distance(std::size_t a, std::size_t b) const noexcept;

    /// Integer frequency of FFT bin `index` along one axis, in [-N/2, N/2).
    int frequency(int index) const noexcept { return index < N_ / 2 ? index : index - N_; }

    bool operator==(const TorusGrid& other) const noexcept {
        return n_ == other.n_ && N_ == other.N_;
    }

private:
    int n_;
    int N_;
    std::size_t total_;
};

TorusGrid make_grid(int dimension, int points_per_axis);

struct MultiIndex {
    std::vector<int> components;

    int order() const noexcept;
    auto operator<=>(const MultiIndex&) const = default;
    bool operator==(const MultiIndex&) const = default;
};

/// All multi-indices of the given order in `dimension` variables, sorted
/// lexicographically.
std::vector<MultiIndex> multi_indices(int dimension, int order);

/// m!/alpha! for |alpha| = m.
double multinomial_weight(const MultiIndex& alpha);

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);

/// Complex samples on a TorusGrid, row-major over axes.
class GridFunction {
public:
    GridFunction(TorusGrid grid, Vector values);

    static GridFunction zeros(const TorusGrid& grid);
    static GridFunction constant(const TorusGrid& grid, Complex value);

    const TorusGrid& grid() const noexcept { return grid_; }
    const Vector& values() const noexcept { return values_; }
    Complex operator[](std::size_t site) const { return values_[static_cast<Eigen::Index>(site)]; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

    Complex mean() const;
    GridFunction mean_zero() const;
    RealVector magnitude() const { return values_.cwiseAbs(); }

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator-=(const GridFunction& other);
    GridFunction& operator*=(Complex scale);

private:
    TorusGrid grid_;
    Vector values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(Complex scale, GridFunction f);

/// L^2 inner product h^n sum f conj(g).
Complex inner_product(const GridFunction& f, const GridFunction& g);
double l2_norm(const GridFunction& f);

GridFunction partial_derivative(const GridFunction& f, const MultiIndex& alpha);

/// Derivatives of f for every index in `indices`, sharing one forward transform.
std::vector<GridFunction> partial_derivatives(const GridFunction& f,
                                              const std::vector<MultiIndex>& indices);

struct GradientBlock {
    std::vector<MultiIndex> indices;
    std::vector<GridFunction> components;
    /// |nabla^k f|(x) = (sum_gamma |d^gamma f(x)|^2)^{1/2}
    RealVector magnitude;
};

GradientBlock gradient_block(const GridFunction& f, int order);

/// (h^n sum_x |f(x)|^p)^{1/p}
double lp_quasinorm(const GridFunction& f, double p);
double lp_quasinorm(const TorusGrid& grid, const RealVector& values, double p);

struct SiteSet {
    std::vector<std::size_t> sites;
    /// Set when the radius reached the injectivity radius 1/2 and the ball was
    /// replaced by the whole torus.
    bool clamped = false;
};

/// Sites y with periodic distance d(y, center) < radius.
SiteSet ball_indices(const TorusGrid& grid, std::size_t center, double radius);

/// S_0(B) = B, S_i(B) = 2^i B \ 2^{i-1} B.
SiteSet annulus_indices(const TorusGrid& grid, std::size_t center, double radius, int ring);

/// Measure h^n * #sites.
double measure(const TorusGrid& grid, const SiteSet& set);

/// Trigonometric polynomial sum_{|k_j| <= band} c_k e^{2 pi i k.x}, evaluated
/// pointwise so the same continuum function can be sampled on any grid.
struct TrigSeries {
    int dimension = 1;
    int band = 0;
    /// Coefficients for k0 in [-band, band] (outer) and k1 in [-band, band]
    /// (inner, 2D only).
    std::vector<Complex> coefficients;

    GridFunction sample(const TorusGrid& grid) const;
    /// sum |c_k|, a bound for sup |f|.
    double absolute_sum() const;
};

TrigSeries random_trig_series(int dimension, std::uint64_t seed, int band, double smoothness = 1.0);

/// f(x) = sum_{|k_j| <= band} c_k e^{2 pi i k.x} with complex Gaussian c_k of
/// standard deviation (1 + |k|)^{-smoothness}. Coefficients are drawn in a
/// fixed order from `seed`, so the same continuum function is sampled on any
/// grid with N/2 > band.
GridFunction band_limited_random(const TorusGrid& grid, std::uint64_t seed, int band, double smoothness = 1.0);

/// Uncentred maximal function over the radius set {h, 2h, ..., 1/2}.
GridFunction hardy_littlewood_maximal(const GridFunction& f);

}  // namespace hlab
