#include "hlab/lattice.hpp"

#include "hlab/error.hpp"
#include "hlab/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace hlab {

TorusGrid::TorusGrid(int dimension, int points_per_axis) : n_(dimension), N_(points_per_axis) {
    if (dimension != 1 && dimension != 2)
        throw InvalidArgument("grid dimension must be 1 or 2, got " + std::to_string(dimension));
    if (points_per_axis < 4 || points_per_axis % 2 != 0)
        throw InvalidArgument("points per axis must be even and at least 4, got " +
                              std::to_string(points_per_axis));
    total_ = static_cast<std::size_t>(N_);
    if (n_ == 2) total_ *= static_cast<std::size_t>(N_);
}

double TorusGrid::cell_volume() const noexcept {
    return n_ == 1 ? spacing() : spacing() * spacing();
}

std::array<int, 2> TorusGrid::coords(std::size_t site) const noexcept {
    if (n_ == 1) return {static_cast<int>(site), 0};
    return {static_cast<int>(site / static_cast<std::size_t>(N_)),
            static_cast<int>(site % static_cast<std::size_t>(N_))};
}

std::size_t TorusGrid::site(int i0, int i1) const noexcept {
    auto wrap = [this](int i) { return static_cast<std::size_t>(((i % N_) + N_) % N_); };
    if (n_ == 1) return wrap(i0);
    return wrap(i0) * static_cast<std::size_t>(N_) + wrap(i1);
}

std::array<double, 2> TorusGrid::position(std::size_t s) const noexcept {
    const auto c = coords(s);
    return {c[0] * spacing(), c[1] * spacing()};
}

std::size_t TorusGrid::translate(std::size_t s, std::size_t offset) const noexcept {
    const auto a = coords(s);
    const auto b = coords(offset);
    return site(a[0] + b[0], a[1] + b[1]);
}

long TorusGrid::squared_lattice_distance(std::size_t a, std::size_t b) const noexcept {
    const auto ca = coords(a);
    const auto cb = coords(b);
    long total = 0;
    for (int axis = 0; axis < n_; ++axis) {
        long d = std::labs(static_cast<long>(ca[static_cast<std::size_t>(axis)]) -
                           cb[static_cast<std::size_t>(axis)]);
        d = std::min(d, static_cast<long>(N_) - d);
        total += d * d;
    }
    return total;
}

double TorusGrid::distance(std::size_t a, std::size_t b) const noexcept {
    return std::sqrt(static_cast<double>(squared_lattice_distance(a, b))) * spacing();
}

TorusGrid make_grid(int dimension, int points_per_axis) { return TorusGrid(dimension, points_per_axis); }

int MultiIndex::order() const noexcept {
    return std::accumulate(components.begin(), components.end(), 0);
}

std::vector<MultiIndex> multi_indices(int dimension, int order) {
    if (order < 0) throw InvalidArgument("multi-index order must be non-negative");
    std::vector<MultiIndex> out;
    if (dimension == 1) {
        out.push_back({{order}});
    } else {
        for (int a = 0; a <= order; ++a) out.push_back({{a, order - a}});
    }
    std::sort(out.begin(), out.end());
    return out;
}

double multinomial_weight(const MultiIndex& alpha) {
    double weight = std::tgamma(alpha.order() + 1.0);
    for (int a : alpha.components) weight /= std::tgamma(a + 1.0);
    return std::round(weight);
}

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
    if (a.components.size() != b.components.size())
        throw InvalidArgument("multi-index dimension mismatch");
    MultiIndex sum = a;
    for (std::size_t i = 0; i < sum.components.size(); ++i) sum.components[i] += b.components[i];
    return sum;
}

GridFunction::GridFunction(TorusGrid grid, Vector values) : grid_(grid), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != grid_.total_points())
        throw InvalidArgument("grid function has " + std::to_string(values_.size()) +
                              " samples, grid needs " + std::to_string(grid_.total_points()));
    if (!values_.allFinite()) throw InvalidArgument("grid function samples must be finite");
}

GridFunction GridFunction::zeros(const TorusGrid& grid) {
    return GridFunction(grid, Vector::Zero(static_cast<Eigen::Index>(grid.total_points())));
}

GridFunction GridFunction::constant(const TorusGrid& grid, Complex value) {
    return GridFunction(grid, Vector::Constant(static_cast<Eigen::Index>(grid.total_points()), value));
}

Complex GridFunction::mean() const { return values_.mean(); }

GridFunction GridFunction::mean_zero() const {
    return GridFunction(grid_, values_.array() - values_.mean());
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
    if (!(grid_ == other.grid_)) throw InvalidArgument("grid mismatch");
    values_ += other.values_;
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
    if (!(grid_ == other.grid_)) throw InvalidArgument("grid mismatch");
    values_ -= other.values_;
    return *this;
}

GridFunction& GridFunction::operator*=(Complex scale) {
    values_ *= scale;
    return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(Complex scale, GridFunction f) { return f *= scale; }

Complex inner_product(const GridFunction& f, const GridFunction& g) {
    if (!(f.grid() == g.grid())) throw InvalidArgument("grid mismatch");
    // Eigen's dot conjugates its first argument.
    return g.values().dot(f.values()) * f.grid().cell_volume();
}

double l2_norm(const GridFunction& f) {
    return std::sqrt(f.values().squaredNorm() * f.grid().cell_volume());
}

std::vector<GridFunction> partial_derivatives(const GridFunction& f,
                                              const std::vector<MultiIndex>& indices) {
    const auto& grid = f.grid();
    const Vector coefficients = fourier::forward(grid, f.values());
    std::vector<GridFunction> out;
    out.reserve(indices.size());
    for (const auto& alpha : indices) {
        if (static_cast<int>(alpha.components.size()) != grid.dimension())
            throw InvalidArgument("multi-index has the wrong number of components");
        if (alpha.order() == 0) {
            out.push_back(f);
            continue;
        }
        const Vector scaled = coefficients.cwiseProduct(fourier::derivative_multiplier(grid, alpha));
        out.emplace_back(grid, fourier::inverse(grid, scaled));
    }
    return out;
}

GridFunction partial_derivative(const GridFunction& f, const MultiIndex& alpha) {
    return partial_derivatives(f, {alpha}).front();
}

GradientBlock gradient_block(const GridFunction& f, int order) {
    GradientBlock block;
    block.indices = multi_indices(f.grid().dimension(), order);
    block.components = partial_derivatives(f, block.indices);
    block.magnitude = RealVector::Zero(static_cast<Eigen::Index>(f.size()));
    for (const auto& c : block.components) block.magnitude += c.values().cwiseAbs2();
    block.magnitude = block.magnitude.cwiseSqrt();
    return block;
}

double lp_quasinorm(const TorusGrid& grid, const RealVector& values, double p) {
    if (!(p > 0.0)) throw InvalidArgument("L^p exponent must be positive");
    double sum = 0.0;
    for (double v : values) sum += std::pow(std::abs(v), p);
    return std::pow(grid.cell_volume() * sum, 1.0 / p);
}

double lp_quasinorm(const GridFunction& f, double p) {
    return lp_quasinorm(f.grid(), f.magnitude(), p);
}

SiteSet ball_indices(const TorusGrid& grid, std::size_t center, double radius) {
    if (!(radius > 0.0)) throw InvalidArgument("ball radius must be positive");
    SiteSet set;
    if (radius >= 0.5) {
        set.clamped = true;
        set.sites.resize(grid.total_points());
        std::iota(set.sites.begin(), set.sites.end(), std::size_t{0});
        return set;
    }
    const double scaled = radius * grid.points_per_axis();
    const double bound = scaled * scaled * (1.0 - 1e-12);
    for (std::size_t y = 0; y < grid.total_points(); ++y)
        if (static_cast<double>(grid.squared_lattice_distance(y, center)) < bound) set.sites.push_back(y);
    return set;
}

SiteSet annulus_indices(const TorusGrid& grid, std::size_t center, double radius, int ring) {
    if (ring < 0) throw InvalidArgument("annulus index must be non-negative");
    SiteSet outer = ball_indices(grid, center, std::ldexp(radius, ring));
    if (ring == 0) return outer;
    const SiteSet inner = ball_indices(grid, center, std::ldexp(radius, ring - 1));
    SiteSet set;
    set.clamped = outer.clamped;
    std::set_difference(outer.sites.begin(), outer.sites.end(), inner.sites.begin(), inner.sites.end(),
                        std::back_inserter(set.sites));
    return set;
}

double measure(const TorusGrid& grid, const SiteSet& set) {
    return grid.cell_volume() * static_cast<double>(set.sites.size());
}

GridFunction hardy_littlewood_maximal(const GridFunction& f) {
    const auto& grid = f.grid();
    const std::size_t total = grid.total_points();
    const RealVector magnitude = f.magnitude();
    RealVector result = magnitude;
    const int radii = grid.points_per_axis() / 2;
    for (int r = 1; r <= radii; ++r) {
        const double radius = r * grid.spacing();
        const SiteSet offsets = ball_indices(grid, 0, radius);
        const double count = static_cast<double>(offsets.sites.size());
        // Average over every ball B(c, radius), then credit it to each member.
        for (std::size_t c = 0; c < total; ++c) {
            double sum = 0.0;
            for (std::size_t o : offsets.sites) sum += magnitude[static_cast<Eigen::Index>(grid.translate(c, o))];
            const double average = sum / count;
            for (std::size_t o : offsets.sites) {
                auto& slot = result[static_cast<Eigen::Index>(grid.translate(c, o))];
                slot = std::max(slot, average);
            }
        }
    }
    return GridFunction(grid, result.cast<Complex>());
}

}  // namespace hlab

namespace hlab {

TrigSeries random_trig_series(int dimension, std::uint64_t seed, int band, double smoothness) {
    if (band < 0) throw InvalidArgument("band must be non-negative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    TrigSeries series{dimension, band, {}};
    const int band1 = dimension == 2 ? band : 0;
    for (int k0 = -band; k0 <= band; ++k0) {
        for (int k1 = -band1; k1 <= band1; ++k1) {
            const double amplitude = std::pow(1.0 + std::hypot(k0, k1), -smoothness);
            const double re = normal(rng);
            const double im = normal(rng);
            series.coefficients.emplace_back(re * amplitude, im * amplitude);
        }
    }
    return series;
}

GridFunction TrigSeries::sample(const TorusGrid& grid) const {
    if (grid.dimension() != dimension) throw InvalidArgument("series dimension does not match grid");
    const int band1 = dimension == 2 ? band : 0;
    Vector values = Vector::Zero(static_cast<Eigen::Index>(grid.total_points()));
    std::size_t index = 0;
    for (int k0 = -band; k0 <= band; ++k0) {
        for (int k1 = -band1; k1 <= band1; ++k1, ++index) {
            const Complex c = coefficients[index];
            for (std::size_t s = 0; s < grid.total_points(); ++s) {
                const auto x = grid.position(s);
                const double phase = 2.0 * std::numbers::pi * (k0 * x[0] + k1 * x[1]);
                values[static_cast<Eigen::Index>(s)] += c * std::polar(1.0, phase);
            }
        }
    }
    return GridFunction(grid, std::move(values));
}

double TrigSeries::absolute_sum() const {
    double sum = 0.0;
    for (const auto& c : coefficients) sum += std::abs(c);
    return sum;
}

GridFunction band_limited_random(const TorusGrid& grid, std::uint64_t seed, int band, double smoothness) {
    return random_trig_series(grid.dimension(), seed, band, smoothness).sample(grid);
}

}  // namespace hlab
