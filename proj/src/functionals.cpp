#include "hlab/functionals.hpp"

#include "hlab/error.hpp"
#include "hlab/fourier.hpp"

#include <algorithm>
#include <cmath>

namespace hlab {
namespace {

double smooth_step(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

GridFunction as_grid_function(const TorusGrid& grid, const RealVector& values) {
    return GridFunction(grid, values.cast<Complex>());
}

// sum_{o in offsets} values(y + o) for every y.
RealVector ball_sums(const TorusGrid& grid, const RealVector& values, const std::vector<std::size_t>& offsets) {
    RealVector out = RealVector::Zero(values.size());
    for (std::size_t y = 0; y < grid.total_points(); ++y) {
        double sum = 0.0;
        for (std::size_t o : offsets) sum += values[static_cast<Eigen::Index>(grid.translate(y, o))];
        out[static_cast<Eigen::Index>(y)] = sum;
    }
    return out;
}

// Same sums through the FFT. The offset set is symmetric, so the correlation
// equals a convolution with its indicator.
RealVector ball_sums_fft(const TorusGrid& grid, const RealVector& values, const Vector& indicator_hat) {
    const Vector hat = fourier::forward(grid, values.cast<Complex>());
    const double total = static_cast<double>(grid.total_points());
    return (fourier::inverse(grid, hat.cwiseProduct(indicator_hat)).real() * total).cwiseMax(0.0);
}

// Semigroup slices u_j = e^{-t_j^{2m} L} f for every function, level-major.
std::vector<Matrix> semigroup_slices(const SpectralFactorization& fact, const std::vector<GridFunction>& fs,
                                     const TimeGrid& times) {
    const auto& grid = fact.source().grid();
    const int m = fact.source().half_order();
    Matrix columns(static_cast<Eigen::Index>(grid.total_points()), static_cast<Eigen::Index>(fs.size()));
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (!(fs[i].grid() == grid)) throw InvalidArgument("function lives on a different grid");
        columns.col(static_cast<Eigen::Index>(i)) = fs[i].values();
    }
    std::vector<Matrix> out;
    for (double t : times.samples) out.push_back(fact.apply(Symbol::exponential(std::pow(t, 2 * m)), columns));
    return out;
}

RealVector gradient_density(const GridFunction& u, int m, double t, bool augmented) {
    RealVector density = u.values().cwiseAbs2();
    if (!augmented) return density;
    for (int k = 1; k < m; ++k) {
        const auto block = gradient_block(u, k);
        density += std::pow(t, 2 * k) * block.magnitude.cwiseAbs2();
    }
    return density;
}

RealVector cutoff_maximal(const TorusGrid& grid, const Matrix& slices_for_f, const ConeSampling& cone,
                          const TimeGrid& times, int m, const CutoffDescriptor& cutoff,
                          const std::vector<Vector>& indicator_hats) {
    const int n = grid.dimension();
    const std::size_t total = grid.total_points();
    RealVector out = RealVector::Zero(static_cast<Eigen::Index>(total));
    for (int j = 0; j < times.levels; ++j) {
        const double t = times.samples[static_cast<std::size_t>(j)];
        const double scale = grid.cell_volume() / std::pow(cone.aperture() * t, n);
        const Vector u = slices_for_f.col(j);
        for (std::size_t x = 0; x < total; ++x) {
            Vector product(static_cast<Eigen::Index>(total));
            for (std::size_t z = 0; z < total; ++z)
                product[static_cast<Eigen::Index>(z)] = cutoff.profile(grid.distance(z, x) / t) * u[static_cast<Eigen::Index>(z)];
            RealVector density;
            if (m == 1) {
                density = product.cwiseAbs2();
            } else {
                const auto block = gradient_block(GridFunction(grid, std::move(product)), m - 1);
                density = std::pow(t, 2 * (m - 1)) * block.magnitude.cwiseAbs2();
            }
            const RealVector averages = ball_sums_fft(grid, density, indicator_hats[static_cast<std::size_t>(j)]) * scale;
            double best = out[static_cast<Eigen::Index>(x)];
            for (std::size_t o : cone.offsets(j))
                best = std::max(best, std::sqrt(averages[static_cast<Eigen::Index>(grid.translate(x, o))]));
            out[static_cast<Eigen::Index>(x)] = best;
        }
    }
    return out;
}

}  // namespace

double CutoffDescriptor::profile(double s) const {
    s = std::abs(s);
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    const double a = smooth_step(2.0 - s);
    return a / (a + smooth_step(s - 1.0));
}

CutoffDescriptor CutoffDescriptor::standard(int max_order) {
    if (max_order < 0) throw InvalidArgument("derivative order must be non-negative");
    CutoffDescriptor d;
    d.max_order = max_order;
    // Finite-difference tables of the profile on [0, 2.5].
    const int samples = 20001;
    const double step = 2.5 / (samples - 1);
    std::vector<double> values(samples);
    for (int i = 0; i < samples; ++i) values[static_cast<std::size_t>(i)] = d.profile(i * step);
    for (int k = 0; k <= max_order; ++k) {
        double bound = 0.0;
        for (double v : values) bound = std::max(bound, std::abs(v));
        d.derivative_bounds.push_back(bound);
        std::vector<double> next(values.size() - 1);
        for (std::size_t i = 0; i + 1 < values.size(); ++i) next[i] = (values[i + 1] - values[i]) / step;
        values = std::move(next);
    }
    return d;
}

SquareKind parse_square_kind(const std::string& name) {
    if (name == "vertical") return SquareKind::Vertical;
    if (name == "lusin") return SquareKind::Lusin;
    throw InvalidArgument("unknown square function kind '" + name + "'");
}

MaximalKind parse_maximal_kind(const std::string& name) {
    if (name == "radial") return MaximalKind::Radial;
    if (name == "nontangential") return MaximalKind::Nontangential;
    if (name == "radial_grad") return MaximalKind::RadialGradient;
    if (name == "nontangential_grad") return MaximalKind::NontangentialGradient;
    if (name == "cutoff") return MaximalKind::Cutoff;
    throw InvalidArgument("unknown maximal function kind '" + name + "'");
}

std::string to_string(MaximalKind kind) {
    switch (kind) {
        case MaximalKind::Radial: return "radial";
        case MaximalKind::Nontangential: return "nontangential";
        case MaximalKind::RadialGradient: return "radial_grad";
        case MaximalKind::NontangentialGradient: return "nontangential_grad";
        case MaximalKind::Cutoff: return "cutoff";
    }
    return "unknown";
}

std::vector<RealVector> square_functions(const SpectralFactorization& fact, const std::vector<GridFunction>& fs,
                                         SquareKind kind, int k, double aperture, const TimeGrid& times) {
    if (kind == SquareKind::Vertical && k < 1)
        throw InvalidArgument("vertical square function needs k >= 1, got " + std::to_string(k));
    if (kind == SquareKind::Lusin && k < 0) throw InvalidArgument("Lusin area function needs k >= 0");
    const Generator generator = kind == SquareKind::Vertical ? Generator::power(k) : Generator::gradient(k);
    const ConeSampling cone(fact.source().grid(), times, aperture);
    std::vector<RealVector> out;
    for (const auto& field : build_tent_fields(fact, fs, generator, times)) out.push_back(a_functional(field, cone));
    return out;
}

GridFunction square_function(const SpectralFactorization& fact, const GridFunction& f, SquareKind kind, int k,
                             double aperture, const TimeGrid& times) {
    return as_grid_function(f.grid(), square_functions(fact, {f}, kind, k, aperture, times).front());
}

std::vector<RealVector> maximal_functions(const SpectralFactorization& fact, const std::vector<GridFunction>& fs,
                                          MaximalKind kind, double aperture, const TimeGrid& times,
                                          const std::optional<CutoffDescriptor>& cutoff) {
    if (kind == MaximalKind::Cutoff && !cutoff) throw InvalidArgument("cutoff maximal function needs a cutoff descriptor");
    const auto& grid = fact.source().grid();
    const int m = fact.source().half_order();
    const int n = grid.dimension();
    const ConeSampling cone(grid, times, aperture);
    const auto slices = semigroup_slices(fact, fs, times);
    const std::size_t total = grid.total_points();

    std::vector<RealVector> out(fs.size(), RealVector::Zero(static_cast<Eigen::Index>(total)));
    if (kind == MaximalKind::Cutoff) {
        std::vector<Vector> indicator_hats;
        for (int j = 0; j < times.levels; ++j) {
            Vector indicator = Vector::Zero(static_cast<Eigen::Index>(total));
            for (std::size_t o : cone.offsets(j)) indicator[static_cast<Eigen::Index>(o)] = 1.0;
            indicator_hats.push_back(fourier::forward(grid, indicator));
        }
        for (std::size_t i = 0; i < fs.size(); ++i) {
            Matrix per_level(static_cast<Eigen::Index>(total), times.levels);
            for (int j = 0; j < times.levels; ++j) per_level.col(j) = slices[static_cast<std::size_t>(j)].col(static_cast<Eigen::Index>(i));
            out[i] = cutoff_maximal(grid, per_level, cone, times, m, *cutoff, indicator_hats);
        }
        return out;
    }

    const bool augmented = kind == MaximalKind::RadialGradient || kind == MaximalKind::NontangentialGradient;
    const bool radial = kind == MaximalKind::Radial || kind == MaximalKind::RadialGradient;
    for (int j = 0; j < times.levels; ++j) {
        const double t = times.samples[static_cast<std::size_t>(j)];
        const double scale = grid.cell_volume() / std::pow(aperture * t, n);
        for (std::size_t i = 0; i < fs.size(); ++i) {
            const GridFunction u(grid, slices[static_cast<std::size_t>(j)].col(static_cast<Eigen::Index>(i)));
            const RealVector averages = ball_sums(grid, gradient_density(u, m, t, augmented), cone.offsets(j)) * scale;
            RealVector& best = out[i];
            for (std::size_t x = 0; x < total; ++x) {
                double value = averages[static_cast<Eigen::Index>(x)];
                if (!radial)
                    for (std::size_t o : cone.offsets(j))
                        value = std::max(value, averages[static_cast<Eigen::Index>(grid.translate(x, o))]);
                best[static_cast<Eigen::Index>(x)] = std::max(best[static_cast<Eigen::Index>(x)], std::sqrt(value));
            }
        }
    }
    return out;
}

GridFunction maximal_function(const SpectralFactorization& fact, const GridFunction& f, MaximalKind kind,
                              double aperture, const TimeGrid& times, const std::optional<CutoffDescriptor>& cutoff) {
    return as_grid_function(f.grid(), maximal_functions(fact, {f}, kind, aperture, times, cutoff).front());
}

}  // namespace hlab
