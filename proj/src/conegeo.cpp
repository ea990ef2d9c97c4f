#include "hlab/conegeo.hpp"

#include "hlab/error.hpp"

#include <cmath>
#include <string>

namespace hlab {

TimeGrid make_time_grid(double t_min, double t_max, int levels) {
    if (!(t_min > 0.0)) throw InvalidArgument("t_min must be positive");
    if (!(t_max > t_min)) throw InvalidArgument("t_max must exceed t_min");
    if (levels < kMinTimeLevels)
        throw InvalidArgument("time grid needs at least " + std::to_string(kMinTimeLevels) + " levels, got " +
                              std::to_string(levels));
    TimeGrid grid;
    grid.t_min = t_min;
    grid.t_max = t_max;
    grid.levels = levels;
    grid.log_weight = std::log(t_max / t_min) / (levels - 1);
    grid.ratio = std::exp(grid.log_weight);
    for (int j = 0; j < levels; ++j) grid.samples.push_back(t_min * std::exp(j * grid.log_weight));
    grid.samples.back() = t_max;
    return grid;
}

TimeGrid default_time_grid(const TorusGrid& grid, int levels) {
    return make_time_grid(grid.spacing(), 0.25, levels);
}

ConeSampling::ConeSampling(const TorusGrid& grid, const TimeGrid& times, double aperture)
    : grid_(grid), times_(times), aperture_(aperture) {
    if (!(aperture > 0.0)) throw InvalidArgument("aperture must be positive");
    for (double t : times_.samples) {
        SiteSet ball = ball_indices(grid_, 0, aperture * t);
        offsets_.push_back(std::move(ball.sites));
        clamped_.push_back(ball.clamped);
    }
}

TentField::TentField(const TorusGrid& grid, const TimeGrid& times, std::vector<Vector> levels)
    : grid_(grid), times_(times), levels_(std::move(levels)) {
    if (levels_.size() != times_.samples.size()) throw InvalidArgument("tent field needs one slice per time level");
    for (const auto& slice : levels_) {
        if (static_cast<std::size_t>(slice.size()) != grid_.total_points())
            throw InvalidArgument("tent field slice has the wrong length");
        if (!slice.allFinite()) throw InvalidArgument("tent field values must be finite");
    }
}

std::vector<double> TentField::level_energies() const {
    std::vector<double> out;
    for (const auto& slice : levels_) out.push_back(grid_.cell_volume() * slice.squaredNorm());
    return out;
}

TentField TentField::operator*(Complex scale) const {
    std::vector<Vector> scaled;
    for (const auto& slice : levels_) scaled.push_back(scale * slice);
    return TentField(grid_, times_, std::move(scaled));
}

std::vector<TentField> build_tent_fields(const SpectralFactorization& fact, const std::vector<GridFunction>& fs,
                                         Generator generator, const TimeGrid& times) {
    if (generator.k < 0) throw InvalidArgument("generator power must be non-negative");
    if (generator.kind == GeneratorKind::PowerSemigroup && generator.k < 1)
        throw InvalidArgument("power generator needs k >= 1");
    const TorusGrid& grid = fact.source().grid();
    const int m = fact.source().half_order();
    const auto n = static_cast<Eigen::Index>(grid.total_points());
    Matrix columns(n, static_cast<Eigen::Index>(fs.size()));
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (!(fs[i].grid() == grid)) throw InvalidArgument("function lives on a different grid");
        columns.col(static_cast<Eigen::Index>(i)) = fs[i].values();
    }

    std::vector<std::vector<Vector>> slices(fs.size());
    for (double t : times.samples) {
        const double s = std::pow(t, 2 * m);
        const Symbol symbol = generator.kind == GeneratorKind::Semigroup ? Symbol::exponential(s)
                                                                        : Symbol::power_exponential(generator.k, s);
        const Matrix values = fact.apply(symbol, columns);
        for (std::size_t i = 0; i < fs.size(); ++i) {
            Vector slice = values.col(static_cast<Eigen::Index>(i));
            if (generator.kind == GeneratorKind::GradientPower) {
                const auto block = gradient_block(GridFunction(grid, std::move(slice)), m);
                slice = (std::pow(t, m) * block.magnitude).cast<Complex>();
            }
            slices[i].push_back(std::move(slice));
        }
    }
    std::vector<TentField> out;
    for (auto& s : slices) out.emplace_back(grid, times, std::move(s));
    return out;
}

TentField build_tent_field(const SpectralFactorization& fact, const GridFunction& f, Generator generator,
                           const TimeGrid& times) {
    return build_tent_fields(fact, {f}, generator, times).front();
}

double a_functional(const TentField& F, const ConeSampling& cone, std::size_t x) {
    const auto& grid = F.grid();
    const auto& times = F.time_grid();
    const int n = grid.dimension();
    double sum = 0.0;
    for (int j = 0; j < times.levels; ++j) {
        const Vector& slice = F.level(j);
        double level = 0.0;
        for (std::size_t o : cone.offsets(j)) level += std::norm(slice[static_cast<Eigen::Index>(grid.translate(x, o))]);
        sum += level / std::pow(times.samples[static_cast<std::size_t>(j)], n);
    }
    return std::sqrt(times.log_weight * grid.cell_volume() * sum);
}

RealVector a_functional(const TentField& F, const ConeSampling& cone) {
    if (!(F.grid() == cone.grid()) || F.time_grid().samples != cone.time_grid().samples)
        throw InvalidArgument("tent field and cone sampling disagree on grid or time levels");
    RealVector out(static_cast<Eigen::Index>(F.grid().total_points()));
    for (std::size_t x = 0; x < F.grid().total_points(); ++x) out[static_cast<Eigen::Index>(x)] = a_functional(F, cone, x);
    return out;
}

double tent_quasinorm(const TentField& F, double p, const ConeSampling& cone) {
    return lp_quasinorm(F.grid(), a_functional(F, cone), p);
}

}  // namespace hlab
