#include "hlab/hardy.hpp"

#include "hlab/error.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hlab {
namespace {

double restricted_norm(const GridFunction& f, const SiteSet& set) {
    double sum = 0.0;
    for (std::size_t s : set.sites) sum += std::norm(f[s]);
    return std::sqrt(sum * f.grid().cell_volume());
}

GridFunction scaled_power(const EllipticOperator& op, const GridFunction& b, int power, double radius) {
    const double scale = std::pow(radius, 2 * op.half_order());
    Vector v = b.values();
    for (int i = 0; i < power; ++i) v = scale * (op.matrix() * v);
    return GridFunction(b.grid(), std::move(v));
}

}  // namespace

std::vector<double> hardy_quasinorms(const SpectralFactorization& fact, const std::vector<GridFunction>& fs, double p,
                                     const TimeGrid& times, std::vector<std::string>* warnings) {
    if (!(p > 0.0)) throw InvalidArgument("Hardy exponent must be positive");
    std::vector<GridFunction> centred;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const double scale = fs[i].magnitude().maxCoeff();
        if (std::abs(fs[i].mean()) > 1e-10 * scale) {
            if (warnings) {
                std::ostringstream out;
                out << "member " << i << ": mean " << std::abs(fs[i].mean()) << " removed before evaluating S_L";
                warnings->push_back(out.str());
            }
            centred.push_back(fs[i].mean_zero());
        } else {
            centred.push_back(fs[i]);
        }
    }
    std::vector<double> out;
    const auto& grid = fact.source().grid();
    for (const auto& s : square_functions(fact, centred, SquareKind::Vertical, 1, 1.0, times))
        out.push_back(lp_quasinorm(grid, s, p));
    return out;
}

double hardy_quasinorm(const SpectralFactorization& fact, const GridFunction& f, double p, const TimeGrid& times,
                       std::vector<std::string>* warnings) {
    return hardy_quasinorms(fact, {f}, p, times, warnings).front();
}

double MoleculeBounds::worst() const {
    double w = 0.0;
    for (const auto& row : entries)
        for (double v : row) w = std::max(w, v);
    return w;
}

int max_usable_ring(double radius) {
    int i = -1;
    while (std::ldexp(radius, i + 1) < 0.5) ++i;
    return i;
}

MoleculeBounds verify_molecule(const SpectralFactorization& fact, const GridFunction& candidate,
                               const GridFunction& witness, const Ball& ball, double p, int M, double epsilon) {
    if (M < 0) throw InvalidArgument("vanishing order must be non-negative");
    if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("molecule exponent must lie in (0, 1]");
    const auto& op = fact.source();
    const auto& grid = op.grid();
    MoleculeBounds bounds;
    bounds.max_ring = max_usable_ring(ball.radius);
    if (bounds.max_ring < 0) throw InvalidArgument("ball radius must be below 1/2");

    std::vector<SiteSet> rings;
    std::vector<double> weights;
    for (int i = 0; i <= bounds.max_ring + 1; ++i) {
        rings.push_back(annulus_indices(grid, ball.center, ball.radius, i));
        const double dilated = measure(grid, ball_indices(grid, ball.center, std::ldexp(ball.radius, i)));
        weights.push_back(std::exp2(-i * epsilon) * std::pow(dilated, 0.5 - 1.0 / p));
    }
    const GridFunction top = scaled_power(op, witness, M, ball.radius);
    const double norm = l2_norm(candidate);
    bounds.witness_mismatch = norm > 0.0 ? l2_norm(candidate - top) / norm : l2_norm(top);
    for (int l = 0; l <= M; ++l) {
        const GridFunction g = l == 0 ? candidate : scaled_power(op, witness, M - l, ball.radius);
        std::vector<double> row;
        for (std::size_t i = 0; i < rings.size(); ++i) row.push_back(restricted_norm(g, rings[i]) / weights[i]);
        bounds.entries.push_back(std::move(row));
    }
    return bounds;
}

Molecule generate_molecule(const SpectralFactorization& fact, const Ball& ball, double p, int M, double epsilon,
                           std::uint64_t seed) {
    const auto& op = fact.source();
    const auto& grid = op.grid();
    const int n = grid.dimension();
    const int m = op.half_order();
    const double threshold = n / (2.0 * m) * (1.0 / p - 0.5);
    if (!(M > threshold)) {
        std::ostringstream out;
        out << "vanishing order M = " << M << " must exceed n/(2m)(1/p - 1/2) = " << threshold;
        throw InvalidArgument(out.str());
    }
    if (ball.radius < 4.0 * grid.spacing()) throw InvalidArgument("molecule ball radius must be at least 4h");
    if (!(epsilon > 0.0)) throw InvalidArgument("decay rate epsilon must be positive");
    const int rings = max_usable_ring(ball.radius);
    if (rings < 1) {
        std::ostringstream out;
        out << "ball of radius " << ball.radius << " wraps the torus after ring " << rings
            << "; no annulus decay can be certified";
        throw NumericalFailure(out.str());
    }

    const CutoffDescriptor bump = CutoffDescriptor::standard(0);
    const GridFunction noise = band_limited_random(grid, seed, std::min(4, grid.points_per_axis() / 2 - 1));
    Vector b(static_cast<Eigen::Index>(grid.total_points()));
    for (std::size_t s = 0; s < grid.total_points(); ++s)
        b[static_cast<Eigen::Index>(s)] = bump.profile(2.0 * grid.distance(s, ball.center) / ball.radius) * noise[s];
    GridFunction witness(grid, std::move(b));
    GridFunction sample = scaled_power(op, witness, M, ball.radius);

    const MoleculeBounds raw = verify_molecule(fact, sample, witness, ball, p, M, epsilon);
    const double worst = raw.worst();
    if (!(worst > 0.0)) throw NumericalFailure("molecule witness vanished identically");
    const double c = 1.0 / worst;
    sample *= c;
    witness *= c;
    Molecule molecule{sample, ball, p, M, epsilon, witness, verify_molecule(fact, sample, witness, ball, p, M, epsilon)};
    return molecule;
}

GridFunction MolecularRepresentation::sum() const {
    if (molecules.empty()) throw InvalidArgument("empty molecular representation");
    if (molecules.size() != coefficients.size()) throw InvalidArgument("one coefficient per molecule is required");
    GridFunction total = GridFunction::zeros(molecules.front().sample.grid());
    for (std::size_t j = 0; j < molecules.size(); ++j) total += coefficients[j] * molecules[j].sample;
    return total;
}

double MolecularRepresentation::p_sum() const {
    double sum = 0.0;
    for (const auto& c : coefficients) sum += std::pow(std::abs(c), p);
    return sum;
}

double calderon_constant(int m, int M) {
    if (m < 1 || M < 0) throw InvalidArgument("Calderon constant needs m >= 1 and M >= 0");
    const double a = 2.0 * m * (M + 2);
    auto integrand = [&](double t) {
        const double s = std::pow(t, 2.0 * m);
        return s > 400.0 ? 0.0 : std::pow(t, a - 1.0) * std::exp(-2.0 * s);
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    double error = 0.0;
    const double value = integrator.integrate(integrand, 1e-12, &error);
    if (!(value > 0.0) || error > 1e-10 * value) throw NumericalFailure("Calderon normalisation integral did not converge");
    return 1.0 / value;
}

GridFunction calderon_reproduce(const SpectralFactorization& fact, const GridFunction& f, int M,
                                const TimeGrid& times) {
    require_mean_zero(f, "calderon_reproduce");
    const int m = fact.source().half_order();
    const double C = calderon_constant(m, M);
    Symbol symbol;
    for (double t : times.samples) {
        const double s = std::pow(t, 2 * m);
        symbol = symbol + Symbol({SymbolTerm{C * times.log_weight * std::pow(s, M + 2), static_cast<double>(M + 2),
                                             2.0 * s, 1.0, 0.0}});
    }
    return fact.apply(symbol, f);
}

}  // namespace hlab
