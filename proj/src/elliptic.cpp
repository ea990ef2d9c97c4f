#include "hlab/elliptic.hpp"

#include "hlab/error.hpp"
#include "hlab/fourier.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace hlab {
namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void validate_half_order(int m) {
    if (m < 1) throw InvalidArgument("half order m must be at least 1, got " + std::to_string(m));
}

// Derivative multipliers for every |alpha| = m, shared between the apply,
// assembly and form routines.
struct Pipeline {
    Pipeline(const TorusGrid& grid, const std::vector<MultiIndex>& indices) : grid(grid) {
        for (const auto& alpha : indices) multipliers.push_back(fourier::derivative_multiplier(grid, alpha));
    }

    std::vector<Vector> derivatives(const Vector& values) const {
        const Vector hat = fourier::forward(grid, values);
        std::vector<Vector> out;
        out.reserve(multipliers.size());
        for (const auto& mult : multipliers) out.push_back(fourier::inverse(grid, hat.cwiseProduct(mult)));
        return out;
    }

    // (-1)^m sum_alpha d^alpha h_alpha
    Vector divergence(const std::vector<Vector>& h, int m) const {
        Vector hat = Vector::Zero(static_cast<Eigen::Index>(grid.total_points()));
        for (std::size_t a = 0; a < h.size(); ++a)
            hat += fourier::forward(grid, h[a]).cwiseProduct(multipliers[a]);
        Vector out = fourier::inverse(grid, hat);
        if (m % 2 != 0) out = -out;
        return out;
    }

    TorusGrid grid;
    std::vector<Vector> multipliers;
};

// h_alpha = sum_beta a_{alpha beta} g_beta
std::vector<Vector> contract(const CoefficientField& a, const std::vector<Vector>& g) {
    const std::size_t D = a.block_size();
    std::vector<Vector> h(D, Vector::Zero(static_cast<Eigen::Index>(a.grid().total_points())));
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j) h[i] += a.entry(i, j).values().cwiseProduct(g[j]);
    return h;
}

double block_norm(const std::vector<Vector>& g, double cell) {
    double sum = 0.0;
    for (const auto& v : g) sum += v.squaredNorm();
    return std::sqrt(sum * cell);
}

Complex block_inner(const std::vector<Vector>& h, const std::vector<Vector>& g, double cell) {
    Complex sum = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) sum += g[i].dot(h[i]);
    return sum * cell;
}

}  // namespace

CoefficientField::CoefficientField(int half_order, TorusGrid grid, std::vector<GridFunction> entries)
    : m_(half_order), grid_(grid), indices_(), entries_(std::move(entries)), sup_bound_(0.0) {
    validate_half_order(half_order);
    indices_ = multi_indices(grid_.dimension(), m_);
    const std::size_t D = indices_.size();
    if (entries_.size() != D * D)
        throw InvalidArgument("coefficient tensor needs " + std::to_string(D * D) + " entries, got " +
                              std::to_string(entries_.size()));
    for (const auto& e : entries_) {
        if (!(e.grid() == grid_)) throw InvalidArgument("coefficient entry lives on a different grid");
        sup_bound_ = std::max(sup_bound_, e.magnitude().maxCoeff());
    }
}

Matrix CoefficientField::pointwise(std::size_t site) const {
    const auto D = static_cast<Eigen::Index>(block_size());
    Matrix out(D, D);
    for (Eigen::Index i = 0; i < D; ++i)
        for (Eigen::Index j = 0; j < D; ++j)
            out(i, j) = entry(static_cast<std::size_t>(i), static_cast<std::size_t>(j))[site];
    return out;
}

CoefficientField CoefficientField::operator+(const CoefficientField& other) const {
    if (m_ != other.m_ || !(grid_ == other.grid_))
        throw InvalidArgument("coefficient fields differ in order or grid");
    std::vector<GridFunction> sum;
    sum.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) sum.push_back(entries_[i] + other.entries_[i]);
    return CoefficientField(m_, grid_, std::move(sum));
}

CoefficientField constant_coefficients(int half_order, const TorusGrid& grid, const Matrix& value) {
    validate_half_order(half_order);
    const auto D = static_cast<Eigen::Index>(multi_indices(grid.dimension(), half_order).size());
    if (value.rows() != D || value.cols() != D)
        throw InvalidArgument("constant tensor must be " + std::to_string(D) + "x" + std::to_string(D));
    std::vector<GridFunction> entries;
    for (Eigen::Index i = 0; i < D; ++i)
        for (Eigen::Index j = 0; j < D; ++j) entries.push_back(GridFunction::constant(grid, value(i, j)));
    return CoefficientField(half_order, grid, std::move(entries));
}

CoefficientField polyharmonic_coefficients(int half_order, const TorusGrid& grid) {
    validate_half_order(half_order);
    const auto indices = multi_indices(grid.dimension(), half_order);
    const auto D = static_cast<Eigen::Index>(indices.size());
    Matrix W = Matrix::Zero(D, D);
    for (Eigen::Index i = 0; i < D; ++i) W(i, i) = multinomial_weight(indices[static_cast<std::size_t>(i)]);
    return constant_coefficients(half_order, grid, W);
}

CoefficientField random_elliptic_coefficients(int half_order, const TorusGrid& grid, double delta,
                                              std::uint64_t seed, int band) {
    validate_half_order(half_order);
    if (!(delta >= 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in [0, 1)");
    if (band < 0) throw InvalidArgument("coefficient band must be non-negative");
    band = std::min(band, grid.points_per_axis() / 2 - 1);
    const CoefficientField base = polyharmonic_coefficients(half_order, grid);
    const std::size_t count = base.entries().size();

    std::vector<TrigSeries> series;
    double bound = 0.0;
    for (std::size_t e = 0; e < count; ++e) {
        series.push_back(random_trig_series(grid.dimension(), mix_seed(seed, e), band));
        bound += std::pow(series.back().absolute_sum(), 2);
    }
    // sqrt(sum_e (sum_k |c_k|)^2) bounds the Frobenius norm of P(x), hence its spectral norm.
    bound = std::sqrt(bound);
    std::vector<GridFunction> entries;
    for (std::size_t e = 0; e < count; ++e) {
        GridFunction p = series[e].sample(grid);
        p *= bound > 0.0 ? delta / bound : 0.0;
        entries.push_back(base.entries()[e] + p);
    }
    return CoefficientField(half_order, grid, std::move(entries));
}

StrongEllipticityReport check_strong_ellipticity(const CoefficientField& coefficients) {
    StrongEllipticityReport report;
    report.lambda1 = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < coefficients.grid().total_points(); ++s) {
        const Matrix A = coefficients.pointwise(s);
        const Matrix H = 0.5 * (A + A.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> solver(H, Eigen::EigenvaluesOnly);
        const double lowest = solver.eigenvalues().minCoeff();
        if (lowest < report.lambda1) {
            report.lambda1 = lowest;
            report.worst_site = s;
        }
    }
    report.certified = report.lambda1 > 0.0;
    return report;
}

GridFunction random_probe(const TorusGrid& grid, std::uint64_t seed, int band) {
    if (band < 0) throw InvalidArgument("probe band must be non-negative");
    if (band > 0) return band_limited_random(grid, seed, std::min(band, grid.points_per_axis() / 2 - 1)).mean_zero();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int nyquist = -grid.points_per_axis() / 2;
    Vector hat(static_cast<Eigen::Index>(grid.total_points()));
    for (std::size_t bin = 0; bin < grid.total_points(); ++bin) {
        const auto k = fourier::bin_frequency(grid, bin);
        const double re = normal(rng);
        const double im = normal(rng);
        const bool dropped = (k[0] == 0 && k[1] == 0) || k[0] == nyquist ||
                             (grid.dimension() == 2 && k[1] == nyquist);
        hat[static_cast<Eigen::Index>(bin)] = dropped ? Complex(0.0) : Complex(re, im);
    }
    return GridFunction(grid, fourier::inverse(grid, hat));
}

GridFunction apply_operator(const CoefficientField& coefficients, const GridFunction& f) {
    if (!(f.grid() == coefficients.grid())) throw InvalidArgument("function and coefficients live on different grids");
    const Pipeline pipe(coefficients.grid(), coefficients.indices());
    const auto h = contract(coefficients, pipe.derivatives(f.values()));
    return GridFunction(f.grid(), pipe.divergence(h, coefficients.half_order()));
}

Complex sesquilinear_form(const CoefficientField& coefficients, const GridFunction& f, const GridFunction& g) {
    if (!(f.grid() == coefficients.grid()) || !(g.grid() == coefficients.grid()))
        throw InvalidArgument("functions and coefficients live on different grids");
    const Pipeline pipe(coefficients.grid(), coefficients.indices());
    const auto h = contract(coefficients, pipe.derivatives(f.values()));
    return block_inner(h, pipe.derivatives(g.values()), f.grid().cell_volume());
}

Complex sesquilinear_form(const EllipticOperator& op, const GridFunction& f, const GridFunction& g) {
    return sesquilinear_form(op.coefficients(), f, g);
}

double homogeneous_sobolev_norm(const GridFunction& f, int order) {
    const auto block = gradient_block(f, order);
    return std::sqrt(block.magnitude.squaredNorm() * f.grid().cell_volume());
}

FormEstimate check_form_ellipticity(const CoefficientField& coefficients, int trials, std::uint64_t seed) {
    if (trials < 1) throw InvalidArgument("form check needs at least one probe");
    const auto& grid = coefficients.grid();
    const double cell = grid.cell_volume();
    const Pipeline pipe(grid, coefficients.indices());
    constexpr int bands[] = {0, 2, 4, 8};

    // Axis and diagonal Fourier modes first: they attain the extremes of
    // constant tensors, which random probes only approach.
    std::vector<GridFunction> probes;
    const int n = grid.dimension();
    const std::vector<std::array<int, 2>> directions =
        n == 1 ? std::vector<std::array<int, 2>>{{1, 0}} : std::vector<std::array<int, 2>>{{1, 0}, {0, 1}, {1, 1}, {1, -1}};
    for (const auto& d : directions)
        for (int k : {1, 2}) {
            if (k >= grid.points_per_axis() / 2) continue;
            Vector v(static_cast<Eigen::Index>(grid.total_points()));
            for (std::size_t s = 0; s < grid.total_points(); ++s) {
                const auto x = grid.position(s);
                v[static_cast<Eigen::Index>(s)] = std::polar(1.0, 2.0 * M_PI * k * (d[0] * x[0] + d[1] * x[1]));
            }
            probes.emplace_back(grid, std::move(v));
        }
    for (int t = 0; t < trials; ++t)
        probes.push_back(random_probe(grid, mix_seed(seed, static_cast<std::uint64_t>(t)), bands[t % 4]));

    std::vector<std::vector<Vector>> g, h;
    std::vector<double> norms;
    for (const auto& probe : probes) {
        g.push_back(pipe.derivatives(probe.values()));
        h.push_back(contract(coefficients, g.back()));
        norms.push_back(block_norm(g.back(), cell));
    }

    const int total = static_cast<int>(probes.size());
    FormEstimate estimate;
    estimate.trials = total;
    estimate.seed = seed;
    estimate.lambda0_hat = std::numeric_limits<double>::infinity();
    for (int t = 0; t < total; ++t) {
        const auto i = static_cast<std::size_t>(t);
        const auto j = static_cast<std::size_t>((t + 1) % total);
        const double self = std::real(block_inner(h[i], g[i], cell)) / (norms[i] * norms[i]);
        estimate.lambda0_hat = std::min(estimate.lambda0_hat, self);
        const double diag = std::abs(block_inner(h[i], g[i], cell)) / (norms[i] * norms[i]);
        const double cross = std::abs(block_inner(h[i], g[j], cell)) / (norms[i] * norms[j]);
        estimate.Lambda0_hat = std::max({estimate.Lambda0_hat, diag, cross});
    }
    return estimate;
}

FormEstimate check_form_ellipticity(const EllipticOperator& op, int trials, std::uint64_t seed) {
    return check_form_ellipticity(op.coefficients(), trials, seed);
}

EllipticOperator assemble(const CoefficientField& coefficients, int form_trials, std::uint64_t form_seed) {
    const auto& grid = coefficients.grid();
    const std::size_t total = grid.total_points();
    if (total > kMaxAssemblyPoints)
        throw InvalidArgument("dense assembly is limited to " + std::to_string(kMaxAssemblyPoints) +
                              " points, grid has " + std::to_string(total));
    EllipticOperator op(coefficients);
    const Pipeline pipe(grid, coefficients.indices());
    const int m = coefficients.half_order();

    // d^beta e_j is the translate of d^beta e_0 by x_j.
    Vector unit = Vector::Zero(static_cast<Eigen::Index>(total));
    unit[0] = 1.0;
    const auto base = pipe.derivatives(unit);
    const auto n = static_cast<Eigen::Index>(total);
    op.matrix_.resize(n, n);
    std::vector<Vector> g(base.size(), Vector(n));
    for (std::size_t j = 0; j < total; ++j) {
        for (std::size_t b = 0; b < base.size(); ++b)
            for (std::size_t x = 0; x < total; ++x) {
                const auto c = grid.coords(x);
                const auto cj = grid.coords(j);
                g[b][static_cast<Eigen::Index>(x)] = base[b][static_cast<Eigen::Index>(grid.site(c[0] - cj[0], c[1] - cj[1]))];
            }
        op.matrix_.col(static_cast<Eigen::Index>(j)) = pipe.divergence(contract(coefficients, g), m);
    }
    op.norm_ = op.matrix_.norm();
    op.form_ = check_form_ellipticity(coefficients, form_trials, form_seed);
    op.strong_ = check_strong_ellipticity(coefficients);
    if (op.strong_.certified) op.pointwise_lower_ = op.strong_.lambda1;
    return op;
}

double EllipticOperator::type_angle() const noexcept {
    if (!(form_.lambda0_hat > 0.0)) return std::numbers::pi / 2.0;
    return std::atan(form_.Lambda0_hat / form_.lambda0_hat);
}

GridFunction EllipticOperator::apply(const GridFunction& f) const {
    if (!(f.grid() == grid())) throw InvalidArgument("function lives on a different grid");
    return GridFunction(grid(), matrix_ * f.values());
}

CoefficientField adjoint_coefficients(const CoefficientField& coefficients) {
    const std::size_t D = coefficients.block_size();
    std::vector<GridFunction> entries;
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j)
            entries.emplace_back(coefficients.grid(), coefficients.entry(j, i).values().conjugate());
    return CoefficientField(coefficients.half_order(), coefficients.grid(), std::move(entries));
}

EllipticOperator adjoint(const EllipticOperator& op) {
    return assemble(adjoint_coefficients(op.coefficients()), op.form_estimate().trials, op.form_estimate().seed);
}

}  // namespace hlab
