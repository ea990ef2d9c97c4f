#include "hlab/conegeo.hpp"
#include "hlab/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace hlab;
using hlab::test::fourier_mode;

namespace {

TentField random_field(const TorusGrid& grid, const TimeGrid& times, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<Vector> levels;
    for (int j = 0; j < times.levels; ++j) {
        Vector v(static_cast<Eigen::Index>(grid.total_points()));
        for (auto& z : v) z = Complex(normal(rng), normal(rng));
        levels.push_back(v);
    }
    return TentField(grid, times, levels);
}

// Continuum periodic distance between sites, computed from coordinates.
double torus_distance(const TorusGrid& grid, std::size_t a, std::size_t b) {
    const auto x = grid.position(a), y = grid.position(b);
    double sum = 0.0;
    for (int i = 0; i < grid.dimension(); ++i) {
        double d = std::fabs(x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)]);
        d = std::min(d, 1.0 - d);
        sum += d * d;
    }
    return std::sqrt(sum);
}

}  // namespace

TEST_CASE("time grids") {
    CHECK_THROWS_AS(make_time_grid(0.01, 1.0, 3), InvalidArgument);
    CHECK_THROWS_AS(make_time_grid(1.0, 0.5, 9), InvalidArgument);
    const auto tg = make_time_grid(0.01, 1.0, 9);
    CHECK(tg.ratio == doctest::Approx(std::pow(100.0, 1.0 / 8)));
    CHECK(tg.samples.front() == doctest::Approx(0.01));
    CHECK(tg.samples.back() == doctest::Approx(1.0));
    CHECK(tg.levels * tg.log_weight == doctest::Approx(std::log(100.0) * 9.0 / 8.0));
    const auto d = default_time_grid(make_grid(1, 64));
    CHECK(d.t_min == doctest::Approx(1.0 / 64));
    CHECK(d.t_max == doctest::Approx(0.25));
    CHECK(d.levels == 16);
}

TEST_CASE("cone sections") {
    const auto g = make_grid(2, 16);
    const auto tg = make_time_grid(0.01, 0.8, 8);
    const ConeSampling narrow(g, tg, 1.0), wide(g, tg, 2.0);
    for (int j = 0; j < tg.levels; ++j) {
        CHECK(std::find(narrow.offsets(j).begin(), narrow.offsets(j).end(), 0u) != narrow.offsets(j).end());
        CHECK(narrow.offsets(j).size() <= wide.offsets(j).size());
        if (j > 0) CHECK(narrow.offsets(j - 1).size() <= narrow.offsets(j).size());
    }
    CHECK(narrow.offsets(0).size() == 1);
    CHECK(narrow.clamped(tg.levels - 1));
    CHECK(narrow.offsets(tg.levels - 1).size() == g.total_points());
}

TEST_CASE("tent fields of Fourier modes") {
    const auto g = make_grid(1, 32);
    const auto fact = factorize(assemble(polyharmonic_coefficients(1, g)));
    const auto tg = make_time_grid(0.01, 0.3, 8);
    const auto zero = build_tent_field(fact, GridFunction::constant(g, 1.0), Generator::power(1), tg);
    for (int j = 0; j < tg.levels; ++j) CHECK(zero.level(j).norm() < 1e-10);

    const auto e = fourier_mode(g, 1);
    const auto F = build_tent_field(fact, e, Generator::power(1), tg);
    const auto G = build_tent_field(fact, e, Generator::gradient(0), tg);
    const double l = 4.0 * M_PI * M_PI;
    for (int j = 0; j < tg.levels; ++j) {
        const double t = tg.samples[static_cast<std::size_t>(j)];
        const Vector expected = (l * t * t) * std::exp(-l * t * t) * e.values();
        CHECK(test::max_abs(F.level(j) - expected) < 1e-10);
        CHECK((G.level(j).cwiseAbs().array() - 2.0 * M_PI * t * std::exp(-l * t * t)).abs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("area functional of simple fields") {
    const auto g = make_grid(1, 16);
    const auto tg = make_time_grid(0.01, 1.0, 8);
    const ConeSampling cone(g, tg, 1.0);
    std::vector<Vector> levels(8, Vector::Zero(16));
    const TentField zero(g, tg, levels);
    CHECK(a_functional(zero, cone).maxCoeff() == 0.0);
    CHECK(tent_quasinorm(zero, 1.0, cone) == 0.0);

    REQUIRE(cone.offsets(0).size() == 1);
    levels[0].setOnes();
    const TentField single(g, tg, levels);
    const double expected = std::sqrt(tg.log_weight * g.cell_volume() / tg.samples[0]);
    CHECK((a_functional(single, cone).array() - expected).abs().maxCoeff() < 1e-14);
}

TEST_CASE("area functional matches a brute-force cone sum") {
    for (int n : {1, 2}) {
        const auto g = make_grid(n, n == 1 ? 32 : 12);
        const auto tg = make_time_grid(0.02, 0.6, 9);
        const double aperture = 1.3;
        const ConeSampling cone(g, tg, aperture);
        const auto F = random_field(g, tg, 7 + n);
        const RealVector A = a_functional(F, cone);
        for (std::size_t x = 0; x < g.total_points(); x += 3) {
            double sum = 0.0;
            for (int j = 0; j < tg.levels; ++j) {
                const double t = tg.samples[static_cast<std::size_t>(j)];
                for (std::size_t y = 0; y < g.total_points(); ++y)
                    if (aperture * t >= 0.5 || torus_distance(g, x, y) < aperture * t)
                        sum += tg.log_weight * g.cell_volume() * std::norm(F.level(j)[static_cast<Eigen::Index>(y)]) /
                               std::pow(t, n);
            }
            CHECK(A[static_cast<Eigen::Index>(x)] == doctest::Approx(std::sqrt(sum)).epsilon(1e-12));
        }
    }
}

TEST_CASE("tent quasi-norms") {
    const auto g = make_grid(2, 12);
    const auto tg = make_time_grid(0.02, 0.6, 9);
    const ConeSampling cone(g, tg, 1.0);
    const auto F = random_field(g, tg, 3);
    for (double p : {0.5, 1.0, 2.0})
        CHECK(tent_quasinorm(F * Complex(0.0, -3.0), p, cone) == doctest::Approx(3.0 * tent_quasinorm(F, p, cone)));
    // Fubini: each (y, t_j) is counted once per vertex x whose cone contains it.
    double fubini = 0.0;
    for (int j = 0; j < tg.levels; ++j) {
        const double t = tg.samples[static_cast<std::size_t>(j)];
        const double section = g.cell_volume() * static_cast<double>(cone.offsets(j).size());
        fubini += tg.log_weight * F.level(j).squaredNorm() * g.cell_volume() * section / std::pow(t, 2);
    }
    CHECK(std::pow(tent_quasinorm(F, 2.0, cone), 2) == doctest::Approx(fubini).epsilon(1e-12));
    const auto energies = F.level_energies();
    CHECK(energies[2] == doctest::Approx(F.level(2).squaredNorm() * g.cell_volume()));
}
