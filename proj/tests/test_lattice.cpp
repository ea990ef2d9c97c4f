#include "hlab/error.hpp"
#include "hlab/lattice.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace hlab;
using hlab::test::fourier_mode;

TEST_CASE("grid construction") {
    const auto g = make_grid(1, 8);
    CHECK(g.spacing() == 0.125);
    CHECK(g.total_points() == 8);
    CHECK(make_grid(2, 16).total_points() == 256);
    CHECK_THROWS_AS(make_grid(1, 7), InvalidArgument);
    CHECK_THROWS_AS(make_grid(3, 8), InvalidArgument);
}

TEST_CASE("grid translation and distance are periodic") {
    const auto g = make_grid(2, 8);
    for (std::size_t a = 0; a < g.total_points(); a += 5)
        for (std::size_t b = 0; b < g.total_points(); b += 3) {
            CHECK(g.distance(a, b) == doctest::Approx(g.distance(b, a)));
            CHECK(g.distance(a, b) <= std::sqrt(0.5) + 1e-15);
        }
    CHECK(g.distance(g.site(0, 0), g.site(7, 0)) == doctest::Approx(0.125));
    CHECK(g.translate(g.site(7, 7), g.site(1, 1)) == g.site(0, 0));
}

TEST_CASE("multi-indices") {
    const auto idx = multi_indices(2, 2);
    REQUIRE(idx.size() == 3);
    CHECK(std::is_sorted(idx.begin(), idx.end()));
    double weights = 0.0;
    for (const auto& a : idx) weights += multinomial_weight(a);
    CHECK(weights == doctest::Approx(4.0));  // sum m!/alpha! = n^m
}

TEST_CASE("spectral derivatives of Fourier modes") {
    const auto g = make_grid(1, 16);
    const auto e = fourier_mode(g, 1);
    const auto d1 = partial_derivative(e, {{1}});
    const auto d2 = partial_derivative(e, {{2}});
    CHECK(test::max_abs(d1.values() - Complex(0.0, 2.0 * M_PI) * e.values()) < 1e-12);
    CHECK(test::max_abs(d2.values() + 4.0 * M_PI * M_PI * e.values()) < 1e-11);
    const auto one = GridFunction::constant(g, 1.0);
    for (int k = 1; k <= 3; ++k) CHECK(test::max_abs(partial_derivative(one, {{k}}).values()) < 1e-13);
}

TEST_CASE("gradient block magnitudes") {
    const auto g = make_grid(1, 16);
    CHECK(gradient_block(GridFunction::constant(g, 1.0), 1).magnitude.maxCoeff() < 1e-13);
    const auto block = gradient_block(fourier_mode(g, 1), 2);
    CHECK((block.magnitude.array() - 4.0 * M_PI * M_PI).abs().maxCoeff() < 1e-10);
    CHECK(gradient_block(fourier_mode(g, 1), 0).components.front().values() == fourier_mode(g, 1).values());
}

TEST_CASE("gradient energy matches the Plancherel sum of the series") {
    for (int n : {1, 2}) {
        const auto g = make_grid(n, 16);
        const auto series = random_trig_series(n, 42, 3);
        const auto block = gradient_block(series.sample(g), 1);
        const double energy = block.magnitude.squaredNorm() * g.cell_volume();
        double oracle = 0.0;
        std::size_t i = 0;
        for (int k0 = -3; k0 <= 3; ++k0)
            for (int k1 = (n == 2 ? -3 : 0); k1 <= (n == 2 ? 3 : 0); ++k1, ++i)
                oracle += 4.0 * M_PI * M_PI * (k0 * k0 + k1 * k1) * std::norm(series.coefficients[i]);
        CHECK(energy == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("Lebesgue quasi-norms") {
    const auto g = make_grid(1, 16);
    CHECK(lp_quasinorm(GridFunction::constant(g, 1.0), 2.0) == doctest::Approx(1.0));
    for (double p : {0.5, 1.0, 3.0}) CHECK(lp_quasinorm(GridFunction::constant(g, Complex(3, 4)), p) == doctest::Approx(5.0));
    Vector half = Vector::Zero(16);
    half.head(8).setOnes();
    CHECK(lp_quasinorm(GridFunction(g, half), 1.0) == doctest::Approx(0.5));
}

TEST_CASE("balls and annuli") {
    const auto g = make_grid(1, 8);
    auto ball = ball_indices(g, 0, 0.2);
    std::sort(ball.sites.begin(), ball.sites.end());
    CHECK(ball.sites == std::vector<std::size_t>{0, 1, 7});
    CHECK_FALSE(ball.clamped);
    CHECK(annulus_indices(g, 0, 0.2, 0).sites.size() == ball.sites.size());
    const auto whole = ball_indices(g, 3, 0.6);
    CHECK(whole.clamped);
    CHECK(whole.sites.size() == 8);
    CHECK(measure(g, whole) == doctest::Approx(1.0));
}

TEST_CASE("annuli partition the torus") {
    const auto g = make_grid(2, 16);
    const double r = 0.05;
    std::vector<int> hits(g.total_points(), 0);
    int ring = 0;
    for (;; ++ring) {
        const auto s = annulus_indices(g, g.site(3, 5), r, ring);
        for (auto y : s.sites) ++hits[y];
        if (s.clamped) break;
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

TEST_CASE("Hardy-Littlewood maximal function") {
    const auto g = make_grid(1, 8);
    const auto c = hardy_littlewood_maximal(GridFunction::constant(g, Complex(0, -2)));
    CHECK((c.magnitude().array() - 2.0).abs().maxCoeff() < 1e-14);

    Vector point = Vector::Zero(8);
    point[2] = 1.0;
    const auto M = hardy_littlewood_maximal(GridFunction(g, point));
    // Enumerate every arc of admissible length containing both x and the mass.
    for (int x = 0; x < 8; ++x) {
        double best = x == 2 ? 1.0 : 0.0;
        for (int length : {1, 3, 5, 7, 8})
            for (int start = 0; start < 8; ++start) {
                bool has_x = false, has_mass = false;
                for (int i = 0; i < length; ++i) {
                    has_x = has_x || (start + i) % 8 == x;
                    has_mass = has_mass || (start + i) % 8 == 2;
                }
                if (has_x && has_mass) best = std::max(best, 1.0 / length);
            }
        CHECK(M[static_cast<std::size_t>(x)].real() == doctest::Approx(best));
    }
}

TEST_CASE("maximal function dominates |f|") {
    const auto g = make_grid(2, 8);
    const auto f = band_limited_random(g, 3, 3);
    const auto M = hardy_littlewood_maximal(f);
    CHECK(((M.magnitude() - f.magnitude()).array() >= -1e-14).all());
}

TEST_CASE("band-limited samples agree across grids") {
    const auto series = random_trig_series(1, 9, 4);
    const auto coarse = series.sample(make_grid(1, 16));
    const auto fine = series.sample(make_grid(1, 32));
    for (int i = 0; i < 16; ++i) CHECK(std::abs(coarse[i] - fine[2 * i]) < 1e-12);
    CHECK(band_limited_random(make_grid(1, 16), 9, 4).values() == coarse.values());
}

TEST_CASE("mean removal") {
    const auto g = make_grid(2, 8);
    const auto f = band_limited_random(g, 5, 3) + GridFunction::constant(g, 2.0);
    CHECK(std::abs(f.mean_zero().mean()) < 1e-14);
    CHECK(std::abs(inner_product(f, f) - std::pow(l2_norm(f), 2)) < 1e-12);
}
