#include "hlab/error.hpp"
#include "hlab/functionals.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace hlab;
using hlab::test::fourier_mode;

namespace {

// Lattice points o in 1D with |o| h < aperture t, counted directly.
double cone_count(int N, double aperture, double t) {
    if (aperture * t >= 0.5) return N;
    int count = 0;
    for (int o = -N / 2; o < N / 2; ++o)
        if (std::abs(o) < aperture * t * N * (1.0 - 1e-12)) ++count;
    return count;
}

// sum_j Delta (count_j h / t_j) phi(t_j)^2 for a site-independent |F|.
double scalar_oracle(int N, const TimeGrid& tg, double aperture, double (*phi)(double)) {
    double sum = 0.0;
    for (double t : tg.samples) sum += tg.log_weight * cone_count(N, aperture, t) / N / t * std::pow(phi(t), 2);
    return std::sqrt(sum);
}

double q1_profile(double t) {
    const double s = 4.0 * M_PI * M_PI * t * t;
    return s * std::exp(-s);
}

double grad_profile(double t) { return 2.0 * M_PI * t * std::exp(-4.0 * M_PI * M_PI * t * t); }

}  // namespace

TEST_CASE("cutoff profile") {
    const auto c = CutoffDescriptor::standard(2);
    CHECK(c.profile(0.0) == 1.0);
    CHECK(c.profile(1.0) == 1.0);
    CHECK(c.profile(2.0) == 0.0);
    CHECK(c.profile(-3.0) == 0.0);
    for (double s = 1.0; s < 2.0; s += 0.01) CHECK(c.profile(s) >= c.profile(s + 0.01));
    REQUIRE(c.derivative_bounds.size() == 3);
    CHECK(c.derivative_bounds[0] == doctest::Approx(1.0));
    CHECK(std::isfinite(c.derivative_bounds[2]));
}

TEST_CASE("kind parsing") {
    CHECK(parse_square_kind("lusin") == SquareKind::Lusin);
    CHECK(parse_maximal_kind("nontangential_grad") == MaximalKind::NontangentialGradient);
    CHECK(to_string(MaximalKind::Cutoff) == "cutoff");
    CHECK_THROWS_AS(parse_maximal_kind("tangential"), InvalidArgument);
}

TEST_CASE("square functions of constants vanish") {
    const auto g = make_grid(1, 32);
    const auto fact = factorize(assemble(random_elliptic_coefficients(1, g, 0.5, 3)));
    const auto tg = default_time_grid(g);
    const auto one = GridFunction::constant(g, 2.0);
    CHECK(square_function(fact, one, SquareKind::Vertical, 1, 1.0, tg).magnitude().maxCoeff() < 1e-9);
    CHECK_THROWS_AS(square_function(fact, one, SquareKind::Vertical, 0, 1.0, tg), InvalidArgument);
}

TEST_CASE("square functions of a Fourier mode match the scalar quadrature") {
    const int N = 64;
    const auto g = make_grid(1, N);
    const auto fact = factorize(assemble(polyharmonic_coefficients(1, g)));
    const auto tg = default_time_grid(g);
    const auto e = fourier_mode(g, 1);
    for (double aperture : {1.0, 2.0}) {
        const auto S = square_function(fact, e, SquareKind::Vertical, 1, aperture, tg).magnitude();
        const auto A = square_function(fact, e, SquareKind::Lusin, 0, aperture, tg).magnitude();
        CHECK((S.array() - scalar_oracle(N, tg, aperture, q1_profile)).abs().maxCoeff() < 1e-10);
        CHECK((A.array() - scalar_oracle(N, tg, aperture, grad_profile)).abs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("square functions grow with the aperture") {
    const auto g = make_grid(2, 12);
    const auto fact = factorize(assemble(random_elliptic_coefficients(1, g, 0.5, 4, 2)));
    const auto tg = default_time_grid(g, 8);
    const auto f = random_probe(g, 8, 3);
    const auto narrow = square_function(fact, f, SquareKind::Lusin, 1, 1.0, tg).magnitude();
    const auto wide = square_function(fact, f, SquareKind::Lusin, 1, 2.0, tg).magnitude();
    CHECK(((wide - narrow).array() >= -1e-14).all());
    const auto batch = square_functions(fact, {f, 2.0 * f}, SquareKind::Lusin, 1, 1.0, tg);
    CHECK((batch[0] - narrow).norm() < 1e-13 * narrow.norm());
    CHECK((batch[1] - 2.0 * narrow).norm() < 1e-12 * narrow.norm());
}

TEST_CASE("maximal functions of constants are site-constant") {
    const auto g = make_grid(1, 32);
    const auto fact = factorize(assemble(random_elliptic_coefficients(1, g, 0.5, 3)));
    const auto tg = default_time_grid(g, 8);
    const auto R = maximal_function(fact, GridFunction::constant(g, 3.0), MaximalKind::Radial, 1.0, tg).magnitude();
    CHECK(R.maxCoeff() - R.minCoeff() < 1e-10 * R.maxCoeff());
    CHECK(R.maxCoeff() > 0.0);
}

TEST_CASE("maximal function orderings") {
    for (int m : {1, 2}) {
        const auto g = make_grid(1, 32);
        const auto fact = factorize(assemble(random_elliptic_coefficients(m, g, 0.5, 10 + m)));
        const auto tg = default_time_grid(g, 8);
        const std::vector<GridFunction> fs = {random_probe(g, 1, 4), random_probe(g, 2)};
        const auto R = maximal_functions(fact, fs, MaximalKind::Radial, 1.0, tg);
        const auto N = maximal_functions(fact, fs, MaximalKind::Nontangential, 1.0, tg);
        const auto Rt = maximal_functions(fact, fs, MaximalKind::RadialGradient, 1.0, tg);
        const auto Nt = maximal_functions(fact, fs, MaximalKind::NontangentialGradient, 1.0, tg);
        const auto N2 = maximal_functions(fact, fs, MaximalKind::Nontangential, 2.0, tg);
        for (std::size_t i = 0; i < fs.size(); ++i) {
            CHECK(((N[i] - R[i]).array() >= 0.0).all());
            CHECK(((Nt[i] - N[i]).array() >= 0.0).all());
            CHECK(((Rt[i] - R[i]).array() >= 0.0).all());
            if (m == 1) {
                CHECK(Nt[i] == N[i]);
                CHECK(Rt[i] == R[i]);
            }
            CHECK(N2[i].allFinite());
        }
    }
}

TEST_CASE("cutoff maximal function") {
    const auto g = make_grid(1, 16);
    const auto fact = factorize(assemble(polyharmonic_coefficients(2, g)));
    const auto tg = default_time_grid(g, 8);
    const auto f = random_probe(g, 3, 4);
    CHECK_THROWS_AS(maximal_function(fact, f, MaximalKind::Cutoff, 1.0, tg), InvalidArgument);
    const auto c = maximal_function(fact, f, MaximalKind::Cutoff, 1.0, tg, CutoffDescriptor::standard(1)).magnitude();
    CHECK(c.allFinite());
    CHECK(c.minCoeff() > 0.0);
    const auto doubled =
        maximal_function(fact, 2.0 * f, MaximalKind::Cutoff, 1.0, tg, CutoffDescriptor::standard(1)).magnitude();
    CHECK((doubled - 2.0 * c).norm() < 1e-12 * c.norm());
}
