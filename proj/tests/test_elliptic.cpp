#include "hlab/elliptic.hpp"
#include "hlab/error.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace hlab;
using hlab::test::fourier_mode;

namespace {

Complex matrix_inner(const EllipticOperator& op, const GridFunction& f, const GridFunction& g) {
    const GridFunction Lf(f.grid(), op.matrix() * f.values());
    return inner_product(Lf, g);
}

}  // namespace

TEST_CASE("polyharmonic coefficient tensors") {
    const auto a1 = polyharmonic_coefficients(1, make_grid(1, 8));
    REQUIRE(a1.block_size() == 1);
    CHECK(test::max_abs(a1.entry(0, 0).values().array() - 1.0) == 0.0);
    const auto a2 = polyharmonic_coefficients(1, make_grid(2, 8));
    REQUIRE(a2.block_size() == 2);
    for (std::size_t s = 0; s < 64; s += 9) CHECK((a2.pointwise(s) - Matrix::Identity(2, 2)).norm() == 0.0);
    const auto a3 = polyharmonic_coefficients(2, make_grid(1, 8));
    REQUIRE(a3.block_size() == 1);
    CHECK(a3.entry(0, 0)[3] == Complex(1.0));
}

TEST_CASE("random coefficients") {
    const auto g = make_grid(1, 16);
    const auto zero = random_elliptic_coefficients(1, g, 0.0, 3);
    CHECK(check_strong_ellipticity(zero).lambda1 == doctest::Approx(1.0));
    const auto field = random_elliptic_coefficients(1, g, 0.3, 7);
    const auto report = check_strong_ellipticity(field);
    CHECK(report.certified);
    CHECK(report.lambda1 >= 0.7);
    const auto again = random_elliptic_coefficients(1, g, 0.3, 7);
    for (std::size_t i = 0; i < field.entries().size(); ++i) CHECK(field.entries()[i].values() == again.entries()[i].values());
    CHECK_THROWS_AS(random_elliptic_coefficients(1, g, 1.0, 7), InvalidArgument);
}

TEST_CASE("random coefficients sample one field across grids") {
    const auto coarse = random_elliptic_coefficients(2, make_grid(1, 16), 0.5, 4);
    const auto fine = random_elliptic_coefficients(2, make_grid(1, 32), 0.5, 4);
    for (int i = 0; i < 16; ++i) CHECK(std::abs(coarse.entry(0, 0)[i] - fine.entry(0, 0)[2 * i]) < 1e-12);
}

TEST_CASE("strong ellipticity scan") {
    const auto g = make_grid(1, 8);
    CHECK(check_strong_ellipticity(polyharmonic_coefficients(1, g)).lambda1 == doctest::Approx(1.0));
    CHECK(check_strong_ellipticity(constant_coefficients(1, g, Matrix::Identity(1, 1) * 2.0)).lambda1 ==
          doctest::Approx(2.0));
    Vector values = Vector::Ones(8);
    values[5] = -0.1;
    const CoefficientField bad(1, g, {GridFunction(g, values)});
    const auto report = check_strong_ellipticity(bad);
    CHECK_FALSE(report.certified);
    CHECK(report.worst_site == 5);
    CHECK(report.lambda1 == doctest::Approx(-0.1));
}

TEST_CASE("sesquilinear form") {
    const auto g = make_grid(1, 16);
    const auto poly = polyharmonic_coefficients(1, g);
    const auto e = fourier_mode(g, 1);
    CHECK(std::abs(sesquilinear_form(poly, GridFunction::constant(g, 1.0), e)) < 1e-12);
    CHECK(std::abs(sesquilinear_form(poly, e, e) - 4.0 * M_PI * M_PI) < 1e-10);

    for (int m : {1, 2}) {
        const auto g2 = make_grid(2, 8);
        const auto op = assemble(random_elliptic_coefficients(m, g2, 0.5, 11, 2));
        const auto f = random_probe(g2, 1), h = random_probe(g2, 2);
        const Complex form = sesquilinear_form(op, f, h);
        CHECK(std::abs(form - matrix_inner(op, f, h)) <= 1e-10 * std::abs(form));
        CHECK(test::relative_error(op.apply(f), apply_operator(op.coefficients(), f)) < 1e-12);
    }
}

TEST_CASE("assembled polyharmonic matrices") {
    const auto g = make_grid(1, 16);
    for (int m : {1, 2}) {
        const auto op = assemble(polyharmonic_coefficients(m, g));
        for (int k : {1, 3, -5}) {
            const auto e = fourier_mode(g, k);
            const Vector Le = op.matrix() * e.values();
            CHECK(test::max_abs(Le - std::pow(2.0 * M_PI * k, 2 * m) * e.values()) <
                  1e-9 * std::pow(2.0 * M_PI * std::abs(k), 2 * m));
        }
    }
}

TEST_CASE("operators annihilate constants") {
    for (int n : {1, 2})
        for (int m : {1, 2}) {
            const auto g = make_grid(n, 8);
            const auto op = assemble(random_elliptic_coefficients(m, g, 0.6, 5, 2));
            const Vector ones = Vector::Ones(static_cast<Eigen::Index>(g.total_points()));
            CHECK((op.matrix() * ones).norm() <= 1e-10 * op.matrix_norm() * ones.norm());
        }
}

TEST_CASE("form ellipticity estimates") {
    for (int m : {1, 2}) {
        const auto op = assemble(polyharmonic_coefficients(m, make_grid(1, 16)));
        CHECK(op.form_estimate().lambda0_hat == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(op.form_estimate().Lambda0_hat == doctest::Approx(1.0).epsilon(1e-8));
    }
    for (int m : {1, 2}) {
        const auto op = assemble(polyharmonic_coefficients(m, make_grid(2, 8)));
        CHECK(op.form_estimate().lambda0_hat == doctest::Approx(1.0).epsilon(1e-8));
    }
    const auto g = make_grid(1, 16);
    const auto twice = check_form_ellipticity(constant_coefficients(1, g, Matrix::Identity(1, 1) * 2.0), 50, 1);
    CHECK(twice.lambda0_hat == doctest::Approx(2.0).epsilon(1e-8));
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto a = random_elliptic_coefficients(1, make_grid(2, 8), 0.5, seed, 2);
        const double lambda1 = check_strong_ellipticity(a).lambda1;
        CHECK(check_form_ellipticity(a, 100, seed).lambda0_hat >= lambda1 - 1e-8);
    }
}

TEST_CASE("adjoints") {
    const auto g = make_grid(2, 8);
    const auto poly = assemble(polyharmonic_coefficients(1, g));
    CHECK((adjoint(poly).matrix() - poly.matrix()).norm() < 1e-12 * poly.matrix_norm());
    const auto op = assemble(random_elliptic_coefficients(1, g, 0.5, 8, 2));
    const auto star = adjoint(op);
    const auto f = random_probe(g, 3), h = random_probe(g, 4);
    CHECK(std::abs(matrix_inner(op, f, h) - inner_product(f, star.apply(h))) < 1e-9 * std::abs(matrix_inner(op, f, h)));
    CHECK((adjoint(star).matrix() - op.matrix()).norm() < 1e-12 * op.matrix_norm());
    CHECK((star.matrix() - op.matrix().adjoint()).norm() < 1e-10 * op.matrix_norm());
}

TEST_CASE("type angle") {
    const auto op = assemble(random_elliptic_coefficients(1, make_grid(1, 16), 0.5, 2));
    CHECK(op.type_angle() > 0.0);
    CHECK(op.type_angle() < M_PI / 2);
    CHECK(std::tan(op.type_angle()) == doctest::Approx(op.form_upper() / op.garding_lower()));
}

TEST_CASE("assembly size limit") {
    CHECK_THROWS_AS(assemble(polyharmonic_coefficients(1, make_grid(2, 66))), InvalidArgument);
}

TEST_CASE("probes are mean zero") {
    const auto f = random_probe(make_grid(2, 8), 10, 3);
    CHECK(std::abs(f.mean()) < 1e-14);
    CHECK(l2_norm(f) > 0.0);
}
