#include "hlab/error.hpp"
#include "hlab/experiments.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace hlab;
using hlab::test::fourier_mode;

namespace {

SpectralFactorization poly(int m, int N = 64) { return factorize(assemble(polyharmonic_coefficients(m, make_grid(1, N)))); }

std::vector<double> gaffney_times(int m, int N) {
    const double h = 1.0 / N;
    const std::vector<double> taus = m == 1 ? std::vector<double>{2.25 * h, 3.2 * h, 4.5 * h}
                                            : std::vector<double>{1.0 * h, 1.3 * h, 1.9 * h};
    std::vector<double> out;
    for (double tau : taus) out.push_back(std::pow(tau, 2 * m));
    return out;
}

std::vector<double> separations(int N) {
    std::vector<double> out;
    for (int i = 2; i <= 3 * N / 8; ++i) out.push_back(static_cast<double>(i) / N);
    return out;
}

double ball_measure(int N, double r) {
    int count = 0;
    for (int o = -N / 2; o < N / 2; ++o)
        if (std::abs(o) < r * N) ++count;
    return static_cast<double>(count) / N;
}

// int_a^b e^{-8 pi^2 t^2} dt
double gaussian_integral(double a, double b) {
    const double c = std::sqrt(8.0) * M_PI;
    return std::sqrt(M_PI) / (2.0 * c) * (std::erf(c * b) - std::erf(c * a));
}

}  // namespace

TEST_CASE("default family") {
    const auto g = make_grid(1, 64);
    const FunctionFamily family(FunctionFamily::default_descriptors(1, 7), g);
    CHECK(family.size() == kMinFamilySize);
    for (const auto& f : family.members()) {
        CHECK(std::abs(f.mean()) < 1e-13);
        CHECK(l2_norm(f) > 0.0);
    }
    const auto labels = family.descriptors();
    CHECK(labels.front().label() == "fourier_mode(1)");
    CHECK(labels[4].label() == "gaussian_bump(0.05,0.5)");
    const FunctionFamily again(FunctionFamily::default_descriptors(1, 7), g);
    CHECK(again.members().back().values() == family.members().back().values());
    CHECK(FunctionFamily(FunctionFamily::default_descriptors(2, 1), make_grid(2, 24)).size() == kMinFamilySize);
}

TEST_CASE("family member kinds") {
    const auto g = make_grid(1, 32);
    const auto fact = poly(1, 32);
    const std::vector<MemberDescriptor> ds = {{MemberKind::IndicatorSmoothed, {0.2, 0.3}, 0},
                                              {MemberKind::Molecule, {0.15, 1.0, 2.0, 1.0, 0.5}, 4}};
    const FunctionFamily family(ds, g, &fact);
    CHECK(family.size() == 2);
    CHECK_THROWS_AS(FunctionFamily(ds, g), InvalidArgument);
    CHECK_THROWS_AS(FunctionFamily({{MemberKind::FourierMode, {16.0}, 0}}, g), InvalidArgument);
    CHECK_THROWS_AS(FunctionFamily({{MemberKind::FourierMode, {0.0}, 0}}, g), InvalidArgument);
    CHECK_THROWS_AS(parse_member_kind("sawtooth"), InvalidArgument);
    CHECK(parse_member_kind(to_string(MemberKind::RandomBandlimited)) == MemberKind::RandomBandlimited);
}

TEST_CASE("functional names") {
    const auto spec = FunctionalSpec::parse("2.5*S_hL1@2");
    CHECK(spec.base == "S_hL1");
    CHECK(spec.scale == 2.5);
    CHECK(spec.aperture == 2.0);
    CHECK(FunctionalSpec::parse("N_hpsiL").aperture == 1.0);
    for (const char* bad : {"S_X", "S_L@", "S_L@2x", "-1*S_L", "x*S_L", "S_L@0"})
        CHECK_THROWS_AS(FunctionalSpec::parse(bad), InvalidArgument);
}

TEST_CASE("evaluator") {
    const auto fact = poly(1, 32);
    const auto g = fact.source().grid();
    FunctionalEvaluator ev(fact, default_time_grid(g));
    const std::vector<GridFunction> fs = {random_probe(g, 1, 4), random_probe(g, 2, 4)};
    const auto id = ev.norms("id", fs, 1.5);
    CHECK(id[0] == doctest::Approx(lp_quasinorm(fs[0], 1.5)));
    const auto S = ev.norms("S_L", fs, 1.0);
    const auto S3 = ev.norms("3*S_L", fs, 1.0);
    CHECK(S3[1] == doctest::Approx(3.0 * S[1]));
    const auto direct = square_function(fact, fs[1], SquareKind::Vertical, 1, 1.0, default_time_grid(g));
    CHECK(S[1] == doctest::Approx(lp_quasinorm(direct, 1.0)));
}

TEST_CASE("equivalence study identities") {
    const auto fact = poly(1, 32);
    const auto g = fact.source().grid();
    const FunctionFamily family(FunctionFamily::default_descriptors(1, 1), g);
    FunctionalEvaluator ev(fact, default_time_grid(g));
    const auto same = equivalence_study(ev, family, "S_L", "S_L", 1.0);
    CHECK(same.spread == doctest::Approx(1.0));
    CHECK(same.pass);
    for (double r : same.ratios) CHECK(r == doctest::Approx(1.0));
    const auto scaled = equivalence_study(ev, family, "S_L", "4*S_L", 0.8);
    CHECK(scaled.spread == doctest::Approx(1.0));
    CHECK(scaled.band_min == doctest::Approx(0.25));
    CHECK(scaled.band_max == doctest::Approx(0.25));
}

TEST_CASE("equivalence study with refinement") {
    const auto coarse_fact = poly(1, 32), fine_fact = poly(1, 64);
    const auto tg = default_time_grid(coarse_fact.source().grid());
    const auto ds = FunctionFamily::default_descriptors(1, 3);
    const FunctionFamily coarse(ds, coarse_fact.source().grid()), fine(ds, fine_fact.source().grid());
    FunctionalEvaluator ec(coarse_fact, tg), ef(fine_fact, tg);
    const auto r = equivalence_study(ec, coarse, "S_L", "R_hL", 1.0, &ef, &fine);
    REQUIRE(r.refinement_drift);
    CHECK(*r.refinement_drift >= 1.0);
    CHECK(r.refined_ratios->size() == r.ratios.size());
    CHECK(r.pass == (r.spread <= 10.0 && *r.refinement_drift <= 2.0));
}

TEST_CASE("domination skips vanishing members") {
    const auto fact = poly(1, 32);
    const auto g = fact.source().grid();
    FunctionalEvaluator ev(fact, default_time_grid(g, 8));
    const std::vector<GridFunction> members = {GridFunction::constant(g, 1.0), random_probe(g, 1, 4), random_probe(g, 2, 4),
                                               random_probe(g, 3, 4)};
    const auto report = domination_study(ev, members, {"constant", "a", "b", "c"}, 1.0, 8.0, {2.0}, 2);
    REQUIRE(report.skipped.size() == 1);
    CHECK(report.skipped.front() == "constant: a functional vanishes");
    CHECK(report.labels.size() == 3);
    for (const auto& b : report.bounds) {
        CHECK(b.finite);
        CHECK(b.constants.size() == 3);
    }
    CHECK(report.pass);
}

TEST_CASE("geometric-mean inequality") {
    const auto fact = poly(1, 32);
    const auto g = fact.source().grid();
    FunctionalEvaluator ev(fact, default_time_grid(g));
    const std::vector<GridFunction> fs = {random_probe(g, 1, 4), fourier_mode(g, 2)};
    const auto c = geometric_mean_constants(ev, fs);
    REQUIRE(c.size() == 2);
    for (double v : c) {
        CHECK(std::isfinite(v));
        CHECK(v > 0.0);
    }
}

TEST_CASE("interpolation and Poincare constants") {
    const auto g = make_grid(1, 64);
    for (int m : {2, 3})
        for (int k = 1; k < m; ++k) CHECK(interpolation_constant(g, k, m, 20, 1) <= 1.0 + 1e-12);
    for (int m : {1, 2}) {
        const auto report = poincare_check(g, m, 20, 4);
        CHECK(std::isfinite(report.max_ratio));
        CHECK(report.max_ratio <= 1.0 + 1e-12);
    }
}

TEST_CASE("Caccioppoli ratio of constants is zero") {
    const auto fact = poly(2);
    const auto one = GridFunction::constant(fact.source().grid(), 1.0);
    for (auto v : {CaccioppoliVariant::WithEpsilon, CaccioppoliVariant::GradientTerms, CaccioppoliVariant::ZeroOrder}) {
        const auto res = caccioppoli_check(fact, one, 3, 0.05, 0.2, v);
        CHECK(res.lhs < 1e-20 * res.rhs);
        CHECK(res.constant == 0.0);
    }
    CHECK_THROWS_AS(caccioppoli_check(fact, one, 3, 0.05, 0.1, CaccioppoliVariant::ZeroOrder), InvalidArgument);
    CHECK_THROWS_AS(parse_caccioppoli_variant("ineq4"), InvalidArgument);
    CHECK(parse_caccioppoli_variant("ineq2") == CaccioppoliVariant::GradientTerms);
}

TEST_CASE("Caccioppoli sides of a Fourier mode in closed form") {
    const int N = 64;
    const auto fact = poly(1, N);
    const auto e = fourier_mode(fact.source().grid(), 1);
    const double r = 0.05, t0 = 0.2, eps = 0.5;
    const double lhs = ball_measure(N, r) * 4.0 * M_PI * M_PI * gaussian_integral(t0 - r, t0 + r);
    const double zero = ball_measure(N, 2 * r) * gaussian_integral(t0 - 2 * r, t0 + 2 * r) / (r * r);
    const double top = ball_measure(N, 2 * r) * 4.0 * M_PI * M_PI * gaussian_integral(t0 - 2 * r, t0 + 2 * r);
    const auto z = caccioppoli_check(fact, e, 7, r, t0, CaccioppoliVariant::ZeroOrder);
    CHECK(z.lhs == doctest::Approx(lhs).epsilon(1e-6));
    CHECK(z.rhs == doctest::Approx(zero).epsilon(1e-6));
    CHECK(z.constant == doctest::Approx(lhs / zero).epsilon(1e-6));
    const auto g = caccioppoli_check(fact, e, 7, r, t0, CaccioppoliVariant::GradientTerms);
    CHECK(g.constant == doctest::Approx(lhs / zero).epsilon(1e-6));
    const auto w = caccioppoli_check(fact, e, 7, r, t0, CaccioppoliVariant::WithEpsilon, eps);
    CHECK(w.epsilon_term == doctest::Approx(eps * top).epsilon(1e-6));
    CHECK(w.constant == doctest::Approx(std::max(lhs - eps * top, 0.0) / zero).epsilon(1e-6));
}

TEST_CASE("Davies-Gaffney exponents") {
    for (int m : {1, 2}) {
        const auto fact = poly(m);
        const auto fit = gaffney_check(fact, separations(64), gaffney_times(m, 64), 8);
        const double target = 2.0 * m / (2.0 * m - 1.0);
        CHECK(fit.q_target == doctest::Approx(target));
        CHECK_FALSE(fit.degenerate);
        CHECK(fit.monotone);
        if (m == 1) {
            CHECK(fit.q_hat >= 1.4);
            CHECK(fit.q_hat <= 2.6);
        }
        CHECK(std::fabs(fit.q_hat - target) <= 0.3 * target);
    }
    CHECK_THROWS_AS(gaffney_check(poly(1), {}, {1e-3}, 2), InvalidArgument);
}

TEST_CASE("Lp semigroup probe") {
    const auto fact = poly(1);
    const auto report = pq_interval_probe(fact, {1.0, 2.0, 4.0}, {1e-9, 1e-3, 1e-2}, 50, 3);
    REQUIRE(report.estimates.size() == 3);
    CHECK(report.supremum[1] <= 1.0 + 1e-10);
    for (std::size_t p = 0; p < 3; ++p) {
        CHECK(report.estimates[p][0] == doctest::Approx(1.0).epsilon(1e-3));
        for (std::size_t t = 1; t < 3; ++t) {
            CHECK(report.estimates[p][t] <= 1.0 + 1e-8);
            CHECK(report.estimates[p][t] >= 0.5);
        }
    }
    const auto random = factorize(assemble(random_elliptic_coefficients(2, make_grid(1, 32), 0.5, 3)));
    CHECK(pq_interval_probe(random, {2.0}, {1e-6, 1e-4}, 50).supremum[0] <= 1.0 + 1e-10);
    CHECK_THROWS_AS(pq_interval_probe(fact, {2.0}, {1e-3}, 10), InvalidArgument);
}

TEST_CASE("Riesz study") {
    const auto fact = poly(1);
    const auto g = fact.source().grid();
    const FunctionFamily family(FunctionFamily::default_descriptors(1, 1), g);
    const auto tg = default_time_grid(g);
    const auto iso = riesz_study(fact, fact, family, 2.0, tg);
    for (double c : iso.constants) CHECK(c == doctest::Approx(1.0).epsilon(1e-10));
    const auto random = factorize(assemble(random_elliptic_coefficients(1, g, 0.5, 2)));
    const auto r = riesz_study(random, fact, family, 1.0, tg);
    CHECK(r.finite);
    CHECK(r.min_constant > 0.0);
    CHECK(std::isfinite(r.max_constant));
}
