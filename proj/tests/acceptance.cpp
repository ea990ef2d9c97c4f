// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "hlab/error.hpp"
#include "hlab/experiments.hpp"
#include "hlab/funcalc.hpp"
#include "hlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hlab;
using io::Json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
};

std::string num(double v) {
    std::ostringstream out;
    out.precision(4);
    out << v;
    return out.str();
}

GridFunction fourier_mode(const TorusGrid& grid, int k) {
    Vector v(static_cast<Eigen::Index>(grid.total_points()));
    for (std::size_t s = 0; s < grid.total_points(); ++s)
        v[static_cast<Eigen::Index>(s)] = std::polar(1.0, 2.0 * M_PI * k * grid.position(s)[0]);
    return GridFunction(grid, v);
}

double rel(const GridFunction& a, const GridFunction& b) { return l2_norm(a - b) / l2_norm(b); }

Json config(const std::string& study, int N, int m, const std::string& kind = "polyharmonic", std::uint64_t seed = 1) {
    return Json{{"grid", {{"n", 1}, {"N", N}}},
                {"operator", {{"m", m}, {"kind", kind}, {"seed", seed}}},
                {"study", {{"name", study}}}};
}

StudyResult run(const Json& tree) { return run_study(parse_config(tree)); }

EllipticOperator random_operator(int N, int m, std::uint64_t seed) {
    return assemble(random_elliptic_coefficients(m, make_grid(1, N), 0.5, seed, 4));
}

Outcome constant_coefficient_exactness() {
    const int N = 32;
    const auto grid = make_grid(1, N);
    double worst = 0.0;
    for (int m : {1, 2}) {
        const auto fact = factorize(assemble(polyharmonic_coefficients(m, grid)));
        const double top = std::pow(2.0 * M_PI * (N / 2 - 1), 2 * m);
        for (int k = -(N / 2 - 1); k <= N / 2 - 1; ++k) {
            if (k == 0) continue;
            const auto e = fourier_mode(grid, k);
            const double s = std::pow(2.0 * M_PI * k, 2 * m);
            for (double scale : {0.1, 1.0, 10.0}) {
                const double t = scale / top;
                worst = std::max(worst, rel(semigroup_apply(fact, t, e), std::exp(-t * s) * e));
            }
            for (double lambda : {0.01 * s, s, 100.0 * s})
                worst = std::max(worst, rel(resolvent_apply(fact, lambda, e), (1.0 / (lambda + s)) * e));
            worst = std::max(worst, rel(sqrt_apply(fact, e), std::sqrt(s) * e));
        }
    }
    return {worst <= 1e-10, "max relative error " + num(worst) + " (tol 1e-10)"};
}

Outcome oracle_cross_validation() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const int N = seed % 2 ? 32 : 16;
        const int m = seed % 3 ? 1 : 2;
        const auto op = random_operator(N, m, seed);
        const auto fact = factorize(op);
        const auto f = band_limited_random(op.grid(), 100 + seed, N / 2 - 1);
        for (double s : {0.1, 1.0, 10.0, 100.0}) {
            const double t = s / op.matrix_norm();
            const auto u = semigroup_apply(fact, t, f);
            worst = std::max(worst, rel(u, expm_oracle(op.matrix(), t, f)));
        }
    }
    return {worst <= 1e-8, "max deviation " + num(worst) + " over 20 operators (tol 1e-8)"};
}

Outcome contractivity() {
    double semigroup = 0.0, resolvent = 0.0;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> log_scale(std::log(1e-2), std::log(1e3));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto op = random_operator(32, seed % 2 ? 1 : 2, 50 + seed);
        const auto fact = factorize(op);
        for (int i = 0; i < 200; ++i) {
            const auto f = band_limited_random(op.grid(), 1000 * seed + static_cast<std::uint64_t>(i), 1 + i % 15);
            const double t = std::exp(log_scale(rng)) / op.matrix_norm();
            const double lambda = 1.0 / t;
            semigroup = std::max(semigroup, l2_norm(semigroup_apply(fact, t, f)) / l2_norm(f) - 1.0);
            resolvent = std::max(resolvent, lambda * l2_norm(resolvent_apply(fact, lambda, f)) / l2_norm(f) - 1.0);
        }
    }
    const double worst = std::max(semigroup, resolvent);
    return {worst <= 1e-10, "max excess semigroup " + num(semigroup) + ", resolvent " + num(resolvent) + " (tol 1e-10)"};
}

Outcome kato_identity() {
    const auto grid = make_grid(1, 32);
    double identity = 0.0;
    for (int m : {1, 2}) {
        const auto fact = factorize(assemble(polyharmonic_coefficients(m, grid)));
        for (std::uint64_t i = 0; i < 50; ++i) {
            const auto f = band_limited_random(grid, 300 + i, 1 + static_cast<int>(i % 15)).mean_zero();
            const double lhs = l2_norm(sqrt_apply(fact, f));
            const double rhs = homogeneous_sobolev_norm(f, m);
            identity = std::max(identity, std::fabs(lhs - rhs) / rhs);
        }
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int m : {1, 2}) {
        const auto fact = factorize(random_operator(32, m, 77));
        for (std::uint64_t i = 0; i < 50; ++i) {
            const auto f = band_limited_random(grid, 500 + i, 1 + static_cast<int>(i % 15)).mean_zero();
            const double r = l2_norm(sqrt_apply(fact, f)) / homogeneous_sobolev_norm(f, m);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
    }
    const bool bounded = std::isfinite(hi) && lo > 0.0;
    return {identity <= 1e-10 && bounded,
            "polyharmonic deviation " + num(identity) + " (tol 1e-10); random band [" + num(lo) + ", " + num(hi) + "]"};
}

Outcome caccioppoli_constants() {
    double coarse = 0.0, fine = 0.0;
    bool finite = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto tree = config("caccioppoli", 64, seed % 2 ? 1 : 2, "random", seed);
        tree["study"]["configs"] = 10;
        tree["study"]["seed"] = 900 + seed;
        const auto r = run(tree).report["result"];
        finite = finite && r["finite"].get<bool>();
        coarse = std::max(coarse, r["max_constant"].get<double>());
        fine = std::max(fine, r["refined_max_constant"].get<double>());
    }
    const double drift = (coarse > 0.0 && fine > 0.0) ? std::max(coarse / fine, fine / coarse)
                                                      : std::numeric_limits<double>::infinity();
    return {finite && drift <= 2.0,
            "max C " + num(coarse) + " at N=64, " + num(fine) + " at N=128, drift " + num(drift) + " (tol 2)"};
}

Outcome gaffney_exponent() {
    bool pass = true;
    std::string detail;
    for (int m : {1, 2}) {
        const auto r = run(config("gaffney", 64, m));
        const auto& res = r.report["result"];
        pass = pass && r.pass;
        detail += "m=" + std::to_string(m) + " q=" + num(res["q_hat"].get<double>()) + " target " +
                  num(res["q_target"].get<double>()) + (res["monotone"].get<bool>() ? " monotone" : " non-monotone") +
                  (m == 1 ? "; " : "");
    }
    return {pass, detail + " (tol 30%)"};
}

Outcome calderon_reproduction() {
    double worst = 0.0;
    for (const std::string kind : {"polyharmonic", "random"}) {
        const auto r = run(config("reproduce", 64, 1, kind, 3));
        worst = std::max(worst, r.report["result"]["max_error"].get<double>());
    }
    return {worst <= 1e-3, "max relative error " + num(worst) + " (tol 1e-3)"};
}

Outcome equivalence_bands() {
    bool pass = true;
    double spread = 0.0, drift = 0.0;
    for (int m : {1, 2})
        for (const std::string b : {"N_hL", "R_hL", "Nt_hL", "S_L2", "S_hL1"}) {
            auto tree = config("equivalence", 64, m);
            tree["study"]["b"] = b;
            const auto r = run(tree);
            pass = pass && r.pass;
            for (const auto& rep : r.report["result"]["reports"]) {
                spread = std::max(spread, rep["spread"].get<double>());
                drift = std::max(drift, rep["refinement_drift"].get<double>());
            }
        }
    return {pass, "max spread " + num(spread) + " (tol 10), max drift " + num(drift) + " (tol 2)"};
}

Outcome aperture_robustness() {
    bool pass = true;
    double spread = 0.0;
    for (int m : {1, 2}) {
        const auto r = run(config("aperture", 64, m));
        pass = pass && r.pass;
        for (const auto& rep : r.report["result"]["reports"]) spread = std::max(spread, rep["spread"].get<double>());
    }
    return {pass, "max spread " + num(spread) + " (tol 4)"};
}

Outcome molecule_suite() {
    const auto r = run(config("molecule", 64, 1));
    const auto& res = r.report["result"];
    return {r.pass, std::string(res["all_verified"].get<bool>() ? "20/20 verified" : "unverified molecules") +
                        ", S_L spread " + num(res["hardy_spread"].get<double>()) + " (tol 10)"};
}

double geometric_mean_max(int N) {
    const auto grid = make_grid(1, N);
    const auto fact = factorize(assemble(polyharmonic_coefficients(1, grid)));
    const FunctionFamily family(FunctionFamily::default_descriptors(1, 1), grid, &fact);
    const std::vector<GridFunction> members(family.members().begin(), family.members().begin() + 5);
    FunctionalEvaluator evaluator(fact, default_time_grid(grid));
    const auto c = geometric_mean_constants(evaluator, members);
    double worst = 0.0;
    for (double v : c) worst = std::isfinite(v) ? std::max(worst, v) : std::numeric_limits<double>::infinity();
    return worst;
}

Outcome geometric_mean() {
    const double coarse = geometric_mean_max(64);
    const double fine = geometric_mean_max(128);
    const double drift = std::max(coarse / fine, fine / coarse);
    const bool pass = std::isfinite(coarse) && std::isfinite(fine) && coarse > 0.0 && drift <= 2.0;
    return {pass, "C0 " + num(coarse) + " at N=64, " + num(fine) + " at N=128, drift " + num(drift) + " (tol 2)"};
}

Outcome determinism() {
    const std::vector<Json> trees = {config("validate-operator", 32, 2, "random", 11),
                                     config("semigroup-bench", 32, 1, "random", 12),
                                     config("molecule", 32, 1, "random", 13)};
    for (const auto& tree : trees) {
        const auto a = run(tree);
        const auto b = run(tree);
        if (a.report.dump() != b.report.dump() || a.files != b.files)
            return {false, tree["study"]["name"].get<std::string>() + " differs between runs"};
    }
    return {true, "3 studies reproduced byte-identically"};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "constant-coefficient exactness", 5, constant_coefficient_exactness},
        {2, "oracle cross-validation", 60, oracle_cross_validation},
        {3, "contractivity", 0, contractivity},
        {4, "Kato identity", 0, kato_identity},
        {5, "Caccioppoli", 300, caccioppoli_constants},
        {6, "Davies-Gaffney exponent", 120, gaffney_exponent},
        {7, "Calderon reproduction", 60, calderon_reproduction},
        {8, "equivalence bands", 600, equivalence_bands},
        {9, "aperture robustness", 0, aperture_robustness},
        {10, "molecule suite", 0, molecule_suite},
        {11, "geometric-mean inequality", 0, geometric_mean},
        {12, "determinism", 0, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("error: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string detail = outcome.detail + "; " + num(seconds) + " s";
        if (c.budget_seconds > 0.0 && seconds > c.budget_seconds) {
            outcome.pass = false;
            detail += " exceeds budget " + num(c.budget_seconds) + " s";
        }
        if (!outcome.pass) ++failed;
        std::printf("AC%-2d %s  %s: %s\n", c.id, outcome.pass ? "PASS" : "FAIL", c.name.c_str(), detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
