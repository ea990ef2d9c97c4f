#include "hlab/experiments.hpp"

#include "hlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace hlab {
namespace {

constexpr double kUnderflowFloor = 1e-13;

std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

bool usable(double v) { return std::isfinite(v) && v > 0.0; }

// A functional vanishes on f when its norm is at roundoff level relative to ||f||_p.
bool usable(double v, double reference) { return usable(v) && v > 1e-10 * reference; }

double spread_of(const std::vector<double>& ratios) {
    if (ratios.empty()) return std::numeric_limits<double>::infinity();
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    return *hi / *lo;
}

std::vector<std::string> labels_of(const FunctionFamily& family) {
    std::vector<std::string> out;
    for (const auto& d : family.descriptors()) out.push_back(d.label());
    return out;
}

Matrix as_columns(const std::vector<GridFunction>& fs) {
    Matrix columns(static_cast<Eigen::Index>(fs.front().size()), static_cast<Eigen::Index>(fs.size()));
    for (std::size_t i = 0; i < fs.size(); ++i) columns.col(static_cast<Eigen::Index>(i)) = fs[i].values();
    return columns;
}

double ball_integral(const TorusGrid& grid, const RealVector& density, const SiteSet& ball) {
    double sum = 0.0;
    for (std::size_t s : ball.sites) sum += density[static_cast<Eigen::Index>(s)];
    return sum * grid.cell_volume();
}

/// Composite Simpson weights for `count` (odd) uniform samples of spacing `step`.
std::vector<double> simpson_weights(int count, double step) {
    std::vector<double> w(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) w[static_cast<std::size_t>(i)] = (i == 0 || i == count - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    for (auto& v : w) v *= step / 3.0;
    return w;
}

const std::vector<std::string> kBases = {"S_L", "S_L2", "S_L3", "S_hL", "S_hL1", "S_hL2", "N_hL",
                                         "R_hL", "Nt_hL", "Rt_hL", "N_hpsiL", "id"};

}  // namespace

FunctionalSpec FunctionalSpec::parse(const std::string& name) {
    FunctionalSpec spec;
    spec.name = name;
    std::string rest = name;
    if (const auto star = rest.find('*'); star != std::string::npos) {
        try {
            std::size_t used = 0;
            spec.scale = std::stod(rest.substr(0, star), &used);
            if (used != star) throw InvalidArgument("trailing characters");
        } catch (const std::exception&) {
            throw InvalidArgument("bad scale prefix in functional '" + name + "'");
        }
        if (!(spec.scale > 0.0)) throw InvalidArgument("functional scale must be positive in '" + name + "'");
        rest = rest.substr(star + 1);
    }
    if (const auto at = rest.find('@'); at != std::string::npos) {
        try {
            std::size_t used = 0;
            spec.aperture = std::stod(rest.substr(at + 1), &used);
            if (used != rest.size() - at - 1) throw InvalidArgument("trailing characters");
        } catch (const std::exception&) {
            throw InvalidArgument("bad aperture in functional '" + name + "'");
        }
        if (!(spec.aperture > 0.0)) throw InvalidArgument("aperture must be positive in '" + name + "'");
        rest = rest.substr(0, at);
    }
    if (std::find(kBases.begin(), kBases.end(), rest) == kBases.end())
        throw InvalidArgument("unknown functional '" + name + "'");
    spec.base = rest;
    return spec;
}

FunctionalEvaluator::FunctionalEvaluator(const SpectralFactorization& fact, const TimeGrid& times)
    : fact_(&fact), times_(times) {}

const std::vector<RealVector>& FunctionalEvaluator::values(const std::string& name,
                                                           const std::vector<GridFunction>& members) {
    if (&members != cached_members_) {
        cache_.clear();
        cached_members_ = &members;
    }
    if (auto it = cache_.find(name); it != cache_.end()) return it->second;

    const FunctionalSpec spec = FunctionalSpec::parse(name);
    const double lambda = spec.aperture;
    std::vector<RealVector> out;
    const std::string& b = spec.base;
    if (b == "id") {
        for (const auto& f : members) out.push_back(f.magnitude());
    } else if (b.rfind("S_hL", 0) == 0) {
        const int k = b.size() > 4 ? b[4] - '0' : 0;
        out = square_functions(*fact_, members, SquareKind::Lusin, k, lambda, times_);
    } else if (b.rfind("S_L", 0) == 0) {
        const int k = b.size() > 3 ? b[3] - '0' : 1;
        out = square_functions(*fact_, members, SquareKind::Vertical, k, lambda, times_);
    } else {
        const MaximalKind kind = b == "N_hL"    ? MaximalKind::Nontangential
                                 : b == "R_hL"  ? MaximalKind::Radial
                                 : b == "Nt_hL" ? MaximalKind::NontangentialGradient
                                 : b == "Rt_hL" ? MaximalKind::RadialGradient
                                                : MaximalKind::Cutoff;
        std::optional<CutoffDescriptor> cutoff;
        if (kind == MaximalKind::Cutoff) cutoff = CutoffDescriptor::standard(fact_->source().half_order());
        out = maximal_functions(*fact_, members, kind, lambda, times_, cutoff);
    }
    if (spec.scale != 1.0)
        for (auto& v : out) v *= spec.scale;
    return cache_.emplace(name, std::move(out)).first->second;
}

std::vector<double> FunctionalEvaluator::norms(const std::string& name, const std::vector<GridFunction>& members,
                                               double p) {
    if (!(p > 0.0)) throw InvalidArgument("exponent p must be positive");
    const auto& vals = values(name, members);
    std::vector<double> out;
    for (const auto& v : vals) out.push_back(lp_quasinorm(fact_->source().grid(), v, p));
    return out;
}

EquivalenceReport equivalence_study(FunctionalEvaluator& evaluator, const std::vector<GridFunction>& members,
                                    const std::vector<std::string>& labels, const std::string& a,
                                    const std::string& b, double p, StudyThresholds thresholds) {
    if (members.empty()) throw InvalidArgument("equivalence study needs a nonempty family");
    EquivalenceReport report;
    report.functional_a = a;
    report.functional_b = b;
    report.p = p;
    report.spread_threshold = thresholds.spread;
    report.drift_threshold = thresholds.drift;
    const auto na = evaluator.norms(a, members, p);
    const auto nb = evaluator.norms(b, members, p);
    const auto reference = evaluator.norms("id", members, p);
    for (std::size_t j = 0; j < members.size(); ++j) {
        const std::string label = j < labels.size() ? labels[j] : "member" + std::to_string(j);
        if (!usable(na[j], reference[j]) || !usable(nb[j], reference[j])) {
            report.skipped.push_back(label);
            continue;
        }
        report.labels.push_back(label);
        report.ratios.push_back(na[j] / nb[j]);
    }
    if (!report.ratios.empty()) {
        const auto [lo, hi] = std::minmax_element(report.ratios.begin(), report.ratios.end());
        report.band_min = *lo;
        report.band_max = *hi;
    }
    report.spread = spread_of(report.ratios);
    report.pass = !report.ratios.empty() && report.skipped.empty() && report.spread <= thresholds.spread;
    return report;
}

EquivalenceReport equivalence_study(FunctionalEvaluator& coarse, const FunctionFamily& family, const std::string& a,
                                    const std::string& b, double p, FunctionalEvaluator* fine,
                                    const FunctionFamily* fine_family, StudyThresholds thresholds) {
    EquivalenceReport report = equivalence_study(coarse, family.members(), labels_of(family), a, b, p, thresholds);
    if (fine != nullptr && fine_family != nullptr) {
        const EquivalenceReport refined =
            equivalence_study(*fine, fine_family->members(), labels_of(*fine_family), a, b, p, thresholds);
        report.refined_ratios = refined.ratios;
        report.refined_spread = refined.spread;
        report.refinement_drift = std::max(refined.spread / report.spread, report.spread / refined.spread);
        report.pass = report.pass && refined.pass && *report.refinement_drift <= thresholds.drift;
    }
    return report;
}

std::vector<double> geometric_mean_constants(FunctionalEvaluator& evaluator, const std::vector<GridFunction>& members) {
    const auto& s = evaluator.values("S_L", members);
    const auto& area = evaluator.values("S_hL@2", members);
    const auto& wide = evaluator.values("S_L@2", members);
    std::vector<double> out;
    for (std::size_t j = 0; j < members.size(); ++j) {
        double worst = 0.0;
        for (Eigen::Index x = 0; x < s[j].size(); ++x) {
            const double denominator = std::sqrt(area[j][x] * wide[j][x]);
            if (s[j][x] == 0.0) continue;
            worst = std::max(worst, denominator > 0.0 ? s[j][x] / denominator : std::numeric_limits<double>::infinity());
        }
        out.push_back(worst);
    }
    return out;
}

double interpolation_constant(const TorusGrid& grid, int k, int m, int probes, std::uint64_t seed) {
    if (k < 0 || k > m || m < 1) throw InvalidArgument("interpolation needs 0 <= k <= m, m >= 1");
    const int max_band = std::max(1, grid.points_per_axis() / 2 - 1);
    const int bands[] = {2, 4, 8, 16};
    double worst = 0.0;
    for (int i = 0; i < probes; ++i) {
        const int band = std::min(max_band, bands[i % 4]);
        const GridFunction f = band_limited_random(grid, mix(seed, static_cast<std::uint64_t>(i)), band).mean_zero();
        const double top = homogeneous_sobolev_norm(f, m);
        const double base = l2_norm(f);
        const double mid = homogeneous_sobolev_norm(f, k);
        const double kappa = static_cast<double>(k) / m;
        worst = std::max(worst, mid / (std::pow(top, kappa) * std::pow(base, 1.0 - kappa)));
    }
    return worst;
}

DominationReport domination_study(FunctionalEvaluator& evaluator, const std::vector<GridFunction>& members,
                                  const std::vector<std::string>& labels, double p, double gamma,
                                  const std::vector<double>& gamma_sweep, int geometric_members, std::uint64_t seed) {
    if (members.empty()) throw InvalidArgument("domination study needs a nonempty family");
    if (!(gamma > 0.0)) throw InvalidArgument("aperture gamma must be positive");
    DominationReport report;
    report.p = p;

    // (lhs, rhs) pairs of ||lhs||_p <= C ||rhs||_p.
    std::vector<std::pair<std::string, std::string>> pairs = {
        {"S_L", "S_hL"}, {"S_hL1", "S_L"}, {"S_L2", "S_hL1"}, {"S_hL2", "S_L2"}, {"S_L", "id"}, {"id", "S_L"}};
    auto aperture_name = [](double g) {
        std::ostringstream out;
        out << "N_hL@" << g;
        return out.str();
    };
    pairs.emplace_back("S_hL", aperture_name(gamma));
    for (double g : gamma_sweep)
        if (g != gamma) pairs.emplace_back("S_hL", aperture_name(g));

    std::vector<bool> keep(members.size(), true);
    std::map<std::string, std::vector<double>> norms;
    for (const auto& [lhs, rhs] : pairs)
        for (const auto& name : {lhs, rhs})
            if (!norms.count(name)) norms[name] = evaluator.norms(name, members, p);
    for (const auto& [name, values] : norms)
        for (std::size_t j = 0; j < members.size(); ++j)
            if (!usable(values[j], norms.at("id")[j])) keep[j] = false;
    std::vector<GridFunction> kept;
    for (std::size_t j = 0; j < members.size(); ++j) {
        const std::string label = j < labels.size() ? labels[j] : "member" + std::to_string(j);
        if (keep[j]) {
            report.labels.push_back(label);
            kept.push_back(members[j]);
        } else {
            report.skipped.push_back(label + ": a functional vanishes");
        }
    }

    bool pass = !kept.empty();
    for (const auto& [lhs, rhs] : pairs) {
        BoundReport bound;
        bound.name = lhs + " <= C " + rhs;
        for (std::size_t j = 0; j < members.size(); ++j)
            if (keep[j]) bound.constants.push_back(norms[lhs][j] / norms[rhs][j]);
        bound.max_constant = bound.constants.empty() ? 0.0 : *std::max_element(bound.constants.begin(), bound.constants.end());
        bound.finite = !bound.constants.empty() && std::isfinite(bound.max_constant);
        pass = pass && bound.finite;
        report.bounds.push_back(std::move(bound));
    }
    if (kept.empty()) {
        report.pass = false;
        return report;
    }

    const std::size_t checked = std::min(kept.size(), static_cast<std::size_t>(std::max(0, geometric_members)));
    std::vector<GridFunction> subset(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(checked));
    if (!subset.empty()) {
        FunctionalEvaluator local(evaluator.factorization(), evaluator.time_grid());
        report.geometric_mean_constants = geometric_mean_constants(local, subset);
        report.geometric_mean_max =
            *std::max_element(report.geometric_mean_constants.begin(), report.geometric_mean_constants.end());
        pass = pass && std::isfinite(report.geometric_mean_max);
    }

    // Tent-space lemma with F the S_L integrand and G the S_{h,L} integrand.
    const auto& fact = evaluator.factorization();
    const auto& times = evaluator.time_grid();
    const auto& grid = fact.source().grid();
    const auto F = build_tent_fields(fact, kept, Generator::power(1), times);
    const auto G = build_tent_fields(fact, kept, Generator::gradient(0), times);
    std::vector<ConeSampling> cones;
    for (int k = 0; k <= 5; ++k) cones.emplace_back(grid, times, std::ldexp(1.0, k));
    double hypothesis = 0.0;
    double conclusion = 0.0;
    for (std::size_t j = 0; j < kept.size(); ++j) {
        std::vector<RealVector> aF, aG;
        for (const auto& cone : cones) {
            aF.push_back(a_functional(F[j], cone));
            aG.push_back(a_functional(G[j], cone));
        }
        for (int k = 0; k <= 4; ++k)
            for (Eigen::Index x = 0; x < aF[0].size(); ++x) {
                const double lhs = aF[static_cast<std::size_t>(k)][x];
                if (lhs == 0.0) continue;
                const double rhs = std::sqrt(aG[static_cast<std::size_t>(k + 1)][x] * aF[static_cast<std::size_t>(k + 1)][x]);
                hypothesis = std::max(hypothesis, rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity());
            }
        conclusion = std::max(conclusion, lp_quasinorm(grid, aF[0], p) / lp_quasinorm(grid, aG[0], p));
    }
    report.lemma_hypothesis_constant = hypothesis;
    report.lemma_conclusion_constant = conclusion;
    pass = pass && (!std::isfinite(hypothesis) || std::isfinite(conclusion));

    const int m = fact.source().half_order();
    for (int k = 1; k < m; ++k) {
        report.interpolation_constants.push_back(interpolation_constant(grid, k, m, 20, mix(seed, static_cast<std::uint64_t>(k))));
        pass = pass && std::isfinite(report.interpolation_constants.back());
    }
    report.pass = pass;
    return report;
}

DominationReport domination_study(FunctionalEvaluator& evaluator, const FunctionFamily& family, double p, double gamma,
                                  const std::vector<double>& gamma_sweep, int geometric_members, std::uint64_t seed) {
    return domination_study(evaluator, family.members(), labels_of(family), p, gamma, gamma_sweep, geometric_members,
                            seed);
}

CaccioppoliVariant parse_caccioppoli_variant(const std::string& name) {
    if (name == "ineq1") return CaccioppoliVariant::WithEpsilon;
    if (name == "ineq2") return CaccioppoliVariant::GradientTerms;
    if (name == "ineq3") return CaccioppoliVariant::ZeroOrder;
    throw InvalidArgument("unknown Caccioppoli variant '" + name + "' (expected ineq1, ineq2 or ineq3)");
}

CaccioppoliResult caccioppoli_check(const SpectralFactorization& fact, const GridFunction& f, std::size_t x0, double r,
                                    double t0, CaccioppoliVariant variant, double epsilon) {
    const auto& grid = fact.source().grid();
    const int m = fact.source().half_order();
    if (!(r > 0.0)) throw InvalidArgument("radius r must be positive");
    if (!(t0 > 3.0 * r)) throw InvalidArgument("Caccioppoli check needs t0 > 3r");
    if (!(2.0 * r < 0.5)) throw InvalidArgument("doubled radius 2r must stay below the injectivity radius 1/2");
    if (x0 >= grid.total_points()) throw InvalidArgument("centre site out of range");
    if (variant == CaccioppoliVariant::WithEpsilon && !(epsilon > 0.0))
        throw InvalidArgument("epsilon must be positive");

    // 65 samples on [t0 - 2r, t0 + 2r]; the middle 33 cover [t0 - r, t0 + r].
    const int outer = 65;
    const int inner_start = 16;
    const int inner = 33;
    const double step = 4.0 * r / (outer - 1);
    const auto w_outer = simpson_weights(outer, step);
    const auto w_inner = simpson_weights(inner, step);
    const SiteSet small = ball_indices(grid, x0, r);
    const SiteSet large = ball_indices(grid, x0, 2.0 * r);

    double lhs = 0.0, top = 0.0, zero = 0.0;
    std::vector<double> lower(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < outer; ++i) {
        const double t = t0 - 2.0 * r + i * step;
        const GridFunction u = fact.apply(Symbol::exponential(std::pow(t, 2 * m)), f);
        const RealVector top_density = gradient_block(u, m).magnitude.cwiseAbs2();
        const double wo = w_outer[static_cast<std::size_t>(i)];
        if (i >= inner_start && i < inner_start + inner)
            lhs += w_inner[static_cast<std::size_t>(i - inner_start)] * ball_integral(grid, top_density, small);
        top += wo * ball_integral(grid, top_density, large);
        const RealVector u2 = u.values().cwiseAbs2();
        zero += wo * ball_integral(grid, u2, large);
        if (variant == CaccioppoliVariant::GradientTerms) {
            lower[0] += wo * ball_integral(grid, u2, large);
            for (int j = 1; j < m; ++j)
                lower[static_cast<std::size_t>(j)] += wo * ball_integral(grid, gradient_block(u, j).magnitude.cwiseAbs2(), large);
        }
    }

    CaccioppoliResult result;
    result.lhs = lhs;
    switch (variant) {
    case CaccioppoliVariant::ZeroOrder:
    case CaccioppoliVariant::WithEpsilon: result.rhs = std::pow(r, -2.0 * m) * zero; break;
    case CaccioppoliVariant::GradientTerms:
        for (int j = 0; j < m; ++j) result.rhs += std::pow(r, -2.0 * (m - j)) * lower[static_cast<std::size_t>(j)];
        break;
    }
    if (variant == CaccioppoliVariant::WithEpsilon) result.epsilon_term = epsilon * top;
    // |nabla^m u|^2 at roundoff level (u nearly constant) counts as zero.
    const double floor = 1e-20 * std::pow(r, -2.0 * m) * zero;
    const double numerator = result.lhs <= floor ? 0.0 : std::max(result.lhs - result.epsilon_term, 0.0);
    result.constant = numerator == 0.0 ? 0.0 : numerator / result.rhs;
    return result;
}

DecayFit gaffney_check(const SpectralFactorization& fact, const std::vector<double>& separations,
                       const std::vector<double>& times, int probes, double source_radius, std::uint64_t seed) {
    const auto& grid = fact.source().grid();
    const int m = fact.source().half_order();
    if (separations.empty() || times.empty()) throw InvalidArgument("Gaffney check needs separations and times");
    if (probes < 1) throw InvalidArgument("Gaffney check needs at least one probe");
    for (double d : separations)
        if (!(d > 0.0)) throw InvalidArgument("separations must be positive");
    for (double t : times)
        if (!(t > 0.0)) throw InvalidArgument("times must be positive");
    if (!(source_radius > 0.0) || source_radius >= 0.5) throw InvalidArgument("source radius must lie in (0, 1/2)");

    const SiteSet E = ball_indices(grid, 0, source_radius);
    const std::size_t total = grid.total_points();
    // dist(y, E) over the lattice.
    std::vector<double> to_source(total, std::numeric_limits<double>::infinity());
    for (std::size_t y = 0; y < total; ++y)
        for (std::size_t e : E.sites) to_source[y] = std::min(to_source[y], grid.distance(y, e));

    std::vector<GridFunction> sources;
    std::vector<double> source_norms;
    for (int i = 0; i < probes; ++i) {
        const GridFunction noise = random_probe(grid, mix(seed, static_cast<std::uint64_t>(i)), 0);
        Vector v = Vector::Zero(static_cast<Eigen::Index>(total));
        for (std::size_t e : E.sites) v[static_cast<Eigen::Index>(e)] = noise[e];
        sources.emplace_back(grid, std::move(v));
        source_norms.push_back(l2_norm(sources.back()));
    }
    const Matrix columns = as_columns(sources);

    DecayFit fit;
    fit.q_target = 2.0 * m / (2.0 * m - 1.0);
    fit.monotone = true;
    for (double t : times) {
        const Matrix out = fact.apply(Symbol::exponential(t), columns);
        double previous = std::numeric_limits<double>::infinity();
        for (double d : separations) {
            double worst = 0.0;
            bool empty = true;
            for (int i = 0; i < probes; ++i) {
                double sum = 0.0;
                for (std::size_t y = 0; y < total; ++y)
                    if (to_source[y] >= d - 1e-12) {
                        empty = false;
                        sum += std::norm(out(static_cast<Eigen::Index>(y), i));
                    }
                const double norm = std::sqrt(sum * grid.cell_volume());
                worst = std::max(worst, norm / source_norms[static_cast<std::size_t>(i)]);
            }
            fit.distances.push_back(d);
            fit.times.push_back(t);
            fit.log_ratios.push_back(worst > 0.0 ? std::log(worst) : -std::numeric_limits<double>::infinity());
            const bool use = !empty && worst >= kUnderflowFloor;
            fit.used.push_back(use);
            if (use) {
                if (!(worst < previous)) fit.monotone = false;
                previous = worst;
            }
        }
    }

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < fit.used.size(); ++i)
        if (fit.used[i]) {
            xs.push_back(fit.distances[i] / std::pow(fit.times[i], 1.0 / (2.0 * m)));
            ys.push_back(-fit.log_ratios[i]);
        }
    if (xs.size() < 3 || *std::max_element(xs.begin(), xs.end()) <= *std::min_element(xs.begin(), xs.end())) {
        fit.degenerate = true;
        return fit;
    }
    // Linear least squares in (a, c) for fixed q; RMS residual.
    auto solve = [&](double q, double& a, double& c) {
        const double count = static_cast<double>(xs.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double x = std::pow(xs[i], q);
            sx += x;
            sy += ys[i];
            sxx += x * x;
            sxy += x * ys[i];
        }
        const double det = count * sxx - sx * sx;
        c = (count * sxy - sx * sy) / det;
        a = (sy - c * sx) / count;
        double rss = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double e = ys[i] - a - c * std::pow(xs[i], q);
            rss += e * e;
        }
        return std::sqrt(rss / count);
    };
    double best = std::numeric_limits<double>::infinity();
    for (double q = 0.5; q <= 4.0 + 1e-12; q += 0.005) {
        double a, c;
        const double residual = solve(q, a, c);
        if (c > 0.0 && residual < best) {
            best = residual;
            fit.q_hat = q;
        }
    }
    if (!std::isfinite(best)) {
        fit.degenerate = true;
        return fit;
    }
    double lo = std::max(0.5, fit.q_hat - 0.005), hi = std::min(4.0, fit.q_hat + 0.005);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 60; ++it) {
        const double q1 = hi - phi * (hi - lo), q2 = lo + phi * (hi - lo);
        double a, c;
        if (solve(q1, a, c) < solve(q2, a, c)) hi = q2;
        else lo = q1;
    }
    fit.q_hat = 0.5 * (lo + hi);
    fit.residual = solve(fit.q_hat, fit.intercept, fit.slope);
    return fit;
}

PqProbeReport pq_interval_probe(const SpectralFactorization& fact, const std::vector<double>& exponents,
                                const std::vector<double>& times, int probes, std::uint64_t seed) {
    if (probes < 50) throw InvalidArgument("the L^p probe needs at least 50 probe functions");
    if (exponents.empty() || times.empty()) throw InvalidArgument("the L^p probe needs exponents and times");
    for (double p : exponents)
        if (!(p > 0.0)) throw InvalidArgument("exponents must be positive");
    for (double t : times)
        if (!(t > 0.0)) throw InvalidArgument("times must be positive");
    const auto& grid = fact.source().grid();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> site(0, grid.total_points() - 1);
    const int bands[] = {0, 2, 4, 8};
    std::vector<GridFunction> fs;
    for (int i = 0; i < probes; ++i) {
        switch (i % 3) {
        case 0: {
            const int band = std::min(bands[(i / 3) % 4], grid.points_per_axis() / 2 - 1);
            fs.push_back(random_probe(grid, mix(seed, static_cast<std::uint64_t>(i)), band));
            break;
        }
        case 1: {
            Vector v = Vector::Zero(static_cast<Eigen::Index>(grid.total_points()));
            v[static_cast<Eigen::Index>(site(rng))] = 1.0;
            fs.emplace_back(grid, std::move(v));
            break;
        }
        default:
            fs.emplace_back(grid, random_probe(grid, mix(seed, static_cast<std::uint64_t>(i)), 4).magnitude().cast<Complex>());
            break;
        }
    }
    const Matrix columns = as_columns(fs);
    PqProbeReport report;
    report.exponents = exponents;
    report.times = times;
    report.probes = probes;
    report.estimates.assign(exponents.size(), std::vector<double>(times.size(), 0.0));
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const Matrix out = fact.apply(Symbol::exponential(times[ti]), columns);
        for (std::size_t pi = 0; pi < exponents.size(); ++pi)
            for (int i = 0; i < probes; ++i) {
                const double ratio = lp_quasinorm(grid, out.col(i).cwiseAbs(), exponents[pi]) /
                                     lp_quasinorm(fs[static_cast<std::size_t>(i)], exponents[pi]);
                report.estimates[pi][ti] = std::max(report.estimates[pi][ti], ratio);
            }
    }
    for (const auto& row : report.estimates) report.supremum.push_back(*std::max_element(row.begin(), row.end()));
    return report;
}

RieszReport riesz_study(const SpectralFactorization& fact, const SpectralFactorization& reference,
                        const FunctionFamily& family, double p, const TimeGrid& times) {
    const auto& grid = fact.source().grid();
    const int n = grid.dimension();
    const int m = fact.source().half_order();
    if (!(reference.source().grid() == grid)) throw InvalidArgument("reference operator lives on a different grid");
    if (reference.source().half_order() != 1) throw InvalidArgument("reference operator must be second order");
    if (!(p > static_cast<double>(n) / (n + m)))
        throw InvalidArgument("Riesz study needs p > n/(n+m)");

    RieszReport report;
    report.p = p;
    report.labels = labels_of(family);
    const auto hardy = hardy_quasinorms(fact, family.members(), p, times);
    for (std::size_t j = 0; j < family.size(); ++j) {
        const GradientBlock riesz = riesz_transform(fact, family.members()[j]);
        const auto squares = square_functions(reference, riesz.components, SquareKind::Vertical, 1, 1.0, times);
        RealVector combined = RealVector::Zero(static_cast<Eigen::Index>(grid.total_points()));
        for (const auto& s : squares) combined += s.cwiseAbs2();
        combined = combined.cwiseSqrt();
        report.constants.push_back(lp_quasinorm(grid, combined, p) / hardy[j]);
    }
    const auto [lo, hi] = std::minmax_element(report.constants.begin(), report.constants.end());
    report.min_constant = *lo;
    report.max_constant = *hi;
    report.finite = std::all_of(report.constants.begin(), report.constants.end(), [](double c) { return usable(c); });
    return report;
}

PoincareReport poincare_check(const TorusGrid& grid, int m, int configs, std::uint64_t seed) {
    if (m < 1) throw InvalidArgument("order m must be at least one");
    if (configs < 1) throw InvalidArgument("Poincare check needs at least one configuration");
    const double h = grid.spacing();
    if (4.0 * h >= 0.2) throw InvalidArgument("grid too coarse for the Poincare check");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> site(0, grid.total_points() - 1);
    std::uniform_real_distribution<double> radius(4.0 * h, 0.2);
    const CutoffDescriptor bump = CutoffDescriptor::standard(0);
    PoincareReport report;
    for (int c = 0; c < configs; ++c) {
        const std::size_t x = site(rng);
        const double t = radius(rng);
        const GridFunction noise = band_limited_random(grid, mix(seed, static_cast<std::uint64_t>(c)),
                                                       std::min(4, grid.points_per_axis() / 2 - 1));
        Vector v(static_cast<Eigen::Index>(grid.total_points()));
        for (std::size_t s = 0; s < grid.total_points(); ++s)
            v[static_cast<Eigen::Index>(s)] = bump.profile(grid.distance(s, x) / t) * noise[s];
        const GridFunction f(grid, std::move(v));
        const SiteSet ball = ball_indices(grid, x, 2.0 * t);
        auto integral = [&](int k) {
            const RealVector density = k == 0 ? RealVector(f.values().cwiseAbs2()) : RealVector(gradient_block(f, k).magnitude.cwiseAbs2());
            return ball_integral(grid, density, ball);
        };
        const double top = integral(m - 1);
        for (int k = 0; k < m; ++k) {
            const double bound = std::pow(2.0, k - m + 1) * std::pow(2.0 * t, 2.0 * (m - 1 - k));
            const double ratio = integral(k) / (bound * top);
            report.ratios.push_back(ratio);
            report.max_ratio = std::max(report.max_ratio, ratio);
        }
    }
    return report;
}

}  // namespace hlab
