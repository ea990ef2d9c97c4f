#include "hlab/runner.hpp"

#include "hlab/error.hpp"
#include "hlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <sstream>

namespace hlab {
namespace {

using Json = io::Json;
using Check = std::function<void(const std::string& path, const Json& value)>;

constexpr int kSchemaVersion = 1;

struct ParamSpec {
    std::string key;
    Json fallback;
    Check check;
};

[[noreturn]] void fail(const std::string& path, const std::string& message) { throw ConfigError(path, message); }

std::string describe(const Json& value) { return value.dump(); }

double as_number(const std::string& path, const Json& value) {
    if (!value.is_number()) fail(path, "expected a number, got " + describe(value));
    return value.get<double>();
}

long long as_integer(const std::string& path, const Json& value) {
    if (!value.is_number_integer()) fail(path, "expected an integer, got " + describe(value));
    return value.get<long long>();
}

Check positive() {
    return [](const std::string& path, const Json& v) {
        if (!(as_number(path, v) > 0.0)) fail(path, "must be positive, got " + describe(v));
    };
}

Check in_open_range(double lo, double hi) {
    return [lo, hi](const std::string& path, const Json& v) {
        const double x = as_number(path, v);
        if (!(x > lo && x < hi))
            fail(path, "must lie in (" + describe(Json(lo)) + ", " + describe(Json(hi)) + "), got " + describe(v));
    };
}

Check integer_at_least(long long lo) {
    return [lo](const std::string& path, const Json& v) {
        if (as_integer(path, v) < lo) fail(path, "must be at least " + std::to_string(lo) + ", got " + describe(v));
    };
}

Check any_seed() {
    return [](const std::string& path, const Json& v) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            fail(path, "expected a non-negative integer seed, got " + describe(v));
    };
}

Check boolean() {
    return [](const std::string& path, const Json& v) {
        if (!v.is_boolean()) fail(path, "expected true or false, got " + describe(v));
    };
}

Check one_of(std::vector<std::string> choices) {
    return [choices](const std::string& path, const Json& v) {
        if (!v.is_string() || std::find(choices.begin(), choices.end(), v.get<std::string>()) == choices.end()) {
            std::string list;
            for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
            fail(path, "expected one of {" + list + "}, got " + describe(v));
        }
    };
}

Check positive_list() {
    return [](const std::string& path, const Json& v) {
        if (!v.is_array() || v.empty()) fail(path, "expected a nonempty list of positive numbers");
        for (std::size_t i = 0; i < v.size(); ++i) positive()(path + "[" + std::to_string(i) + "]", v[i]);
    };
}

Check functional_name() {
    return [](const std::string& path, const Json& v) {
        if (!v.is_string()) fail(path, "expected a functional name, got " + describe(v));
        try {
            FunctionalSpec::parse(v.get<std::string>());
        } catch (const InvalidArgument& e) {
            fail(path, e.what());
        }
    };
}

Check functional_list() {
    return [](const std::string& path, const Json& v) {
        if (!v.is_array() || v.empty()) fail(path, "expected a nonempty list of functional names");
        for (std::size_t i = 0; i < v.size(); ++i) functional_name()(path + "[" + std::to_string(i) + "]", v[i]);
    };
}

std::vector<MemberDescriptor> family_descriptors(const Json& spec, int dimension, std::uint64_t seed,
                                                 const std::string& path) {
    if (spec.is_string()) {
        if (spec.get<std::string>() != "default") fail(path, "expected \"default\" or a list of members");
        return FunctionFamily::default_descriptors(dimension, seed);
    }
    if (!spec.is_array()) fail(path, "expected \"default\" or a list of members");
    std::vector<MemberDescriptor> out;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const std::string item = path + "[" + std::to_string(i) + "]";
        const Json& m = spec[i];
        if (!m.is_object()) fail(item, "expected an object with kind, parameters and seed");
        for (const auto& [key, value] : m.items())
            if (key != "kind" && key != "parameters" && key != "seed") fail(item + "." + key, "unknown member field");
        MemberDescriptor d;
        if (!m.contains("kind") || !m["kind"].is_string()) fail(item + ".kind", "missing member kind");
        try {
            d.kind = parse_member_kind(m["kind"].get<std::string>());
        } catch (const InvalidArgument& e) {
            fail(item + ".kind", e.what());
        }
        if (m.contains("parameters")) {
            if (!m["parameters"].is_array()) fail(item + ".parameters", "expected a list of numbers");
            for (std::size_t k = 0; k < m["parameters"].size(); ++k)
                d.parameters.push_back(as_number(item + ".parameters[" + std::to_string(k) + "]", m["parameters"][k]));
        }
        if (m.contains("seed")) {
            any_seed()(item + ".seed", m["seed"]);
            d.seed = m["seed"].get<std::uint64_t>();
        }
        out.push_back(std::move(d));
    }
    return out;
}

Check family_check(const ExperimentConfig& config) {
    return [&config](const std::string& path, const Json& v) {
        const auto descriptors = family_descriptors(v, config.grid.n, 0, path);
        if (descriptors.size() < kMinFamilySize)
            fail(path, "a study family needs at least " + std::to_string(kMinFamilySize) + " members, got " +
                           std::to_string(descriptors.size()));
        const bool molecules = std::any_of(descriptors.begin(), descriptors.end(),
                                           [](const MemberDescriptor& d) { return d.kind == MemberKind::Molecule; });
        if (molecules) return;
        try {
            FunctionFamily(descriptors, make_grid(config.grid.n, config.grid.N));
        } catch (const InvalidArgument& e) {
            fail(path, e.what());
        }
    };
}

Json default_lambda_times(const ExperimentConfig& c, std::initializer_list<double> multiples) {
    const double lambda1 = std::pow(2.0 * M_PI, 2 * c.op.m);
    Json out = Json::array();
    for (double x : multiples) out.push_back(x / lambda1);
    return out;
}

Json default_gaffney_times(const ExperimentConfig& c) {
    const double h = 1.0 / c.grid.N;
    const std::vector<double> taus = c.op.m == 1 ? std::vector<double>{2.25 * h, 3.2 * h, 4.5 * h}
                                                 : std::vector<double>{1.0 * h, 1.3 * h, 1.9 * h};
    Json out = Json::array();
    for (double tau : taus) out.push_back(std::pow(tau, 2 * c.op.m));
    return out;
}

Json default_separations(const ExperimentConfig& c) {
    Json out = Json::array();
    for (int i = 2; i <= (3 * c.grid.N) / 8; ++i) out.push_back(static_cast<double>(i) / c.grid.N);
    return out;
}

std::vector<ParamSpec> parameter_table(const ExperimentConfig& c) {
    const double h = 1.0 / c.grid.N;
    const Json p_default = {0.8, 1.0, 2.0};
    const auto family = [&c] { return ParamSpec{"family", "default", family_check(c)}; };
    const auto family_seed = [] { return ParamSpec{"family_seed", 1, any_seed()}; };
    const auto seed = [] { return ParamSpec{"seed", 20240601, any_seed()}; };
    const std::string& s = c.study;
    if (s == "validate-operator")
        return {{"form_trials", kDefaultFormTrials, integer_at_least(1)}, {"form_seed", kDefaultFormSeed, any_seed()}};
    if (s == "semigroup-bench")
        return {{"times", default_lambda_times(c, {0.1, 1.0, 3.0}), positive_list()},
                {"probes", 20, integer_at_least(1)},
                seed(),
                {"oracle", true, boolean()},
                {"tolerance", 1e-8, positive()}};
    if (s == "gaffney")
        return {{"separations", default_separations(c), positive_list()},
                {"times", default_gaffney_times(c), positive_list()},
                {"probes", 8, integer_at_least(1)},
                {"source_radius", 1.0 / 16, in_open_range(0.0, 0.5)},
                seed(),
                {"tolerance", 0.3, positive()}};
    if (s == "caccioppoli")
        return {{"configs", 50, integer_at_least(1)},
                {"variant", "ineq3", one_of({"ineq1", "ineq2", "ineq3"})},
                {"epsilon", 0.5, positive()},
                seed(),
                {"refine", true, boolean()},
                {"band", 4, integer_at_least(1)},
                {"drift_threshold", 2.0, positive()}};
    if (s == "equivalence")
        return {{"a", "S_L", functional_name()},
                {"b", "N_hL", functional_name()},
                {"p", p_default, positive_list()},
                family(),
                family_seed(),
                {"refine", true, boolean()},
                {"spread_threshold", 10.0, positive()},
                {"drift_threshold", 2.0, positive()}};
    if (s == "domination")
        return {{"p", p_default, positive_list()},
                {"gamma", 8.0, positive()},
                {"gamma_sweep", {2.0, 4.0, 8.0, 16.0}, positive_list()},
                {"geometric_members", 5, integer_at_least(1)},
                family(),
                family_seed(),
                seed()};
    if (s == "aperture")
        return {{"p", p_default, positive_list()},
                {"functionals", {"S_L", "S_hL"}, functional_list()},
                {"apertures", {2.0}, positive_list()},
                {"spread_threshold", 4.0, positive()},
                family(),
                family_seed(),
                {"refine", false, boolean()},
                {"drift_threshold", 2.0, positive()}};
    if (s == "molecule")
        return {{"count", 20, integer_at_least(1)},
                {"p", 1.0, in_open_range(0.0, 1.0 + 1e-12)},
                {"M", 2, integer_at_least(1)},
                {"epsilon", 1.0, positive()},
                {"radius_min", 4.0 * h, positive()},
                {"radius_max", 0.2, in_open_range(0.0, 0.25)},
                seed(),
                {"spread_threshold", 10.0, positive()}};
    if (s == "reproduce")
        return {{"M", 2, integer_at_least(0)},
                {"t_min", 1e-3, positive()},
                {"t_max", 10.0, positive()},
                {"levels", 200, integer_at_least(kMinTimeLevels)},
                {"probes", 3, integer_at_least(1)},
                {"band", 8, integer_at_least(1)},
                seed(),
                {"tolerance", 1e-3, positive()}};
    if (s == "pq-probe")
        return {{"exponents", {1.0, 1.5, 2.0, 3.0, 4.0}, positive_list()},
                {"times", default_lambda_times(c, {0.1, 1.0, 10.0}), positive_list()},
                {"probes", 60, integer_at_least(50)},
                seed()};
    if (s == "riesz") return {{"p", {1.0, 2.0}, positive_list()}, family(), family_seed()};
    fail("study.name", "unknown study '" + s + "'");
}

void check_keys(const Json& tree, const std::string& path, const std::set<std::string>& allowed) {
    if (!tree.is_object()) fail(path.empty() ? "config" : path, "expected an object");
    for (const auto& [key, value] : tree.items())
        if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, "unknown field");
}

template <typename T>
T read(const Json& tree, const std::string& key, const std::string& path, T fallback, const Check& check) {
    if (!tree.contains(key)) return fallback;
    check(path, tree[key]);
    return tree[key].get<T>();
}

// ---------------------------------------------------------------------------
// Study plumbing

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

std::string short_fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

struct Context {
    const ExperimentConfig& config;
    TorusGrid grid;
    TimeGrid times;
    const Json& params;

    explicit Context(const ExperimentConfig& c)
        : config(c), grid(make_grid(c.grid.n, c.grid.N)), times(time_grid_for(c, grid)), params(c.parameters) {}

    static TimeGrid time_grid_for(const ExperimentConfig& c, const TorusGrid& grid) {
        const TimeGrid fallback = default_time_grid(grid, c.time_grid.levels);
        return make_time_grid(c.time_grid.t_min.value_or(fallback.t_min), c.time_grid.t_max.value_or(fallback.t_max),
                              c.time_grid.levels);
    }

    CoefficientField coefficients(const TorusGrid& g) const {
        if (config.op.kind == "polyharmonic") return polyharmonic_coefficients(config.op.m, g);
        return random_elliptic_coefficients(config.op.m, g, config.op.delta, config.op.seed, config.op.band);
    }

    SpectralFactorization factor(const TorusGrid& g) const { return factorize(assemble(coefficients(g))); }

    TorusGrid refined() const { return make_grid(grid.dimension(), 2 * grid.points_per_axis()); }

    std::vector<double> list(const std::string& key) const { return params.at(key).get<std::vector<double>>(); }
    double number(const std::string& key) const { return params.at(key).get<double>(); }
    int integer(const std::string& key) const { return params.at(key).get<int>(); }
    std::uint64_t seed(const std::string& key) const { return params.at(key).get<std::uint64_t>(); }
    bool flag(const std::string& key) const { return params.at(key).get<bool>(); }
    std::string text(const std::string& key) const { return params.at(key).get<std::string>(); }

    std::vector<MemberDescriptor> descriptors() const {
        return family_descriptors(params.at("family"), grid.dimension(), seed("family_seed"), "study.family");
    }
};

struct Table {
    std::vector<std::pair<std::string, std::string>> rows;

    void add(const std::string& key, const std::string& value) { rows.emplace_back(key, value); }
    void add(const std::string& key, double value) { rows.emplace_back(key, short_fmt(value)); }

    std::string render(const std::string& title, bool pass) const {
        std::size_t width = 4;
        for (const auto& [k, v] : rows) width = std::max(width, k.size());
        std::ostringstream out;
        out << title << "\n";
        for (const auto& [k, v] : rows) out << "  " << k << std::string(width - k.size() + 2, ' ') << v << "\n";
        out << "  pass" << std::string(width - 2, ' ') << (pass ? "yes" : "no") << "\n";
        return out.str();
    }
};

Json plot_manifest(const std::string& file, const std::string& x, const std::vector<std::string>& ys) {
    return Json{{"schema", kSchemaVersion}, {"series", {{{"file", file}, {"x", x}, {"y", ys}}}}};
}

StudyResult finish(const ExperimentConfig& config, Json result, bool pass, const Table& table,
                   std::map<std::string, std::string> files = {}) {
    StudyResult out;
    out.pass = pass;
    out.report = Json{{"schema", kSchemaVersion},
                      {"study", config.study},
                      {"config", config.to_json()},
                      {"result", std::move(result)},
                      {"pass", pass}};
    out.files = std::move(files);
    out.summary = table.render(config.study, pass);
    return out;
}

Json factorization_json(const SpectralFactorization& fact) {
    return Json{{"residual", fact.residual()},
                {"unitarity_defect", fact.unitarity_defect()},
                {"kernel_dimension", fact.kernel_dimension()},
                {"spectral_angle", fact.spectral_angle()},
                {"clusters", fact.clusters().size()}};
}

Json equivalence_json(const EquivalenceReport& r) {
    Json out{{"functional_a", r.functional_a},
             {"functional_b", r.functional_b},
             {"p", r.p},
             {"labels", r.labels},
             {"ratios", r.ratios},
             {"skipped", r.skipped},
             {"band", {r.band_min, r.band_max}},
             {"spread", r.spread},
             {"spread_threshold", r.spread_threshold},
             {"drift_threshold", r.drift_threshold},
             {"pass", r.pass}};
    if (r.refined_ratios) {
        out["refined_ratios"] = *r.refined_ratios;
        out["refined_spread"] = *r.refined_spread;
        out["refinement_drift"] = *r.refinement_drift;
    }
    return out;
}

void equivalence_csv(std::ostringstream& csv, const EquivalenceReport& r) {
    for (std::size_t j = 0; j < r.ratios.size(); ++j) {
        csv << r.functional_a << "," << r.functional_b << "," << fmt(r.p) << "," << r.labels[j] << "," << fmt(r.ratios[j])
            << ",";
        if (r.refined_ratios && j < r.refined_ratios->size()) csv << fmt((*r.refined_ratios)[j]);
        csv << "\n";
    }
}

// ---------------------------------------------------------------------------
// Studies

StudyResult validate_operator(const ExperimentConfig& config) {
    const Context ctx(config);
    const auto op = assemble(ctx.coefficients(ctx.grid), ctx.integer("form_trials"), ctx.seed("form_seed"));
    const auto fact = factorize(op);
    const auto& strong = op.strong_ellipticity();
    const auto& form = op.form_estimate();
    const bool pass = form.elliptic() && fact.residual() <= 1e-10;
    Json result{{"strong_ellipticity",
                 {{"certified", strong.certified}, {"lambda1", strong.lambda1}, {"worst_site", strong.worst_site}}},
                {"form", {{"lambda0_hat", form.lambda0_hat}, {"Lambda0_hat", form.Lambda0_hat}, {"trials", form.trials}}},
                {"type_angle", op.type_angle()},
                {"sup_bound", op.coefficients().sup_bound()},
                {"matrix_norm", op.matrix_norm()},
                {"factorization", factorization_json(fact)}};
    Table table;
    table.add("lambda1", strong.lambda1);
    table.add("lambda0_hat", form.lambda0_hat);
    table.add("Lambda0_hat", form.Lambda0_hat);
    table.add("type_angle", op.type_angle());
    table.add("residual", fact.residual());
    table.add("kernel_dimension", std::to_string(fact.kernel_dimension()));
    return finish(config, std::move(result), pass, table);
}

StudyResult semigroup_bench(const ExperimentConfig& config) {
    const Context ctx(config);
    const auto op = assemble(ctx.coefficients(ctx.grid));
    const auto fact = factorize(op);
    const int probes = ctx.integer("probes");
    const bool oracle = ctx.flag("oracle");
    const double tolerance = ctx.number("tolerance");
    std::vector<GridFunction> fs;
    for (int i = 0; i < probes; ++i)
        fs.push_back(random_probe(ctx.grid, ctx.seed("seed") + static_cast<std::uint64_t>(i), (i % 4) * 2));

    Json rows = Json::array();
    std::ostringstream csv;
    csv << "t,max_contraction,max_resolvent_contraction,max_oracle_deviation\n";
    double worst_contraction = 0.0, worst_resolvent = 0.0, worst_deviation = 0.0;
    for (double t : ctx.list("times")) {
        double contraction = 0.0, resolvent = 0.0, deviation = 0.0;
        for (const auto& f : fs) {
            const auto u = semigroup_apply(fact, t, f);
            contraction = std::max(contraction, l2_norm(u) / l2_norm(f));
            const double lambda = 1.0 / t;
            resolvent = std::max(resolvent, lambda * l2_norm(resolvent_apply(fact, lambda, f)) / l2_norm(f));
            if (oracle) deviation = std::max(deviation, l2_norm(u - expm_oracle(op.matrix(), t, f)) / l2_norm(u));
        }
        worst_contraction = std::max(worst_contraction, contraction);
        worst_resolvent = std::max(worst_resolvent, resolvent);
        worst_deviation = std::max(worst_deviation, deviation);
        Json row{{"t", t}, {"max_contraction", contraction}, {"max_resolvent_contraction", resolvent}};
        if (oracle) row["max_oracle_deviation"] = deviation;
        rows.push_back(row);
        csv << fmt(t) << "," << fmt(contraction) << "," << fmt(resolvent) << "," << (oracle ? fmt(deviation) : "") << "\n";
    }
    // Kato ratios ||L^{1/2} f|| / ||nabla^m f||.
    double kato_lo = std::numeric_limits<double>::infinity(), kato_hi = 0.0;
    for (const auto& f : fs) {
        const double r = l2_norm(sqrt_apply(fact, f)) / homogeneous_sobolev_norm(f, config.op.m);
        kato_lo = std::min(kato_lo, r);
        kato_hi = std::max(kato_hi, r);
    }
    const bool pass = worst_contraction <= 1.0 + 1e-10 && worst_resolvent <= 1.0 + 1e-10 &&
                      (!oracle || worst_deviation <= tolerance);
    Json result{{"factorization", factorization_json(fact)},
                {"times", rows},
                {"kato_band", {kato_lo, kato_hi}},
                {"oracle", oracle}};
    Table table;
    table.add("max contraction", worst_contraction);
    table.add("max resolvent", worst_resolvent);
    if (oracle) table.add("max oracle dev", worst_deviation);
    table.add("kato band", short_fmt(kato_lo) + " .. " + short_fmt(kato_hi));
    return finish(config, std::move(result), pass, table,
                  {{"semigroup-bench.csv", csv.str()},
                   {"semigroup-bench.plot.json",
                    plot_manifest("semigroup-bench.csv", "t", {"max_contraction", "max_oracle_deviation"}).dump(2)}});
}

StudyResult gaffney(const ExperimentConfig& config) {
    const Context ctx(config);
    const auto fact = ctx.factor(ctx.grid);
    const DecayFit fit = gaffney_check(fact, ctx.list("separations"), ctx.list("times"), ctx.integer("probes"),
                                       ctx.number("source_radius"), ctx.seed("seed"));
    const double tolerance = ctx.number("tolerance");
    const bool within = std::fabs(fit.q_hat - fit.q_target) <= tolerance * fit.q_target;
    const bool pass = !fit.degenerate && fit.monotone && within && fit.q_hat > 1.0;
    std::ostringstream csv;
    csv << "distance,t,log_ratio,used\n";
    Json logs = Json::array();
    for (std::size_t i = 0; i < fit.distances.size(); ++i) {
        const double v = fit.log_ratios[i];
        logs.push_back(std::isfinite(v) ? Json(v) : Json(nullptr));
        csv << fmt(fit.distances[i]) << "," << fmt(fit.times[i]) << "," << (std::isfinite(v) ? fmt(v) : "") << ","
            << (fit.used[i] ? 1 : 0) << "\n";
    }
    std::vector<int> used(fit.used.begin(), fit.used.end());
    Json result{{"distances", fit.distances}, {"times", fit.times}, {"log_ratios", logs}, {"used", used},
                {"q_hat", fit.q_hat},         {"q_target", fit.q_target}, {"intercept", fit.intercept},
                {"slope", fit.slope},         {"residual", fit.residual}, {"monotone", fit.monotone},
                {"degenerate", fit.degenerate}, {"tolerance", tolerance}};
    Table table;
    table.add("q_hat", fit.q_hat);
    table.add("q_target", fit.q_target);
    table.add("residual", fit.residual);
    table.add("monotone", fit.monotone ? "yes" : "no");
    return finish(config, std::move(result), pass, table,
                  {{"gaffney.csv", csv.str()},
                   {"gaffney.plot.json", plot_manifest("gaffney.csv", "distance", {"log_ratio"}).dump(2)}});
}

StudyResult caccioppoli(const ExperimentConfig& config) {
    const Context ctx(config);
    const auto fact = ctx.factor(ctx.grid);
    const bool refine = ctx.flag("refine");
    std::optional<TorusGrid> fine_grid;
    std::optional<SpectralFactorization> fine;
    if (refine) {
        fine_grid = ctx.refined();
        fine = ctx.factor(*fine_grid);
    }
    const auto variant = parse_caccioppoli_variant(ctx.text("variant"));
    const double epsilon = ctx.number("epsilon");
    const std::uint64_t seed = ctx.seed("seed");
    const int band = std::min(ctx.integer("band"), ctx.grid.points_per_axis() / 2 - 1);
    const GridFunction f = band_limited_random(ctx.grid, seed, band).mean_zero();
    std::optional<GridFunction> f_fine;
    if (refine) f_fine = band_limited_random(*fine_grid, seed, band).mean_zero();

    const double h = ctx.grid.spacing();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> axis(0, ctx.grid.points_per_axis() - 1);
    std::uniform_real_distribution<double> radius(2.0 * h, std::max(2.0 * h, 0.1));
    std::uniform_real_distribution<double> lift(0.01, 0.1);
    Json rows = Json::array();
    std::ostringstream csv;
    csv << "site,r,t0,lhs,rhs,constant,refined_constant\n";
    double max_c = 0.0, max_fine = 0.0;
    bool finite = true;
    for (int c = 0; c < ctx.integer("configs"); ++c) {
        const int i0 = axis(rng);
        const int i1 = ctx.grid.dimension() == 2 ? axis(rng) : 0;
        const double r = radius(rng);
        const double t0 = 3.0 * r + lift(rng);
        const std::size_t x0 = ctx.grid.dimension() == 2 ? ctx.grid.site(i0, i1) : ctx.grid.site(i0);
        const auto res = caccioppoli_check(fact, f, x0, r, t0, variant, epsilon);
        finite = finite && std::isfinite(res.constant);
        max_c = std::max(max_c, res.constant);
        Json row{{"site", x0}, {"r", r}, {"t0", t0}, {"lhs", res.lhs}, {"rhs", res.rhs}, {"constant", res.constant}};
        csv << x0 << "," << fmt(r) << "," << fmt(t0) << "," << fmt(res.lhs) << "," << fmt(res.rhs) << ","
            << fmt(res.constant) << ",";
        if (refine) {
            const std::size_t xf = ctx.grid.dimension() == 2 ? fine_grid->site(2 * i0, 2 * i1) : fine_grid->site(2 * i0);
            const auto rf = caccioppoli_check(*fine, *f_fine, xf, r, t0, variant, epsilon);
            finite = finite && std::isfinite(rf.constant);
            max_fine = std::max(max_fine, rf.constant);
            row["refined_constant"] = rf.constant;
            csv << fmt(rf.constant);
        }
        csv << "\n";
        rows.push_back(row);
    }
    Json result{{"variant", ctx.text("variant")}, {"configs", rows}, {"max_constant", max_c}, {"finite", finite}};
    bool pass = finite;
    Table table;
    table.add("max C", max_c);
    if (refine) {
        const double drift = (max_c > 0.0 && max_fine > 0.0) ? std::max(max_c / max_fine, max_fine / max_c)
                             : (max_c == max_fine ? 1.0 : std::numeric_limits<double>::infinity());
        result["refined_max_constant"] = max_fine;
        result["refinement_drift"] = std::isfinite(drift) ? Json(drift) : Json(nullptr);
        pass = pass && drift <= ctx.number("drift_threshold");
        table.add("max C refined", max_fine);
        table.add("drift", drift);
    }
    return finish(config, std::move(result), pass, table, {{"caccioppoli.csv", csv.str()}});
}

struct FamilyContext {
    SpectralFactorization fact;
    FunctionFamily family;
    std::optional<SpectralFactorization> fine_fact;
    std::optional<FunctionFamily> fine_family;

    FamilyContext(const Context& ctx, bool refine)
        : fact(ctx.factor(ctx.grid)), family(ctx.descriptors(), ctx.grid, &fact) {
        if (!refine) return;
        const TorusGrid g = ctx.refined();
        fine_fact.emplace(ctx.factor(g));
        fine_family.emplace(ctx.descriptors(), g, &*fine_fact);
    }
};

StudyResult equivalence(const ExperimentConfig& config) {
    const Context ctx(config);
    const bool refine = ctx.flag("refine");
    FamilyContext fc(ctx, refine);
    FunctionalEvaluator coarse(fc.fact, ctx.times);
    std::optional<FunctionalEvaluator> fine;
    if (refine) fine.emplace(*fc.fine_fact, ctx.times);
    const StudyThresholds thresholds{ctx.number("spread_threshold"), ctx.number("drift_threshold")};
    Json reports = Json::array();
    std::ostringstream csv;
    csv << "functional_a,functional_b,p,member,ratio,refined_ratio\n";
    bool pass = true;
    Table table;
    for (double p : ctx.list("p")) {
        const auto r = equivalence_study(coarse, fc.family, ctx.text("a"), ctx.text("b"), p, fine ? &*fine : nullptr,
                                         fc.fine_family ? &*fc.fine_family : nullptr, thresholds);
        pass = pass && r.pass;
        reports.push_back(equivalence_json(r));
        equivalence_csv(csv, r);
        std::string row = "spread " + short_fmt(r.spread);
        if (r.refinement_drift) row += ", drift " + short_fmt(*r.refinement_drift);
        table.add(ctx.text("a") + " / " + ctx.text("b") + " p=" + short_fmt(p), row);
    }
    return finish(config, Json{{"reports", reports}}, pass, table,
                  {{"equivalence.csv", csv.str()},
                   {"equivalence.plot.json", plot_manifest("equivalence.csv", "member", {"ratio", "refined_ratio"}).dump(2)}});
}

StudyResult domination(const ExperimentConfig& config) {
    const Context ctx(config);
    FamilyContext fc(ctx, false);
    FunctionalEvaluator evaluator(fc.fact, ctx.times);
    Json reports = Json::array();
    std::ostringstream csv;
    csv << "p,bound,member,constant\n";
    bool pass = true;
    Table table;
    for (double p : ctx.list("p")) {
        const auto r = domination_study(evaluator, fc.family, p, ctx.number("gamma"), ctx.list("gamma_sweep"),
                                        ctx.integer("geometric_members"), ctx.seed("seed"));
        pass = pass && r.pass;
        Json bounds = Json::array();
        for (const auto& b : r.bounds) {
            bounds.push_back({{"name", b.name}, {"constants", b.constants}, {"max_constant", b.max_constant},
                              {"finite", b.finite}});
            for (std::size_t j = 0; j < b.constants.size(); ++j)
                csv << fmt(p) << "," << b.name << "," << r.labels[j] << "," << fmt(b.constants[j]) << "\n";
            table.add("p=" + short_fmt(p) + " " + b.name, b.max_constant);
        }
        reports.push_back({{"p", p},
                           {"labels", r.labels},
                           {"skipped", r.skipped},
                           {"bounds", bounds},
                           {"geometric_mean_constants", r.geometric_mean_constants},
                           {"geometric_mean_max", r.geometric_mean_max},
                           {"lemma_hypothesis_constant", r.lemma_hypothesis_constant},
                           {"lemma_conclusion_constant", r.lemma_conclusion_constant},
                           {"interpolation_constants", r.interpolation_constants},
                           {"pass", r.pass}});
        table.add("p=" + short_fmt(p) + " geometric C0", r.geometric_mean_max);
    }
    return finish(config, Json{{"reports", reports}}, pass, table, {{"domination.csv", csv.str()}});
}

StudyResult aperture(const ExperimentConfig& config) {
    const Context ctx(config);
    const bool refine = ctx.flag("refine");
    FamilyContext fc(ctx, refine);
    FunctionalEvaluator coarse(fc.fact, ctx.times);
    std::optional<FunctionalEvaluator> fine;
    if (refine) fine.emplace(*fc.fine_fact, ctx.times);
    const StudyThresholds thresholds{ctx.number("spread_threshold"), ctx.number("drift_threshold")};
    Json reports = Json::array();
    std::ostringstream csv;
    csv << "functional_a,functional_b,p,member,ratio,refined_ratio\n";
    bool pass = true;
    Table table;
    for (const auto& name : ctx.params.at("functionals").get<std::vector<std::string>>())
        for (double lambda : ctx.list("apertures"))
            for (double p : ctx.list("p")) {
                const std::string wide = name + "@" + short_fmt(lambda);
                const auto r = equivalence_study(coarse, fc.family, wide, name, p, fine ? &*fine : nullptr,
                                                 fc.fine_family ? &*fc.fine_family : nullptr, thresholds);
                pass = pass && r.pass;
                reports.push_back(equivalence_json(r));
                equivalence_csv(csv, r);
                table.add(wide + " / " + name + " p=" + short_fmt(p), "spread " + short_fmt(r.spread));
            }
    return finish(config, Json{{"reports", reports}}, pass, table, {{"aperture.csv", csv.str()}});
}

StudyResult molecule(const ExperimentConfig& config) {
    const Context ctx(config);
    const auto fact = ctx.factor(ctx.grid);
    const double p = ctx.number("p");
    const int M = ctx.integer("M");
    const double epsilon = ctx.number("epsilon");
    const double r_lo = ctx.number("radius_min");
    const double r_hi = ctx.number("radius_max");
    if (!(r_lo < r_hi)) throw ConfigError("study.radius_min", "must be below study.radius_max");
    const std::uint64_t seed = ctx.seed("seed");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> radius(r_lo, r_hi);
    std::uniform_int_distribution<std::size_t> site(0, ctx.grid.total_points() - 1);
    std::normal_distribution<double> normal;

    MolecularRepresentation rep;
    rep.p = p;
    std::vector<GridFunction> samples;
    Json archive = Json::array();
    bool verified = true;
    for (int i = 0; i < ctx.integer("count"); ++i) {
        const Ball ball{site(rng), radius(rng)};
        auto mol = generate_molecule(fact, ball, p, M, epsilon, seed + 1000 + static_cast<std::uint64_t>(i));
        verified = verified && mol.achieved_bounds.verified();
        samples.push_back(mol.sample);
        archive.push_back(io::to_json(mol));
        rep.coefficients.emplace_back(normal(rng), normal(rng));
        rep.molecules.push_back(std::move(mol));
    }
    const auto norms = hardy_quasinorms(fact, samples, p, ctx.times);
    const auto [lo, hi] = std::minmax_element(norms.begin(), norms.end());
    const double spread = *hi / *lo;
    const double control = std::pow(hardy_quasinorm(fact, rep.sum(), p, ctx.times), p) / rep.p_sum();

    std::ostringstream csv;
    csv << "molecule,center,radius,worst_bound,hardy_norm\n";
    Json rows = Json::array();
    for (std::size_t i = 0; i < rep.molecules.size(); ++i) {
        const auto& m = rep.molecules[i];
        rows.push_back({{"center", m.ball.center}, {"radius", m.ball.radius},
                        {"worst_bound", m.achieved_bounds.worst()}, {"max_ring", m.achieved_bounds.max_ring},
                        {"hardy_norm", norms[i]}});
        csv << i << "," << m.ball.center << "," << fmt(m.ball.radius) << "," << fmt(m.achieved_bounds.worst()) << ","
            << fmt(norms[i]) << "\n";
    }
    const bool pass = verified && spread <= ctx.number("spread_threshold");
    Json result{{"molecules", rows}, {"all_verified", verified}, {"hardy_spread", spread},
                {"p_sum_control", control}};
    Table table;
    table.add("all verified", verified ? "yes" : "no");
    table.add("S_L spread", spread);
    table.add("p-sum control", control);
    return finish(config, std::move(result), pass, table,
                  {{"molecule.csv", csv.str()}, {"molecules.json", Json{{"schema", kSchemaVersion}, {"molecules", archive}}.dump()}});
}

StudyResult reproduce(const ExperimentConfig& config) {
    const Context ctx(config);
    const auto fact = ctx.factor(ctx.grid);
    const double t_min = ctx.number("t_min"), t_max = ctx.number("t_max");
    if (!(t_min < t_max)) throw ConfigError("study.t_min", "must be below study.t_max");
    const TimeGrid span = make_time_grid(t_min, t_max, ctx.integer("levels"));
    const int M = ctx.integer("M");
    const int band = std::min(ctx.integer("band"), ctx.grid.points_per_axis() / 2 - 1);
    Json rows = Json::array();
    std::ostringstream csv;
    csv << "probe,relative_error\n";
    double worst = 0.0;
    for (int i = 0; i < ctx.integer("probes"); ++i) {
        const GridFunction f = band_limited_random(ctx.grid, ctx.seed("seed") + static_cast<std::uint64_t>(i), band).mean_zero();
        const double err = l2_norm(calderon_reproduce(fact, f, M, span) - f) / l2_norm(f);
        worst = std::max(worst, err);
        rows.push_back(err);
        csv << i << "," << fmt(err) << "\n";
    }
    const bool pass = worst <= ctx.number("tolerance");
    Json result{{"calderon_constant", calderon_constant(config.op.m, M)}, {"errors", rows}, {"max_error", worst}};
    Table table;
    table.add("C~", calderon_constant(config.op.m, M));
    table.add("max rel. error", worst);
    return finish(config, std::move(result), pass, table, {{"reproduce.csv", csv.str()}});
}

StudyResult pq_probe(const ExperimentConfig& config) {
    const Context ctx(config);
    const auto fact = ctx.factor(ctx.grid);
    const auto report = pq_interval_probe(fact, ctx.list("exponents"), ctx.list("times"), ctx.integer("probes"),
                                          ctx.seed("seed"));
    std::ostringstream csv;
    csv << "p,t,lower_bound\n";
    bool pass = true;
    Table table;
    for (std::size_t i = 0; i < report.exponents.size(); ++i) {
        for (std::size_t j = 0; j < report.times.size(); ++j)
            csv << fmt(report.exponents[i]) << "," << fmt(report.times[j]) << "," << fmt(report.estimates[i][j]) << "\n";
        if (report.exponents[i] == 2.0) pass = pass && report.supremum[i] <= 1.0 + 1e-10;
        table.add("sup_t p=" + short_fmt(report.exponents[i]), report.supremum[i]);
    }
    Json result{{"exponents", report.exponents}, {"times", report.times},     {"estimates", report.estimates},
                {"supremum", report.supremum},   {"probes", report.probes}, {"lower_bound_only", true}};
    return finish(config, std::move(result), pass, table,
                  {{"pq-probe.csv", csv.str()},
                   {"pq-probe.plot.json", plot_manifest("pq-probe.csv", "t", {"lower_bound"}).dump(2)}});
}

StudyResult riesz(const ExperimentConfig& config) {
    const Context ctx(config);
    FamilyContext fc(ctx, false);
    const auto reference = factorize(assemble(polyharmonic_coefficients(1, ctx.grid)));
    Json reports = Json::array();
    std::ostringstream csv;
    csv << "p,member,constant\n";
    bool pass = true;
    Table table;
    for (double p : ctx.list("p")) {
        const auto r = riesz_study(fc.fact, reference, fc.family, p, ctx.times);
        pass = pass && r.finite;
        reports.push_back({{"p", r.p}, {"labels", r.labels}, {"constants", r.constants}, {"min_constant", r.min_constant},
                           {"max_constant", r.max_constant}, {"finite", r.finite}});
        for (std::size_t j = 0; j < r.constants.size(); ++j)
            csv << fmt(p) << "," << r.labels[j] << "," << fmt(r.constants[j]) << "\n";
        table.add("p=" + short_fmt(p), short_fmt(r.min_constant) + " .. " + short_fmt(r.max_constant));
    }
    return finish(config, Json{{"reports", reports}}, pass, table, {{"riesz.csv", csv.str()}});
}

}  // namespace

const std::vector<std::string>& study_names() {
    static const std::vector<std::string> names = {"validate-operator", "semigroup-bench", "gaffney",  "caccioppoli",
                                                   "equivalence",       "domination",      "aperture", "molecule",
                                                   "reproduce",         "pq-probe",        "riesz"};
    return names;
}

Json ExperimentConfig::to_json() const {
    Json tg{{"levels", time_grid.levels}};
    if (time_grid.t_min) tg["t_min"] = *time_grid.t_min;
    if (time_grid.t_max) tg["t_max"] = *time_grid.t_max;
    Json s = parameters;
    s["name"] = study;
    return Json{{"grid", {{"n", grid.n}, {"N", grid.N}}},
                {"operator", {{"m", op.m}, {"kind", op.kind}, {"delta", op.delta}, {"seed", op.seed}, {"band", op.band}}},
                {"time_grid", tg},
                {"study", s},
                {"output", {{"directory", output.directory}, {"formats", output.formats}}}};
}

ExperimentConfig parse_config(const Json& tree) {
    ExperimentConfig c;
    check_keys(tree, "", {"grid", "operator", "time_grid", "study", "output"});

    const Json grid = tree.value("grid", Json::object());
    check_keys(grid, "grid", {"n", "N"});
    c.grid.n = read<int>(grid, "n", "grid.n", 1, [](const std::string& path, const Json& v) {
        const auto n = as_integer(path, v);
        if (n != 1 && n != 2) fail(path, "dimension must be 1 or 2, got " + describe(v));
    });
    c.grid.N = read<int>(grid, "N", "grid.N", c.grid.n == 1 ? 64 : 24, [](const std::string& path, const Json& v) {
        const auto N = as_integer(path, v);
        if (N < 8 || N % 2 != 0) fail(path, "points per axis must be even and at least 8, got " + describe(v));
    });
    if (std::pow(static_cast<double>(c.grid.N), c.grid.n) > static_cast<double>(kMaxAssemblyPoints))
        fail("grid.N", "N^n exceeds the dense assembly limit of " + std::to_string(kMaxAssemblyPoints) + " sites");

    const Json op = tree.value("operator", Json::object());
    check_keys(op, "operator", {"m", "kind", "delta", "seed", "band"});
    c.op.m = read<int>(op, "m", "operator.m", 1, [](const std::string& path, const Json& v) {
        const auto m = as_integer(path, v);
        if (m < 1 || m > 3) fail(path, "half order m must lie in {1, 2, 3}, got " + describe(v));
    });
    c.op.kind = read<std::string>(op, "kind", "operator.kind", "polyharmonic", one_of({"polyharmonic", "random"}));
    c.op.delta = read<double>(op, "delta", "operator.delta", 0.5, [](const std::string& path, const Json& v) {
        const double d = as_number(path, v);
        if (!(d >= 0.0 && d < 1.0)) fail(path, "perturbation size must lie in [0, 1), got " + describe(v));
    });
    c.op.seed = read<std::uint64_t>(op, "seed", "operator.seed", 1, any_seed());
    const int N = c.grid.N;
    c.op.band = read<int>(op, "band", "operator.band", 4, [N](const std::string& path, const Json& v) {
        const auto b = as_integer(path, v);
        if (b < 0 || b >= N / 2) fail(path, "coefficient band must lie in [0, N/2), got " + describe(v));
    });

    const Json tg = tree.value("time_grid", Json::object());
    check_keys(tg, "time_grid", {"t_min", "t_max", "levels"});
    if (tg.contains("t_min")) {
        positive()("time_grid.t_min", tg["t_min"]);
        c.time_grid.t_min = tg["t_min"].get<double>();
    }
    if (tg.contains("t_max")) {
        positive()("time_grid.t_max", tg["t_max"]);
        c.time_grid.t_max = tg["t_max"].get<double>();
    }
    c.time_grid.levels = read<int>(tg, "levels", "time_grid.levels", 16, integer_at_least(kMinTimeLevels));
    const double t_lo = c.time_grid.t_min.value_or(1.0 / c.grid.N);
    const double t_hi = c.time_grid.t_max.value_or(0.25);
    if (!(t_lo < t_hi)) fail("time_grid.t_max", "must exceed time_grid.t_min");

    const Json out = tree.value("output", Json::object());
    check_keys(out, "output", {"directory", "formats"});
    if (out.contains("directory")) {
        if (!out["directory"].is_string() || out["directory"].get<std::string>().empty())
            fail("output.directory", "expected a nonempty path");
        c.output.directory = out["directory"].get<std::string>();
    }
    if (out.contains("formats")) {
        const Json& f = out["formats"];
        if (!f.is_array()) fail("output.formats", "expected a list drawn from {json, csv}");
        c.output.formats.clear();
        for (std::size_t i = 0; i < f.size(); ++i) {
            one_of({"json", "csv"})("output.formats[" + std::to_string(i) + "]", f[i]);
            c.output.formats.push_back(f[i].get<std::string>());
        }
    }

    if (!tree.contains("study")) fail("study", "missing study section");
    const Json& study = tree["study"];
    if (!study.is_object()) fail("study", "expected an object");
    if (!study.contains("name") || !study["name"].is_string()) fail("study.name", "missing study name");
    c.study = study["name"].get<std::string>();
    const auto& names = study_names();
    if (std::find(names.begin(), names.end(), c.study) == names.end()) fail("study.name", "unknown study '" + c.study + "'");

    const auto table = parameter_table(c);
    std::set<std::string> allowed = {"name"};
    for (const auto& spec : table) allowed.insert(spec.key);
    check_keys(study, "study", allowed);
    for (const auto& spec : table) {
        const Json value = study.contains(spec.key) ? study[spec.key] : spec.fallback;
        spec.check("study." + spec.key, value);
        c.parameters[spec.key] = value;
    }
    if (c.parameters.contains("refine") && c.parameters["refine"].get<bool>() &&
        std::pow(2.0 * c.grid.N, c.grid.n) > static_cast<double>(kMaxAssemblyPoints))
        fail("study.refine", "the refined grid 2N exceeds the dense assembly limit");
    return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
    Json tree;
    try {
        tree = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config", std::string("not valid JSON: ") + e.what());
    }
    return parse_config(tree);
}

StudyResult run_study(const ExperimentConfig& config) {
    const std::string& s = config.study;
    if (s == "validate-operator") return validate_operator(config);
    if (s == "semigroup-bench") return semigroup_bench(config);
    if (s == "gaffney") return gaffney(config);
    if (s == "caccioppoli") return caccioppoli(config);
    if (s == "equivalence") return equivalence(config);
    if (s == "domination") return domination(config);
    if (s == "aperture") return aperture(config);
    if (s == "molecule") return molecule(config);
    if (s == "reproduce") return reproduce(config);
    if (s == "pq-probe") return pq_probe(config);
    if (s == "riesz") return riesz(config);
    throw ConfigError("study.name", "unknown study '" + s + "'");
}

Json merge_reports(const std::vector<Json>& reports) {
    Json merged{{"schema", kSchemaVersion}, {"study", "report-merge"}, {"reports", Json::array()}};
    bool pass = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const Json& r = reports[i];
        const std::string path = "reports[" + std::to_string(i) + "]";
        if (!r.is_object() || !r.contains("schema")) fail(path, "not a report (missing schema)");
        if (r["schema"] != kSchemaVersion) fail(path + ".schema", "unsupported report schema " + r["schema"].dump());
        pass = pass && r.value("pass", false);
        Json copy = r;
        copy.erase("timestamp");
        merged["reports"].push_back(std::move(copy));
    }
    merged["pass"] = pass;
    return merged;
}

}  // namespace hlab
