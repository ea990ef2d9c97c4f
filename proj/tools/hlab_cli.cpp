#include "hlab/hlab.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

const std::vector<std::string> kStudies = {"validate-operator", "semigroup-bench", "gaffney",  "caccioppoli",
                                           "equivalence",       "domination",      "aperture", "molecule",
                                           "reproduce",         "pq-probe",        "riesz"};

struct Overrides {
    std::string config_path;
    std::optional<int> n, N, m, levels, band;
    std::optional<std::string> kind, output;
    std::optional<double> delta, t_min, t_max;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> a, b;
    std::vector<double> p;
    std::vector<std::string> sets;
    std::vector<std::string> formats;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

std::string take(char* text) {
    std::string out = text ? text : "";
    hlab_string_free(text);
    return out;
}

int fail_with(hlab_status status) {
    std::cerr << "error: " << hlab_last_error() << "\n";
    if (status == HLAB_ERR_CONFIG) return kExitConfig;
    return kExitNumerical;
}

// "a.b.c=value"; value is parsed as JSON when possible, else kept as a string.
void apply_set(Json& tree, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects path=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    Json* node = &tree;
    std::stringstream parts(path);
    std::string key;
    std::vector<std::string> keys;
    while (std::getline(parts, key, '.')) keys.push_back(key);
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        if (!node->contains(keys[i])) (*node)[keys[i]] = Json::object();
        node = &(*node)[keys[i]];
        if (!node->is_object()) throw UsageError("--set path '" + path + "' crosses a non-object");
    }
    (*node)[keys.back()] = value;
}

Json build_tree(const std::string& study, const Overrides& o) {
    Json tree = Json::object();
    if (!o.config_path.empty()) {
        tree = Json::parse(read_file(o.config_path), nullptr, false);
        if (tree.is_discarded() || !tree.is_object()) throw UsageError(o.config_path + " is not a JSON object");
    }
    const auto set = [&tree](const char* section, const char* key, const Json& value) { tree[section][key] = value; };
    if (o.n) set("grid", "n", *o.n);
    if (o.N) set("grid", "N", *o.N);
    if (o.m) set("operator", "m", *o.m);
    if (o.kind) set("operator", "kind", *o.kind);
    if (o.delta) set("operator", "delta", *o.delta);
    if (o.seed) set("operator", "seed", *o.seed);
    if (o.band) set("operator", "band", *o.band);
    if (o.levels) set("time_grid", "levels", *o.levels);
    if (o.t_min) set("time_grid", "t_min", *o.t_min);
    if (o.t_max) set("time_grid", "t_max", *o.t_max);
    if (o.output) set("output", "directory", *o.output);
    if (!o.formats.empty()) set("output", "formats", o.formats);
    if (o.a) set("study", "a", *o.a);
    if (o.b) set("study", "b", *o.b);
    if (!o.p.empty()) {
        if (study == "molecule" && o.p.size() == 1) set("study", "p", o.p.front());
        else set("study", "p", o.p);
    }
    for (const auto& s : o.sets) apply_set(tree, s);
    if (tree.contains("study") && tree["study"].is_object() && tree["study"].contains("name") &&
        tree["study"]["name"] != study)
        throw UsageError("config names study " + tree["study"]["name"].dump() + " but the subcommand is " + study);
    tree["study"]["name"] = study;
    return tree;
}

int run(const std::string& study, const Overrides& o) {
    const Json tree = build_tree(study, o);
    hlab_config* config = nullptr;
    if (hlab_status s = hlab_config_parse(tree.dump().c_str(), &config); s != HLAB_OK) return fail_with(s);
    const Json normalised = Json::parse(take([&] {
        char* out = nullptr;
        hlab_config_json(config, &out);
        return out;
    }()));

    hlab_result* result = nullptr;
    const hlab_status status = hlab_run_study(config, &result);
    hlab_config_free(config);
    if (status != HLAB_OK) return fail_with(status);

    char* text = nullptr;
    hlab_result_report(result, &text);
    Json report = Json::parse(take(text));
    report["timestamp"] = timestamp();
    hlab_result_summary(result, &text);
    const std::string summary = take(text);

    const fs::path dir = normalised["output"]["directory"].get<std::string>();
    const auto formats = normalised["output"]["formats"].get<std::vector<std::string>>();
    const bool json_out = std::find(formats.begin(), formats.end(), "json") != formats.end();
    const bool csv_out = std::find(formats.begin(), formats.end(), "csv") != formats.end();
    fs::create_directories(dir);
    if (json_out) write_file(dir / (study + ".json"), report.dump(2) + "\n");
    for (std::size_t i = 0; i < hlab_result_file_count(result); ++i) {
        char* name = nullptr;
        char* content = nullptr;
        hlab_result_file(result, i, &name, &content);
        const std::string file = take(name);
        const std::string body = take(content);
        const bool is_csv = file.size() > 4 && file.substr(file.size() - 4) == ".csv";
        if ((is_csv && csv_out) || (!is_csv && json_out)) write_file(dir / file, body);
    }
    const bool pass = hlab_result_pass(result) != 0;
    hlab_result_free(result);
    std::cout << summary;
    return pass ? kExitPass : kExitFail;
}

int merge(const std::vector<std::string>& inputs, const std::string& output) {
    Json reports = Json::array();
    for (const auto& path : inputs) {
        Json r = Json::parse(read_file(path), nullptr, false);
        if (r.is_discarded()) throw UsageError(path + " is not valid JSON");
        reports.push_back(std::move(r));
    }
    char* out = nullptr;
    if (hlab_status s = hlab_merge_reports(reports.dump().c_str(), &out); s != HLAB_OK) return fail_with(s);
    Json merged = Json::parse(take(out));
    merged["timestamp"] = timestamp();
    if (output.empty()) {
        std::cout << merged.dump(2) << "\n";
    } else {
        write_file(output, merged.dump(2) + "\n");
        std::cout << "merged " << inputs.size() << " reports into " << output << "\n";
    }
    return merged["pass"].get<bool>() ? kExitPass : kExitFail;
}

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("-c,--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app->add_option("--dim", o.n, "Spatial dimension n (1 or 2)");
    app->add_option("-N,--points", o.N, "Grid points per axis");
    app->add_option("-m,--half-order", o.m, "Half order m of the operator");
    app->add_option("--kind", o.kind, "Operator kind: polyharmonic or random");
    app->add_option("--delta", o.delta, "Perturbation size of random coefficients");
    app->add_option("--seed", o.seed, "Seed of random coefficients");
    app->add_option("--band", o.band, "Fourier band of random coefficients");
    app->add_option("--levels", o.levels, "Time grid levels");
    app->add_option("--t-min", o.t_min, "Smallest time sample");
    app->add_option("--t-max", o.t_max, "Largest time sample");
    app->add_option("-o,--output", o.output, "Output directory");
    app->add_option("--format", o.formats, "Output formats (json, csv)");
    app->add_option("--p", o.p, "Exponents p (study.p)");
    app->add_option("--set", o.sets, "Override any config leaf, e.g. study.probes=20");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for Hardy spaces of higher-order elliptic operators"};
    app.set_version_flag("--version", std::string(hlab_version()));
    app.require_subcommand(1);

    Overrides overrides;
    for (const auto& name : kStudies) {
        auto* sub = app.add_subcommand(name, "Run the " + name + " study");
        add_common(sub, overrides);
        if (name == "equivalence") {
            sub->add_option("--a", overrides.a, "Functional a (study.a)");
            sub->add_option("--b", overrides.b, "Functional b (study.b)");
        }
    }

    std::vector<std::string> inputs;
    std::string merged_output;
    auto* merge_cmd = app.add_subcommand("report-merge", "Merge JSON reports into one");
    merge_cmd->add_option("reports", inputs, "Report files")->required()->check(CLI::ExistingFile);
    merge_cmd->add_option("-o,--output", merged_output, "Merged report file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitConfig;
    }

    try {
        if (merge_cmd->parsed()) return merge(inputs, merged_output);
        for (auto* sub : app.get_subcommands()) return run(sub->get_name(), overrides);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}
