#include "hlab/hlab.h"

#include "hlab/error.hpp"
#include "hlab/hardy.hpp"
#include "hlab/runner.hpp"

#include <cstring>
#include <new>
#include <string>

struct hlab_config {
    hlab::ExperimentConfig config;
};

struct hlab_result {
    hlab::StudyResult result;
};

struct hlab_operator {
    hlab::EllipticOperator op;
};

struct hlab_factorization {
    hlab::SpectralFactorization fact;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_field;

hlab_status record(hlab_status status, const std::string& message, const std::string& field = {}) {
    last_error = message;
    last_field = field;
    return status;
}

template <typename F>
hlab_status guarded(F&& body) {
    last_error.clear();
    last_field.clear();
    try {
        body();
        return HLAB_OK;
    } catch (const hlab::ConfigError& e) {
        return record(HLAB_ERR_CONFIG, e.what(), e.field());
    } catch (const hlab::InvalidArgument& e) {
        return record(HLAB_ERR_INVALID_ARGUMENT, e.what());
    } catch (const hlab::NumericalFailure& e) {
        return record(HLAB_ERR_NUMERICAL, e.what());
    } catch (const std::bad_alloc&) {
        return record(HLAB_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return record(HLAB_ERR_INTERNAL, e.what());
    }
}

char* duplicate(const std::string& text) {
    char* out = new char[text.size() + 1];
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

void require(bool condition, const char* message) {
    if (!condition) throw hlab::InvalidArgument(message);
}

hlab::GridFunction read_function(const hlab::TorusGrid& grid, const double* input) {
    hlab::Vector values(static_cast<Eigen::Index>(grid.total_points()));
    for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = hlab::Complex(input[2 * i], input[2 * i + 1]);
    return hlab::GridFunction(grid, std::move(values));
}

}  // namespace

extern "C" {

const char* hlab_version(void) { return "1.0.0"; }

const char* hlab_last_error(void) { return last_error.c_str(); }

const char* hlab_last_error_field(void) { return last_field.c_str(); }

void hlab_string_free(char* text) { delete[] text; }

hlab_status hlab_config_parse(const char* json_text, hlab_config** out) {
    return guarded([&] {
        require(json_text != nullptr && out != nullptr, "null argument");
        *out = new hlab_config{hlab::parse_config_text(json_text)};
    });
}

hlab_status hlab_config_json(const hlab_config* config, char** out) {
    return guarded([&] {
        require(config != nullptr && out != nullptr, "null argument");
        *out = duplicate(config->config.to_json().dump(2));
    });
}

void hlab_config_free(hlab_config* config) { delete config; }

hlab_status hlab_run_study(const hlab_config* config, hlab_result** out) {
    return guarded([&] {
        require(config != nullptr && out != nullptr, "null argument");
        *out = new hlab_result{hlab::run_study(config->config)};
    });
}

int hlab_result_pass(const hlab_result* result) { return result != nullptr && result->result.pass ? 1 : 0; }

hlab_status hlab_result_report(const hlab_result* result, char** out) {
    return guarded([&] {
        require(result != nullptr && out != nullptr, "null argument");
        *out = duplicate(result->result.report.dump(2));
    });
}

hlab_status hlab_result_summary(const hlab_result* result, char** out) {
    return guarded([&] {
        require(result != nullptr && out != nullptr, "null argument");
        *out = duplicate(result->result.summary);
    });
}

size_t hlab_result_file_count(const hlab_result* result) { return result ? result->result.files.size() : 0; }

hlab_status hlab_result_file(const hlab_result* result, size_t index, char** name, char** content) {
    return guarded([&] {
        require(result != nullptr && name != nullptr && content != nullptr, "null argument");
        require(index < result->result.files.size(), "file index out of range");
        auto it = result->result.files.begin();
        std::advance(it, static_cast<long>(index));
        *name = duplicate(it->first);
        *content = duplicate(it->second);
    });
}

void hlab_result_free(hlab_result* result) { delete result; }

hlab_status hlab_merge_reports(const char* reports_json, char** out) {
    return guarded([&] {
        require(reports_json != nullptr && out != nullptr, "null argument");
        hlab::io::Json tree;
        try {
            tree = hlab::io::Json::parse(reports_json);
        } catch (const hlab::io::Json::parse_error& e) {
            throw hlab::ConfigError("reports", std::string("not valid JSON: ") + e.what());
        }
        if (!tree.is_array()) throw hlab::ConfigError("reports", "expected a list of reports");
        *out = duplicate(hlab::merge_reports(tree.get<std::vector<hlab::io::Json>>()).dump(2));
    });
}

hlab_status hlab_operator_create(int dimension, int points_per_axis, int half_order, const char* kind, double delta,
                                 uint64_t seed, int band, hlab_operator** out) {
    return guarded([&] {
        require(kind != nullptr && out != nullptr, "null argument");
        const auto grid = hlab::make_grid(dimension, points_per_axis);
        const std::string k = kind;
        if (k == "polyharmonic") {
            *out = new hlab_operator{hlab::assemble(hlab::polyharmonic_coefficients(half_order, grid))};
        } else if (k == "random") {
            *out = new hlab_operator{
                hlab::assemble(hlab::random_elliptic_coefficients(half_order, grid, delta, seed, band))};
        } else {
            throw hlab::InvalidArgument("unknown operator kind '" + k + "'");
        }
    });
}

size_t hlab_operator_size(const hlab_operator* op) { return op ? op->op.grid().total_points() : 0; }

double hlab_operator_lambda1(const hlab_operator* op) { return op ? op->op.strong_ellipticity().lambda1 : 0.0; }

void hlab_operator_free(hlab_operator* op) { delete op; }

hlab_status hlab_factorization_create(const hlab_operator* op, hlab_factorization** out) {
    return guarded([&] {
        require(op != nullptr && out != nullptr, "null argument");
        *out = new hlab_factorization{hlab::factorize(op->op)};
    });
}

double hlab_factorization_residual(const hlab_factorization* fact) { return fact ? fact->fact.residual() : 0.0; }

void hlab_factorization_free(hlab_factorization* fact) { delete fact; }

hlab_status hlab_semigroup_apply(const hlab_factorization* fact, double t, const double* input, double* output) {
    return guarded([&] {
        require(fact != nullptr && input != nullptr && output != nullptr, "null argument");
        const auto& grid = fact->fact.source().grid();
        const auto u = hlab::semigroup_apply(fact->fact, t, read_function(grid, input));
        for (Eigen::Index i = 0; i < u.values().size(); ++i) {
            output[2 * i] = u.values()[i].real();
            output[2 * i + 1] = u.values()[i].imag();
        }
    });
}

hlab_status hlab_hardy_quasinorm(const hlab_factorization* fact, const double* input, double p, int levels,
                                 double* out) {
    return guarded([&] {
        require(fact != nullptr && input != nullptr && out != nullptr, "null argument");
        const auto& grid = fact->fact.source().grid();
        *out = hlab::hardy_quasinorm(fact->fact, read_function(grid, input), p, hlab::default_time_grid(grid, levels));
    });
}

}  // extern "C"
