#pragma once

// JSON and CSV encodings of grid functions, coefficient fields, tent fields,
// functional outputs and molecules.

#include "hlab/hardy.hpp"

#include <json.hpp>

#include <string>

namespace hlab::io {

using Json = nlohmann::json;

/// {n, N, values: [[re, im], ...]} in row-major site order; round-trips bit-exactly.
Json to_json(const GridFunction& f);
GridFunction grid_function_from_json(const Json& j);

/// {m, n, N, entries: [{alpha, beta, values}]}
Json to_json(const CoefficientField& a);
CoefficientField coefficient_field_from_json(const Json& j);

/// {N, n, t_samples, values: [level][site] as [re, im]}
Json to_json(const TentField& F);
/// level,t,energy rows.
std::string energies_csv(const TentField& F);

/// site,value rows.
std::string sites_csv(const TorusGrid& grid, const RealVector& values);
/// {"p": norm} for every exponent.
Json norms_json(const TorusGrid& grid, const RealVector& values, const std::vector<double>& exponents);

/// {ball: {center, radius}, p, M, epsilon, witness, sample, achieved_bounds}
Json to_json(const Molecule& molecule);

}  // namespace hlab::io
