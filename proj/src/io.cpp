#include "hlab/io.hpp"

#include "hlab/error.hpp"

#include <algorithm>
#include <sstream>

namespace hlab::io {
namespace {

Json complex_array(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
    return out;
}

Vector complex_values(const Json& j, std::size_t expected, const char* what) {
    if (!j.is_array() || j.size() != expected)
        throw InvalidArgument(std::string(what) + ": expected " + std::to_string(expected) + " values");
    Vector v(static_cast<Eigen::Index>(expected));
    for (std::size_t i = 0; i < expected; ++i) {
        const auto& pair = j[i];
        if (!pair.is_array() || pair.size() != 2) throw InvalidArgument(std::string(what) + ": values must be [re, im]");
        v[static_cast<Eigen::Index>(i)] = Complex(pair[0].get<double>(), pair[1].get<double>());
    }
    return v;
}

TorusGrid grid_from(const Json& j) { return make_grid(j.at("n").get<int>(), j.at("N").get<int>()); }

}  // namespace

Json to_json(const GridFunction& f) {
    return Json{{"n", f.grid().dimension()}, {"N", f.grid().points_per_axis()}, {"values", complex_array(f.values())}};
}

GridFunction grid_function_from_json(const Json& j) {
    const TorusGrid grid = grid_from(j);
    return GridFunction(grid, complex_values(j.at("values"), grid.total_points(), "grid function"));
}

Json to_json(const CoefficientField& a) {
    Json entries = Json::array();
    const auto& indices = a.indices();
    for (std::size_t i = 0; i < indices.size(); ++i)
        for (std::size_t k = 0; k < indices.size(); ++k)
            entries.push_back({{"alpha", indices[i].components},
                               {"beta", indices[k].components},
                               {"values", complex_array(a.entry(i, k).values())}});
    return Json{{"m", a.half_order()},
                {"n", a.grid().dimension()},
                {"N", a.grid().points_per_axis()},
                {"entries", std::move(entries)}};
}

CoefficientField coefficient_field_from_json(const Json& j) {
    const int m = j.at("m").get<int>();
    const TorusGrid grid = grid_from(j);
    const auto indices = multi_indices(grid.dimension(), m);
    std::vector<GridFunction> entries(indices.size() * indices.size(), GridFunction::zeros(grid));
    std::vector<bool> seen(entries.size(), false);
    for (const auto& e : j.at("entries")) {
        const MultiIndex alpha{e.at("alpha").get<std::vector<int>>()};
        const MultiIndex beta{e.at("beta").get<std::vector<int>>()};
        const auto ia = std::find(indices.begin(), indices.end(), alpha);
        const auto ib = std::find(indices.begin(), indices.end(), beta);
        if (ia == indices.end() || ib == indices.end())
            throw InvalidArgument("coefficient entry has a multi-index of the wrong order");
        const auto slot = static_cast<std::size_t>(ia - indices.begin()) * indices.size() +
                          static_cast<std::size_t>(ib - indices.begin());
        entries[slot] = GridFunction(grid, complex_values(e.at("values"), grid.total_points(), "coefficient entry"));
        seen[slot] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw InvalidArgument("coefficient field is missing entries");
    return CoefficientField(m, grid, std::move(entries));
}

Json to_json(const TentField& F) {
    Json levels = Json::array();
    for (const auto& level : F.levels()) levels.push_back(complex_array(level));
    return Json{{"N", F.grid().points_per_axis()},
                {"n", F.grid().dimension()},
                {"t_samples", F.time_grid().samples},
                {"values", std::move(levels)}};
}

std::string energies_csv(const TentField& F) {
    std::ostringstream out;
    out.precision(17);
    out << "level,t,energy\n";
    const auto energies = F.level_energies();
    for (std::size_t j = 0; j < energies.size(); ++j)
        out << j << "," << F.time_grid().samples[j] << "," << energies[j] << "\n";
    return out.str();
}

std::string sites_csv(const TorusGrid& grid, const RealVector& values) {
    std::ostringstream out;
    out.precision(17);
    out << "site,value\n";
    for (std::size_t s = 0; s < grid.total_points(); ++s) out << s << "," << values[static_cast<Eigen::Index>(s)] << "\n";
    return out.str();
}

Json norms_json(const TorusGrid& grid, const RealVector& values, const std::vector<double>& exponents) {
    Json out = Json::array();
    for (double p : exponents) out.push_back({{"p", p}, {"norm", lp_quasinorm(grid, values, p)}});
    return out;
}

Json to_json(const Molecule& molecule) {
    return Json{{"ball", {{"center", molecule.ball.center}, {"radius", molecule.ball.radius}}},
                {"p", molecule.p},
                {"M", molecule.M},
                {"epsilon", molecule.epsilon},
                {"witness", to_json(molecule.witness)},
                {"sample", to_json(molecule.sample)},
                {"achieved_bounds",
                 {{"entries", molecule.achieved_bounds.entries},
                  {"max_ring", molecule.achieved_bounds.max_ring},
                  {"witness_mismatch", molecule.achieved_bounds.witness_mismatch},
                  {"worst", molecule.achieved_bounds.worst()}}}};
}

}  // namespace hlab::io
