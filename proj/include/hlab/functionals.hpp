#pragma once

// Square, area and maximal functionals of the heat extension, evaluated at
// every lattice site.

#include "hlab/conegeo.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hlab {

/// Radial C^infty bump: 1 on [0, 1], 0 on [2, infty), smooth monotone step between.
struct CutoffDescriptor {
    int max_order = 0;
    /// sup |d^k profile / ds^k| for k = 0..max_order, sampled on a fine grid.
    std::vector<double> derivative_bounds;

    double profile(double s) const;
    static CutoffDescriptor standard(int max_order);
};

enum class SquareKind { Vertical, Lusin };

enum class MaximalKind { Radial, Nontangential, RadialGradient, NontangentialGradient, Cutoff };

SquareKind parse_square_kind(const std::string& name);
MaximalKind parse_maximal_kind(const std::string& name);
std::string to_string(MaximalKind kind);

/// Vertical: S_{L,k}^lambda, k >= 1. Lusin: S_{h,L,k}^lambda, k >= 0.
GridFunction square_function(const SpectralFactorization& fact, const GridFunction& f, SquareKind kind, int k,
                             double aperture, const TimeGrid& times);
std::vector<RealVector> square_functions(const SpectralFactorization& fact, const std::vector<GridFunction>& fs,
                                         SquareKind kind, int k, double aperture, const TimeGrid& times);

/// R, N, their gradient-augmented variants, and the cutoff variant N_{h,psi,L}.
/// The cutoff kind requires `cutoff`.
GridFunction maximal_function(const SpectralFactorization& fact, const GridFunction& f, MaximalKind kind,
                              double aperture, const TimeGrid& times,
                              const std::optional<CutoffDescriptor>& cutoff = std::nullopt);
std::vector<RealVector> maximal_functions(const SpectralFactorization& fact, const std::vector<GridFunction>& fs,
                                          MaximalKind kind, double aperture, const TimeGrid& times,
                                          const std::optional<CutoffDescriptor>& cutoff = std::nullopt);

}  // namespace hlab
