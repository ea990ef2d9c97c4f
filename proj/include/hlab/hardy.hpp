#pragma once

// H_L^p quasi-norms, (p, 2, M, epsilon)_L molecules and the Calderon
// reproducing formula.

#include "hlab/functionals.hpp"

#include <string>
#include <vector>

namespace hlab {

/// ||S_L f||_{L^p} with k = 1, aperture 1. A nonzero mean is removed first and
/// reported through `warnings`.
double hardy_quasinorm(const SpectralFactorization& fact, const GridFunction& f, double p, const TimeGrid& times,
                       std::vector<std::string>* warnings = nullptr);
std::vector<double> hardy_quasinorms(const SpectralFactorization& fact, const std::vector<GridFunction>& fs, double p,
                                     const TimeGrid& times, std::vector<std::string>* warnings = nullptr);

struct Ball {
    std::size_t center = 0;
    double radius = 0.0;
};

struct MoleculeBounds {
    /// entries[l][i] = ||(r_B^{2m} L)^{-l} alpha||_{L^2(S_i(B))} / (2^{-i eps} |2^i B|^{1/2 - 1/p})
    std::vector<std::vector<double>> entries;
    /// Largest i with 2^i r_B < 1/2; ring max_ring + 1 is the rest of the torus.
    int max_ring = 0;
    /// ||alpha - (r_B^{2m} L)^M b|| / ||alpha||
    double witness_mismatch = 0.0;

    double worst() const;
    bool verified(double tolerance = 1e-12) const { return worst() <= 1.0 + tolerance; }
};

struct Molecule {
    GridFunction sample;
    Ball ball;
    double p = 1.0;
    int M = 1;
    double epsilon = 1.0;
    GridFunction witness;
    MoleculeBounds achieved_bounds;
};

/// Largest ring index i with 2^i r < 1/2.
int max_usable_ring(double radius);

MoleculeBounds verify_molecule(const SpectralFactorization& fact, const GridFunction& candidate,
                               const GridFunction& witness, const Ball& ball, double p, int M, double epsilon);

/// alpha = c (r_B^{2m} L)^M b with b a smooth random bump supported in B and c
/// chosen so that the worst bound equals one.
Molecule generate_molecule(const SpectralFactorization& fact, const Ball& ball, double p, int M, double epsilon,
                           std::uint64_t seed);

struct MolecularRepresentation {
    std::vector<Molecule> molecules;
    std::vector<Complex> coefficients;
    double p = 1.0;

    GridFunction sum() const;
    /// sum_j |lambda_j|^p
    double p_sum() const;
};

/// C~ with C~ int_0^infty t^{2m(M+2)} e^{-2 t^{2m}} dt/t = 1, by adaptive quadrature.
double calderon_constant(int m, int M);

/// C~ sum_j Delta (t_j^{2m} L)^{M+2} e^{-2 t_j^{2m} L} f
GridFunction calderon_reproduce(const SpectralFactorization& fact, const GridFunction& f, int M,
                                const TimeGrid& times);

}  // namespace hlab
