#pragma once

// Homogeneous 2m-order divergence-form operators
//   L = sum_{|alpha| = m = |beta|} (-1)^m d^alpha (a_{alpha beta} d^beta)
// with complex, spatially varying coefficients, assembled densely.

#include "hlab/lattice.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace hlab {

/// Dense tensor {a_{alpha beta}(x)}: entry (i, j) pairs multi_indices(n, m)[i]
/// with multi_indices(n, m)[j].
class CoefficientField {
public:
    CoefficientField(int half_order, TorusGrid grid, std::vector<GridFunction> entries);

    int half_order() const noexcept { return m_; }
    const TorusGrid& grid() const noexcept { return grid_; }
    const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
    std::size_t block_size() const noexcept { return indices_.size(); }

    const GridFunction& entry(std::size_t alpha, std::size_t beta) const {
        return entries_[alpha * indices_.size() + beta];
    }
    const std::vector<GridFunction>& entries() const noexcept { return entries_; }

    /// Lambda_inf = max |a_{alpha beta}(x)|
    double sup_bound() const noexcept { return sup_bound_; }

    /// The D_m x D_m matrix [a_{alpha beta}(x)] at one site.
    Matrix pointwise(std::size_t site) const;

    CoefficientField operator+(const CoefficientField& other) const;

private:
    int m_;
    TorusGrid grid_;
    std::vector<MultiIndex> indices_;
    std::vector<GridFunction> entries_;
    double sup_bound_;
};

CoefficientField polyharmonic_coefficients(int half_order, const TorusGrid& grid);

/// a(x) = W + delta P(x), W = diag(m!/alpha!), P a band-limited complex tensor
/// with pointwise spectral norm at most one. The Fourier coefficients of P
/// depend only on (m, n, band, seed), so refining the grid samples the same field.
CoefficientField random_elliptic_coefficients(int half_order, const TorusGrid& grid, double delta,
                                              std::uint64_t seed, int band = 4);

/// Uniform tensor a_{alpha beta}(x) = value[alpha][beta].
CoefficientField constant_coefficients(int half_order, const TorusGrid& grid, const Matrix& value);

struct StrongEllipticityReport {
    bool certified = false;
    /// min over sites of the smallest eigenvalue of the Hermitian part.
    double lambda1 = 0.0;
    std::size_t worst_site = 0;
};

StrongEllipticityReport check_strong_ellipticity(const CoefficientField& coefficients);

struct FormEstimate {
    double lambda0_hat = 0.0;
    double Lambda0_hat = 0.0;
    int trials = 0;
    std::uint64_t seed = 0;

    bool elliptic() const noexcept { return lambda0_hat > 0.0; }
};

class EllipticOperator {
public:
    const CoefficientField& coefficients() const noexcept { return coefficients_; }
    const TorusGrid& grid() const noexcept { return coefficients_.grid(); }
    int half_order() const noexcept { return coefficients_.half_order(); }
    const Matrix& matrix() const noexcept { return matrix_; }
    double matrix_norm() const noexcept { return norm_; }

    const FormEstimate& form_estimate() const noexcept { return form_; }
    double garding_lower() const noexcept { return form_.lambda0_hat; }
    double form_upper() const noexcept { return form_.Lambda0_hat; }
    std::optional<double> pointwise_lower() const noexcept { return pointwise_lower_; }
    const StrongEllipticityReport& strong_ellipticity() const noexcept { return strong_; }
    /// omega = arctan(Lambda0 / lambda0)
    double type_angle() const noexcept;

    GridFunction apply(const GridFunction& f) const;

private:
    friend EllipticOperator assemble(const CoefficientField&, int, std::uint64_t);

    explicit EllipticOperator(CoefficientField coefficients) : coefficients_(std::move(coefficients)) {}

    CoefficientField coefficients_;
    Matrix matrix_;
    double norm_ = 0.0;
    FormEstimate form_;
    StrongEllipticityReport strong_;
    std::optional<double> pointwise_lower_;
};

inline constexpr std::size_t kMaxAssemblyPoints = 4096;
inline constexpr int kDefaultFormTrials = 200;
inline constexpr std::uint64_t kDefaultFormSeed = 20240601;

/// Columns L e_j via spectral derivatives; fills ellipticity metadata.
EllipticOperator assemble(const CoefficientField& coefficients, int form_trials = kDefaultFormTrials,
                          std::uint64_t form_seed = kDefaultFormSeed);

/// Matrix-free L f through the same derivative pipeline as assembly.
GridFunction apply_operator(const CoefficientField& coefficients, const GridFunction& f);

/// a_0(f, g) = sum int a_{alpha beta} d^beta f conj(d^alpha g)
Complex sesquilinear_form(const CoefficientField& coefficients, const GridFunction& f, const GridFunction& g);
Complex sesquilinear_form(const EllipticOperator& op, const GridFunction& f, const GridFunction& g);

/// ||nabla^m f||_2
double homogeneous_sobolev_norm(const GridFunction& f, int order);

/// Extremes of the form ratio over axis and diagonal Fourier modes plus
/// `trials` random probes; `trials` in the result counts both.
FormEstimate check_form_ellipticity(const CoefficientField& coefficients, int trials, std::uint64_t seed);
FormEstimate check_form_ellipticity(const EllipticOperator& op, int trials, std::uint64_t seed);

/// Coefficients conj(a_{beta alpha}).
CoefficientField adjoint_coefficients(const CoefficientField& coefficients);
EllipticOperator adjoint(const EllipticOperator& op);

/// Mean-zero random band-limited probe; `band` = 0 uses every frequency.
GridFunction random_probe(const TorusGrid& grid, std::uint64_t seed, int band = 0);

}  // namespace hlab
