#pragma once

// Holomorphic functional calculus of an assembled operator through a
// reordered complex Schur form and the blocked Schur-Parlett recurrence.

#include "hlab/elliptic.hpp"

#include <memory>
#include <string>
#include <vector>

namespace hlab {

/// coefficient * z^power * exp(-rate z) * (shift + z)^{-order}
struct SymbolTerm {
    Complex coefficient{1.0, 0.0};
    double power = 0.0;
    double rate = 0.0;
    Complex shift{1.0, 0.0};
    double order = 0.0;
};

/// Finite sum of SymbolTerms. Closed under the dilation z -> s z, which is
/// what turns psi into psi(t^{2m} .).
class Symbol {
public:
    Symbol() = default;
    explicit Symbol(std::vector<SymbolTerm> terms) : terms_(std::move(terms)) {}

    static Symbol exponential(double t);                 // e^{-t z}
    static Symbol power_exponential(int k, double s);    // (s z)^k e^{-s z}
    static Symbol resolvent(Complex lambda);             // (lambda + z)^{-1}
    static Symbol power(double a);                       // z^a, principal branch

    const std::vector<SymbolTerm>& terms() const noexcept { return terms_; }

    /// Principal-branch value; z = 0 returns kernel_value().
    Complex operator()(Complex z) const;
    /// Limit along the positive axis at 0, with z^a -> 0 for every a != 0.
    Complex kernel_value() const;
    /// g^{(j)}(sigma)/j! for j = 0..count-1, sigma != 0.
    std::vector<Complex> taylor(Complex sigma, int count) const;
    /// z -> g(s z), s > 0.
    Symbol dilated(double s) const;

    Symbol operator+(const Symbol& other) const;
    Symbol operator*(Complex scale) const;

private:
    std::vector<SymbolTerm> terms_;
};

struct SchurCluster {
    int start = 0;
    int size = 0;
    bool kernel = false;
};

class SpectralFactorization {
public:
    const EllipticOperator& source() const noexcept { return *source_; }
    const Matrix& triangular_factor() const noexcept { return T_; }
    const Matrix& similarity() const noexcept { return Z_; }
    double residual() const noexcept { return residual_; }
    /// max |Z^* Z - I| entrywise
    double unitarity_defect() const noexcept { return unitarity_; }
    int kernel_dimension() const noexcept { return kernel_dimension_; }
    const std::vector<SchurCluster>& clusters() const noexcept { return clusters_; }
    Vector eigenvalues() const { return T_.diagonal(); }
    /// Largest |arg lambda| over nonzero eigenvalues.
    double spectral_angle() const noexcept { return spectral_angle_; }

    /// Upper triangular F = g(T).
    Matrix function_matrix(const Symbol& g) const;
    /// g(L) applied to every column.
    Matrix apply(const Symbol& g, const Matrix& columns) const;
    GridFunction apply(const Symbol& g, const GridFunction& f) const;

private:
    friend SpectralFactorization factorize(const EllipticOperator&);

    std::shared_ptr<const EllipticOperator> source_;
    Matrix T_;
    Matrix Z_;
    double residual_ = 0.0;
    double unitarity_ = 0.0;
    int kernel_dimension_ = 0;
    double spectral_angle_ = 0.0;
    std::vector<SchurCluster> clusters_;
};

/// L = Z T Z^*; eigenvalues reordered so that numerically equal ones are
/// contiguous. Throws NumericalFailure when the residual exceeds 1e-10.
SpectralFactorization factorize(const EllipticOperator& op);

GridFunction semigroup_apply(const SpectralFactorization& fact, double t, const GridFunction& f);
/// (t^{2m} L)^k e^{-t^{2m} L} f
GridFunction qk_apply(const SpectralFactorization& fact, int k, double t, const GridFunction& f);
/// (lambda I + L)^{-1} f, Re lambda > 0
GridFunction resolvent_apply(const SpectralFactorization& fact, Complex lambda, const GridFunction& f);
GridFunction sqrt_apply(const SpectralFactorization& fact, const GridFunction& f);
/// L^{-1/2} f on the mean-zero subspace.
GridFunction invsqrt_apply(const SpectralFactorization& fact, const GridFunction& f);

/// e^{-tL} f by Taylor scaling and squaring on the dense matrix.
GridFunction expm_oracle(const Matrix& L, double t, const GridFunction& f);

struct PsiCertificate {
    double constant = 0.0;
    bool finite = false;
    int rays = 0;
    int samples_per_ray = 0;
};

struct PsiDescriptor {
    std::string name;
    Symbol symbol;
    double alpha = 1.0;
    double beta = 1.0;
    double mu = 0.0;

    /// max |psi(xi)| / min(|xi|^alpha, |xi|^{-beta}) over 9 rays of S_mu and
    /// 256 log-spaced radii in [1e-6, 1e6].
    PsiCertificate certify() const;
};

/// psi(z) = z^k e^{-z}
PsiDescriptor psi_power_exponential(int k, double mu, double beta = 1.0);

/// psi(t^{2m} L) f; rejects mu <= omega.
GridFunction psi_calculus(const SpectralFactorization& fact, const PsiDescriptor& psi, double t,
                          const GridFunction& f);

/// {d^gamma L^{-1/2} f : |gamma| = m}
GradientBlock riesz_transform(const SpectralFactorization& fact, const GridFunction& f);

/// Throws InvalidArgument naming the kernel obstruction when f has a nonzero mean.
void require_mean_zero(const GridFunction& f, const char* what);

}  // namespace hlab
