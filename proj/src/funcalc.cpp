#include "hlab/funcalc.hpp"

#include "hlab/error.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace hlab {
namespace {

constexpr double kKernelTolerance = 1e-10;
constexpr double kClusterRelative = 1e-5;
constexpr double kResidualLimit = 1e-10;
constexpr int kTaylorTerms = 200;

struct DisjointSets {
    explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int i) {
        while (parent[static_cast<std::size_t>(i)] != i) {
            auto& p = parent[static_cast<std::size_t>(i)];
            p = parent[static_cast<std::size_t>(p)];
            i = p;
        }
        return i;
    }
    void join(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
    std::vector<int> parent;
};

lapack_complex_double* raw(Matrix& A) { return reinterpret_cast<lapack_complex_double*>(A.data()); }

// A = U T U^* with T upper triangular.
void complex_schur(Matrix& A, Matrix& U) {
    const auto n = static_cast<lapack_int>(A.rows());
    U.resize(n, n);
    Vector w(n);
    lapack_int sdim = 0;
    const lapack_int info = LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, n, raw(A), n, &sdim,
                                          reinterpret_cast<lapack_complex_double*>(w.data()), raw(U), n);
    if (info != 0) throw NumericalFailure("complex Schur decomposition failed (zgees info " + std::to_string(info) + ")");
    A.triangularView<Eigen::StrictlyLower>().setZero();
}

// Moves diagonal entry `from` of T to position `to`, updating Z.
void move_eigenvalue(Matrix& T, Matrix& Z, Eigen::Index from, Eigen::Index to) {
    const auto n = static_cast<lapack_int>(T.rows());
    const lapack_int info = LAPACKE_ztrexc(LAPACK_COL_MAJOR, 'V', n, raw(T), n, raw(Z), n,
                                           static_cast<lapack_int>(from + 1), static_cast<lapack_int>(to + 1));
    if (info != 0) throw NumericalFailure("Schur reordering failed (ztrexc info " + std::to_string(info) + ")");
}

// Solves A X - X B = C for upper triangular A, B with disjoint spectra.
Matrix solve_sylvester(Matrix A, Matrix B, Matrix C) {
    double scale = 1.0;
    const auto p = static_cast<lapack_int>(A.rows());
    const auto q = static_cast<lapack_int>(B.rows());
    const lapack_int info = LAPACKE_ztrsyl(LAPACK_COL_MAJOR, 'N', 'N', -1, p, q, raw(A), p, raw(B), q, raw(C), p, &scale);
    if (info < 0) throw NumericalFailure("triangular Sylvester solve failed");
    return C / scale;
}

Matrix cluster_block(const Matrix& Tkk, const Symbol& g) {
    const Eigen::Index p = Tkk.rows();
    const Complex sigma = Tkk.diagonal().mean();
    Matrix N = Tkk;
    N.diagonal().array() -= sigma;
    const auto coefficients = g.taylor(sigma, kTaylorTerms);
    Matrix sum = coefficients[0] * Matrix::Identity(p, p);
    Matrix power = Matrix::Identity(p, p);
    int small = 0;
    for (int j = 1; j < kTaylorTerms; ++j) {
        power = (power * N).eval();
        if (power.cwiseAbs().maxCoeff() == 0.0) break;
        const Matrix term = coefficients[static_cast<std::size_t>(j)] * power;
        sum += term;
        small = term.norm() <= 1e-17 * sum.norm() ? small + 1 : 0;
        if (small >= 3) break;
    }
    return sum;
}

}  // namespace

void require_mean_zero(const GridFunction& f, const char* what) {
    const double scale = f.magnitude().maxCoeff();
    const Complex mean = f.mean();
    if (std::abs(mean) > 1e-10 * scale) {
        std::ostringstream out;
        out << what << ": input has mean " << std::abs(mean)
            << "; constants span the kernel of L, so only mean-zero input is admissible";
        throw InvalidArgument(out.str());
    }
}

SpectralFactorization factorize(const EllipticOperator& op) {
    SpectralFactorization fact;
    fact.source_ = std::make_shared<const EllipticOperator>(op);
    const Matrix& L = op.matrix();
    const Eigen::Index n = L.rows();

    // Constants lie in the kernel of every homogeneous operator and of its
    // adjoint. A Householder reflection H with H e_1 = 1/sqrt(n) deflates them
    // exactly, so rounding cannot leak the kernel into mean-zero data.
    Vector u = Vector::Constant(n, -1.0 / std::sqrt(static_cast<double>(n)));
    u[0] += 1.0;
    const double uu = u.squaredNorm();
    Matrix H = Matrix::Identity(n, n) - (2.0 / uu) * u * u.adjoint();
    const Matrix reflected = H * L * H;
    Matrix trailing = reflected.bottomRightCorner(n - 1, n - 1);
    Matrix U;
    complex_schur(trailing, U);
    // The first row and column of H L H vanish in exact arithmetic (L 1 = 0 and
    // L^* 1 = 0); they are dropped, a perturbation of order eps ||L||.
    Matrix T = Matrix::Zero(n, n);
    T.bottomRightCorner(n - 1, n - 1) = trailing;
    Matrix Z(n, n);
    Z.col(0) = H.col(0);
    Z.rightCols(n - 1) = H.rightCols(n - 1) * U;

    const double norm = L.norm();
    const double kernel_tol = kKernelTolerance * norm;
    const Vector lambda = T.diagonal();
    DisjointSets sets(static_cast<int>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double scale = std::max(std::abs(lambda[i]), std::abs(lambda[j]));
            if (std::abs(lambda[i] - lambda[j]) <= std::max(kClusterRelative * scale, kernel_tol))
                sets.join(static_cast<int>(i), static_cast<int>(j));
        }
    }

    // Rank clusters: the kernel first, then by first appearance.
    std::vector<int> root(static_cast<std::size_t>(n));
    std::vector<bool> is_kernel(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i) {
        root[static_cast<std::size_t>(i)] = sets.find(static_cast<int>(i));
        if (std::abs(lambda[i]) <= kernel_tol) is_kernel[static_cast<std::size_t>(root[static_cast<std::size_t>(i)])] = true;
    }
    std::vector<int> rank_of_root(static_cast<std::size_t>(n), -1);
    int next = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(root[static_cast<std::size_t>(i)]);
        if (rank_of_root[r] < 0) rank_of_root[r] = is_kernel[r] ? 0 : next++;
    }
    std::vector<int> rank(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        rank[static_cast<std::size_t>(i)] = rank_of_root[static_cast<std::size_t>(root[static_cast<std::size_t>(i)])];

    // Insertion sort by rank; each move keeps T triangular and Z unitary.
    for (Eigen::Index i = 1; i < n; ++i) {
        Eigen::Index j = i;
        while (j > 0 && rank[static_cast<std::size_t>(j - 1)] > rank[static_cast<std::size_t>(i)]) --j;
        if (j == i) continue;
        move_eigenvalue(T, Z, i, j);
        std::rotate(rank.begin() + j, rank.begin() + i, rank.begin() + i + 1);
    }

    for (Eigen::Index i = 0; i < n;) {
        Eigen::Index j = i;
        while (j < n && rank[static_cast<std::size_t>(j)] == rank[static_cast<std::size_t>(i)]) ++j;
        SchurCluster cluster{static_cast<int>(i), static_cast<int>(j - i), rank[static_cast<std::size_t>(i)] == 0};
        fact.clusters_.push_back(cluster);
        i = j;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(T(i, i)) <= kernel_tol) ++fact.kernel_dimension_;
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(T(i, i)) > kernel_tol)
            fact.spectral_angle_ = std::max(fact.spectral_angle_, std::abs(std::arg(T(i, i))));

    const double denominator = norm > 0.0 ? norm : 1.0;
    fact.residual_ = (Z * T * Z.adjoint() - L).norm() / denominator;
    fact.unitarity_ = (Z.adjoint() * Z - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (fact.residual_ > kResidualLimit) {
        std::ostringstream out;
        out << "Schur residual " << fact.residual_ << " exceeds " << kResidualLimit;
        throw NumericalFailure(out.str());
    }
    fact.T_ = std::move(T);
    fact.Z_ = std::move(Z);
    return fact;
}

Matrix SpectralFactorization::function_matrix(const Symbol& g) const {
    const Eigen::Index n = T_.rows();
    Matrix F = Matrix::Zero(n, n);
    const Complex g0 = g.kernel_value();
    for (const auto& c : clusters_) {
        auto block = F.block(c.start, c.start, c.size, c.size);
        if (c.kernel) {
            block = g0 * Matrix::Identity(c.size, c.size);
        } else if (c.size == 1) {
            block(0, 0) = g(T_(c.start, c.start));
        } else {
            block = cluster_block(T_.block(c.start, c.start, c.size, c.size), g);
        }
    }
    const auto blocks = static_cast<int>(clusters_.size());
    for (int j = 1; j < blocks; ++j) {
        const auto& cj = clusters_[static_cast<std::size_t>(j)];
        for (int i = j - 1; i >= 0; --i) {
            const auto& ci = clusters_[static_cast<std::size_t>(i)];
            const Eigen::Index mid_start = ci.start + ci.size;
            const Eigen::Index mid = cj.start - mid_start;
            Matrix rhs = F.block(ci.start, ci.start, ci.size, ci.size) * T_.block(ci.start, cj.start, ci.size, cj.size) -
                         T_.block(ci.start, cj.start, ci.size, cj.size) * F.block(cj.start, cj.start, cj.size, cj.size);
            if (mid > 0) {
                rhs += F.block(ci.start, mid_start, ci.size, mid) * T_.block(mid_start, cj.start, mid, cj.size) -
                       T_.block(ci.start, mid_start, ci.size, mid) * F.block(mid_start, cj.start, mid, cj.size);
            }
            if (ci.size == 1 && cj.size == 1) {
                F(ci.start, cj.start) = rhs(0, 0) / (T_(ci.start, ci.start) - T_(cj.start, cj.start));
            } else {
                F.block(ci.start, cj.start, ci.size, cj.size) =
                    solve_sylvester(T_.block(ci.start, ci.start, ci.size, ci.size),
                                    T_.block(cj.start, cj.start, cj.size, cj.size), rhs);
            }
        }
    }
    return F;
}

Matrix SpectralFactorization::apply(const Symbol& g, const Matrix& columns) const {
    if (columns.rows() != Z_.rows()) throw InvalidArgument("vector length does not match the operator");
    const Matrix F = function_matrix(g);
    const Matrix inner = Z_.adjoint() * columns;
    return Z_ * (F.triangularView<Eigen::Upper>() * inner);
}

GridFunction SpectralFactorization::apply(const Symbol& g, const GridFunction& f) const {
    if (!(f.grid() == source_->grid())) throw InvalidArgument("function lives on a different grid");
    return GridFunction(f.grid(), apply(g, Matrix(f.values())).col(0));
}

GridFunction semigroup_apply(const SpectralFactorization& fact, double t, const GridFunction& f) {
    if (!(t > 0.0)) throw InvalidArgument("semigroup time must be positive");
    return fact.apply(Symbol::exponential(t), f);
}

GridFunction qk_apply(const SpectralFactorization& fact, int k, double t, const GridFunction& f) {
    if (!(t > 0.0)) throw InvalidArgument("time must be positive");
    if (k < 0) throw InvalidArgument("power k must be non-negative");
    const double s = std::pow(t, 2 * fact.source().half_order());
    return fact.apply(Symbol::power_exponential(k, s), f);
}

GridFunction resolvent_apply(const SpectralFactorization& fact, Complex lambda, const GridFunction& f) {
    if (!(lambda.real() > 0.0)) throw InvalidArgument("resolvent parameter needs positive real part");
    return fact.apply(Symbol::resolvent(lambda), f);
}

GridFunction sqrt_apply(const SpectralFactorization& fact, const GridFunction& f) {
    return fact.apply(Symbol::power(0.5), f);
}

GridFunction invsqrt_apply(const SpectralFactorization& fact, const GridFunction& f) {
    require_mean_zero(f, "invsqrt_apply");
    return fact.apply(Symbol::power(-0.5), f);
}

GridFunction expm_oracle(const Matrix& L, double t, const GridFunction& f) {
    if (!(t >= 0.0)) throw InvalidArgument("oracle time must be non-negative");
    if (L.rows() != static_cast<Eigen::Index>(f.size())) throw InvalidArgument("matrix and vector sizes differ");
    if (t == 0.0) return f;
    const Eigen::Index n = L.rows();
    Matrix A = -t * L;
    const double one_norm = A.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (one_norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(one_norm / 0.5)));
    A /= std::ldexp(1.0, squarings);
    Matrix E = Matrix::Identity(n, n);
    Matrix term = Matrix::Identity(n, n);
    for (int j = 1; j <= 40; ++j) {
        term = (term * A / static_cast<double>(j)).eval();
        E += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) E = (E * E).eval();
    return GridFunction(f.grid(), E * f.values());
}

PsiCertificate PsiDescriptor::certify() const {
    PsiCertificate cert;
    cert.rays = 9;
    cert.samples_per_ray = 256;
    for (int r = 0; r < cert.rays; ++r) {
        const double theta = -mu + 2.0 * mu * r / (cert.rays - 1);
        for (int i = 0; i < cert.samples_per_ray; ++i) {
            const double radius = std::pow(10.0, -6.0 + 12.0 * i / (cert.samples_per_ray - 1));
            const Complex xi = std::polar(radius, theta);
            const double bound = std::min(std::pow(radius, alpha), std::pow(radius, -beta));
            cert.constant = std::max(cert.constant, std::abs(symbol(xi)) / bound);
        }
    }
    cert.finite = std::isfinite(cert.constant);
    return cert;
}

PsiDescriptor psi_power_exponential(int k, double mu, double beta) {
    if (k < 1) throw InvalidArgument("z^k e^{-z} needs k >= 1 to vanish at the origin");
    if (!(mu > 0.0 && mu < std::numbers::pi / 2.0)) throw InvalidArgument("sector half-angle must lie in (0, pi/2)");
    PsiDescriptor psi;
    psi.name = "z^" + std::to_string(k) + " e^{-z}";
    psi.symbol = Symbol::power_exponential(k, 1.0);
    psi.alpha = k;
    psi.beta = beta;
    psi.mu = mu;
    return psi;
}

GridFunction psi_calculus(const SpectralFactorization& fact, const PsiDescriptor& psi, double t,
                          const GridFunction& f) {
    if (!(t > 0.0)) throw InvalidArgument("time must be positive");
    const double omega = fact.source().type_angle();
    if (!(psi.mu > omega)) {
        std::ostringstream out;
        out << "psi sector angle " << psi.mu << " does not exceed the operator angle " << omega;
        throw InvalidArgument(out.str());
    }
    const double s = std::pow(t, 2 * fact.source().half_order());
    return fact.apply(psi.symbol.dilated(s), f);
}

GradientBlock riesz_transform(const SpectralFactorization& fact, const GridFunction& f) {
    return gradient_block(invsqrt_apply(fact, f), fact.source().half_order());
}

}  // namespace hlab
