#pragma once

// Ratio-band studies, decay fits and inequality verifiers built on the
// functionals of the other modules.

#include "hlab/hardy.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hlab {

enum class MemberKind { FourierMode, GaussianBump, RandomBandlimited, Molecule, IndicatorSmoothed };

MemberKind parse_member_kind(const std::string& name);
std::string to_string(MemberKind kind);

/// One family member as a continuum description. Parameters by kind:
///   fourier_mode       {k0, k1}
///   gaussian_bump      {width, c0, c1}
///   random_bandlimited {band}
///   molecule           {radius, p, M, epsilon, c0, c1}
///   indicator_smoothed {radius, c0, c1}
struct MemberDescriptor {
    MemberKind kind = MemberKind::FourierMode;
    std::vector<double> parameters;
    std::uint64_t seed = 0;

    std::string label() const;
};

/// Realised members, each projected to mean zero.
class FunctionFamily {
public:
    FunctionFamily(std::vector<MemberDescriptor> descriptors, const TorusGrid& grid,
                   const SpectralFactorization* fact = nullptr);

    /// 4 Fourier modes |k| in {1, 2, 4, 8}, 4 Gaussian bumps of widths
    /// {0.05, 0.1, 0.2, 0.4} and 4 random band-limited members.
    static std::vector<MemberDescriptor> default_descriptors(int dimension, std::uint64_t seed);

    const std::vector<MemberDescriptor>& descriptors() const noexcept { return descriptors_; }
    const std::vector<GridFunction>& members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }
    const TorusGrid& grid() const noexcept { return grid_; }

private:
    std::vector<MemberDescriptor> descriptors_;
    TorusGrid grid_;
    std::vector<GridFunction> members_;
};

inline constexpr std::size_t kMinFamilySize = 12;

/// Names accepted by FunctionalEvaluator, optionally suffixed "@lambda" for
/// the aperture (e.g. "S_L@2"):
///   S_L, S_L2, S_L3     vertical square functions, k = 1, 2, 3
///   S_hL, S_hL1, S_hL2  Lusin area functions, k = 0, 1, 2
///   N_hL, R_hL          non-tangential and radial maximal functions
///   Nt_hL, Rt_hL        gradient-augmented variants
///   N_hpsiL             cutoff variant
///   id                  |f| itself (Lebesgue norm)
/// A "c*" prefix scales the functional by c (e.g. "2*S_L").
struct FunctionalSpec {
    std::string name;
    std::string base;
    double aperture = 1.0;
    double scale = 1.0;

    static FunctionalSpec parse(const std::string& name);
};

/// Evaluates named functionals over a family with caching.
class FunctionalEvaluator {
public:
    FunctionalEvaluator(const SpectralFactorization& fact, const TimeGrid& times);

    /// Sitewise values for every member of `members`.
    const std::vector<RealVector>& values(const std::string& name, const std::vector<GridFunction>& members);
    std::vector<double> norms(const std::string& name, const std::vector<GridFunction>& members, double p);

    const SpectralFactorization& factorization() const noexcept { return *fact_; }
    const TimeGrid& time_grid() const noexcept { return times_; }

private:
    const SpectralFactorization* fact_;
    TimeGrid times_;
    std::map<std::string, std::vector<RealVector>> cache_;
    const std::vector<GridFunction>* cached_members_ = nullptr;
};

struct EquivalenceReport {
    std::string functional_a;
    std::string functional_b;
    double p = 1.0;
    std::vector<std::string> labels;
    std::vector<double> ratios;
    std::vector<std::string> skipped;
    double band_min = 0.0;
    double band_max = 0.0;
    double spread = 0.0;
    std::optional<std::vector<double>> refined_ratios;
    std::optional<double> refined_spread;
    std::optional<double> refinement_drift;
    double spread_threshold = 10.0;
    double drift_threshold = 2.0;
    bool pass = false;
};

struct StudyThresholds {
    double spread = 10.0;
    double drift = 2.0;
};

EquivalenceReport equivalence_study(FunctionalEvaluator& coarse, const FunctionFamily& family,
                                    const std::string& a, const std::string& b, double p,
                                    FunctionalEvaluator* fine = nullptr, const FunctionFamily* fine_family = nullptr,
                                    StudyThresholds thresholds = {});
EquivalenceReport equivalence_study(FunctionalEvaluator& evaluator, const std::vector<GridFunction>& members,
                                    const std::vector<std::string>& labels, const std::string& a,
                                    const std::string& b, double p, StudyThresholds thresholds = {});

struct BoundReport {
    std::string name;
    /// Per-member implied constant LHS / RHS.
    std::vector<double> constants;
    double max_constant = 0.0;
    bool finite = false;
};

struct DominationReport {
    double p = 1.0;
    std::vector<std::string> labels;
    std::vector<std::string> skipped;
    std::vector<BoundReport> bounds;
    /// max_x S_L(f)(x) / (S^2_{h,L}(f)(x) S^2_L(f)(x))^{1/2} per checked member.
    std::vector<double> geometric_mean_constants;
    double geometric_mean_max = 0.0;
    /// Hypothesis constant of the tent-space lemma (k = 0..4) and conclusion constant.
    double lemma_hypothesis_constant = 0.0;
    double lemma_conclusion_constant = 0.0;
    /// Interpolation constants max ||nabla^k f|| / (||nabla^m f||^{k/m} ||f||^{1-k/m}) per k.
    std::vector<double> interpolation_constants;
    bool pass = false;
};

/// One-sided bounds between square, area and maximal functionals, with the
/// pointwise geometric-mean inequality checked on the first
/// `geometric_members` members.
DominationReport domination_study(FunctionalEvaluator& evaluator, const FunctionFamily& family, double p,
                                  double gamma = 8.0, const std::vector<double>& gamma_sweep = {2, 4, 8, 16},
                                  int geometric_members = 5, std::uint64_t seed = 20240601);
/// Same on arbitrary members; members on which a functional vanishes are skipped.
DominationReport domination_study(FunctionalEvaluator& evaluator, const std::vector<GridFunction>& members,
                                  const std::vector<std::string>& labels, double p, double gamma = 8.0,
                                  const std::vector<double>& gamma_sweep = {2, 4, 8, 16}, int geometric_members = 5,
                                  std::uint64_t seed = 20240601);

/// Implied constant of S_L(f)(x) <= C0 [S^2_{h,L}(f)(x)]^{1/2} [S^2_L(f)(x)]^{1/2}.
std::vector<double> geometric_mean_constants(FunctionalEvaluator& evaluator, const std::vector<GridFunction>& members);

enum class CaccioppoliVariant { WithEpsilon, GradientTerms, ZeroOrder };

CaccioppoliVariant parse_caccioppoli_variant(const std::string& name);

struct CaccioppoliResult {
    /// int_{t0-r}^{t0+r} int_{B(x0,r)} |nabla^m u|^2
    double lhs = 0.0;
    /// Right-hand side without its constant (and without the epsilon term).
    double rhs = 0.0;
    /// epsilon * int int_{2r} |nabla^m u|^2, WithEpsilon only.
    double epsilon_term = 0.0;
    /// max(lhs - epsilon_term, 0) / rhs
    double constant = 0.0;
};

/// u(x, t) = e^{-t^{2m} L} f; time integrals by composite Simpson on 33
/// uniform samples per interval. Requires t0 > 3r and 2r < 1/2.
CaccioppoliResult caccioppoli_check(const SpectralFactorization& fact, const GridFunction& f, std::size_t x0, double r,
                                    double t0, CaccioppoliVariant variant, double epsilon = 0.5);

struct DecayFit {
    std::vector<double> distances;
    std::vector<double> times;
    /// log ||chi_F e^{-tL}(chi_E f)||_2 / ||chi_E f||_2, max over probes.
    std::vector<double> log_ratios;
    std::vector<bool> used;
    double q_hat = 0.0;
    double q_target = 0.0;
    double intercept = 0.0;
    double slope = 0.0;
    double residual = 0.0;
    bool monotone = false;
    bool degenerate = false;
};

/// E = B(0, source_radius); F_d = {y : dist(y, E) >= d}. Fits
/// -log ratio = a + c (d / t^{1/(2m)})^q over q in [0.5, 4].
DecayFit gaffney_check(const SpectralFactorization& fact, const std::vector<double>& separations,
                       const std::vector<double>& times, int probes, double source_radius = 1.0 / 16,
                       std::uint64_t seed = 20240601);

struct PqProbeReport {
    std::vector<double> exponents;
    std::vector<double> times;
    /// estimates[p][t] = max over probes ||e^{-tL} f||_p / ||f||_p, a lower bound for the operator norm.
    std::vector<std::vector<double>> estimates;
    /// Max over the time list per exponent.
    std::vector<double> supremum;
    int probes = 0;
};

PqProbeReport pq_interval_probe(const SpectralFactorization& fact, const std::vector<double>& exponents,
                                const std::vector<double>& times, int probes, std::uint64_t seed = 20240601);

struct RieszReport {
    double p = 1.0;
    std::vector<std::string> labels;
    /// ||nabla^m L^{-1/2} f||_{H^p} / ||f||_{H_L^p}, H^p measured with the m = 1 polyharmonic reference.
    std::vector<double> constants;
    double max_constant = 0.0;
    double min_constant = 0.0;
    bool finite = false;
};

RieszReport riesz_study(const SpectralFactorization& fact, const SpectralFactorization& reference,
                        const FunctionFamily& family, double p, const TimeGrid& times);

struct PoincareReport {
    /// Per configuration and k: LHS / (2^{k-m+1} (2t)^{2(m-1-k)} int |nabla^{m-1} v|^2).
    std::vector<double> ratios;
    double max_ratio = 0.0;
};

/// v = smooth random function supported in B(x, 2t) at `configs` random (x, t).
PoincareReport poincare_check(const TorusGrid& grid, int m, int configs, std::uint64_t seed);

/// max over `probes` random f of ||nabla^k f|| / (||nabla^m f||^{k/m} ||f||^{1-k/m}) on the torus.
double interpolation_constant(const TorusGrid& grid, int k, int m, int probes, std::uint64_t seed);

}  // namespace hlab
