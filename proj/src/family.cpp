#include "hlab/error.hpp"
#include "hlab/experiments.hpp"

#include <cmath>
#include <sstream>

namespace hlab {
namespace {

std::uint64_t member_seed(std::uint64_t seed, std::size_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double parameter(const MemberDescriptor& d, std::size_t i, double fallback) {
    return i < d.parameters.size() ? d.parameters[i] : fallback;
}

/// Periodic distance from a continuum point, measured in the continuum.
double periodic_distance(const TorusGrid& grid, std::size_t site, double c0, double c1) {
    const auto x = grid.position(site);
    auto wrap = [](double d) {
        d = std::fabs(d - std::floor(d));
        return std::min(d, 1.0 - d);
    };
    const double d0 = wrap(x[0] - c0);
    const double d1 = grid.dimension() == 2 ? wrap(x[1] - c1) : 0.0;
    return std::hypot(d0, d1);
}

std::size_t nearest_site(const TorusGrid& grid, double c0, double c1) {
    const int N = grid.points_per_axis();
    auto index = [N](double c) {
        const long i = std::lround((c - std::floor(c)) * N);
        return static_cast<int>(((i % N) + N) % N);
    };
    return grid.dimension() == 2 ? grid.site(index(c0), index(c1)) : grid.site(index(c0));
}

GridFunction realise(const MemberDescriptor& d, const TorusGrid& grid, const SpectralFactorization* fact) {
    const auto size = static_cast<Eigen::Index>(grid.total_points());
    Vector values(size);
    switch (d.kind) {
    case MemberKind::FourierMode: {
        const double k0 = parameter(d, 0, 1.0);
        const double k1 = parameter(d, 1, 0.0);
        if (k0 == 0.0 && (grid.dimension() == 1 || k1 == 0.0))
            throw InvalidArgument("fourier_mode member needs a nonzero frequency");
        if (std::fabs(k0) >= grid.points_per_axis() / 2 || std::fabs(k1) >= grid.points_per_axis() / 2)
            throw InvalidArgument("fourier_mode frequency is not resolved by the grid");
        for (std::size_t s = 0; s < grid.total_points(); ++s) {
            const auto x = grid.position(s);
            const double phase = 2.0 * M_PI * (k0 * x[0] + (grid.dimension() == 2 ? k1 * x[1] : 0.0));
            values[static_cast<Eigen::Index>(s)] = std::polar(1.0, phase);
        }
        break;
    }
    case MemberKind::GaussianBump: {
        const double width = parameter(d, 0, 0.1);
        if (!(width > 0.0)) throw InvalidArgument("gaussian_bump width must be positive");
        const double c0 = parameter(d, 1, 0.5);
        const double c1 = parameter(d, 2, 0.5);
        const int images = 3;
        for (std::size_t s = 0; s < grid.total_points(); ++s) {
            const auto x = grid.position(s);
            double sum = 0.0;
            for (int i = -images; i <= images; ++i) {
                const double d0 = x[0] - c0 + i;
                if (grid.dimension() == 1) {
                    sum += std::exp(-d0 * d0 / (2.0 * width * width));
                    continue;
                }
                for (int j = -images; j <= images; ++j) {
                    const double d1 = x[1] - c1 + j;
                    sum += std::exp(-(d0 * d0 + d1 * d1) / (2.0 * width * width));
                }
            }
            values[static_cast<Eigen::Index>(s)] = sum;
        }
        break;
    }
    case MemberKind::RandomBandlimited: {
        const int band = static_cast<int>(parameter(d, 0, 4.0));
        if (band < 1 || band >= grid.points_per_axis() / 2)
            throw InvalidArgument("random_bandlimited band must lie in [1, N/2)");
        values = random_trig_series(grid.dimension(), d.seed, band).sample(grid).values();
        break;
    }
    case MemberKind::IndicatorSmoothed: {
        const double radius = parameter(d, 0, 0.2);
        if (!(radius > 0.0) || radius >= 0.5) throw InvalidArgument("indicator_smoothed radius must lie in (0, 1/2)");
        const double c0 = parameter(d, 1, 0.5);
        const double c1 = parameter(d, 2, 0.5);
        const CutoffDescriptor step = CutoffDescriptor::standard(0);
        for (std::size_t s = 0; s < grid.total_points(); ++s)
            values[static_cast<Eigen::Index>(s)] = step.profile(2.0 * periodic_distance(grid, s, c0, c1) / radius);
        break;
    }
    case MemberKind::Molecule: {
        if (fact == nullptr) throw InvalidArgument("molecule members need an operator");
        const double radius = parameter(d, 0, 0.0625);
        const double p = parameter(d, 1, 1.0);
        const int M = static_cast<int>(parameter(d, 2, 2.0));
        const double epsilon = parameter(d, 3, 1.0);
        const Ball ball{nearest_site(grid, parameter(d, 4, 0.5), parameter(d, 5, 0.5)), radius};
        values = generate_molecule(*fact, ball, p, M, epsilon, d.seed).sample.values();
        break;
    }
    }
    return GridFunction(grid, std::move(values)).mean_zero();
}

}  // namespace

MemberKind parse_member_kind(const std::string& name) {
    if (name == "fourier_mode") return MemberKind::FourierMode;
    if (name == "gaussian_bump") return MemberKind::GaussianBump;
    if (name == "random_bandlimited") return MemberKind::RandomBandlimited;
    if (name == "molecule") return MemberKind::Molecule;
    if (name == "indicator_smoothed") return MemberKind::IndicatorSmoothed;
    throw InvalidArgument("unknown family member kind '" + name + "'");
}

std::string to_string(MemberKind kind) {
    switch (kind) {
    case MemberKind::FourierMode: return "fourier_mode";
    case MemberKind::GaussianBump: return "gaussian_bump";
    case MemberKind::RandomBandlimited: return "random_bandlimited";
    case MemberKind::Molecule: return "molecule";
    case MemberKind::IndicatorSmoothed: return "indicator_smoothed";
    }
    return "unknown";
}

std::string MemberDescriptor::label() const {
    std::ostringstream out;
    out << to_string(kind) << "(";
    for (std::size_t i = 0; i < parameters.size(); ++i) out << (i ? "," : "") << parameters[i];
    out << ")";
    if (kind == MemberKind::RandomBandlimited || kind == MemberKind::Molecule) out << "#" << seed;
    return out.str();
}

FunctionFamily::FunctionFamily(std::vector<MemberDescriptor> descriptors, const TorusGrid& grid,
                               const SpectralFactorization* fact)
    : descriptors_(std::move(descriptors)), grid_(grid) {
    if (descriptors_.empty()) throw InvalidArgument("function family is empty");
    for (std::size_t i = 0; i < descriptors_.size(); ++i) {
        GridFunction member = realise(descriptors_[i], grid_, fact);
        if (!(l2_norm(member) > 0.0))
            throw InvalidArgument("family member " + descriptors_[i].label() + " vanishes after mean removal");
        members_.push_back(std::move(member));
    }
}

std::vector<MemberDescriptor> FunctionFamily::default_descriptors(int dimension, std::uint64_t seed) {
    std::vector<MemberDescriptor> out;
    for (int k : {1, 2, 4, 8}) {
        MemberDescriptor d{MemberKind::FourierMode, {static_cast<double>(k)}, 0};
        if (dimension == 2) d.parameters.push_back(k / 2);
        out.push_back(d);
    }
    for (double width : {0.05, 0.1, 0.2, 0.4}) {
        MemberDescriptor d{MemberKind::GaussianBump, {width, 0.5}, 0};
        if (dimension == 2) d.parameters.push_back(0.5);
        out.push_back(d);
    }
    for (std::size_t i = 0; i < 4; ++i) out.push_back({MemberKind::RandomBandlimited, {4.0}, member_seed(seed, i)});
    return out;
}

}  // namespace hlab
