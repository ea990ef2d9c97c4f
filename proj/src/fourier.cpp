#include "hlab/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

namespace hlab::fourier {
namespace {

struct AlignedBuffer {
    explicit AlignedBuffer(std::size_t count)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * count))) {
        if (data == nullptr) throw std::bad_alloc();
    }
    ~AlignedBuffer() { fftw_free(data); }
    AlignedBuffer(const AlignedBuffer&) = delete;
    AlignedBuffer& operator=(const AlignedBuffer&) = delete;

    fftw_complex* data;
};

// Plans are created once per (n, N, sign) and executed with the new-array
// interface, which is safe to call concurrently.
class PlanCache {
public:
    fftw_plan get(int n, int N, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_tuple(n, N, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::size_t total = 1;
        for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(N);
        AlignedBuffer in(total), out(total);
        int dims[2] = {N, N};
        fftw_plan plan = fftw_plan_dft(n, dims, in.data, out.data, sign, FFTW_ESTIMATE);
        plans_.emplace(key, plan);
        return plan;
    }

    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

Vector transform(const TorusGrid& grid, const Vector& input, int sign) {
    const std::size_t total = grid.total_points();
    AlignedBuffer in(total), out(total);
    for (std::size_t i = 0; i < total; ++i) {
        in.data[i][0] = input[static_cast<Eigen::Index>(i)].real();
        in.data[i][1] = input[static_cast<Eigen::Index>(i)].imag();
    }
    fftw_execute_dft(cache().get(grid.dimension(), grid.points_per_axis(), sign), in.data, out.data);
    Vector result(static_cast<Eigen::Index>(total));
    for (std::size_t i = 0; i < total; ++i)
        result[static_cast<Eigen::Index>(i)] = Complex(out.data[i][0], out.data[i][1]);
    return result;
}

}  // namespace

Vector forward(const TorusGrid& grid, const Vector& samples) {
    return transform(grid, samples, FFTW_FORWARD) / static_cast<double>(grid.total_points());
}

Vector inverse(const TorusGrid& grid, const Vector& coefficients) {
    return transform(grid, coefficients, FFTW_BACKWARD);
}

std::array<int, 2> bin_frequency(const TorusGrid& grid, std::size_t bin) {
    const auto c = grid.coords(bin);
    return {grid.frequency(c[0]), grid.dimension() == 2 ? grid.frequency(c[1]) : 0};
}

Vector derivative_multiplier(const TorusGrid& grid, const MultiIndex& alpha) {
    const Complex two_pi_i(0.0, 2.0 * std::numbers::pi);
    Vector multiplier(static_cast<Eigen::Index>(grid.total_points()));
    for (std::size_t bin = 0; bin < grid.total_points(); ++bin) {
        const auto k = bin_frequency(grid, bin);
        Complex value(1.0, 0.0);
        for (int axis = 0; axis < grid.dimension(); ++axis)
            for (int j = 0; j < alpha.components[static_cast<std::size_t>(axis)]; ++j)
                value *= two_pi_i * static_cast<double>(k[static_cast<std::size_t>(axis)]);
        multiplier[static_cast<Eigen::Index>(bin)] = value;
    }
    return multiplier;
}

}  // namespace hlab::fourier
