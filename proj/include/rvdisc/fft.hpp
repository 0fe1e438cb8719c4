#pragma once

// Thin FFTW wrapper. Plans are cached per (size, direction); plan creation is
// serialized because the FFTW planner is not re-entrant, execution is not.

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rvdisc/common.hpp"

namespace rvdisc::fft {

enum class Direction : int { Forward = FFTW_FORWARD, Inverse = FFTW_BACKWARD };

namespace detail {

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(std::size_t n, Direction dir) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, static_cast<int>(dir));
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<Complex> scratch_in(n), scratch_out(n);
        fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n),
                                       reinterpret_cast<fftw_complex*>(scratch_in.data()),
                                       reinterpret_cast<fftw_complex*>(scratch_out.data()),
                                       static_cast<int>(dir), FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (p == nullptr) throw std::runtime_error("fftw: plan creation failed");
        plans_.emplace(key, p);
        return p;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalized DFT of `in` into `out`; sizes must match.
inline void transform(std::span<const Complex> in, std::span<Complex> out, Direction dir) {
    if (in.size() != out.size()) throw std::invalid_argument("fft: size mismatch");
    if (in.empty()) return;
    fftw_plan p = detail::PlanCache::instance().get(in.size(), dir);
    if (in.data() == out.data()) {
        // plans are out-of-place
        std::vector<Complex> tmp(in.begin(), in.end());
        fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(tmp.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
        return;
    }
    // fftw_execute_dft does not modify `in` for out-of-place plans
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

inline std::vector<Complex> forward(std::span<const Complex> in) {
    std::vector<Complex> out(in.size());
    transform(in, out, Direction::Forward);
    return out;
}

/// Inverse DFT scaled by `scale` (1/N gives the conventional inverse).
inline std::vector<Complex> inverse(std::span<const Complex> in, double scale) {
    std::vector<Complex> out(in.size());
    transform(in, out, Direction::Inverse);
    for (auto& x : out) x *= scale;
    return out;
}

/// Baseband frequency of DFT bin k for an n-point transform at rate fs.
inline double bin_frequency(std::size_t k, std::size_t n, double fs) {
    const auto sk = static_cast<double>(k);
    const auto sn = static_cast<double>(n);
    return (2 * k < n ? sk : sk - sn) * fs / sn;
}

}  // namespace rvdisc::fft
