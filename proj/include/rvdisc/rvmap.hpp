#pragma once

// Pulse train -> range/velocity map.
//
// Chain per velocity hypothesis v: pulse compression, Doppler (range-Doppler
// coupling) compensation, range migration correction, per-carrier coherent
// averaging, placement of the carrier segments on the synthetic band, and an
// inverse transform to a high-resolution range profile. Rows of the map are
// |HRRP| for each hypothesis.
//
// Velocity is positive for a receding scatterer. Both compensations multiply
// by the conjugate of the phase the echo model imposes, so the matched
// hypothesis equals the true radial velocity.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rvdisc/common.hpp"
#include "rvdisc/echo.hpp"
#include "rvdisc/fft.hpp"

namespace rvdisc {

/// Per-pulse in-band spectra after pulse compression, ascending in baseband
/// frequency.
struct CompressedSpectra {
    RadarParams params;
    HopCode codes;
    std::vector<double> freqs;
    std::vector<Complex> data;  // pulse-major, N x bins

    std::size_t bins() const { return freqs.size(); }
    std::size_t pulse_count() const { return codes.size(); }
    std::span<Complex> pulse(std::size_t n) { return {data.data() + n * bins(), bins()}; }
    std::span<const Complex> pulse(std::size_t n) const { return {data.data() + n * bins(), bins()}; }
};

/// Forward transform of each pulse times the conjugate reference spectrum.
/// Spectra are scaled by 1/fs so that a unit scatterer yields sigma/mu in
/// band.
inline CompressedSpectra pulse_compress(const PulseTrain& train) {
    const auto& p = train.params;
    const BandLayout band = BandLayout::of(p);
    const auto ref = reference_spectrum(p, band.freqs);
    CompressedSpectra out{p, train.codes, band.freqs, std::vector<Complex>(train.pulse_count() * band.size())};
    std::vector<Complex> spec(train.samples_per_pulse);
    for (std::size_t n = 0; n < train.pulse_count(); ++n) {
        fft::transform(train.pulse(n), spec, fft::Direction::Forward);
        auto dst = out.pulse(n);
        for (std::size_t i = 0; i < band.size(); ++i)
            dst[i] = cmul(spec[band.dft_index[i]], std::conj(ref[i])) / p.sample_rate;
    }
    return out;
}

/// Matched-filter output of one compressed pulse on the fast-time grid.
inline std::vector<Complex> compressed_pulse_profile(const CompressedSpectra& s, std::size_t n) {
    const std::size_t L = s.params.samples_per_pulse();
    const BandLayout band = BandLayout::of(s.params);
    std::vector<Complex> spec(L);
    const auto src = s.pulse(n);
    for (std::size_t i = 0; i < band.size(); ++i) spec[band.dft_index[i]] = src[i];
    return fft::inverse(spec, 1.0 / static_cast<double>(L));
}

namespace detail {

// Multiplies each pulse by exp(j 2pi (a_n + b_n f)) over the in-band grid.
template <typename PhaseFn>
void apply_linear_phase(CompressedSpectra& s, PhaseFn&& phase_of_pulse) {
    if (s.bins() == 0) return;
    const double f_lo = s.freqs.front();
    const double df = s.bins() > 1 ? s.freqs[1] - s.freqs[0] : 0.0;
    for (std::size_t n = 0; n < s.pulse_count(); ++n) {
        const auto [a, b] = phase_of_pulse(n);  // cycles, cycles per Hz
        auto row = s.pulse(n);
        Complex ph = std::polar(1.0, kTwoPi * frac(a + b * f_lo));
        const Complex step = std::polar(1.0, kTwoPi * frac(b * df));
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i % 64 == 0 && i > 0) ph = std::polar(1.0, kTwoPi * frac(a + b * s.freqs[i]));
            row[i] = cmul(row[i], ph);
            ph = cmul(ph, step);
        }
    }
}

}  // namespace detail

/// Removes the range-Doppler coupling of a scatterer moving at `v`:
/// multiply by exp(+j2pi * 2 v f_n f / (c mu)).
inline void doppler_compensate_inplace(CompressedSpectra& s, double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("doppler_compensate: velocity must be finite");
    if (v == 0.0) return;
    const double mu = s.params.chirp_rate();
    detail::apply_linear_phase(s, [&](std::size_t n) {
        const double fn = carrier_frequency(s.params, s.codes[n]);
        return std::pair{0.0, 2.0 * v * fn / (kSpeedOfLight * mu)};
    });
}

inline CompressedSpectra doppler_compensate(CompressedSpectra s, double v) {
    doppler_compensate_inplace(s, v);
    return s;
}

/// Removes the slow-time range walk of a scatterer moving at `v`:
/// multiply by exp(+j2pi (f_n + f) 2 v n Tr / c).
inline void rcm_correct_inplace(CompressedSpectra& s, double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("rcm_correct: velocity must be finite");
    if (v == 0.0) return;
    detail::apply_linear_phase(s, [&](std::size_t n) {
        const double fn = carrier_frequency(s.params, s.codes[n]);
        const double walk = 2.0 * v * static_cast<double>(n) * s.params.pri / kSpeedOfLight;  // s
        return std::pair{detail::frac(fn * walk), walk};
    });
}

inline CompressedSpectra rcm_correct(CompressedSpectra s, double v) {
    rcm_correct_inplace(s, v);
    return s;
}

/// Mean compensated spectrum per carrier index.
struct CarrierSpectra {
    RadarParams params;
    std::vector<double> freqs;
    std::vector<Complex> data;  // carrier-major, M x bins
    std::vector<int> counts;

    std::size_t bins() const { return freqs.size(); }
    std::span<const Complex> carrier(std::size_t i) const { return {data.data() + i * bins(), bins()}; }
    std::span<Complex> carrier(std::size_t i) { return {data.data() + i * bins(), bins()}; }
};

inline CarrierSpectra coherent_integrate(const CompressedSpectra& s) {
    const auto M = static_cast<std::size_t>(s.params.carriers);
    CarrierSpectra out{s.params, s.freqs, std::vector<Complex>(M * s.bins()), s.codes.counts(s.params.carriers)};
    for (std::size_t i = 0; i < M; ++i)
        if (out.counts[i] == 0)
            throw std::invalid_argument("coherent_integrate: carrier " + std::to_string(i) + " has no pulses");
    for (std::size_t n = 0; n < s.pulse_count(); ++n) {
        auto dst = out.carrier(static_cast<std::size_t>(s.codes[n]));
        const auto src = s.pulse(n);
        for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
    }
    for (std::size_t i = 0; i < M; ++i) {
        const double inv = 1.0 / out.counts[i];
        for (auto& x : out.carrier(i)) x *= inv;
    }
    return out;
}

struct StitchedSpectrum {
    double start_frequency = 0.0;  // absolute frequency of sample 0, Hz
    double spacing = 0.0;          // Hz
    std::vector<Complex> samples;
    std::vector<bool> fill_mask;

    std::size_t size() const { return samples.size(); }
};

/// Places carrier segment i at f0 + i*delta_f + f on a uniform axis of
/// width M*delta_f starting at f0 - B/2. Overlapping contributions average.
inline StitchedSpectrum stitch_spectrum(const CarrierSpectra& s) {
    const auto& p = s.params;
    const double df = p.bin_spacing();
    const auto n = static_cast<std::size_t>(std::llround(p.synthetic_bandwidth() / df));
    StitchedSpectrum out{p.f0 - 0.5 * p.bandwidth, df, std::vector<Complex>(n), std::vector<bool>(n, false)};
    std::vector<int> hits(n, 0);
    for (int i = 0; i < p.carriers; ++i) {
        const auto seg = s.carrier(static_cast<std::size_t>(i));
        for (std::size_t k = 0; k < s.bins(); ++k) {
            const double offset = i * p.freq_step + s.freqs[k] + 0.5 * p.bandwidth;
            const long long j = std::llround(offset / df);
            if (j < 0 || static_cast<std::size_t>(j) >= n)
                throw std::out_of_range("stitch_spectrum: carrier " + std::to_string(i) +
                                        " falls outside the synthetic band");
            const auto ju = static_cast<std::size_t>(j);
            out.samples[ju] += seg[k];
            ++hits[ju];
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        out.fill_mask[j] = hits[j] > 0;
        if (hits[j] > 1) out.samples[j] /= static_cast<double>(hits[j]);
    }
    return out;
}

enum class Window { Rectangular, Hann, Hamming };

inline Window window_from_string(const std::string& s) {
    if (s == "rect" || s == "rectangular" || s == "none") return Window::Rectangular;
    if (s == "hann") return Window::Hann;
    if (s == "hamming") return Window::Hamming;
    throw std::invalid_argument("unknown window '" + s + "'");
}

inline const char* to_string(Window w) {
    switch (w) {
        case Window::Rectangular: return "rect";
        case Window::Hann: return "hann";
        case Window::Hamming: return "hamming";
    }
    return "rect";
}

inline double window_weight(Window w, std::size_t i, std::size_t n) {
    if (w == Window::Rectangular || n < 2) return 1.0;
    const double x = kTwoPi * static_cast<double>(i) / static_cast<double>(n - 1);
    return w == Window::Hann ? 0.5 - 0.5 * std::cos(x) : 0.54 - 0.46 * std::cos(x);
}

struct HrrpOptions {
    int pad_factor = 4;
    Window window = Window::Rectangular;
};

struct RangeProfile {
    std::vector<Complex> samples;
    double bin_spacing = 0.0;  // m per output sample
    double resolution = 0.0;   // c / (2 B_synth)
    double unambiguous = 0.0;  // m, profile wraps after this range

    /// Range of sample m, folded into [gate, gate + unambiguous).
    double range_of(std::size_t m, double gate) const {
        const double r = static_cast<double>(m) * bin_spacing;
        double off = std::fmod(r - gate, unambiguous);
        if (off < 0) off += unambiguous;
        return gate + off;
    }
};

/// Unitary inverse transform (Parseval holds) of the zero-padded, optionally
/// tapered stitched spectrum.
inline RangeProfile synthesize_hrrp(const StitchedSpectrum& s, const HrrpOptions& opt = {}) {
    if (opt.pad_factor < 1) throw std::invalid_argument("synthesize_hrrp: pad factor must be >= 1");
    const std::size_t n = s.size();
    const std::size_t nfft = n * static_cast<std::size_t>(opt.pad_factor);
    RangeProfile out;
    if (n == 0) return out;
    std::vector<Complex> spec(nfft);
    for (std::size_t j = 0; j < n; ++j) spec[j] = s.samples[j] * window_weight(opt.window, j, n);
    out.samples = fft::inverse(spec, 1.0 / std::sqrt(static_cast<double>(nfft)));
    out.unambiguous = kSpeedOfLight / (2.0 * s.spacing);
    out.resolution = kSpeedOfLight / (2.0 * s.spacing * static_cast<double>(n));
    out.bin_spacing = out.unambiguous / static_cast<double>(nfft);
    return out;
}

struct VelocityGrid {
    double v_min = -3.0;
    double v_max = 3.0;
    double step = 0.0;

    void validate() const {
        if (!(v_min < v_max)) throw std::invalid_argument("velocity grid: v_min must be < v_max");
        if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("velocity grid: step must be > 0");
    }

    /// Grid points k * step inside [v_min, v_max]; anchored at zero.
    std::vector<double> values() const {
        validate();
        const double tol = 1e-9 * step;
        const auto k_lo = static_cast<long long>(std::ceil((v_min - tol) / step));
        const auto k_hi = static_cast<long long>(std::floor((v_max + tol) / step));
        std::vector<double> out;
        for (long long k = k_lo; k <= k_hi; ++k) out.push_back(static_cast<double>(k) * step);
        return out;
    }

    static VelocityGrid for_radar(const RadarParams& p, double v_min = -3.0, double v_max = 3.0) {
        return {v_min, v_max, velocity_resolution(p)};
    }
};

struct RvMapOptions {
    HrrpOptions hrrp{};
    // keep only range bins inside [crop_min, crop_max] when set
    std::optional<double> crop_min;
    std::optional<double> crop_max;
};

struct RVMap {
    std::size_t rows = 0;  // velocity hypotheses
    std::size_t cols = 0;  // range samples
    std::vector<double> data;
    std::vector<double> velocity_axis;  // m/s
    std::vector<double> range_axis;     // m
    double range_resolution = 0.0;      // c / (2 B_synth)
    double velocity_resolution = 0.0;   // lambda / (2 N Tr)
    std::optional<int> label;
    std::string provenance;

    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
};

/// Full chain for one hypothesis, from already compressed spectra.
inline RangeProfile hrrp_for_velocity(const CompressedSpectra& compressed, double v, const HrrpOptions& opt = {}) {
    CompressedSpectra s = compressed;
    doppler_compensate_inplace(s, v);
    rcm_correct_inplace(s, v);
    return synthesize_hrrp(stitch_spectrum(coherent_integrate(s)), opt);
}

namespace detail {

// Doppler compensation, range migration correction and coherent averaging in
// one pass; the two phase terms are both linear in f so they combine into a
// single rotation per pulse. Agrees with the staged path to rounding.
inline CarrierSpectra compensate_and_integrate(const CompressedSpectra& s, double v) {
    const auto M = static_cast<std::size_t>(s.params.carriers);
    const std::size_t nb = s.bins();
    CarrierSpectra out{s.params, s.freqs, std::vector<Complex>(M * nb), s.codes.counts(s.params.carriers)};
    for (std::size_t i = 0; i < M; ++i)
        if (out.counts[i] == 0)
            throw std::invalid_argument("coherent_integrate: carrier " + std::to_string(i) + " has no pulses");
    if (nb == 0) return out;
    const double mu = s.params.chirp_rate();
    const double f_lo = s.freqs.front();
    const double df = nb > 1 ? s.freqs[1] - s.freqs[0] : 0.0;
    for (std::size_t n = 0; n < s.pulse_count(); ++n) {
        const double fn = carrier_frequency(s.params, s.codes[n]);
        const double walk = 2.0 * v * static_cast<double>(n) * s.params.pri / kSpeedOfLight;
        const double a = frac(fn * walk);
        const double b = walk + 2.0 * v * fn / (kSpeedOfLight * mu);
        auto dst = out.carrier(static_cast<std::size_t>(s.codes[n]));
        const auto src = s.pulse(n);
        if (v == 0.0) {
            for (std::size_t k = 0; k < nb; ++k) dst[k] += src[k];
            continue;
        }
        Complex ph = std::polar(1.0, kTwoPi * frac(a + b * f_lo));
        const Complex step = std::polar(1.0, kTwoPi * frac(b * df));
        for (std::size_t k = 0; k < nb; ++k) {
            if (k % 64 == 0 && k > 0) ph = std::polar(1.0, kTwoPi * frac(a + b * s.freqs[k]));
            dst[k] += cmul(src[k], ph);
            ph = cmul(ph, step);
        }
    }
    for (std::size_t i = 0; i < M; ++i) {
        const double inv = 1.0 / out.counts[i];
        for (auto& x : out.carrier(i)) x *= inv;
    }
    return out;
}

}  // namespace detail

inline RVMap build_rv_map(const PulseTrain& train, const VelocityGrid& grid, const RvMapOptions& opt = {}) {
    const auto velocities = grid.values();
    if (velocities.empty()) throw std::invalid_argument("build_rv_map: empty velocity grid");
    const CompressedSpectra compressed = pulse_compress(train);
    const double gate = train.params.gate_start;

    RVMap map;
    map.velocity_axis = velocities;
    map.range_resolution = range_resolution(train.params);
    map.velocity_resolution = velocity_resolution(train.params);
    map.rows = velocities.size();

    std::vector<std::pair<double, std::size_t>> cols;  // (range, profile index)
    for (std::size_t r = 0; r < velocities.size(); ++r) {
        const RangeProfile prof =
            synthesize_hrrp(stitch_spectrum(detail::compensate_and_integrate(compressed, velocities[r])), opt.hrrp);
        if (r == 0) {
            for (std::size_t m = 0; m < prof.samples.size(); ++m) {
                const double range = prof.range_of(m, gate);
                if (opt.crop_min && range < *opt.crop_min) continue;
                if (opt.crop_max && range > *opt.crop_max) continue;
                cols.emplace_back(range, m);
            }
            std::sort(cols.begin(), cols.end());
            map.cols = cols.size();
            map.range_axis.reserve(cols.size());
            for (const auto& c : cols) map.range_axis.push_back(c.first);
            map.data.resize(map.rows * map.cols);
        }
        for (std::size_t c = 0; c < cols.size(); ++c) map.at(r, c) = std::abs(prof.samples[cols[c].second]);
    }
    return map;
}

/// (row, col) of the largest cell; first occurrence wins.
inline std::pair<std::size_t, std::size_t> argmax(const RVMap& map) {
    if (map.data.empty()) throw std::invalid_argument("argmax: empty map");
    const auto it = std::max_element(map.data.begin(), map.data.end());
    const auto idx = static_cast<std::size_t>(it - map.data.begin());
    return {idx / map.cols, idx % map.cols};
}

}  // namespace rvdisc
