#pragma once

// Frequency-agile LFM echo synthesis.
//
// Pulses are built in the frequency domain: the reference chirp spectrum
// times the coherent scatterer sum, then inverse transformed onto the
// fast-time receive window. The window is ceil(Tp*fs) samples long and the
// synthesis is circular over it, so the window spans c*L/(2*fs) metres of
// range starting at `gate_start`.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "rvdisc/common.hpp"
#include "rvdisc/fft.hpp"
#include "rvdisc/scene.hpp"

namespace rvdisc {

struct RadarParams {
    double f0 = 16e9;          // initial carrier, Hz
    int carriers = 8;          // M
    double freq_step = 25e6;   // delta f, Hz
    double pulse_width = 36e-6;
    double sample_rate = 50e6;  // complex fs, Hz
    double bandwidth = 25e6;    // per-pulse chirp bandwidth B, Hz
    double pri = 250e-6;
    int pulses = 256;           // N per CPI
    double scr_db = 20.0;
    double gate_start = 0.0;    // range at the start of the receive window, m

    double chirp_rate() const { return bandwidth / pulse_width; }
    double synthetic_bandwidth() const { return carriers * freq_step; }
    double wavelength() const { return kSpeedOfLight / f0; }
    double cpi() const { return pulses * pri; }

    std::size_t samples_per_pulse() const {
        return static_cast<std::size_t>(std::ceil(pulse_width * sample_rate - 1e-9));
    }

    double bin_spacing() const { return sample_rate / static_cast<double>(samples_per_pulse()); }

    /// Range extent of the circular receive window, m.
    double window_length() const { return kSpeedOfLight / (2.0 * bin_spacing()); }

    void validate() const {
        auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
        if (!positive(f0) || !positive(freq_step) || !positive(pulse_width) || !positive(sample_rate) ||
            !positive(bandwidth) || !positive(pri))
            throw std::invalid_argument("radar: frequencies and durations must be finite and > 0");
        if (carriers < 1) throw std::invalid_argument("radar: need at least one carrier");
        if (pulses < carriers) throw std::invalid_argument("radar: pulses per CPI must be >= carriers");
        if (bandwidth > sample_rate) throw std::invalid_argument("radar: bandwidth exceeds sample rate");
        if (!(pulse_width < pri)) throw std::invalid_argument("radar: pulse width must be below the PRI");
        if (std::isnan(scr_db)) throw std::invalid_argument("radar: scr_db is NaN");
        if (!std::isfinite(gate_start)) throw std::invalid_argument("radar: gate_start must be finite");
    }
};

/// Range resolution of the synthetic band, c / (2 M delta_f).
inline double range_resolution(const RadarParams& p) {
    return kSpeedOfLight / (2.0 * p.synthetic_bandwidth());
}

/// Velocity resolution lambda / (2 N Tr) with lambda = c / f0.
inline double velocity_resolution(const RadarParams& p) {
    return p.wavelength() / (2.0 * p.pulses * p.pri);
}

inline double carrier_frequency(const RadarParams& p, int code) {
    if (code < 0 || code >= p.carriers)
        throw std::out_of_range("carrier_frequency: code " + std::to_string(code) + " outside [0, " +
                                std::to_string(p.carriers) + ")");
    return p.f0 + code * p.freq_step;
}

struct HopCode {
    std::vector<int> codes;

    std::size_t size() const { return codes.size(); }
    int operator[](std::size_t n) const { return codes[n]; }

    std::vector<int> counts(int carriers) const {
        std::vector<int> c(static_cast<std::size_t>(carriers), 0);
        for (int x : codes) ++c.at(static_cast<std::size_t>(x));
        return c;
    }
};

inline constexpr int kHopCodeRetries = 32;

/// I.i.d. uniform carrier codes; redrawn until every carrier appears.
inline HopCode generate_hop_code(const RadarParams& p, std::uint64_t seed) {
    if (p.pulses < p.carriers) throw std::invalid_argument("generate_hop_code: N < M");
    for (int attempt = 0; attempt < kHopCodeRetries; ++attempt) {
        Rng rng = make_rng({seed, 0x686f70ULL, static_cast<std::uint64_t>(attempt)});
        std::uniform_int_distribution<int> dist(0, p.carriers - 1);
        HopCode code;
        code.codes.resize(static_cast<std::size_t>(p.pulses));
        for (auto& c : code.codes) c = dist(rng);
        const auto counts = code.counts(p.carriers);
        if (std::all_of(counts.begin(), counts.end(), [](int c) { return c > 0; })) return code;
    }
    throw std::runtime_error("generate_hop_code: some carrier never drawn after " +
                             std::to_string(kHopCodeRetries) + " attempts; N too small for M");
}

inline bool in_band(double f, double bandwidth) { return f >= -0.5 * bandwidth && f < 0.5 * bandwidth; }

/// Reference chirp spectrum sqrt(1/mu) rect(f/B) exp(-j pi f^2 / mu) on a
/// baseband grid. The band is half-open, [-B/2, B/2).
inline std::vector<Complex> reference_spectrum(const RadarParams& p, std::span<const double> freqs) {
    const double mu = p.chirp_rate();
    const double mag = 1.0 / std::sqrt(mu);
    std::vector<Complex> out(freqs.size());
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double f = freqs[i];
        if (in_band(f, p.bandwidth)) out[i] = std::polar(mag, -kPi * f * f / mu);
    }
    return out;
}

/// In-band DFT bins of one pulse window, ascending in frequency.
struct BandLayout {
    std::vector<std::size_t> dft_index;
    std::vector<double> freqs;

    static BandLayout of(const RadarParams& p) {
        const std::size_t L = p.samples_per_pulse();
        BandLayout b;
        std::vector<std::pair<double, std::size_t>> bins;
        for (std::size_t k = 0; k < L; ++k) {
            const double f = fft::bin_frequency(k, L, p.sample_rate);
            if (in_band(f, p.bandwidth)) bins.emplace_back(f, k);
        }
        std::sort(bins.begin(), bins.end());
        for (auto [f, k] : bins) {
            b.freqs.push_back(f);
            b.dft_index.push_back(k);
        }
        return b;
    }

    std::size_t size() const { return freqs.size(); }
};

struct PulseTrain {
    RadarParams params;
    HopCode codes;
    std::size_t samples_per_pulse = 0;
    std::vector<Complex> samples;  // pulse-major, N x L

    std::span<const Complex> pulse(std::size_t n) const {
        return {samples.data() + n * samples_per_pulse, samples_per_pulse};
    }
    std::span<Complex> pulse(std::size_t n) {
        return {samples.data() + n * samples_per_pulse, samples_per_pulse};
    }
    std::size_t pulse_count() const { return codes.size(); }
};

namespace detail {

inline double frac(double x) { return x - std::floor(x); }

inline void check_delays(const std::vector<ScattererState>& scatterers, const RadarParams& p) {
    const double lo = p.gate_start;
    const double hi = p.gate_start + p.window_length();
    const double last = (p.pulses - 1) * p.pri;
    for (std::size_t k = 0; k < scatterers.size(); ++k) {
        const auto& s = scatterers[k];
        const double r0 = s.range;
        const double r1 = s.range + s.velocity * last;
        if (!std::isfinite(r0) || !std::isfinite(r1) || std::min(r0, r1) < lo || std::max(r0, r1) >= hi)
            throw std::out_of_range("synthesize_echo: scatterer " + std::to_string(k) + " (R=" +
                                    std::to_string(s.range) + " m, v=" + std::to_string(s.velocity) +
                                    " m/s) leaves the receive window [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + ") m");
    }
}

}  // namespace detail

/// Coherent scatterer sum of one pulse on the in-band grid, excluding the
/// reference chirp: sum_k sigma_k exp(-j2pi[(f_n + f) tau_nk + f * 2 v_k f_n/(c mu)]).
/// The last term is the LFM range-Doppler coupling of a moving scatterer.
inline std::vector<Complex> scatterer_sum(const std::vector<ScattererState>& scatterers,
                                          const RadarParams& p, int code, std::size_t n,
                                          std::span<const double> freqs) {
    std::vector<Complex> out(freqs.size());
    if (freqs.empty()) return out;
    const double fn = carrier_frequency(p, code);
    const double mu = p.chirp_rate();
    const double df = freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0;
    const double t = static_cast<double>(n) * p.pri;
    for (const auto& s : scatterers) {
        const double tau = 2.0 * (s.range + s.velocity * t) / kSpeedOfLight;
        const double tau_eff = tau + 2.0 * s.velocity * fn / (kSpeedOfLight * mu);
        const double cycles0 = detail::frac(fn * tau) + freqs.front() * tau_eff;
        Complex ph = std::polar(s.sigma, -kTwoPi * detail::frac(cycles0));
        const Complex step = std::polar(1.0, -kTwoPi * detail::frac(df * tau_eff));
        // re-anchor the rotation every 64 bins to bound accumulated rounding
        for (std::size_t i = 0; i < freqs.size(); ++i) {
            if (i % 64 == 0 && i > 0)
                ph = std::polar(s.sigma, -kTwoPi * detail::frac(detail::frac(fn * tau) + freqs[i] * tau_eff));
            out[i] += ph;
            ph = cmul(ph, step);
        }
    }
    return out;
}

/// Noiseless pulse train.
inline PulseTrain synthesize_clean(const std::vector<ScattererState>& scatterers, const RadarParams& p,
                                   const HopCode& code) {
    p.validate();
    if (code.size() != static_cast<std::size_t>(p.pulses))
        throw std::invalid_argument("synthesize_echo: hop code length differs from N");
    detail::check_delays(scatterers, p);

    const std::size_t L = p.samples_per_pulse();
    const BandLayout band = BandLayout::of(p);
    const auto ref = reference_spectrum(p, band.freqs);

    PulseTrain train{p, code, L, std::vector<Complex>(static_cast<std::size_t>(p.pulses) * L)};
    std::vector<Complex> spec(L);
    for (std::size_t n = 0; n < code.size(); ++n) {
        std::fill(spec.begin(), spec.end(), Complex{});
        if (!scatterers.empty()) {
            const auto sum = scatterer_sum(scatterers, p, code[n], n, band.freqs);
            // DFT bins approximate fs * S(f) so that time samples have unit chirp amplitude
            for (std::size_t i = 0; i < band.size(); ++i)
                spec[band.dft_index[i]] = p.sample_rate * cmul(ref[i], sum[i]);
        }
        auto out = train.pulse(n);
        fft::transform(spec, out, fft::Direction::Inverse);
        const double scale = 1.0 / static_cast<double>(L);
        for (auto& x : out) x *= scale;
    }
    return train;
}

inline double mean_power(std::span<const Complex> xs) {
    if (xs.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& x : xs) acc += std::norm(x);
    return acc / static_cast<double>(xs.size());
}

/// Adds complex white Gaussian clutter so that mean signal power over the
/// whole train divided by the clutter power equals `scr_db`. Each pulse
/// draws from its own stream derived from (seed, pulse index).
inline void add_clutter(PulseTrain& train, double scr_db, std::uint64_t seed) {
    if (std::isinf(scr_db) && scr_db > 0) return;
    if (std::isnan(scr_db)) throw std::invalid_argument("add_clutter: scr_db is NaN");
    const double ps = mean_power(train.samples);
    const double pn = ps / std::pow(10.0, scr_db / 10.0);
    const double sd = std::sqrt(pn / 2.0);
    if (sd == 0.0) return;
    for (std::size_t n = 0; n < train.pulse_count(); ++n) {
        Rng rng = make_rng({seed, 0x636c7574ULL, n});
        std::normal_distribution<double> g(0.0, sd);
        for (auto& x : train.pulse(n)) {
            const double re = g(rng);
            const double im = g(rng);
            x += Complex{re, im};
        }
    }
}

/// Noisy echo at `p.scr_db`; deterministic given the seed.
inline PulseTrain synthesize_echo(const std::vector<ScattererState>& scatterers, const RadarParams& p,
                                  const HopCode& code, std::uint64_t seed) {
    PulseTrain train = synthesize_clean(scatterers, p, code);
    add_clutter(train, p.scr_db, seed);
    return train;
}

// Binary dump, little endian:
//   char[8]  magic "RVDPT\0\0\1"
//   f64 f0, u32 M, f64 freq_step, f64 pulse_width, f64 sample_rate,
//   f64 bandwidth, f64 pri, u32 N, f64 scr_db, f64 gate_start,
//   u32 samples_per_pulse L
//   u32 code[N]
//   f32 re, f32 im   (N * L pairs, pulse-major)
namespace detail {

inline constexpr char kTrainMagic[8] = {'R', 'V', 'D', 'P', 'T', 0, 0, 1};

template <typename T>
void put_le(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw std::runtime_error("pulse train: truncated");
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

}  // namespace detail

inline void write_pulse_train(std::ostream& os, const PulseTrain& t) {
    using detail::put_le;
    os.write(detail::kTrainMagic, sizeof(detail::kTrainMagic));
    const auto& p = t.params;
    put_le<double>(os, p.f0);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.carriers));
    put_le<double>(os, p.freq_step);
    put_le<double>(os, p.pulse_width);
    put_le<double>(os, p.sample_rate);
    put_le<double>(os, p.bandwidth);
    put_le<double>(os, p.pri);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.pulses));
    put_le<double>(os, p.scr_db);
    put_le<double>(os, p.gate_start);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.samples_per_pulse));
    for (int c : t.codes.codes) put_le<std::uint32_t>(os, static_cast<std::uint32_t>(c));
    for (const auto& x : t.samples) {
        put_le<float>(os, static_cast<float>(x.real()));
        put_le<float>(os, static_cast<float>(x.imag()));
    }
}

inline PulseTrain read_pulse_train(std::istream& is) {
    using detail::get_le;
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, detail::kTrainMagic, 8) != 0)
        throw std::runtime_error("pulse train: bad magic");
    PulseTrain t;
    auto& p = t.params;
    p.f0 = get_le<double>(is);
    p.carriers = static_cast<int>(get_le<std::uint32_t>(is));
    p.freq_step = get_le<double>(is);
    p.pulse_width = get_le<double>(is);
    p.sample_rate = get_le<double>(is);
    p.bandwidth = get_le<double>(is);
    p.pri = get_le<double>(is);
    p.pulses = static_cast<int>(get_le<std::uint32_t>(is));
    p.scr_db = get_le<double>(is);
    p.gate_start = get_le<double>(is);
    t.samples_per_pulse = get_le<std::uint32_t>(is);
    p.validate();
    if (t.samples_per_pulse != p.samples_per_pulse())
        throw std::runtime_error("pulse train: samples per pulse inconsistent with parameters");
    t.codes.codes.resize(static_cast<std::size_t>(p.pulses));
    for (auto& c : t.codes.codes) {
        c = static_cast<int>(get_le<std::uint32_t>(is));
        if (c >= p.carriers) throw std::runtime_error("pulse train: hop code out of range");
    }
    t.samples.resize(static_cast<std::size_t>(p.pulses) * t.samples_per_pulse);
    for (auto& x : t.samples) {
        const float re = get_le<float>(is);
        const float im = get_le<float>(is);
        x = {re, im};
    }
    return t;
}

}  // namespace rvdisc
