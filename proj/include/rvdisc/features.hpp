#pragma once

// Handcrafted micro-motion features of an RV map: scattering-centre
// extraction, the mean weighted square residual of the range/velocity line
// fit (MWR), the range and velocity spreads, and the complementary contrast
// factor (CCF). Coordinates are in resolution cells (range / dR, velocity /
// dv) so both axes share one scale.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rvdisc/rvmap.hpp"

namespace rvdisc {

struct ScatterPoint {
    double r = 0.0;  // range, cells
    double v = 0.0;  // velocity, cells
    double w = 0.0;  // weight; weights of one map sum to 1
};

enum class WeightMode { Amplitude, Power };

inline WeightMode weight_mode_from_string(const std::string& s) {
    if (s == "amplitude") return WeightMode::Amplitude;
    if (s == "power") return WeightMode::Power;
    throw std::invalid_argument("unknown weight mode '" + s + "'");
}

/// Strict 3x3 local maxima within `threshold_db` of the global maximum,
/// strongest `max_points` kept.
inline std::vector<ScatterPoint> extract_scatter_points(const RVMap& map, double threshold_db = -12.0,
                                                        std::size_t max_points = 50,
                                                        WeightMode mode = WeightMode::Amplitude) {
    if (!(threshold_db < 0.0)) throw std::invalid_argument("extract_scatter_points: threshold_db must be < 0");
    if (max_points < 1) throw std::invalid_argument("extract_scatter_points: max_points must be >= 1");
    if (map.data.empty()) return {};
    const double peak = *std::max_element(map.data.begin(), map.data.end());
    if (!(peak > 0.0)) return {};
    const double floor = peak * std::pow(10.0, threshold_db / 20.0);

    struct Cell {
        double amp;
        std::size_t row, col;
    };
    std::vector<Cell> cells;
    for (std::size_t r = 0; r < map.rows; ++r) {
        for (std::size_t c = 0; c < map.cols; ++c) {
            const double a = map.at(r, c);
            if (a < floor || a <= 0.0) continue;
            bool is_max = true;
            for (int dr = -1; dr <= 1 && is_max; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const auto rr = static_cast<long long>(r) + dr;
                    const auto cc = static_cast<long long>(c) + dc;
                    if (rr < 0 || cc < 0 || rr >= static_cast<long long>(map.rows) ||
                        cc >= static_cast<long long>(map.cols))
                        continue;
                    if (map.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) >= a) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) cells.push_back({a, r, c});
        }
    }
    std::stable_sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) { return x.amp > y.amp; });
    if (cells.size() > max_points) cells.resize(max_points);

    double total = 0.0;
    for (const auto& c : cells) total += mode == WeightMode::Power ? c.amp * c.amp : c.amp;
    std::vector<ScatterPoint> out;
    out.reserve(cells.size());
    for (const auto& c : cells) {
        const double w = (mode == WeightMode::Power ? c.amp * c.amp : c.amp) / total;
        out.push_back({map.range_axis[c.col] / map.range_resolution,
                       map.velocity_axis[c.row] / map.velocity_resolution, w});
    }
    return out;
}

/// Mean weighted square residual of the line fit v = a r + b.
///
/// The line is an ordinary least-squares fit unless `weighted_fit` is set,
/// in which case the weights enter the fit as well. When every r is equal the
/// fitted value is the weighted mean velocity. Fewer than three points give 0.
inline double compute_mwr(const std::vector<ScatterPoint>& pts, bool weighted_fit = false) {
    if (pts.empty()) throw std::invalid_argument("compute_mwr: no points");
    const std::size_t n = pts.size();
    if (n < 3) return 0.0;

    double sw = 0.0, r_mean = 0.0, v_mean = 0.0;
    for (const auto& p : pts) {
        const double w = weighted_fit ? p.w : 1.0;
        sw += w;
        r_mean += w * p.r;
        v_mean += w * p.v;
    }
    r_mean /= sw;
    v_mean /= sw;
    double srr = 0.0, srv = 0.0, r_scale = 0.0;
    for (const auto& p : pts) {
        const double w = weighted_fit ? p.w : 1.0;
        srr += w * (p.r - r_mean) * (p.r - r_mean);
        srv += w * (p.r - r_mean) * (p.v - v_mean);
        r_scale = std::max(r_scale, std::abs(p.r));
    }

    double acc = 0.0;
    const bool degenerate = srr <= 1e-24 * std::max(1.0, r_scale * r_scale) * static_cast<double>(n);
    if (degenerate) {
        double wsum = 0.0, vbar = 0.0;
        for (const auto& p : pts) {
            wsum += p.w;
            vbar += p.w * p.v;
        }
        vbar = wsum > 0.0 ? vbar / wsum : 0.0;
        for (const auto& p : pts) acc += p.w * (p.v - vbar) * (p.v - vbar);
    } else {
        const double slope = srv / srr;
        for (const auto& p : pts) {
            const double fit = v_mean + slope * (p.r - r_mean);
            acc += p.w * (p.v - fit) * (p.v - fit);
        }
    }
    return acc / static_cast<double>(n);
}

struct Spreads {
    double sigma_r = 0.0;
    double sigma_v = 0.0;
};

/// Unweighted population standard deviations of r and v.
inline Spreads compute_spreads(const std::vector<ScatterPoint>& pts) {
    if (pts.empty()) throw std::invalid_argument("compute_spreads: no points");
    const auto n = static_cast<double>(pts.size());
    double rm = 0.0, vm = 0.0;
    for (const auto& p : pts) {
        rm += p.r;
        vm += p.v;
    }
    rm /= n;
    vm /= n;
    double rr = 0.0, vv = 0.0;
    for (const auto& p : pts) {
        rr += (p.r - rm) * (p.r - rm);
        vv += (p.v - vm) * (p.v - vm);
    }
    return {std::sqrt(rr / n), std::sqrt(vv / n)};
}

inline constexpr double kCcfEpsilon = 1e-6;

inline double compute_ccf(double sigma_r, double sigma_v) {
    if (!(sigma_r >= 0.0) || !(sigma_v >= 0.0)) throw std::invalid_argument("compute_ccf: spreads must be >= 0");
    const double ccf = std::abs(sigma_r - sigma_v) / (sigma_r + sigma_v + kCcfEpsilon);
    return std::clamp(ccf, 0.0, 1.0);
}

struct FeatureConfig {
    double threshold_db = -12.0;
    std::size_t max_points = 50;
    WeightMode weight_mode = WeightMode::Amplitude;
    bool weighted_fit = false;
    std::vector<double> extra;  // externally supplied columns, copied through
};

struct FeatureVector {
    double mwr = 0.0;
    double ccf = 0.0;
    double sigma_r = 0.0;
    double sigma_v = 0.0;
    std::vector<double> extra;
    int label = 0;  // 1 = ship, 0 = reflector array
    bool degenerate = false;
    std::size_t point_count = 0;

    static std::vector<std::string> base_names() { return {"mwr", "ccf", "sigma_r", "sigma_v"}; }

    std::vector<double> values() const {
        std::vector<double> out = {mwr, ccf, sigma_r, sigma_v};
        out.insert(out.end(), extra.begin(), extra.end());
        return out;
    }
};

inline FeatureVector featurize(const RVMap& map, const FeatureConfig& cfg = {}) {
    FeatureVector fv;
    fv.label = map.label.value_or(0);
    fv.extra = cfg.extra;
    const auto pts = extract_scatter_points(map, cfg.threshold_db, cfg.max_points, cfg.weight_mode);
    fv.point_count = pts.size();
    if (pts.empty()) {
        fv.degenerate = true;
        return fv;
    }
    fv.mwr = compute_mwr(pts, cfg.weighted_fit);
    const auto s = compute_spreads(pts);
    fv.sigma_r = s.sigma_r;
    fv.sigma_v = s.sigma_v;
    fv.ccf = compute_ccf(s.sigma_r, s.sigma_v);
    return fv;
}

}  // namespace rvdisc
