#pragma once

// Target geometry, sea-driven attitude motion and per-CPI scatterer states.
//
// Motion model: each rigid unit (the whole ship, or one corner reflector)
// rotates about its pivot through roll/pitch/yaw series built from a few
// seeded sinusoids whose amplitudes scale linearly with significant wave
// height. Scatterer ranges use the far-field projection onto the radar line
// of sight, so a rigid body maps collinear points to collinear (R, v) pairs.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rvdisc/common.hpp"

namespace rvdisc {

using Vec3 = std::array<double, 3>;

enum class TargetKind { Ship, ReflectorArray };

inline const char* to_string(TargetKind kind) {
    return kind == TargetKind::Ship ? "ship" : "array";
}

inline TargetKind target_kind_from_string(const std::string& s) {
    if (s == "ship") return TargetKind::Ship;
    if (s == "array" || s == "reflector_array") return TargetKind::ReflectorArray;
    throw std::invalid_argument("unknown target kind '" + s + "'");
}

/// Class label used by the classifier: 1 = ship, 0 = reflector array.
inline int class_label(TargetKind kind) { return kind == TargetKind::Ship ? 1 : 0; }

struct ObservationGeometry {
    double range0 = 10'000.0;    // radar to target origin, m
    double azimuth_deg = 0.0;    // 0 = bow toward radar, counterclockwise positive
    double elevation_deg = 2.0;

    void validate() const {
        if (!(range0 > 0.0)) throw std::invalid_argument("geometry: range0 must be > 0");
        if (!(azimuth_deg >= 0.0 && azimuth_deg <= 180.0))
            throw std::invalid_argument("geometry: azimuth must lie in [0, 180] deg");
        if (!(elevation_deg > -90.0 && elevation_deg < 90.0))
            throw std::invalid_argument("geometry: elevation must lie in (-90, 90) deg");
    }

    /// Unit vector from the target origin toward the radar, target frame.
    Vec3 line_of_sight() const {
        const double az = deg2rad(azimuth_deg);
        const double el = deg2rad(elevation_deg);
        return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
    }
};

struct SeaState {
    double hs = 1.0;  // significant wave height, m
    std::uint64_t seed = 0;
};

struct AttitudeSeries {
    std::vector<double> roll, pitch, yaw;  // rad

    std::size_t size() const { return roll.size(); }
};

/// Parameters of the substitute attitude generator. Amplitudes are degrees
/// per metre of significant wave height.
struct AttitudeModel {
    double ship_roll_deg = 2.0;
    double ship_pitch_deg = 1.0;
    double ship_yaw_deg = 0.5;
    double ship_period_min = 6.0;
    double ship_period_max = 12.0;
    double reflector_scale = 3.0;
    double reflector_period_min = 2.0;
    double reflector_period_max = 5.0;
};

struct RigidUnit {
    Vec3 pivot{};
    std::vector<Vec3> points;        // target frame, m
    std::vector<double> amplitudes;  // linear
};

struct TargetModel {
    TargetKind kind = TargetKind::Ship;
    std::vector<RigidUnit> units;

    std::size_t point_count() const {
        std::size_t n = 0;
        for (const auto& u : units) n += u.points.size();
        return n;
    }

    void validate() const {
        if (units.empty()) throw std::invalid_argument("target: no units");
        if (kind == TargetKind::Ship && units.size() != 1)
            throw std::invalid_argument("target: a ship is a single rigid unit");
        if (point_count() < 2) throw std::invalid_argument("target: need at least 2 body points");
        for (const auto& u : units) {
            if (u.points.size() != u.amplitudes.size())
                throw std::invalid_argument("target: points/amplitudes length mismatch");
            for (double a : u.amplitudes)
                if (!(a > 0.0) || !std::isfinite(a))
                    throw std::invalid_argument("target: amplitudes must be finite and > 0");
        }
    }
};

/// Ship hull: `count` unit-amplitude scatterers evenly spaced along the keel,
/// pivot at their centroid.
inline TargetModel make_ship(double length = 144.0, int count = 8) {
    if (count < 2) throw std::invalid_argument("make_ship: count must be >= 2");
    RigidUnit hull;
    for (int i = 0; i < count; ++i) {
        const double x = -0.5 * length + length * i / (count - 1);
        hull.points.push_back({x, 0.0, 0.0});
        hull.amplitudes.push_back(1.0);
    }
    return {TargetKind::Ship, {hull}};
}

/// Linear array of independent reflectors along the body x axis. Each
/// reflector floats on its own pivot; its phase centre sits `height` above.
inline TargetModel make_reflector_array(int count = 4, double spacing = 42.16, double height = 3.0) {
    if (count < 2) throw std::invalid_argument("make_reflector_array: count must be >= 2");
    TargetModel t{TargetKind::ReflectorArray, {}};
    for (int i = 0; i < count; ++i) {
        const double x = (i - 0.5 * (count - 1)) * spacing;
        t.units.push_back({{x, 0.0, 0.0}, {{x, 0.0, height}}, {1.0}});
    }
    return t;
}

struct ScattererState {
    double sigma = 1.0;
    double range = 0.0;     // R_k at slow time 0, m
    double velocity = 0.0;  // v_k, m/s, positive = receding
};

namespace detail {

inline std::vector<double> sinusoid_channel(Rng& rng, double amplitude, double period_min,
                                            double period_max, double duration, std::size_t n) {
    std::uniform_int_distribution<int> count_dist(1, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int count = count_dist(rng);

    // dominant component carries at least half of the amplitude budget
    std::vector<double> weights(static_cast<std::size_t>(count));
    weights[0] = 0.5 + 0.5 * unit(rng);
    if (count > 1) {
        const double rest = 1.0 - weights[0];
        const double split = count == 2 ? 1.0 : unit(rng);
        weights[1] = rest * split;
        if (count == 3) weights[2] = rest - weights[1];
    }
    std::vector<double> periods(weights.size()), phases(weights.size());
    for (std::size_t j = 0; j < weights.size(); ++j) {
        periods[j] = period_min + (period_max - period_min) * unit(rng);
        phases[j] = kTwoPi * unit(rng);
    }

    std::vector<double> out(n, 0.0);
    const double dt = duration / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = dt * static_cast<double>(i);
        double s = 0.0;
        for (std::size_t j = 0; j < weights.size(); ++j)
            s += weights[j] * std::sin(kTwoPi * t / periods[j] + phases[j]);
        out[i] = amplitude * s;
    }
    return out;
}

// Intrinsic yaw-pitch-roll: R = Rz(yaw) * Ry(pitch) * Rx(roll).
inline Vec3 rotate_zyx(const Vec3& p, double roll, double pitch, double yaw) {
    const double cr = std::cos(roll), sr = std::sin(roll);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const double x1 = p[0];
    const double y1 = cr * p[1] - sr * p[2];
    const double z1 = sr * p[1] + cr * p[2];
    const double x2 = cp * x1 + sp * z1;
    const double z2 = -sp * x1 + cp * z1;
    return {cy * x2 - sy * y1, sy * x2 + cy * y1, z2};
}

}  // namespace detail

/// Seeded roll/pitch/yaw series over `duration` seconds, sample i at
/// t = i * duration / n_samples. Linear in `sea.hs`.
inline AttitudeSeries generate_attitude(const SeaState& sea, TargetKind kind, int unit_index,
                                        double duration, std::size_t n_samples,
                                        const AttitudeModel& model = {}) {
    if (!std::isfinite(sea.hs)) throw std::invalid_argument("generate_attitude: hs must be finite");
    if (sea.hs < 0.0) throw std::invalid_argument("generate_attitude: hs must be >= 0");
    if (n_samples < 1) throw std::invalid_argument("generate_attitude: n_samples must be >= 1");
    if (!(duration > 0.0)) throw std::invalid_argument("generate_attitude: duration must be > 0");

    const bool ship = kind == TargetKind::Ship;
    const double scale = ship ? 1.0 : model.reflector_scale;
    const double pmin = ship ? model.ship_period_min : model.reflector_period_min;
    const double pmax = ship ? model.ship_period_max : model.reflector_period_max;
    const std::array<double, 3> amp_deg = {model.ship_roll_deg * scale, model.ship_pitch_deg * scale,
                                           model.ship_yaw_deg * scale};
    for (double a : amp_deg)
        if (deg2rad(a * sea.hs) >= kPi / 2)
            throw std::invalid_argument("generate_attitude: attitude amplitude reaches 90 deg");

    AttitudeSeries out;
    std::array<std::vector<double>*, 3> channels = {&out.roll, &out.pitch, &out.yaw};
    for (std::size_t c = 0; c < 3; ++c) {
        Rng rng = make_rng({sea.seed, static_cast<std::uint64_t>(kind),
                            static_cast<std::uint64_t>(unit_index), c});
        *channels[c] =
            detail::sinusoid_channel(rng, deg2rad(amp_deg[c]) * sea.hs, pmin, pmax, duration, n_samples);
    }
    return out;
}

/// Per-CPI linearised scatterer states. One attitude series per rigid unit;
/// sample i is taken at slow time i * cpi / series_length.
inline std::vector<ScattererState> project_scatterers(const TargetModel& target,
                                                      const ObservationGeometry& geom,
                                                      const std::vector<AttitudeSeries>& attitudes,
                                                      double cpi) {
    target.validate();
    geom.validate();
    if (attitudes.size() != target.units.size())
        throw std::invalid_argument("project_scatterers: need one attitude series per unit");
    if (!(cpi > 0.0)) throw std::invalid_argument("project_scatterers: cpi must be > 0");
    const std::size_t n = attitudes.front().size();
    if (n == 0) throw std::invalid_argument("project_scatterers: empty attitude series");
    for (const auto& a : attitudes)
        if (a.roll.size() != n || a.pitch.size() != n || a.yaw.size() != n)
            throw std::invalid_argument("project_scatterers: attitude series lengths differ");

    const Vec3 los = geom.line_of_sight();
    const double dt = cpi / static_cast<double>(n);
    const double t_mean = dt * static_cast<double>(n - 1) / 2.0;
    double t_var = 0.0;
    for (std::size_t i = 0; i < n; ++i) t_var += std::pow(dt * static_cast<double>(i) - t_mean, 2);

    std::vector<ScattererState> out;
    out.reserve(target.point_count());
    std::vector<double> ranges(n);
    for (std::size_t u = 0; u < target.units.size(); ++u) {
        const auto& unit = target.units[u];
        const auto& att = attitudes[u];
        for (std::size_t k = 0; k < unit.points.size(); ++k) {
            const Vec3 arm = {unit.points[k][0] - unit.pivot[0], unit.points[k][1] - unit.pivot[1],
                              unit.points[k][2] - unit.pivot[2]};
            for (std::size_t i = 0; i < n; ++i) {
                const Vec3 r = detail::rotate_zyx(arm, att.roll[i], att.pitch[i], att.yaw[i]);
                const double proj = los[0] * (unit.pivot[0] + r[0]) + los[1] * (unit.pivot[1] + r[1]) +
                                    los[2] * (unit.pivot[2] + r[2]);
                ranges[i] = geom.range0 - proj;
            }
            double slope = 0.0;
            if (n > 1) {
                double r_mean = 0.0;
                for (double r : ranges) r_mean += r;
                r_mean /= static_cast<double>(n);
                double cov = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    cov += (dt * static_cast<double>(i) - t_mean) * (ranges[i] - r_mean);
                slope = cov / t_var;
            }
            out.push_back({unit.amplitudes[k], ranges[0], slope});
        }
    }
    return out;
}

}  // namespace rvdisc
