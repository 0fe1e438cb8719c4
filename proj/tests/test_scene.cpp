#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rvdisc/scene.hpp"

using namespace rvdisc;

namespace {

constexpr double kCpi = 256 * 250e-6;

double max_abs(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m = std::max(m, std::abs(x));
    return m;
}

// residual of an OLS line through (R, v)
double line_residual(const std::vector<ScattererState>& s) {
    const auto n = static_cast<double>(s.size());
    double rm = 0, vm = 0;
    for (const auto& p : s) {
        rm += p.range;
        vm += p.velocity;
    }
    rm /= n;
    vm /= n;
    double srr = 0, srv = 0;
    for (const auto& p : s) {
        srr += (p.range - rm) * (p.range - rm);
        srv += (p.range - rm) * (p.velocity - vm);
    }
    const double a = srv / srr;
    double worst = 0;
    for (const auto& p : s) worst = std::max(worst, std::abs(p.velocity - (vm + a * (p.range - rm))));
    return worst;
}

std::vector<AttitudeSeries> zero_attitudes(std::size_t units, std::size_t n) {
    AttitudeSeries a{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    return std::vector<AttitudeSeries>(units, a);
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST(Geometry, ValidationBounds) {
    EXPECT_NO_THROW((ObservationGeometry{1.0, 0.0, 0.0}.validate()));
    EXPECT_NO_THROW((ObservationGeometry{1.0, 180.0, 89.9}.validate()));
    EXPECT_THROW((ObservationGeometry{0.0, 10.0, 2.0}.validate()), std::invalid_argument);
    EXPECT_THROW((ObservationGeometry{1e4, 181.0, 2.0}.validate()), std::invalid_argument);
    EXPECT_THROW((ObservationGeometry{1e4, -1.0, 2.0}.validate()), std::invalid_argument);
    EXPECT_THROW((ObservationGeometry{1e4, 10.0, 90.0}.validate()), std::invalid_argument);
}

TEST(Geometry, LineOfSightIsUnit) {
    const auto u = ObservationGeometry{1e4, 37.0, 2.0}.line_of_sight();
    EXPECT_NEAR(u[0] * u[0] + u[1] * u[1] + u[2] * u[2], 1.0, 1e-15);
    EXPECT_NEAR(u[2], std::sin(deg2rad(2.0)), 1e-15);
}

TEST(TargetModel, DefaultScenes) {
    const auto ship = make_ship();
    EXPECT_EQ(ship.units.size(), 1u);
    EXPECT_EQ(ship.point_count(), 8u);
    EXPECT_DOUBLE_EQ(ship.units[0].points.front()[0], -72.0);
    EXPECT_DOUBLE_EQ(ship.units[0].points.back()[0], 72.0);

    const auto arr = make_reflector_array();
    EXPECT_EQ(arr.units.size(), 4u);
    EXPECT_EQ(arr.point_count(), 4u);
    EXPECT_NEAR(arr.units[1].pivot[0] - arr.units[0].pivot[0], 42.16, 1e-12);
}

TEST(TargetModel, InvariantsRejected) {
    EXPECT_THROW(make_ship(144.0, 1), std::invalid_argument);
    auto t = make_ship();
    t.units[0].amplitudes[2] = 0.0;
    EXPECT_THROW(t.validate(), std::invalid_argument);
    TargetModel two_hulls{TargetKind::Ship, {make_ship().units[0], make_ship().units[0]}};
    EXPECT_THROW(two_hulls.validate(), std::invalid_argument);
}

TEST(Attitude, ZeroWaveHeightGivesZeroSeries) {
    for (auto kind : {TargetKind::Ship, TargetKind::ReflectorArray}) {
        const auto a = generate_attitude({0.0, 11}, kind, 2, kCpi, 256);
        EXPECT_EQ(a.size(), 256u);
        EXPECT_EQ(max_abs(a.roll) + max_abs(a.pitch) + max_abs(a.yaw), 0.0);
    }
}

TEST(Attitude, DeterministicGivenSeedKindUnit) {
    const auto a = generate_attitude({1.3, 99}, TargetKind::ReflectorArray, 1, 10.0, 500);
    const auto b = generate_attitude({1.3, 99}, TargetKind::ReflectorArray, 1, 10.0, 500);
    EXPECT_EQ(a.roll, b.roll);
    EXPECT_EQ(a.pitch, b.pitch);
    EXPECT_EQ(a.yaw, b.yaw);
    const auto c = generate_attitude({1.3, 99}, TargetKind::ReflectorArray, 2, 10.0, 500);
    EXPECT_NE(a.roll, c.roll);
}

TEST(Attitude, ShipRollWithinConfiguredBoundsOver64s) {
    // sum of unit sinusoids with weights summing to 1 and a dominant weight
    // >= 1/2: |roll| <= amplitude, and over 64 s (>= 5 periods of the
    // dominant term) the peak reaches at least amplitude / 4
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto a = generate_attitude({1.0, seed}, TargetKind::Ship, 0, 64.0, 6400);
        const double peak = rad2deg(max_abs(a.roll));
        EXPECT_LE(peak, 2.0 + 1e-12) << "seed " << seed;
        EXPECT_GE(peak, 0.5) << "seed " << seed;
    }
}

TEST(Attitude, LinearInWaveHeight) {
    const auto a = generate_attitude({0.7, 5}, TargetKind::Ship, 0, 20.0, 300);
    const auto b = generate_attitude({1.4, 5}, TargetKind::Ship, 0, 20.0, 300);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(b.roll[i], 2.0 * a.roll[i], 1e-15);
        EXPECT_NEAR(b.pitch[i], 2.0 * a.pitch[i], 1e-15);
        EXPECT_NEAR(b.yaw[i], 2.0 * a.yaw[i], 1e-15);
    }
}

TEST(Attitude, ReflectorAmplitudeBound) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = generate_attitude({1.0, seed}, TargetKind::ReflectorArray, 3, 30.0, 3000);
        EXPECT_LE(rad2deg(max_abs(a.roll)), 6.0 + 1e-12);
        EXPECT_LE(rad2deg(max_abs(a.pitch)), 3.0 + 1e-12);
        EXPECT_LE(rad2deg(max_abs(a.yaw)), 1.5 + 1e-12);
    }
}

TEST(Attitude, InvalidInputsRejected) {
    EXPECT_THROW(generate_attitude({std::nan(""), 0}, TargetKind::Ship, 0, 1.0, 10), std::invalid_argument);
    EXPECT_THROW(generate_attitude({std::numeric_limits<double>::infinity(), 0}, TargetKind::Ship, 0, 1.0, 10),
                 std::invalid_argument);
    EXPECT_THROW(generate_attitude({-1.0, 0}, TargetKind::Ship, 0, 1.0, 10), std::invalid_argument);
    EXPECT_THROW(generate_attitude({1.0, 0}, TargetKind::Ship, 0, 1.0, 0), std::invalid_argument);
    EXPECT_THROW(generate_attitude({1.0, 0}, TargetKind::Ship, 0, 0.0, 10), std::invalid_argument);
    EXPECT_THROW(generate_attitude({50.0, 0}, TargetKind::ReflectorArray, 0, 1.0, 10), std::invalid_argument);
}

TEST(Projection, StaticSceneGivesZeroVelocityAndLosRange) {
    const auto ship = make_ship();
    const ObservationGeometry g{10'000.0, 30.0, 2.0};
    const auto s = project_scatterers(ship, g, zero_attitudes(1, 256), kCpi);
    ASSERT_EQ(s.size(), 8u);
    const auto u = g.line_of_sight();
    for (std::size_t k = 0; k < s.size(); ++k) {
        const auto& p = ship.units[0].points[k];
        EXPECT_NEAR(s[k].velocity, 0.0, 1e-20);
        EXPECT_NEAR(s[k].range, 10'000.0 - (u[0] * p[0] + u[1] * p[1] + u[2] * p[2]), 1e-9);
        EXPECT_EQ(s[k].sigma, 1.0);
    }
}

TEST(Projection, PitchRateGivesOpposedVelocities) {
    // constant pitch rate w about the transverse axis, points at +-x,
    // broadside: range = R0 - cos(el) * 0 - sin(el) * (-x sin(w t)), so the
    // radial velocity is sin(el) * x * w (first order in w t)
    const double w = 0.01, x = 50.0, el = deg2rad(2.0);
    const std::size_t n = 256;
    RigidUnit unit{{0, 0, 0}, {{x, 0, 0}, {-x, 0, 0}}, {1.0, 1.0}};
    const TargetModel t{TargetKind::Ship, {unit}};
    AttitudeSeries a{std::vector<double>(n, 0.0), std::vector<double>(n), std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) a.pitch[i] = w * kCpi * static_cast<double>(i) / n;
    const auto s = project_scatterers(t, {10'000.0, 90.0, 2.0}, {a}, kCpi);

    // finite-difference slope of the exact range series
    auto range_at = [&](double xx, double tt) { return 10'000.0 + std::sin(el) * xx * std::sin(w * tt); };
    const double dt = kCpi / n;
    double tm = 0, rm = 0;
    for (std::size_t i = 0; i < n; ++i) {
        tm += dt * i;
        rm += range_at(x, dt * i);
    }
    tm /= n;
    rm /= n;
    double stt = 0, str = 0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (dt * i - tm) * (dt * i - tm);
        str += (dt * i - tm) * (range_at(x, dt * i) - rm);
    }
    const double fd_slope = str / stt;
    const double analytic = std::sin(el) * x * w;

    EXPECT_NEAR(s[0].velocity, fd_slope, 1e-9 * std::abs(fd_slope));
    EXPECT_NEAR(s[0].velocity, analytic, 1e-6 * analytic);
    EXPECT_NEAR(s[1].velocity, -s[0].velocity, 1e-12 * analytic);
}

TEST(Projection, RigidShipIsCollinearInRangeVelocity) {
    const auto ship = make_ship();
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto a = generate_attitude({2.0, seed}, TargetKind::Ship, 0, kCpi, 256);
        for (double az : {10.0, 60.0, 120.0, 170.0}) {
            const auto s = project_scatterers(ship, {10'000.0, az, 2.0}, {a}, kCpi);
            EXPECT_LE(line_residual(s), 1e-9) << "seed " << seed << " az " << az;
        }
    }
}

TEST(Projection, ReflectorVelocitiesIndependentAcrossSeeds) {
    const auto arr = make_reflector_array();
    std::vector<double> v0, v1, v3;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        std::vector<AttitudeSeries> att;
        for (int u = 0; u < 4; ++u) att.push_back(generate_attitude({1.0, seed}, TargetKind::ReflectorArray, u, kCpi, 256));
        const auto s = project_scatterers(arr, {10'000.0, 60.0, 2.0}, att, kCpi);
        v0.push_back(s[0].velocity);
        v1.push_back(s[1].velocity);
        v3.push_back(s[3].velocity);
    }
    EXPECT_LT(std::abs(correlation(v0, v1)), 0.15);
    EXPECT_LT(std::abs(correlation(v0, v3)), 0.15);
}

TEST(Projection, Deterministic) {
    const auto arr = make_reflector_array();
    auto run = [&] {
        std::vector<AttitudeSeries> att;
        for (int u = 0; u < 4; ++u) att.push_back(generate_attitude({1.0, 7}, TargetKind::ReflectorArray, u, kCpi, 256));
        return project_scatterers(arr, {10'000.0, 45.0, 2.0}, att, kCpi);
    };
    const auto a = run(), b = run();
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].range, b[k].range);
        EXPECT_EQ(a[k].velocity, b[k].velocity);
    }
}

TEST(Projection, MismatchedSeriesRejected) {
    auto att = zero_attitudes(4, 256);
    att[2].yaw.resize(255);
    EXPECT_THROW(project_scatterers(make_reflector_array(), {1e4, 45.0, 2.0}, att, kCpi), std::invalid_argument);
    EXPECT_THROW(project_scatterers(make_reflector_array(), {1e4, 45.0, 2.0}, zero_attitudes(3, 256), kCpi),
                 std::invalid_argument);
}
