#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rvdisc/config.hpp"
#include "rvdisc/features.hpp"
#include "rvdisc/harness.hpp"

using namespace rvdisc;

namespace {

RVMap blank(std::size_t rows, std::size_t cols) {
    RVMap m;
    m.rows = rows;
    m.cols = cols;
    m.data.assign(rows * cols, 0.0);
    m.range_resolution = 0.5;
    m.velocity_resolution = 0.25;
    for (std::size_t c = 0; c < cols; ++c) m.range_axis.push_back(100.0 + 0.5 * c);
    for (std::size_t r = 0; r < rows; ++r) m.velocity_axis.push_back(-1.0 + 0.25 * r);
    return m;
}

std::vector<ScatterPoint> pts(std::initializer_list<std::pair<double, double>> rv) {
    std::vector<ScatterPoint> out;
    for (auto [r, v] : rv) out.push_back({r, v, 1.0 / rv.size()});
    return out;
}

}  // namespace

TEST(Extract, SingleCellGivesOnePointOfUnitWeight) {
    auto m = blank(9, 12);
    m.at(4, 7) = 3.0;
    const auto p = extract_scatter_points(m);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0].w, 1.0);
    EXPECT_DOUBLE_EQ(p[0].r, (100.0 + 3.5) / 0.5);
    EXPECT_DOUBLE_EQ(p[0].v, 0.0);
}

TEST(Extract, TwoEqualPeaksShareWeight) {
    auto m = blank(9, 12);
    m.at(1, 1) = 2.0;
    m.at(6, 9) = 2.0;
    const auto p = extract_scatter_points(m);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0].w, 0.5);
    EXPECT_EQ(p[1].w, 0.5);
}

TEST(Extract, ThresholdCapAndPlateaus) {
    auto m = blank(9, 20);
    m.at(2, 2) = 1.0;
    m.at(2, 6) = 0.5;    // -6 dB
    m.at(2, 10) = 0.05;  // -26 dB
    m.at(6, 14) = 0.8;
    m.at(6, 15) = 0.8;  // plateau: neither cell is a strict maximum
    EXPECT_EQ(extract_scatter_points(m, -12.0).size(), 2u);
    EXPECT_EQ(extract_scatter_points(m, -30.0).size(), 3u);
    EXPECT_EQ(extract_scatter_points(m, -30.0, 1).size(), 1u);
    EXPECT_THROW(extract_scatter_points(m, 0.0), std::invalid_argument);
    EXPECT_THROW(extract_scatter_points(m, -10.0, 0), std::invalid_argument);
    EXPECT_TRUE(extract_scatter_points(blank(5, 5)).empty());
}

TEST(Extract, PowerWeights) {
    auto m = blank(9, 12);
    m.at(1, 1) = 1.0;
    m.at(6, 9) = 0.5;
    const auto p = extract_scatter_points(m, -12.0, 50, WeightMode::Power);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_DOUBLE_EQ(p[0].w, 0.8);
    EXPECT_DOUBLE_EQ(p[1].w, 0.2);
}

TEST(Mwr, HandCases) {
    EXPECT_EQ(compute_mwr(pts({{0, 0}, {1, 1}, {2, 2}})), 0.0);
    EXPECT_NEAR(compute_mwr(pts({{0, 0}, {1, 0}, {2, 1}})), 1.0 / 54.0, 1e-12);
    EXPECT_EQ(compute_mwr(pts({{3, 4}})), 0.0);
    EXPECT_EQ(compute_mwr(pts({{3, 4}, {5, 1}})), 0.0);
    EXPECT_THROW(compute_mwr({}), std::invalid_argument);
}

TEST(Mwr, CollinearIgnoresWeights) {
    std::vector<ScatterPoint> p = {{0, 1, 0.7}, {2, 2, 0.2}, {4, 3, 0.1}};
    EXPECT_NEAR(compute_mwr(p), 0.0, 1e-15);
}

TEST(Mwr, DegenerateRangeUsesWeightedMeanVelocity) {
    std::vector<ScatterPoint> p = {{5, 0, 0.5}, {5, 2, 0.25}, {5, 4, 0.25}};
    // weighted mean 1.5; sum w (v - 1.5)^2 = 0.5*2.25 + 0.25*0.25 + 0.25*6.25 = 2.75
    EXPECT_NEAR(compute_mwr(p), 2.75 / 3.0, 1e-15);
}

TEST(Mwr, PermutationInvariant) {
    std::vector<ScatterPoint> p = {{0, 0.3, 0.1}, {1, -0.2, 0.3}, {2.5, 1.1, 0.2}, {4, 0.4, 0.25}, {7, 2.0, 0.15}};
    const double base = compute_mwr(p);
    EXPECT_GT(base, 0.0);
    std::sort(p.begin(), p.end(), [](auto& a, auto& b) { return a.v < b.v; });
    EXPECT_NEAR(compute_mwr(p), base, 1e-15);
    std::reverse(p.begin(), p.end());
    EXPECT_NEAR(compute_mwr(p), base, 1e-15);
}

TEST(Mwr, WeightedFitVariant) {
    std::vector<ScatterPoint> p = {{0, 0, 0.8}, {1, 0, 0.1}, {2, 1, 0.1}};
    EXPECT_NE(compute_mwr(p, true), compute_mwr(p, false));
    EXPECT_NEAR(compute_mwr(pts({{0, 0}, {1, 1}, {2, 2}}), true), 0.0, 1e-15);
}

TEST(Spreads, HandCases) {
    const auto s = compute_spreads(pts({{0, 5}, {2, 5}}));
    EXPECT_EQ(s.sigma_r, 1.0);
    EXPECT_EQ(s.sigma_v, 0.0);
    const auto z = compute_spreads(pts({{3, 3}, {3, 3}, {3, 3}}));
    EXPECT_EQ(z.sigma_r, 0.0);
    EXPECT_EQ(z.sigma_v, 0.0);
    EXPECT_THROW(compute_spreads({}), std::invalid_argument);
}

TEST(Spreads, ShiftInvariant) {
    auto p = pts({{0, 1}, {3, -2}, {4, 0.5}, {9, 2}});
    const auto a = compute_spreads(p);
    for (auto& q : p) {
        q.r += 1234.0;
        q.v -= 17.0;
    }
    const auto b = compute_spreads(p);
    EXPECT_NEAR(a.sigma_r, b.sigma_r, 1e-9);
    EXPECT_NEAR(a.sigma_v, b.sigma_v, 1e-12);
}

TEST(Ccf, HandCases) {
    EXPECT_EQ(compute_ccf(1.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(compute_ccf(1.0, 0.0), 1.0 / (1.0 + 1e-6));
    EXPECT_DOUBLE_EQ(compute_ccf(3.0, 1.0), 2.0 / (4.0 + 1e-6));
    EXPECT_EQ(std::round(compute_ccf(3.0, 1.0) * 1e7), 4999999.0);
    EXPECT_EQ(compute_ccf(0.0, 0.0), 0.0);
    EXPECT_THROW(compute_ccf(-1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(compute_ccf(1.0, std::nan("")), std::invalid_argument);
}

TEST(Ccf, SymmetricAndNearlyScaleFree) {
    for (double a : {0.1, 1.0, 7.5})
        for (double b : {0.0, 0.3, 2.0}) {
            EXPECT_EQ(compute_ccf(a, b), compute_ccf(b, a));
            for (double k : {0.5, 3.0, 100.0}) EXPECT_NEAR(compute_ccf(k * a, k * b), compute_ccf(a, b), 1e-5);
            EXPECT_GE(compute_ccf(a, b), 0.0);
            EXPECT_LE(compute_ccf(a, b), 1.0);
        }
}

TEST(Featurize, SinglePeakIsAllZero) {
    auto m = blank(9, 12);
    m.at(4, 4) = 1.0;
    m.label = 1;
    const auto f = featurize(m);
    EXPECT_EQ(f.values(), (std::vector<double>{0, 0, 0, 0}));
    EXPECT_FALSE(f.degenerate);
    EXPECT_EQ(f.label, 1);
}

TEST(Featurize, EmptyExtractionIsFlagged) {
    auto m = blank(5, 5);
    m.label = 0;
    const auto f = featurize(m);
    EXPECT_TRUE(f.degenerate);
    EXPECT_EQ(f.values(), (std::vector<double>{0, 0, 0, 0}));
}

TEST(Featurize, ExtraColumnsCopied) {
    auto m = blank(9, 12);
    m.at(4, 4) = 1.0;
    FeatureConfig cfg;
    cfg.extra = {0.25, -3.0};
    const auto f = featurize(m, cfg);
    EXPECT_EQ(f.values(), (std::vector<double>{0, 0, 0, 0, 0.25, -3.0}));
}

TEST(Featurize, SimulatedShipMaps) {
    PipelineConfig cfg;
    // noiseless rigid ship: the extracted centres lie on a line
    PipelineConfig clean = cfg;
    clean.radar.scr_db = std::numeric_limits<double>::infinity();
    for (double az : {30.0, 60.0, 150.0}) {
        const auto sm = simulate_map(clean, {1.0, az, TargetKind::Ship, 0}, 2.0, 7);
        EXPECT_LE(sm.features.mwr, 0.05) << az;
        EXPECT_EQ(sm.features.label, 1);
        const auto again = featurize(sm.map, clean.features);
        EXPECT_EQ(again.values(), sm.features.values());
    }

    // SCR 20 dB: the eight hull scatterers are recovered, each within one
    // resolution cell of its injected (R, v)
    for (double az : {20.0, 50.0, 130.0}) {
        const auto sm = simulate_map(cfg, {1.0, az, TargetKind::Ship, 1}, 2.0, 11);
        const auto found = extract_scatter_points(sm.map, cfg.features.threshold_db, cfg.features.max_points);
        EXPECT_GE(found.size(), 6u) << az;
        EXPECT_LE(found.size(), 12u) << az;
        std::size_t matched = 0;
        for (const auto& s : sm.scatterers) {
            const double r = s.range / sm.map.range_resolution, v = s.velocity / sm.map.velocity_resolution;
            matched += std::any_of(found.begin(), found.end(), [&](const ScatterPoint& p) {
                return std::abs(p.r - r) <= 1.0 && std::abs(p.v - v) <= 1.0;
            });
        }
        EXPECT_GE(matched, 6u) << az;
    }
}
