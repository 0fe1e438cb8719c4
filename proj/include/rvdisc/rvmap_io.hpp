#pragma once

// RV map export: CSV with axis headers, a compact binary form, and a
// grayscale PNG in dB.
//
// CSV: first line "velocity_mps\range_m,<r_0>,...,<r_{cols-1}>", then one
// line per velocity row "<v_i>,<|a_i0|>,...".
//
// Binary, little endian:
//   char[8] magic "RVDMAP\0\1"
//   u64 rows, u64 cols, f64 range_resolution, f64 velocity_resolution,
//   i32 label (-1 when unlabelled)
//   f64 velocity_axis[rows], f64 range_axis[cols], f32 data[rows*cols]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rvdisc/echo.hpp"
#include "rvdisc/png.hpp"
#include "rvdisc/rvmap.hpp"

namespace rvdisc {

inline void write_rvmap_csv(const RVMap& map, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    char buf[64];
    os << "velocity_mps\\range_m";
    for (double r : map.range_axis) {
        std::snprintf(buf, sizeof buf, ",%.6f", r);
        os << buf;
    }
    os << '\n';
    for (std::size_t i = 0; i < map.rows; ++i) {
        std::snprintf(buf, sizeof buf, "%.9g", map.velocity_axis[i]);
        os << buf;
        for (std::size_t j = 0; j < map.cols; ++j) {
            std::snprintf(buf, sizeof buf, ",%.9g", map.at(i, j));
            os << buf;
        }
        os << '\n';
    }
}

inline constexpr char kMapMagic[8] = {'R', 'V', 'D', 'M', 'A', 'P', 0, 1};

inline void write_rvmap_binary(const RVMap& map, const std::string& path) {
    using detail::put_le;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os.write(kMapMagic, 8);
    put_le<std::uint64_t>(os, map.rows);
    put_le<std::uint64_t>(os, map.cols);
    put_le<double>(os, map.range_resolution);
    put_le<double>(os, map.velocity_resolution);
    put_le<std::int32_t>(os, map.label.value_or(-1));
    for (double v : map.velocity_axis) put_le<double>(os, v);
    for (double r : map.range_axis) put_le<double>(os, r);
    for (double a : map.data) put_le<float>(os, static_cast<float>(a));
}

inline RVMap read_rvmap_binary(const std::string& path) {
    using detail::get_le;
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    char magic[8];
    if (!is.read(magic, 8) || !std::equal(magic, magic + 8, kMapMagic)) throw std::runtime_error(path + ": bad magic");
    RVMap m;
    m.rows = get_le<std::uint64_t>(is);
    m.cols = get_le<std::uint64_t>(is);
    m.range_resolution = get_le<double>(is);
    m.velocity_resolution = get_le<double>(is);
    const auto label = get_le<std::int32_t>(is);
    if (label >= 0) m.label = label;
    m.velocity_axis.resize(m.rows);
    m.range_axis.resize(m.cols);
    for (auto& v : m.velocity_axis) v = get_le<double>(is);
    for (auto& r : m.range_axis) r = get_le<double>(is);
    m.data.resize(m.rows * m.cols);
    for (auto& a : m.data) a = get_le<float>(is);
    return m;
}

/// Grayscale image, range along x, velocity along y (largest velocity on
/// top), `dynamic_range_db` below the peak mapped to black.
inline void write_rvmap_png(const RVMap& map, const std::string& path, double dynamic_range_db = 40.0,
                            int scale = 2) {
    if (map.data.empty()) throw std::invalid_argument("write_rvmap_png: empty map");
    const double peak = *std::max_element(map.data.begin(), map.data.end());
    const auto s = static_cast<std::size_t>(std::max(1, scale));
    const std::size_t w = map.cols, h = map.rows * s;
    std::vector<unsigned char> px(w * h);
    for (std::size_t i = 0; i < map.rows; ++i) {
        for (std::size_t j = 0; j < map.cols; ++j) {
            const double a = map.at(i, j);
            const double db = (a > 0.0 && peak > 0.0) ? 20.0 * std::log10(a / peak) : -dynamic_range_db;
            const double t = std::clamp(1.0 + db / dynamic_range_db, 0.0, 1.0);
            const auto g = static_cast<unsigned char>(std::lround(255.0 * t));
            for (std::size_t k = 0; k < s; ++k) px[((map.rows - 1 - i) * s + k) * w + j] = g;
        }
    }
    png::write(path, w, h, 1, px);
}

}  // namespace rvdisc
