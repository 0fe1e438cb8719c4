#pragma once

// Minimal 8-bit PNG writer (grayscale or RGB) on top of zlib, plus a tiny
// raster canvas for line plots.

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rvdisc::png {

namespace detail {

inline void put_u32_be(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

inline void put_chunk(std::vector<unsigned char>& out, const char* type, const std::vector<unsigned char>& body) {
    put_u32_be(out, static_cast<std::uint32_t>(body.size()));
    const std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), body.begin(), body.end());
    const auto crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
    put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

/// `pixels` is row-major, `channels` bytes per pixel (1 = gray, 3 = RGB).
inline void write(const std::string& path, std::size_t width, std::size_t height, int channels,
                  const std::vector<unsigned char>& pixels) {
    if (channels != 1 && channels != 3) throw std::invalid_argument("png: channels must be 1 or 3");
    const auto stride = width * static_cast<std::size_t>(channels);
    if (pixels.size() != stride * height) throw std::invalid_argument("png: pixel buffer size mismatch");

    std::vector<unsigned char> raw;
    raw.reserve((stride + 1) * height);
    for (std::size_t y = 0; y < height; ++y) {
        raw.push_back(0);  // filter: none
        raw.insert(raw.end(), pixels.begin() + static_cast<long>(y * stride),
                   pixels.begin() + static_cast<long>((y + 1) * stride));
    }
    uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> z(zlen);
    if (compress2(z.data(), &zlen, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw std::runtime_error("png: deflate failed");
    z.resize(zlen);

    std::vector<unsigned char> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<unsigned char> ihdr;
    detail::put_u32_be(ihdr, static_cast<std::uint32_t>(width));
    detail::put_u32_be(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);                                        // bit depth
    ihdr.push_back(static_cast<unsigned char>(channels == 1 ? 0 : 2));  // colour type
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    detail::put_chunk(out, "IHDR", ihdr);
    detail::put_chunk(out, "IDAT", z);
    detail::put_chunk(out, "IEND", {});

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("png: cannot write " + path);
    os.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

using Rgb = std::array<unsigned char, 3>;

class Canvas {
public:
    Canvas(std::size_t width, std::size_t height, Rgb background = {255, 255, 255})
        : w_(width), h_(height), px_(width * height * 3) {
        for (std::size_t i = 0; i < w_ * h_; ++i) std::copy(background.begin(), background.end(), px_.begin() + 3 * i);
    }

    void set(long x, long y, Rgb c) {
        if (x < 0 || y < 0 || x >= static_cast<long>(w_) || y >= static_cast<long>(h_)) return;
        std::copy(c.begin(), c.end(), px_.begin() + 3 * (static_cast<std::size_t>(y) * w_ + static_cast<std::size_t>(x)));
    }

    void line(double x0, double y0, double x1, double y1, Rgb c, int thickness = 1) {
        const double len = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
        const int steps = std::max(1, static_cast<int>(std::ceil(len)));
        for (int i = 0; i <= steps; ++i) {
            const double t = static_cast<double>(i) / steps;
            const auto x = std::lround(x0 + t * (x1 - x0));
            const auto y = std::lround(y0 + t * (y1 - y0));
            for (int dx = -(thickness / 2); dx <= thickness / 2; ++dx)
                for (int dy = -(thickness / 2); dy <= thickness / 2; ++dy) set(x + dx, y + dy, c);
        }
    }

    void square(double cx, double cy, int half, Rgb c) {
        for (int dx = -half; dx <= half; ++dx)
            for (int dy = -half; dy <= half; ++dy) set(std::lround(cx) + dx, std::lround(cy) + dy, c);
    }

    void save(const std::string& path) const { write(path, w_, h_, 3, px_); }

private:
    std::size_t w_, h_;
    std::vector<unsigned char> px_;
};

}  // namespace rvdisc::png
