#include "lftag/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace lftag {

BinaryImage adaptive_threshold(const GrayImage& img, int window, int offset) {
    if (window < 2) throw std::invalid_argument("threshold window must be >= 2");
    const int w = img.width;
    const int h = img.height;
    const std::size_t stride = static_cast<std::size_t>(w) + 1;

    // sat[(y+1)*stride + (x+1)] = sum of img over [0..x] x [0..y], modulo 2^32.
    // Window sums stay below 2^32, so the wrapped differences are exact.
    std::vector<std::uint32_t> sat(stride * (h + 1));
    std::fill_n(sat.begin(), stride, 0u);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* src = img.row(y);
        std::uint32_t* dst = sat.data() + (y + 1) * stride;
        std::uint32_t acc = 0;
        dst[0] = 0;
        for (int x = 0; x < w; ++x) {
            acc += src[x];
            dst[x + 1] = acc;
        }
    }
    // Vertical pass in column blocks, keeping the inner loop row-contiguous.
    constexpr int kBlock = 512;
    const int blocks = (w + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(static)
    for (int b = 0; b < blocks; ++b) {
        const int xa = 1 + b * kBlock;
        const int xb = std::min(w, b * kBlock + kBlock);
        for (int y = 2; y <= h; ++y) {
            std::uint32_t* cur = sat.data() + y * stride;
            const std::uint32_t* prev = cur - stride;
            for (int x = xa; x <= xb; ++x) cur[x] += prev[x];
        }
    }

    const int lo = window / 2;
    const int hi = window - 1 - lo;
    BinaryImage out(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - lo);
        const int y1 = std::min(h - 1, y + hi) + 1;
        const int rows = y1 - y0;
        const std::uint32_t* top = sat.data() + y0 * stride;
        const std::uint32_t* bot = sat.data() + y1 * stride;
        const std::uint8_t* src = img.row(y);
        std::uint8_t* dst = out.data.data() + static_cast<std::size_t>(y) * w;
        const auto classify = [&](int x, int x0, int x1) {
            const std::uint32_t sum = bot[x1] - bot[x0] - top[x1] + top[x0];
            const std::int64_t count = static_cast<std::int64_t>(x1 - x0) * rows;
            dst[x] = (static_cast<std::int64_t>(src[x] + offset) * count < static_cast<std::int64_t>(sum)) ? 1 : 0;
        };
        // Full-width windows in the middle of the row, clipped ones at the ends.
        const int xa = std::min(w, lo);
        const int xb = std::max(xa, w - hi);
        for (int x = 0; x < xa; ++x) classify(x, 0, std::min(w - 1, x + hi) + 1);
        const std::int64_t full = static_cast<std::int64_t>(window) * rows;
        for (int x = xa; x < xb; ++x) {
            const std::uint32_t sum = bot[x + hi + 1] - bot[x - lo] - top[x + hi + 1] + top[x - lo];
            dst[x] = (static_cast<std::int64_t>(src[x] + offset) * full < static_cast<std::int64_t>(sum)) ? 1 : 0;
        }
        for (int x = xb; x < w; ++x) classify(x, std::max(0, x - lo), std::min(w - 1, x + hi) + 1);
    }
    return out;
}

BinaryImage dilate(const BinaryImage& mask, int radius) {
    if (radius < 0) throw std::invalid_argument("dilation radius must be >= 0");
    if (radius == 0) return mask;
    const int w = mask.width;
    const int h = mask.height;

    // Separable: the L-infinity ball is a product of two intervals.
    BinaryImage horiz(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* src = mask.data.data() + static_cast<std::size_t>(y) * w;
        std::uint8_t* dst = horiz.data.data() + static_cast<std::size_t>(y) * w;
        int count = 0;
        for (int x = 0; x < std::min(radius, w); ++x) count += src[x] != 0;
        for (int x = 0; x < w; ++x) {
            if (x + radius < w) count += src[x + radius] != 0;
            if (x - radius - 1 >= 0) count -= src[x - radius - 1] != 0;
            dst[x] = count > 0 ? 1 : 0;
        }
    }
    BinaryImage out(w, h);
#pragma omp parallel for schedule(static)
    for (int x = 0; x < w; ++x) {
        int count = 0;
        for (int y = 0; y < std::min(radius, h); ++y) count += horiz.at(x, y) != 0;
        for (int y = 0; y < h; ++y) {
            if (y + radius < h) count += horiz.at(x, y + radius) != 0;
            if (y - radius - 1 >= 0) count -= horiz.at(x, y - radius - 1) != 0;
            out.at(x, y) = count > 0 ? 1 : 0;
        }
    }
    return out;
}

std::vector<Run> dilate_runs(std::span<const Run> runs, int radius, int width, int height) {
    if (radius < 0) throw std::invalid_argument("dilation radius must be >= 0");
    if (runs.empty()) return {};
    int ymin = runs.front().y;
    int ymax = runs.front().y;
    for (const Run& r : runs) {
        ymin = std::min(ymin, r.y);
        ymax = std::max(ymax, r.y);
    }
    const int row0 = std::max(0, ymin - radius);
    const int row1 = std::min(height - 1, ymax + radius);
    std::vector<std::vector<Run>> rows(static_cast<std::size_t>(row1 - row0 + 1));
    for (const Run& r : runs) {
        const int x0 = std::max(0, r.x0 - radius);
        const int x1 = std::min(width, r.x1 + radius);
        for (int y = std::max(row0, r.y - radius); y <= std::min(row1, r.y + radius); ++y) {
            rows[static_cast<std::size_t>(y - row0)].push_back({y, x0, x1});
        }
    }
    std::vector<Run> out;
    for (auto& row : rows) {
        if (row.empty()) continue;
        std::sort(row.begin(), row.end(), [](const Run& a, const Run& b) { return a.x0 < b.x0; });
        Run cur = row.front();
        for (std::size_t i = 1; i < row.size(); ++i) {
            if (row[i].x0 <= cur.x1) {
                cur.x1 = std::max(cur.x1, row[i].x1);
            } else {
                out.push_back(cur);
                cur = row[i];
            }
        }
        out.push_back(cur);
    }
    return out;
}

std::optional<WeightedCentroid> weighted_centroid(const GrayImage& img, std::span<const Run> mask) {
    double m0 = 0.0;
    double mx = 0.0;
    double my = 0.0;
    for (const Run& r : mask) {
        const std::uint8_t* row = img.row(r.y);
        double row_w = 0.0;
        for (int x = r.x0; x < r.x1; ++x) {
            const double wgt = 255.0 - row[x];
            row_w += wgt;
            mx += wgt * x;
        }
        m0 += row_w;
        my += row_w * r.y;
    }
    if (m0 <= 0.0) return std::nullopt;
    return WeightedCentroid{Vec2(mx / m0, my / m0), m0};
}

Vec2 sobel_at(const GrayImage& img, int x, int y) {
    if (x < 1 || y < 1 || x >= img.width - 1 || y >= img.height - 1) return Vec2::Zero();
    const std::uint8_t* up = img.row(y - 1);
    const std::uint8_t* mid = img.row(y);
    const std::uint8_t* dn = img.row(y + 1);
    const int gx = (up[x + 1] + 2 * mid[x + 1] + dn[x + 1]) - (up[x - 1] + 2 * mid[x - 1] + dn[x - 1]);
    const int gy = (dn[x - 1] + 2 * dn[x] + dn[x + 1]) - (up[x - 1] + 2 * up[x] + up[x + 1]);
    return {static_cast<double>(gx), static_cast<double>(gy)};
}

Vec2 sobel_gradient(const GrayImage& img, double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return Vec2::Zero();
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    if (fx < -1.0 || fy < -1.0 || fx > img.width || fy > img.height) return Vec2::Zero();
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const double ax = x - fx;
    const double ay = y - fy;
    return (1 - ax) * (1 - ay) * sobel_at(img, x0, y0) + ax * (1 - ay) * sobel_at(img, x0 + 1, y0) +
           (1 - ax) * ay * sobel_at(img, x0, y0 + 1) + ax * ay * sobel_at(img, x0 + 1, y0 + 1);
}

double sobel_gradient_mag(const GrayImage& img, double x, double y) { return sobel_gradient(img, x, y).norm(); }

}  // namespace lftag
