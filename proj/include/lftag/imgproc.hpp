#pragma once

#include "lftag/geometry.hpp"
#include "lftag/image.hpp"

#include <optional>
#include <span>
#include <vector>

namespace lftag {

// Horizontal pixel run [x0, x1) on row y.
struct Run {
    int y = 0;
    int x0 = 0;
    int x1 = 0;
    int length() const { return x1 - x0; }
    bool operator==(const Run&) const = default;
};

// Pixel is black iff intensity < local_mean - offset, where local_mean is the
// mean over an M x M window centered on the pixel and clipped to the image.
// Rows [-M/2, M - 1 - M/2] around the pixel, same for columns. Summed-area
// table, so cost does not depend on M.
BinaryImage adaptive_threshold(const GrayImage& img, int window = 16, int offset = 5);

// L-infinity (square) dilation by `radius` pixels.
BinaryImage dilate(const BinaryImage& mask, int radius);

// Dilates a run-length region mask, clipped to width x height. Output runs are
// sorted by (y, x0) and non-overlapping.
std::vector<Run> dilate_runs(std::span<const Run> runs, int radius, int width, int height);

struct WeightedCentroid {
    Vec2 centroid = Vec2::Zero();
    double zeroth_moment = 0.0;
};

// Moments of the inverted image (weight 255 - intensity) over the mask.
// Pixel centers are at integer coordinates. nullopt when the total weight is 0.
std::optional<WeightedCentroid> weighted_centroid(const GrayImage& img, std::span<const Run> mask);

// 3x3 Sobel response at an integer pixel; zero when the 3x3 support leaves
// the image.
Vec2 sobel_at(const GrayImage& img, int x, int y);

// Sobel gradient bilinearly interpolated from the four surrounding pixels.
Vec2 sobel_gradient(const GrayImage& img, double x, double y);
double sobel_gradient_mag(const GrayImage& img, double x, double y);

}  // namespace lftag
