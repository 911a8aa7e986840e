#pragma once

#include "lftag/marker.hpp"
#include "lftag/synthcam.hpp"

#include <cstdint>

namespace lftag::detail {

// Per-pixel shading of a projected marker, shared by the parallel renderer
// and the serial reference.
class MarkerShader {
public:
    explicit MarkerShader(const RenderSpec& spec);

    std::uint8_t shade(int x, int y) const;
    // Projected marker bounding box, pixel-inclusive and clipped to the image.
    // Empty (x0 > x1) when the marker is fully outside.
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;

private:
    MarkerLayout layout_;
    Mat3 pixel_to_marker_;
    int samples_;
    std::uint8_t background_;
};

}  // namespace lftag::detail
