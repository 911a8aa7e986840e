#pragma once

// Serial, direct implementations of the parallel kernels. Slow; kept as
// test oracles and as the baseline in the kernel benchmarks.

#include "lftag/image.hpp"
#include "lftag/synthcam.hpp"

namespace lftag::reference {

// Explicit window sum per pixel.
BinaryImage adaptive_threshold(const GrayImage& img, int window = 16, int offset = 5);

// Explicit neighborhood scan per pixel.
BinaryImage dilate(const BinaryImage& mask, int radius);

// Dense kernel, full frame.
GrayImage apply_motion_blur(const GrayImage& img, double len_px, double angle_deg);

// Shades every pixel of the frame, then blurs the full frame.
GrayImage render(const RenderSpec& spec);

}  // namespace lftag::reference
