#pragma once

#include "lftag/detector.hpp"
#include "lftag/image.hpp"

#include <filesystem>
#include <vector>

namespace lftag {

// Color overlay: key points K0..K3, region centroids, decoded id and the
// projected marker axes (x red, y green, z blue toward the camera).
// Throws ImageIoError when the file cannot be written.
void write_annotated(const std::filesystem::path& path, const GrayImage& img, const std::vector<Detection>& detections,
                     const CameraIntrinsics& intr);

}  // namespace lftag
