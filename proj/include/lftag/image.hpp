#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace lftag {

// Row-major 8-bit grayscale image.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
        if (w < 1 || h < 1) throw std::invalid_argument("image dimensions must be >= 1");
    }

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    const std::uint8_t* row(int y) const { return data.data() + static_cast<std::size_t>(y) * width; }
    std::uint8_t* row(int y) { return data.data() + static_cast<std::size_t>(y) * width; }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
    std::size_t size() const { return data.size(); }

    bool operator==(const GrayImage&) const = default;
};

// Binarization result. 1 = black, 0 = white.
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    BinaryImage() = default;
    BinaryImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
        if (w < 1 || h < 1) throw std::invalid_argument("image dimensions must be >= 1");
    }

    bool black(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x] != 0; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const BinaryImage&) const = default;
};

class ImageIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reads PGM (P5/P2) directly; anything else goes through the codec library.
// Color inputs are reduced to rec.601 luma.
GrayImage read_image(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const GrayImage& img);
void write_png(const std::filesystem::path& path, const GrayImage& img);

// Dispatches on extension: ".pgm" -> P5, everything else -> PNG.
void write_image(const std::filesystem::path& path, const GrayImage& img);

std::uint8_t rec601_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

}  // namespace lftag
