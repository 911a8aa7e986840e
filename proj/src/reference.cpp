#include "lftag/reference.hpp"

#include "render_detail.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace lftag::reference {

BinaryImage adaptive_threshold(const GrayImage& img, int window, int offset) {
    BinaryImage out(img.width, img.height);
    const int lo = -window / 2;
    const int hi = window - 1 - window / 2;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            long sum = 0;
            long count = 0;
            for (int yy = std::max(0, y + lo); yy <= std::min(img.height - 1, y + hi); ++yy) {
                for (int xx = std::max(0, x + lo); xx <= std::min(img.width - 1, x + hi); ++xx) {
                    sum += img.at(xx, yy);
                    ++count;
                }
            }
            // I < sum / count - C, cleared of the division
            out.at(x, y) = img.at(x, y) * count - sum < -offset * count ? 1 : 0;
        }
    }
    return out;
}

BinaryImage dilate(const BinaryImage& mask, int radius) {
    BinaryImage out(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            bool hit = false;
            for (int dy = -radius; dy <= radius && !hit; ++dy) {
                for (int dx = -radius; dx <= radius && !hit; ++dx) {
                    const int xx = x + dx;
                    const int yy = y + dy;
                    hit = xx >= 0 && yy >= 0 && xx < mask.width && yy < mask.height && mask.black(xx, yy);
                }
            }
            out.at(x, y) = hit ? 1 : 0;
        }
    }
    return out;
}

GrayImage apply_motion_blur(const GrayImage& img, double len_px, double angle_deg) {
    if (len_px < 0.0) throw std::invalid_argument("blur length must be >= 0");
    if (len_px == 0.0) return img;
    const auto taps = motion_blur_kernel(len_px, angle_deg);
    int reach = 0;
    for (const auto& t : taps) reach = std::max({reach, std::abs(t.dx), std::abs(t.dy)});
    const int side = 2 * reach + 1;
    std::vector<double> dense(static_cast<std::size_t>(side) * side, 0.0);
    for (const auto& t : taps) dense[static_cast<std::size_t>(t.dy + reach) * side + (t.dx + reach)] += t.weight;

    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int ky = 0; ky < side; ++ky) {
                for (int kx = 0; kx < side; ++kx) {
                    const double w = dense[static_cast<std::size_t>(ky) * side + kx];
                    if (w == 0.0) continue;
                    const int sx = std::clamp(x - (kx - reach), 0, img.width - 1);
                    const int sy = std::clamp(y - (ky - reach), 0, img.height - 1);
                    acc += w * img.at(sx, sy);
                }
            }
            out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
        }
    }
    return out;
}

GrayImage render(const RenderSpec& spec) {
    spec.validate();
    const detail::MarkerShader shader(spec);
    GrayImage img(spec.width, spec.height);
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) img.at(x, y) = shader.shade(x, y);
    }
    img = reference::apply_motion_blur(img, spec.blur_len_px, spec.blur_angle_deg);
    if (spec.noise_sigma > 0.0) {
        std::mt19937_64 rng(spec.noise_seed);
        std::normal_distribution<double> dist(0.0, spec.noise_sigma);
        for (auto& px : img.data) px = static_cast<std::uint8_t>(std::clamp(std::lround(px + dist(rng)), 0L, 255L));
    }
    return img;
}

}  // namespace lftag::reference
