#include "lftag/annotate.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <optional>
#include <string>

namespace lftag {
namespace {

cv::Point2d cvpt(const Vec2& p) { return {p.x(), p.y()}; }

// Fixed-point drawing for sub-pixel positions.
constexpr int kShift = 4;
cv::Point fx(const Vec2& p) { return {static_cast<int>(p.x() * (1 << kShift)), static_cast<int>(p.y() * (1 << kShift))}; }

std::optional<Vec2> project3(const Pose& pose, const CameraIntrinsics& intr, const Vec3& model) {
    const Vec3 c = pose.rotation * model + pose.translation;
    if (c.z() <= 0.0) return std::nullopt;
    return intr.to_pixel(Vec2(c.x() / c.z(), c.y() / c.z()));
}

}  // namespace

void write_annotated(const std::filesystem::path& path, const GrayImage& img, const std::vector<Detection>& detections,
                     const CameraIntrinsics& intr) {
    cv::Mat gray(img.height, img.width, CV_8UC1, const_cast<std::uint8_t*>(img.data.data()));
    cv::Mat canvas;
    cv::cvtColor(gray, canvas, cv::COLOR_GRAY2BGR);
    const double scale = std::max(1.0, std::min(img.width, img.height) / 480.0);
    const int thick = std::max(1, static_cast<int>(std::lround(scale)));

    for (const Detection& d : detections) {
        for (const Vec2& c : d.centroids) cv::drawMarker(canvas, cvpt(c), {0, 200, 255}, cv::MARKER_CROSS, 6 * thick, thick);

        const Vec2 keys[4] = {d.keypoints.k0, d.keypoints.k1, d.keypoints.k2, d.keypoints.k3};
        const cv::Scalar key_color[4] = {{0, 0, 255}, {0, 160, 0}, {255, 0, 0}, {255, 0, 255}};
        for (int i = 0; i < 4; ++i) {
            cv::circle(canvas, fx(keys[i]), (5 * thick) << kShift, key_color[i], thick, cv::LINE_AA, kShift);
            cv::putText(canvas, "K" + std::to_string(i), cvpt(keys[i]) + cv::Point2d(6 * thick, -6 * thick),
                        cv::FONT_HERSHEY_SIMPLEX, 0.4 * scale, key_color[i], thick, cv::LINE_AA);
        }

        const Vec3 origin(0.5, 0.5, 0.0);
        const auto o = project3(d.pose, intr, origin);
        const Vec3 axes[3] = {{0.5, 0.0, 0.0}, {0.0, 0.5, 0.0}, {0.0, 0.0, -0.5}};
        const cv::Scalar axis_color[3] = {{0, 0, 255}, {0, 255, 0}, {255, 0, 0}};
        if (o) {
            for (int i = 0; i < 3; ++i) {
                if (const auto e = project3(d.pose, intr, origin + axes[i])) {
                    cv::line(canvas, fx(*o), fx(*e), axis_color[i], 2 * thick, cv::LINE_AA, kShift);
                }
            }
            cv::putText(canvas, d.family.name() + " #" + std::to_string(d.id.value),
                        cvpt(*o) + cv::Point2d(8 * thick, 16 * thick), cv::FONT_HERSHEY_SIMPLEX, 0.5 * scale,
                        {0, 255, 255}, thick, cv::LINE_AA);
        }
    }

    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), canvas);
    } catch (const cv::Exception& e) {
        throw ImageIoError("cannot write " + path.string() + ": " + e.what());
    }
    if (!ok) throw ImageIoError("cannot write " + path.string());
}

}  // namespace lftag
