#include "lftag/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace lftag {

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ImageIoError("not a directory: " + dir.string());
    static const char* const exts[] = {".png", ".pgm", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".ppm"};
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (std::find(std::begin(exts), std::end(exts), ext) != std::end(exts)) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

CorpusReport run_corpus(const Detector& detector, const std::vector<GrayImage>& images,
                        const std::vector<std::string>& names) {
    if (names.size() != images.size()) throw std::invalid_argument("one name per image required");
    CorpusReport rep;
    rep.family = detector.config().family.name();
    rep.images.resize(images.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < images.size(); ++i) {
        DetectionReport r = detector.detect(images[i]);
        rep.images[i] = {names[i], r.counters, std::move(r.detections)};
    }
    for (const auto& r : rep.images) {
        rep.counters += r.counters;
        rep.detections += r.detections.size();
    }
    return rep;
}

}  // namespace lftag
