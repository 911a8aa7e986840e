#pragma once

#include "lftag/detector.hpp"
#include "lftag/image.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lftag {

// Image files under dir (recursive), by extension, sorted by path.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

struct CorpusImageResult {
    std::string name;
    StageCounters counters;
    std::vector<Detection> detections;
};

struct CorpusReport {
    std::string family;
    std::vector<CorpusImageResult> images;  // input order
    StageCounters counters;                 // summed
    std::uint64_t detections = 0;
};

// Runs the detector over every image, in parallel, collecting in input order.
CorpusReport run_corpus(const Detector& detector, const std::vector<GrayImage>& images,
                        const std::vector<std::string>& names);

}  // namespace lftag
