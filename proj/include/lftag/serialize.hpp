#pragma once

#include "lftag/detector.hpp"
#include "lftag/synthcam.hpp"

#include <json.hpp>

#include <string>

namespace lftag {

using Json = nlohmann::json;

// One detection in the public schema. Timing is attached only when given.
Json detection_to_json(const Detection& det, const StageTimings* timing = nullptr);
Json detections_to_json(const DetectionReport& report, bool with_timing);

Json timings_to_json(const StageTimings& t);
Json counters_to_json(const StageCounters& c);

// All keys written; on parse, missing keys take the family defaults and
// unknown keys are rejected (std::invalid_argument).
Json config_to_json(const DetectorConfig& cfg);
DetectorConfig config_from_json(const Json& j);

// Header: <x-column>,family,id,detected,decoded_ok (blur sweeps add blur_angle_deg).
std::string sweep_csv(const SweepResult& res);
Json sweep_summary_json(const SweepResult& res);

// Stable text form used for all file output: 2-space indent, trailing newline.
std::string dump(const Json& j);

}  // namespace lftag
