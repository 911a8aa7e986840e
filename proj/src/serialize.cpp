#include "lftag/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace lftag {
namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// Shortest round-trip decimal form.
std::string num(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string sweep_x_column(const std::string& kind) {
    if (kind == "range") return "distance";
    if (kind == "angle") return "tilt_deg";
    if (kind == "blur") return "blur_fraction";
    return "x";
}

}  // namespace

Json timings_to_json(const StageTimings& t) {
    Json j = Json::object();
    for (std::size_t i = 0; i < kStageCount; ++i) j[std::string(stage_name(static_cast<Stage>(i)))] = t.us[i];
    return j;
}

Json counters_to_json(const StageCounters& c) {
    return Json{{"topology", c.topology}, {"area", c.area},   {"geometry", c.geometry},
                {"angle", c.angle},       {"collinearity", c.collinearity}, {"residual", c.residual}};
}

Json detection_to_json(const Detection& det, const StageTimings* timing) {
    Json rot = Json::array();
    for (int r = 0; r < 3; ++r) rot.push_back({det.pose.rotation(r, 0), det.pose.rotation(r, 1), det.pose.rotation(r, 2)});
    const Vec3 t = det.translation_m();
    Json centroids = Json::array();
    for (const Vec2& c : det.centroids) centroids.push_back({c.x(), c.y()});

    Json j;
    j["family"] = det.family.name();
    j["id"] = det.id.value;
    j["error_metric"] = det.error_metric;
    j["pose"] = {{"rotation", rot}, {"translation_m", {t.x(), t.y(), t.z()}}};
    j["white_area_px"] = det.white_area;
    j["centroids_px"] = centroids;
    if (timing) j["timing_us"] = timings_to_json(*timing);
    return j;
}

Json detections_to_json(const DetectionReport& report, bool with_timing) {
    Json arr = Json::array();
    for (const Detection& d : report.detections) arr.push_back(detection_to_json(d, with_timing ? &report.timing : nullptr));
    return arr;
}

Json config_to_json(const DetectorConfig& cfg) {
    Json j;
    j["family"] = cfg.family.name();
    j["threshold_window"] = cfg.threshold_window;
    j["threshold_offset"] = cfg.threshold_offset;
    j["dilation"] = cfg.dilation;
    j["max_area_ratio"] = cfg.max_area_ratio;
    j["min_collinearity_residual"] = cfg.min_collinearity_residual;
    j["max_error_metric"] = cfg.max_error_metric;
    if (cfg.camera) {
        j["camera"] = {{"fx", cfg.camera->fx}, {"fy", cfg.camera->fy}, {"cx", cfg.camera->cx}, {"cy", cfg.camera->cy}};
    } else {
        j["camera"] = nullptr;
    }
    j["tag_side_m"] = cfg.tag_side_m;
    return j;
}

DetectorConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    static const char* const known[] = {"family",          "threshold_window",          "threshold_offset",
                                        "dilation",        "max_area_ratio",            "min_collinearity_residual",
                                        "max_error_metric", "camera",                   "tag_side_m"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw std::invalid_argument("unknown config key: " + key);
        }
    }
    try {
        const TagFamily fam = j.contains("family") ? TagFamily::from_name(j.at("family").get<std::string>())
                                                   : TagFamily::standard(3);
        DetectorConfig c = DetectorConfig::defaults(fam);
        if (j.contains("threshold_window")) c.threshold_window = j.at("threshold_window").get<int>();
        if (j.contains("threshold_offset")) c.threshold_offset = j.at("threshold_offset").get<int>();
        if (j.contains("dilation")) c.dilation = j.at("dilation").get<int>();
        if (j.contains("max_area_ratio")) c.max_area_ratio = j.at("max_area_ratio").get<double>();
        if (j.contains("min_collinearity_residual")) {
            c.min_collinearity_residual = j.at("min_collinearity_residual").get<double>();
        }
        if (j.contains("max_error_metric")) c.max_error_metric = j.at("max_error_metric").get<double>();
        if (j.contains("camera") && !j.at("camera").is_null()) {
            const Json& cam = j.at("camera");
            c.camera = CameraIntrinsics{cam.at("fx").get<double>(), cam.at("fy").get<double>(),
                                        cam.at("cx").get<double>(), cam.at("cy").get<double>()};
        }
        if (j.contains("tag_side_m")) c.tag_side_m = j.at("tag_side_m").get<double>();
        c.validate();
        return c;
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("malformed config: ") + e.what());
    }
}

std::string sweep_csv(const SweepResult& res) {
    std::ostringstream os;
    const bool blur = res.kind == "blur";
    if (blur) os << "blur_angle_deg,";
    os << sweep_x_column(res.kind) << ",family,id,detected,decoded_ok\n";
    for (const SweepRecord& r : res.records) {
        if (blur) os << num(r.angle) << ',';
        os << num(r.x) << ',' << r.family << ',' << r.id << ',' << int(r.detected) << ',' << int(r.decoded_ok) << '\n';
    }
    return os.str();
}

Json sweep_summary_json(const SweepResult& res) {
    Json series = Json::array();
    for (const FamilySweep& s : res.series) {
        Json pts = Json::array();
        for (const SweepPoint& p : s.points) {
            pts.push_back({{"x", p.x}, {"total", p.total}, {"detected", p.detected}, {"decoded_ok", p.decoded_ok}});
        }
        Json e{{"family", s.family},
               {"first_miss", optional_number(s.first_miss)},
               {"miss20", optional_number(s.miss20)},
               {"points", pts}};
        if (res.kind == "blur") e["blur_angle_deg"] = s.angle;
        series.push_back(e);
    }
    return Json{{"kind", res.kind}, {"x", sweep_x_column(res.kind)}, {"series", series}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace lftag
