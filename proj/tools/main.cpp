// lftag command-line interface.
//
// Exit codes: 0 success, 1 I/O error, 2 usage or validation error.

#include "lftag/annotate.hpp"
#include "lftag/corpus.hpp"
#include "lftag/detector.hpp"
#include "lftag/image.hpp"
#include "lftag/marker.hpp"
#include "lftag/serialize.hpp"
#include "lftag/synthcam.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace lftag;

namespace {

constexpr int kOk = 0;
constexpr int kIoError = 1;
constexpr int kUsage = 2;

struct IoFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigFlags {
    std::string config_path;
    std::string family;
    std::string camera;  // fx,fy,cx,cy
    std::optional<double> tag_size_m;
};

void add_config_flags(CLI::App* app, ConfigFlags& f) {
    app->add_option("--config", f.config_path, "JSON detector config; flags override its values");
    app->add_option("--camera", f.camera, "Intrinsics fx,fy,cx,cy in pixels");
    app->add_option("--tag-size-m", f.tag_size_m, "Physical marker side length (m)");
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoFailure("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out || !(out << text)) throw IoFailure("cannot write " + p.string());
}

Json parse_camera(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw std::invalid_argument("--camera expects fx,fy,cx,cy");
        }
    }
    if (v.size() != 4) throw std::invalid_argument("--camera expects fx,fy,cx,cy");
    return Json{{"fx", v[0]}, {"fy", v[1]}, {"cx", v[2]}, {"cy", v[3]}};
}

// Config file first, flags on top; tau_3 follows the family unless the file sets it.
DetectorConfig build_config(const ConfigFlags& f, const std::string& family_override) {
    Json j = Json::object();
    if (!f.config_path.empty()) {
        try {
            j = Json::parse(read_text(f.config_path));
        } catch (const Json::parse_error& e) {
            throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    }
    if (!family_override.empty()) j["family"] = family_override;
    if (!f.camera.empty()) j["camera"] = parse_camera(f.camera);
    if (f.tag_size_m) j["tag_side_m"] = *f.tag_size_m;
    return config_from_json(j);
}

void print_timing(std::ostream& os, const StageTimings& t) {
    double sum = 0.0;
    char line[96];
    for (std::size_t i = 0; i < kStageCount; ++i) {
        std::snprintf(line, sizeof line, "%-14s %12.1f us\n", std::string(stage_name(static_cast<Stage>(i))).c_str(), t.us[i]);
        os << line;
        sum += t.us[i];
    }
    std::snprintf(line, sizeof line, "%-14s %12.1f us\n%-14s %12.1f us\n", "stages", sum, "total", t.total_us);
    os << line;
}

// --- generate ------------------------------------------------------------------

struct GenerateArgs {
    std::string family = "3x3";
    std::uint64_t id = 0;
    int side_px = 512;
    int margin_px = 0;
    std::string out;
};

int run_generate(const GenerateArgs& a) {
    const TagFamily fam = TagFamily::from_name(a.family);
    const MarkerLayout layout = encode(fam, TagId{a.id});
    if (a.margin_px < 0) throw std::invalid_argument("--margin-px must be >= 0");
    const GrayImage marker = rasterize(layout, a.side_px);
    GrayImage img(a.side_px + 2 * a.margin_px, a.side_px + 2 * a.margin_px, 255);
    for (int y = 0; y < a.side_px; ++y) {
        std::copy(marker.row(y), marker.row(y) + a.side_px, img.row(y + a.margin_px) + a.margin_px);
    }
    write_image(a.out, img);
    return kOk;
}

// --- detect --------------------------------------------------------------------

struct DetectArgs {
    std::string image;
    std::string family = "3x3";
    ConfigFlags cfg;
    bool json = false;
    bool timing = false;
    std::string annotate;
};

int run_detect(const DetectArgs& a, bool family_given) {
    const DetectorConfig cfg = build_config(a.cfg, family_given ? a.family : std::string());
    GrayImage img;
    try {
        img = read_image(a.image);
    } catch (const ImageIoError& e) {
        throw IoFailure(e.what());
    }
    const Detector det(cfg);
    const DetectionReport rep = det.detect(img);

    if (a.json) {
        std::cout << dump(detections_to_json(rep, a.timing));
    } else {
        for (const Detection& d : rep.detections) {
            const Vec3 t = d.translation_m();
            char line[160];
            std::snprintf(line, sizeof line, "%s id=%llu error=%.3g t=[%.4f %.4f %.4f] m\n", d.family.name().c_str(),
                          static_cast<unsigned long long>(d.id.value), d.error_metric, t.x(), t.y(), t.z());
            std::cout << line;
        }
        if (rep.detections.empty()) std::cout << "no detections\n";
    }
    if (a.timing) print_timing(std::cerr, rep.timing);
    if (!a.annotate.empty()) {
        try {
            write_annotated(a.annotate, img, rep.detections, cfg.camera_for(img.width, img.height));
        } catch (const ImageIoError& e) {
            throw IoFailure(e.what());
        }
    }
    return kOk;
}

// --- bench ---------------------------------------------------------------------

struct BenchArgs {
    std::string kind;
    std::vector<std::string> families;
    ConfigFlags cfg;
    int ids = 10;
    std::uint64_t seed = 1;
    bool no_refine = false;
    std::string corpus;
    std::string out_csv;
    std::string summary;
};

Json fp_bench(const BenchArgs& a, const std::vector<TagFamily>& fams, std::string& csv) {
    std::vector<fs::path> files;
    try {
        files = list_images(a.corpus);
    } catch (const ImageIoError& e) {
        throw IoFailure(e.what());
    }
    if (files.empty()) throw std::invalid_argument("corpus contains no images: " + a.corpus);

    std::vector<GrayImage> images(files.size());
    std::vector<std::string> names(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        try {
            images[i] = read_image(files[i]);
        } catch (const ImageIoError& e) {
            throw IoFailure(e.what());
        }
        names[i] = fs::relative(files[i], a.corpus).generic_string();
    }

    Json series = Json::array();
    std::ostringstream rows;
    rows << "file,family,topology,area,geometry,angle,collinearity,residual,detections\n";
    for (const TagFamily& fam : fams) {
        const Detector det(build_config(a.cfg, fam.name()));
        const CorpusReport rep = run_corpus(det, images, names);
        Json hits = Json::array();
        for (const auto& r : rep.images) {
            for (const auto& d : r.detections) {
                hits.push_back({{"file", r.name}, {"id", d.id.value}, {"error_metric", d.error_metric}});
            }
            const auto& c = r.counters;
            rows << r.name << ',' << rep.family << ',' << c.topology << ',' << c.area << ',' << c.geometry << ','
                 << c.angle << ',' << c.collinearity << ',' << c.residual << ',' << r.detections.size() << '\n';
        }
        series.push_back({{"family", rep.family},
                          {"images", rep.images.size()},
                          {"counters", counters_to_json(rep.counters)},
                          {"detections", rep.detections},
                          {"hits", hits}});
    }
    csv = rows.str();
    return Json{{"kind", "fp"}, {"series", series}};
}

int run_bench(const BenchArgs& a) {
    std::vector<TagFamily> fams;
    for (const auto& f : a.families) fams.push_back(TagFamily::from_name(f));
    if (fams.empty()) fams = {TagFamily::standard(3), TagFamily::standard(4)};
    if (a.ids < 1) throw std::invalid_argument("--ids must be >= 1");

    Json summary;
    std::string csv;
    if (a.kind == "fp") {
        if (a.corpus.empty()) throw std::invalid_argument("fp bench needs --corpus DIR");
        summary = fp_bench(a, fams, csv);
    } else {
        SweepOptions opt;
        opt.families = fams;
        opt.ids_per_family = a.ids;
        opt.seed = a.seed;
        opt.refine = !a.no_refine;
        SweepResult res;
        if (a.kind == "range") {
            res = sweep_range(opt);
        } else if (a.kind == "angle") {
            res = sweep_angle(opt);
        } else if (a.kind == "blur") {
            res = sweep_blur(opt);
        } else {
            throw std::invalid_argument("unknown bench kind: " + a.kind);
        }
        csv = sweep_csv(res);
        summary = sweep_summary_json(res);
    }
    if (!a.out_csv.empty()) write_text(a.out_csv, csv);
    if (!a.summary.empty()) write_text(a.summary, dump(summary));
    std::cout << dump(summary);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LFTag fiducial marker generator and detector"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Render a marker image");
    g->add_option("--family", gen.family, "Tag family, e.g. 3x3 or 4x4")->capture_default_str();
    g->add_option("--id", gen.id, "Marker id")->required();
    g->add_option("--side-px", gen.side_px, "Marker side in pixels")->capture_default_str();
    g->add_option("--margin-px", gen.margin_px, "White quiet zone around the marker")->capture_default_str();
    g->add_option("--out,-o", gen.out, "Output image (.png or .pgm)")->required();

    DetectArgs det;
    auto* d = app.add_subcommand("detect", "Detect markers in an image");
    d->add_option("image", det.image, "Input image")->required();
    auto* det_family = d->add_option("--family", det.family, "Tag family")->capture_default_str();
    add_config_flags(d, det.cfg);
    d->add_flag("--json", det.json, "JSON array on stdout");
    d->add_flag("--timing", det.timing, "Per-stage durations (stderr; also in JSON)");
    d->add_option("--annotate", det.annotate, "Write an overlay image");

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "Synthetic sweeps and false-positive corpus runs");
    b->add_option("kind", bench.kind, "range | blur | angle | fp")->required();
    b->add_option("--family", bench.families, "Tag family (repeatable; default 3x3 and 4x4)");
    add_config_flags(b, bench.cfg);
    b->add_option("--ids", bench.ids, "Random ids per family")->capture_default_str();
    b->add_option("--seed", bench.seed, "Seed for id and offset selection")->capture_default_str();
    b->add_flag("--no-refine", bench.no_refine, "Skip fine re-sampling before the first miss");
    b->add_option("--corpus", bench.corpus, "Directory of marker-free images (fp)");
    b->add_option("--out", bench.out_csv, "Per-record CSV output");
    b->add_option("--summary", bench.summary, "JSON summary output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*g) return run_generate(gen);
        if (*d) return run_detect(det, det_family->count() > 0);
        if (*b) return run_bench(bench);
    } catch (const IoFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const ImageIoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
