// Acceptance run: one PASS/FAIL line per criterion.
//
// Usage: lftag_acceptance [--known-failure N]...
// Exit status is 0 when every criterion passes except those listed as known
// failures. Known failures are still evaluated and printed.

#include "cca_oracle.hpp"
#include "lftag/corpus.hpp"
#include "lftag/detector.hpp"
#include "lftag/marker.hpp"
#include "lftag/pose.hpp"
#include "lftag/synthcam.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace lftag;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

std::string fmt(double v, int prec = 3) {
    std::ostringstream os;
    os.precision(prec);
    os << std::fixed << v;
    return os.str();
}

std::string opt_str(const std::optional<double>& v, int prec = 3) { return v ? fmt(*v, prec) : "none"; }

GrayImage from_mat(const cv::Mat& m) {
    CV_Assert(m.type() == CV_8UC1 && m.isContinuous());
    GrayImage g(m.cols, m.rows);
    std::memcpy(g.data.data(), m.data, g.data.size());
    return g;
}

std::vector<cv::Mat> natural_images() {
    std::vector<cv::Mat> out;
    for (const auto& p : list_images(fs::path(LFTAG_TEST_DATA) / "natural")) {
        cv::Mat m = cv::imread(p.string(), cv::IMREAD_GRAYSCALE);
        if (!m.empty()) out.push_back(m);
    }
    return out;
}

// --- 1 -----------------------------------------------------------------------

Outcome dictionary_sizes() {
    const auto s3 = dictionary_size(TagFamily::standard(3));
    const auto s4 = dictionary_size(TagFamily::standard(4));
    return {s3 == 16384u && s4 == 268435456u, "3x3 " + std::to_string(s3) + ", 4x4 " + std::to_string(s4)};
}

// --- 2 -----------------------------------------------------------------------

Outcome round_trip() {
    std::string detail;
    bool ok = true;
    for (int n : {3, 4}) {
        const TagFamily fam = TagFamily::standard(n);
        const Detector det(DetectorConfig::defaults(fam));
        std::mt19937_64 rng(2024 + n);
        std::uniform_int_distribution<std::uint64_t> pick(0, dictionary_size(fam) - 1);
        std::vector<TagId> ids(200);
        for (auto& id : ids) id = TagId{pick(rng)};
        int good = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : good)
        for (int i = 0; i < 200; ++i) {
            const auto rep = det.detect(rasterize(encode(fam, ids[i]), 512));
            if (rep.detections.size() == 1 && rep.detections[0].id == ids[i]) ++good;
        }
        ok = ok && good == 200;
        detail += fam.name() + " " + std::to_string(good) + "/200 ";
    }
    return {ok, detail};
}

// --- 3 -----------------------------------------------------------------------

Outcome cca_oracle() {
    const auto corpus = test::oracle_corpus();
    int bad = 0;
    for (const auto& b : corpus) bad += test::oracle_mismatch(b).empty() ? 0 : 1;
    return {bad == 0, std::to_string(corpus.size() - bad) + "/" + std::to_string(corpus.size()) + " images match"};
}

// --- 4 -----------------------------------------------------------------------

Outcome pnp_accuracy() {
    const CameraIntrinsics intr{320.0, 320.0, 319.5, 239.5};
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_rot = 0.0, worst_t = 0.0;
    int solved = 0, total = 0;
    for (int n : {3, 4}) {
        const TagFamily fam = TagFamily::standard(n);
        std::vector<Vec2> grid;
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) grid.push_back(fam.cell_center(r, c));
        }
        const auto key_arr = keypoint_model(fam, 3, 2);
        const std::vector<Vec2> keys(key_arr.begin(), key_arr.end());
        for (int i = 0; i < 500; ++i) {
            RenderSpec s;
            s.family = fam;
            s.distance_m = 1.0 + 19.0 * u(rng);
            s.tilt_deg = 70.0 * u(rng);
            s.inplane_deg = 360.0 * u(rng);
            s.subpixel_offset = Vec2(200.0 * u(rng) - 100.0, 140.0 * u(rng) - 70.0);
            const Pose truth = render_pose(s);
            for (const std::vector<Vec2>* model : std::array<const std::vector<Vec2>*, 2>{&grid, &keys}) {
                std::vector<Vec2> image;
                for (const Vec2& m : *model) image.push_back(*project(truth, intr, m));
                ++total;
                const auto cands = solve_planar_pnp(*model, image, intr);
                if (!cands) continue;
                ++solved;
                const Pose& p = (*cands)[0].pose;
                worst_rot = std::max(worst_rot, rotation_difference_deg(p.rotation, truth.rotation));
                worst_t = std::max(worst_t, (p.translation - truth.translation).norm() / truth.translation.norm());
            }
        }
    }
    return {solved == total && worst_rot < 0.5 && worst_t < 0.005,
            std::to_string(solved) + "/" + std::to_string(total) + " solved, max rotation error " +
                fmt(worst_rot, 6) + " deg, max translation error " + fmt(100.0 * worst_t, 6) + "%"};
}

// --- 5 -----------------------------------------------------------------------

const FamilySweep& series_of(const SweepResult& r, const std::string& fam, double angle = 0.0) {
    for (const auto& s : r.series) {
        if (s.family == fam && s.angle == angle) return s;
    }
    throw std::runtime_error("missing series " + fam);
}

Outcome range_ratio(std::string& soft) {
    const SweepResult r = sweep_range(SweepOptions{});
    const auto f3 = series_of(r, "3x3").first_miss;
    const auto f4 = series_of(r, "4x4").first_miss;
    if (!f3 || !f4) return {false, "no miss within the grid (3x3 " + opt_str(f3) + ", 4x4 " + opt_str(f4) + ")"};
    const double ratio = *f3 / *f4;
    const double ref3 = 27.8, ref4 = 21.7;
    const double d3 = (*f3 - ref3) / ref3, d4 = (*f4 - ref4) / ref4;
    const bool soft_ok = std::abs(d3) <= 0.25 && std::abs(d4) <= 0.25;
    soft = std::string(soft_ok ? "met" : "not met") + ": 3x3 " + fmt(100.0 * d3, 1) + "%, 4x4 " + fmt(100.0 * d4, 1) +
           "% against " + fmt(ref3, 1) + " m / " + fmt(ref4, 1) + " m";
    return {*f3 > *f4 && std::abs(ratio - 1.28) <= 0.15,
            "first miss 3x3 " + fmt(*f3, 2) + " m, 4x4 " + fmt(*f4, 2) + " m, ratio " + fmt(ratio)};
}

// --- 6 -----------------------------------------------------------------------

Outcome grazing_angle() {
    SweepOptions opt;
    opt.families = {TagFamily::standard(3)};
    const SweepResult r = sweep_angle(opt);
    const auto& s = series_of(r, "3x3");
    const SweepPoint* at60 = nullptr;
    for (const auto& p : s.points) {
        if (std::abs(p.x - 60.0) < 1e-9) at60 = &p;
    }
    const bool full60 = at60 && at60->decoded_ok == at60->total && at60->total == 10;
    const double fm = s.first_miss.value_or(90.0);
    return {full60 && fm >= 70.0, "3x3 first miss " + opt_str(s.first_miss, 1) + " deg, 60 deg: " +
                                      (at60 ? std::to_string(at60->decoded_ok) + "/" + std::to_string(at60->total) : "n/a")};
}

// --- 7 -----------------------------------------------------------------------

Outcome motion_blur() {
    SweepOptions opt;
    opt.families = {TagFamily::standard(3)};
    const BlurGrid grid;
    const SweepResult r = sweep_blur(opt, grid);
    auto magnitude = [&](double angle) { return series_of(r, "3x3", angle).first_miss.value_or(grid.max_fraction + 1.0); };
    bool survives = true;
    for (const auto& p : series_of(r, "3x3", 45.0).points) {
        if (p.x <= 0.08 + 1e-9 && p.decoded_ok < p.total) survives = false;
    }
    std::string detail = "first miss by angle:";
    for (double a : grid.angles_deg) detail += " " + fmt(a, 0) + "=" + opt_str(series_of(r, "3x3", a).first_miss);
    const bool ordered = magnitude(45.0) >= magnitude(0.0) && magnitude(45.0) >= magnitude(90.0);
    return {survives && ordered, detail};
}

// --- 8 -----------------------------------------------------------------------

std::vector<GrayImage> fp_corpus(const std::vector<cv::Mat>& natural) {
    std::vector<GrayImage> out;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // Natural photo variants: crop, rescale, flip, gamma.
    for (int i = 0; i < 250; ++i) {
        const cv::Mat& src = natural[static_cast<std::size_t>(i) % natural.size()];
        const double frac = 0.5 + 0.5 * u(rng);
        const int cw = std::max(16, static_cast<int>(src.cols * frac));
        const int ch = std::max(16, static_cast<int>(src.rows * frac));
        const int x0 = static_cast<int>(u(rng) * (src.cols - cw));
        const int y0 = static_cast<int>(u(rng) * (src.rows - ch));
        cv::Mat m;
        const double scale = 0.5 + 1.5 * u(rng);
        cv::resize(src(cv::Rect(x0, y0, cw, ch)), m, cv::Size(), scale, scale,
                   scale < 1.0 ? cv::INTER_AREA : cv::INTER_LINEAR);
        if (u(rng) < 0.5) cv::flip(m, m, 1);
        if (u(rng) < 0.3) cv::flip(m, m, 0);
        const double gamma = 0.6 + 1.0 * u(rng);
        cv::Mat lut(1, 256, CV_8U);
        for (int v = 0; v < 256; ++v) lut.at<std::uint8_t>(v) = cv::saturate_cast<std::uint8_t>(255.0 * std::pow(v / 255.0, gamma));
        cv::LUT(m, lut, m);
        out.push_back(from_mat(m.clone()));
    }
    // Low-pass filtered white noise, contrast-stretched.
    for (int i = 0; i < 250; ++i) {
        cv::Mat noise(480, 640, CV_32F);
        cv::RNG cvrng(static_cast<std::uint64_t>(1000 + i));
        cvrng.fill(noise, cv::RNG::NORMAL, 0.0, 1.0);
        const double sigma = 1.0 + 9.0 * u(rng);
        cv::GaussianBlur(noise, noise, cv::Size(), sigma, sigma, cv::BORDER_REFLECT);
        cv::Mat m;
        cv::normalize(noise, m, 0, 255, cv::NORM_MINMAX, CV_8U);
        out.push_back(from_mat(m));
    }
    return out;
}

Outcome false_positives(const std::vector<cv::Mat>& natural) {
    const auto images = fp_corpus(natural);
    std::vector<std::string> names(images.size());
    for (std::size_t i = 0; i < names.size(); ++i) names[i] = std::to_string(i);
    std::string detail = std::to_string(images.size()) + " images;";
    bool ok = true;
    for (int n : {3, 4}) {
        const CorpusReport rep = run_corpus(Detector(DetectorConfig::defaults(TagFamily::standard(n))), images, names);
        bool monotone = true;
        for (const auto& r : rep.images) {
            const auto& c = r.counters;
            monotone = monotone && c.area >= c.geometry && c.geometry >= c.angle && c.angle >= c.collinearity &&
                       c.collinearity >= c.residual && c.topology >= c.area;
        }
        const auto& c = rep.counters;
        ok = ok && monotone && rep.detections == 0;
        detail += " " + rep.family + ": detections " + std::to_string(rep.detections) + ", counters " +
                  std::to_string(c.topology) + "/" + std::to_string(c.area) + "/" + std::to_string(c.geometry) + "/" +
                  std::to_string(c.angle) + "/" + std::to_string(c.collinearity) + "/" + std::to_string(c.residual) +
                  (monotone ? "" : " NOT MONOTONE");
    }
    return {ok, detail};
}

// --- CLI helpers ---------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& out, const fs::path& err) {
    const std::string cmd = std::string(LFTAG_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- 9 -----------------------------------------------------------------------

Outcome timing(const std::vector<cv::Mat>& natural, const fs::path& tmp) {
    const Detector det(DetectorConfig::defaults(TagFamily::standard(3)));
    StageTimings sum;
    std::vector<GrayImage> frames;
    for (const auto& m : natural) {
        cv::Mat r;
        cv::resize(m, r, cv::Size(1280, 720), 0, 0, cv::INTER_AREA);
        frames.push_back(from_mat(r));
    }
    for (const auto& f : frames) det.detect(f);  // warm-up
    for (int rep = 0; rep < 3; ++rep) {
        for (const auto& f : frames) sum += det.detect(f).timing;
    }
    std::size_t largest = 0;
    for (std::size_t i = 1; i < kStageCount; ++i) {
        if (sum.us[i] > sum.us[largest]) largest = i;
    }
    const double share = sum.us[static_cast<std::size_t>(Stage::topology)] / sum.total_us;

    // The CLI reports all seven stages.
    const fs::path img = tmp / "frame.png";
    cv::imwrite(img.string(), cv::Mat(720, 1280, CV_8U, const_cast<std::uint8_t*>(frames[0].data.data())));
    const int code = run_cli("detect " + img.string() + " --timing", tmp / "t.out", tmp / "t.err");
    const std::string err = slurp(tmp / "t.err");
    int stages = 0;
    for (std::size_t i = 0; i < kStageCount; ++i) {
        if (err.find(std::string(stage_name(static_cast<Stage>(i)))) != std::string::npos) ++stages;
    }
    std::string detail = "largest stage " + std::string(stage_name(static_cast<Stage>(largest))) + " (topology " +
                         fmt(100.0 * share, 1) + "% of total);";
    for (std::size_t i = 0; i < kStageCount; ++i) {
        detail += " " + std::string(stage_name(static_cast<Stage>(i))) + "=" +
                  fmt(sum.us[i] / (3.0 * double(frames.size())) / 1000.0, 2) + "ms";
    }
    detail += "; cli reports " + std::to_string(stages) + "/7 stages";
    return {largest == static_cast<std::size_t>(Stage::topology) && code == 0 && stages == 7, detail};
}

// --- 10 ----------------------------------------------------------------------

Outcome determinism(const fs::path& tmp) {
    RenderSpec s;
    s.family = TagFamily::standard(4);
    s.id = TagId{31337};
    s.distance_m = 3.0;
    s.tilt_deg = 40.0;
    s.noise_sigma = 2.0;
    s.noise_seed = 10;
    const fs::path img = tmp / "det.png";
    write_image(img, render(s));

    const std::vector<std::string> commands = {
        "detect " + img.string() + " --family 4x4 --json",
        "bench angle --family 3x3 --family 4x4 --ids 2 --seed 7 --out {}.csv --summary {}.json",
        "bench blur --family 3x3 --ids 1 --seed 7 --out {}.csv --summary {}.json",
        "bench fp --corpus " + (fs::path(LFTAG_TEST_DATA) / "natural").string() + " --out {}.csv --summary {}.json",
    };
    int same = 0, files = 0;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::vector<std::string> outputs[2];
        for (int run = 0; run < 2; ++run) {
            const std::string stem = (tmp / ("d" + std::to_string(c) + "_" + std::to_string(run))).string();
            std::string cmd = commands[c];
            for (std::size_t p; (p = cmd.find("{}")) != std::string::npos;) cmd.replace(p, 2, stem);
            if (run_cli(cmd, stem + ".out", stem + ".err") != 0) return {false, "command failed: " + cmd};
            outputs[run].push_back(slurp(stem + ".out"));
            if (fs::exists(stem + ".csv")) outputs[run].push_back(slurp(stem + ".csv"));
            if (fs::exists(stem + ".json")) outputs[run].push_back(slurp(stem + ".json"));
        }
        for (std::size_t k = 0; k < outputs[0].size(); ++k) {
            ++files;
            if (k < outputs[1].size() && outputs[0][k] == outputs[1][k] && !outputs[0][k].empty()) ++same;
        }
    }
    return {same == files, std::to_string(same) + "/" + std::to_string(files) + " outputs byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> known;
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--known-failure" && i + 1 < argc) {
            known.insert(std::atoi(argv[++i]));
        } else {
            std::cerr << "usage: lftag_acceptance [--known-failure N]...\n";
            return 2;
        }
    }
    const fs::path tmp = fs::temp_directory_path() / ("lftag_accept_" + std::to_string(::getpid()));
    fs::create_directories(tmp);
    const auto natural = natural_images();

    int unexpected = 0;
    auto report = [&](int id, const std::string& name, auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string tag = o.pass ? "PASS" : "FAIL";
        if (!o.pass && known.count(id)) tag += " (known)";
        if (!o.pass && !known.count(id)) ++unexpected;
        std::cout << "[" << id << "] " << tag << " " << name << ": " << o.detail << " [" << fmt(secs, 1) << " s]"
                  << std::endl;
    };

    std::string soft;
    report(1, "dictionary sizes", dictionary_sizes);
    report(2, "round trip 512 px", round_trip);
    report(3, "CCA oracle equivalence", cca_oracle);
    report(4, "PnP accuracy", pnp_accuracy);
    report(5, "range ordering and ratio", [&] { return range_ratio(soft); });
    std::cout << "    soft absolute range target " << soft << std::endl;
    report(6, "grazing angle", grazing_angle);
    report(7, "motion blur", motion_blur);
    report(8, "false positives", [&] { return false_positives(natural); });
    report(9, "timing report", [&] { return timing(natural, tmp); });
    report(10, "determinism", [&] { return determinism(tmp); });

    fs::remove_all(tmp);
    return unexpected == 0 ? 0 : 1;
}
