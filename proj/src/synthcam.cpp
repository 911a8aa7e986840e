#include "lftag/synthcam.hpp"

#include "render_detail.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <tuple>

namespace lftag {
namespace detail {

MarkerShader::MarkerShader(const RenderSpec& spec)
    : layout_(encode(spec.family, spec.id)), samples_(spec.supersample), background_(spec.background) {
    const Pose pose = render_pose(spec);
    const CameraIntrinsics cam = spec.camera();
    Mat3 rt;
    rt.col(0) = pose.rotation.col(0);
    rt.col(1) = pose.rotation.col(1);
    rt.col(2) = pose.translation;
    const Mat3 h = cam.matrix() * rt;
    pixel_to_marker_ = h.inverse();

    double bx0 = 1e300, by0 = 1e300, bx1 = -1e300, by1 = -1e300;
    for (const Vec2& corner : {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}) {
        const auto p = project(pose, cam, corner);
        if (!p) throw std::invalid_argument("marker is behind the camera");
        bx0 = std::min(bx0, p->x());
        by0 = std::min(by0, p->y());
        bx1 = std::max(bx1, p->x());
        by1 = std::max(by1, p->y());
    }
    x0 = std::max(0, static_cast<int>(std::floor(bx0)) - 1);
    y0 = std::max(0, static_cast<int>(std::floor(by0)) - 1);
    x1 = std::min(spec.width - 1, static_cast<int>(std::ceil(bx1)) + 1);
    y1 = std::min(spec.height - 1, static_cast<int>(std::ceil(by1)) + 1);
}

std::uint8_t MarkerShader::shade(int x, int y) const {
    const int s = samples_;
    int total = 0;
    for (int sy = 0; sy < s; ++sy) {
        const double py = y - 0.5 + (sy + 0.5) / s;
        for (int sx = 0; sx < s; ++sx) {
            const double px = x - 0.5 + (sx + 0.5) / s;
            const Vec3 q = pixel_to_marker_ * Vec3(px, py, 1.0);
            int value = background_;
            if (q.z() > 0.0) {
                const double u = q.x() / q.z();
                const double v = q.y() / q.z();
                if (u >= 0.0 && u < 1.0 && v >= 0.0 && v < 1.0) value = marker_is_black(layout_, u, v) ? 0 : 255;
            }
            total += value;
        }
    }
    const int n = s * s;
    return static_cast<std::uint8_t>((total + n / 2) / n);
}

}  // namespace detail

namespace {

std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

// Blur restricted to rows/cols [x0, x1] x [y0, y1]; pixels outside are copied.
GrayImage blur_region(const GrayImage& img, const std::vector<KernelTap>& taps, int x0, int y0, int x1, int y1) {
    GrayImage out = img;
    const int w = img.width;
    const int h = img.height;
#pragma omp parallel for schedule(static)
    for (int y = y0; y <= y1; ++y) {
        std::uint8_t* dst = out.row(y);
        for (int x = x0; x <= x1; ++x) {
            double acc = 0.0;
            for (const KernelTap& t : taps) {
                const int sx = std::clamp(x - t.dx, 0, w - 1);
                const int sy = std::clamp(y - t.dy, 0, h - 1);
                acc += t.weight * img.at(sx, sy);
            }
            dst[x] = clamp_u8(acc);
        }
    }
    return out;
}

void add_noise(GrayImage& img, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, sigma);
    for (auto& px : img.data) px = clamp_u8(px + dist(rng));
}

}  // namespace

void RenderSpec::validate() const {
    family.validate();
    if (!(distance_m > 0.0)) throw std::invalid_argument("distance must be positive");
    if (!(tag_side_m > 0.0)) throw std::invalid_argument("tag side must be positive");
    if (blur_len_px < 0.0) throw std::invalid_argument("blur length must be >= 0");
    if (blur_angle_deg < 0.0 || blur_angle_deg > 90.0) throw std::invalid_argument("blur angle must be in [0, 90]");
    if (width < 1 || height < 1 || supersample < 1) throw std::invalid_argument("bad image geometry");
    if (!(fx > 0.0 && fy > 0.0)) throw std::invalid_argument("focal length must be positive");
}

Pose render_pose(const RenderSpec& spec) {
    const double deg = M_PI / 180.0;
    const Mat3 r = (Eigen::AngleAxisd(spec.inplane_deg * deg, Vec3::UnitZ()) *
                    Eigen::AngleAxisd(spec.tilt_deg * deg, Vec3::UnitX()))
                       .toRotationMatrix();
    const double d = spec.distance_m;
    const Vec3 center(spec.subpixel_offset.x() * d / spec.fx, spec.subpixel_offset.y() * d / spec.fy, d);
    const double s = spec.tag_side_m;
    const Vec3 t = center - r * Vec3(0.5 * s, 0.5 * s, 0.0);
    return {r, t / s};
}

double frontal_edge_px(const RenderSpec& spec) { return spec.fx * spec.tag_side_m / spec.distance_m; }

std::vector<KernelTap> motion_blur_kernel(double len_px, double angle_deg) {
    if (!(len_px > 0.0)) return {{0, 0, 1.0}};
    const double a = angle_deg * M_PI / 180.0;
    const Vec2 dir(std::sin(a), std::cos(a));
    const int samples = std::max(2, static_cast<int>(std::ceil(len_px * 8.0))) + 1;
    std::map<std::pair<int, int>, double> acc;
    for (int i = 0; i < samples; ++i) {
        const double t = -len_px / 2.0 + len_px * i / (samples - 1);
        const Vec2 p = dir * t;
        const double fx = std::floor(p.x());
        const double fy = std::floor(p.y());
        const double ax = p.x() - fx;
        const double ay = p.y() - fy;
        const int ix = static_cast<int>(fx);
        const int iy = static_cast<int>(fy);
        acc[{ix, iy}] += (1 - ax) * (1 - ay);
        acc[{ix + 1, iy}] += ax * (1 - ay);
        acc[{ix, iy + 1}] += (1 - ax) * ay;
        acc[{ix + 1, iy + 1}] += ax * ay;
    }
    // Rounding residue (cos 90 deg is not 0) leaves taps of ~1e-16 weight.
    double total = 0.0;
    for (const auto& [k, w] : acc) total += w > 1e-12 ? w : 0.0;
    std::vector<KernelTap> taps;
    for (const auto& [k, w] : acc) {
        if (w > 1e-12) taps.push_back({k.first, k.second, w / total});
    }
    return taps;
}

GrayImage apply_motion_blur(const GrayImage& img, double len_px, double angle_deg) {
    if (len_px < 0.0) throw std::invalid_argument("blur length must be >= 0");
    if (len_px == 0.0) return img;
    return blur_region(img, motion_blur_kernel(len_px, angle_deg), 0, 0, img.width - 1, img.height - 1);
}

GrayImage render(const RenderSpec& spec) {
    spec.validate();
    const detail::MarkerShader shader(spec);
    GrayImage img(spec.width, spec.height, spec.background);
#pragma omp parallel for schedule(static)
    for (int y = shader.y0; y <= shader.y1; ++y) {
        std::uint8_t* row = img.row(y);
        for (int x = shader.x0; x <= shader.x1; ++x) row[x] = shader.shade(x, y);
    }
    if (spec.blur_len_px > 0.0 && shader.x0 <= shader.x1 && shader.y0 <= shader.y1) {
        // Outside the marker's footprint grown by the kernel reach the image
        // is constant, where the unit-mass blur is the identity.
        const auto taps = motion_blur_kernel(spec.blur_len_px, spec.blur_angle_deg);
        int reach = 0;
        for (const auto& t : taps) reach = std::max({reach, std::abs(t.dx), std::abs(t.dy)});
        img = blur_region(img, taps, std::max(0, shader.x0 - reach - 1), std::max(0, shader.y0 - reach - 1),
                          std::min(spec.width - 1, shader.x1 + reach + 1),
                          std::min(spec.height - 1, shader.y1 + reach + 1));
    }
    if (spec.noise_sigma > 0.0) add_noise(img, spec.noise_sigma, spec.noise_seed);
    return img;
}

// --- sweeps ------------------------------------------------------------------

std::vector<SweepTarget> sweep_targets(const TagFamily& family, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(family.n));
    std::uniform_int_distribution<std::uint64_t> id_dist(0, dictionary_size(family) - 1);
    std::uniform_real_distribution<double> off_dist(-0.5, 0.5);
    std::vector<SweepTarget> out;
    for (int i = 0; i < count; ++i) {
        const TagId id{id_dist(rng)};
        const double ox = off_dist(rng);
        const double oy = off_dist(rng);
        out.push_back({id, Vec2(ox, oy)});
    }
    return out;
}

std::optional<double> first_miss(const std::vector<SweepPoint>& pts) {
    for (const auto& p : pts) {
        if (p.decoded_ok < p.total) return p.x;
    }
    return std::nullopt;
}

std::optional<double> miss_rate_crossing(const std::vector<SweepPoint>& pts, double rate) {
    for (const auto& p : pts) {
        if (p.total > 0 && 1.0 - p.success_rate() >= rate - 1e-12) return p.x;
    }
    return std::nullopt;
}

namespace {

// Builds the render spec of one sweep cell.
using SpecMaker = RenderSpec (*)(const TagFamily&, const SweepTarget&, double x, double angle, const void* grid);

struct SeriesContext {
    const TagFamily* family;
    std::vector<SweepTarget> targets;
    double angle;
    SpecMaker make;
    const void* grid;
};

void evaluate_points(const SeriesContext& ctx, const std::vector<double>& xs, std::vector<SweepPoint>& points,
                     std::vector<SweepRecord>& records) {
    const std::size_t nt = ctx.targets.size();
    const std::size_t jobs = xs.size() * nt;
    std::vector<SweepRecord> local(jobs);
    const std::string fname = ctx.family->name();
    DetectorConfig cfg = DetectorConfig::defaults(*ctx.family);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t j = 0; j < jobs; ++j) {
        const double x = xs[j / nt];
        const SweepTarget& tgt = ctx.targets[j % nt];
        const RenderSpec spec = ctx.make(*ctx.family, tgt, x, ctx.angle, ctx.grid);
        DetectorConfig c = cfg;
        c.camera = spec.camera();
        c.tag_side_m = spec.tag_side_m;
        const Detector det(c);
        SweepRecord rec{x, ctx.angle, fname, tgt.id.value, false, false};
        try {
            const auto rep = det.detect(render(spec));
            rec.detected = !rep.detections.empty();
            rec.decoded_ok = std::any_of(rep.detections.begin(), rep.detections.end(),
                                         [&](const Detection& d) { return d.id == tgt.id; });
        } catch (const std::invalid_argument&) {
            // marker not renderable at this grid cell: counts as a miss
        }
        local[j] = std::move(rec);
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        SweepPoint p{xs[i], static_cast<int>(nt), 0, 0};
        for (std::size_t k = 0; k < nt; ++k) {
            const SweepRecord& r = local[i * nt + k];
            p.detected += r.detected;
            p.decoded_ok += r.decoded_ok;
            records.push_back(r);
        }
        points.push_back(p);
    }
    std::sort(points.begin(), points.end(), [](const SweepPoint& a, const SweepPoint& b) { return a.x < b.x; });
}

std::vector<double> linear_grid(double start, double stop, double step) {
    std::vector<double> xs;
    const int count = static_cast<int>(std::floor((stop - start) / step + 1e-9));
    for (int i = 0; i <= count; ++i) xs.push_back(std::round((start + i * step) * 1e6) / 1e6);
    return xs;
}

// Fine samples strictly inside (hi - coarse, hi), skipping x values already present.
std::vector<double> refine_bracket(double hi, double coarse, double fine, const std::vector<SweepPoint>& have) {
    std::vector<double> xs;
    const int count = static_cast<int>(std::round(coarse / fine));
    for (int i = 1; i < count; ++i) {
        const double x = std::round((hi - coarse + i * fine) * 1e6) / 1e6;
        const bool dup = std::any_of(have.begin(), have.end(), [&](const SweepPoint& p) { return std::abs(p.x - x) < 1e-9; });
        if (!dup) xs.push_back(x);
    }
    return xs;
}

FamilySweep run_series(const SeriesContext& ctx, const std::vector<double>& coarse_xs, double coarse, double fine,
                       bool refine, double lower_bound, std::vector<SweepRecord>& records) {
    FamilySweep fs;
    fs.family = ctx.family->name();
    fs.angle = ctx.angle;
    evaluate_points(ctx, coarse_xs, fs.points, records);
    if (refine && fine > 0.0 && fine < coarse) {
        if (auto fm = first_miss(fs.points); fm && *fm - coarse >= lower_bound - 1e-9) {
            evaluate_points(ctx, refine_bracket(*fm, coarse, fine, fs.points), fs.points, records);
        }
        if (auto m20 = miss_rate_crossing(fs.points, 0.2); m20 && *m20 - coarse >= lower_bound - 1e-9) {
            evaluate_points(ctx, refine_bracket(*m20, coarse, fine, fs.points), fs.points, records);
        }
    }
    fs.first_miss = first_miss(fs.points);
    fs.miss20 = miss_rate_crossing(fs.points, 0.2);
    return fs;
}

void sort_records(std::vector<SweepRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const SweepRecord& a, const SweepRecord& b) {
        return std::tie(a.family, a.angle, a.x) < std::tie(b.family, b.angle, b.x);
    });
}

RenderSpec range_spec(const TagFamily& f, const SweepTarget& t, double x, double, const void*) {
    RenderSpec s;
    s.family = f;
    s.id = t.id;
    s.distance_m = x;
    s.subpixel_offset = t.offset;
    return s;
}

RenderSpec angle_spec(const TagFamily& f, const SweepTarget& t, double x, double, const void* grid) {
    RenderSpec s;
    s.family = f;
    s.id = t.id;
    s.distance_m = static_cast<const AngleGrid*>(grid)->distance_m;
    s.tilt_deg = x;
    s.subpixel_offset = t.offset;
    return s;
}

RenderSpec blur_spec(const TagFamily& f, const SweepTarget& t, double x, double angle, const void* grid) {
    RenderSpec s;
    s.family = f;
    s.id = t.id;
    s.distance_m = static_cast<const BlurGrid*>(grid)->distance_m;
    s.subpixel_offset = t.offset;
    s.blur_angle_deg = angle;
    s.blur_len_px = x * frontal_edge_px(s);
    return s;
}

}  // namespace

SweepResult sweep_range(const SweepOptions& opt, const RangeGrid& grid) {
    SweepResult res{"range", {}, {}};
    const auto xs = linear_grid(grid.start, grid.stop, grid.coarse_step);
    for (const TagFamily& f : opt.families) {
        SeriesContext ctx{&f, sweep_targets(f, opt.ids_per_family, opt.seed), 0.0, &range_spec, &grid};
        res.series.push_back(run_series(ctx, xs, grid.coarse_step, grid.fine_step, opt.refine, grid.start, res.records));
    }
    sort_records(res.records);
    return res;
}

SweepResult sweep_angle(const SweepOptions& opt, const AngleGrid& grid) {
    SweepResult res{"angle", {}, {}};
    const auto xs = linear_grid(grid.start, grid.stop, grid.coarse_step);
    for (const TagFamily& f : opt.families) {
        SeriesContext ctx{&f, sweep_targets(f, opt.ids_per_family, opt.seed), 0.0, &angle_spec, &grid};
        res.series.push_back(run_series(ctx, xs, grid.coarse_step, grid.fine_step, opt.refine, grid.start, res.records));
    }
    sort_records(res.records);
    return res;
}

SweepResult sweep_blur(const SweepOptions& opt, const BlurGrid& grid) {
    SweepResult res{"blur", {}, {}};
    const auto xs = linear_grid(0.0, grid.max_fraction, grid.step);
    for (const TagFamily& f : opt.families) {
        const auto targets = sweep_targets(f, opt.ids_per_family, opt.seed);
        for (double angle : grid.angles_deg) {
            SeriesContext ctx{&f, targets, angle, &blur_spec, &grid};
            res.series.push_back(run_series(ctx, xs, grid.step, 0.0, false, 0.0, res.records));
        }
    }
    sort_records(res.records);
    return res;
}

}  // namespace lftag
