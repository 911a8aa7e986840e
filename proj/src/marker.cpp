#include "lftag/marker.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lftag {
namespace {

constexpr double kBaselineAreaRatio = 1.77;
constexpr int kSupersample = 4;

struct Disk {
    Vec2 center;
    double radius;
};

// Every position a cell's disk may occupy.
std::vector<Disk> candidate_disks(const TagFamily& f, int row, int col) {
    if (f.is_baseline_cell(row, col)) return {{f.cell_center(row, col), f.baseline_radius}};
    std::vector<Disk> out;
    for (int p = 0; p < 4; ++p) out.push_back({data_position(f, {row, col}, p), f.data_radius});
    return out;
}

}  // namespace

TagFamily TagFamily::standard(int n) {
    if (n < 2 || n > kMaxGridDim) throw std::invalid_argument("grid dimension must be in [2, 5]");
    TagFamily f;
    f.n = n;
    f.border_width = 0.1;
    const double pitch = f.cell_pitch();
    f.shift = pitch / 8.0;
    f.data_radius = 0.3 * pitch;
    f.baseline_radius = f.data_radius * std::sqrt(kBaselineAreaRatio);
    return f;
}

TagFamily TagFamily::from_name(std::string_view name) {
    const auto x = name.find('x');
    if (x == std::string_view::npos) throw std::invalid_argument("family must look like 3x3");
    int a = 0;
    int b = 0;
    auto r1 = std::from_chars(name.data(), name.data() + x, a);
    auto r2 = std::from_chars(name.data() + x + 1, name.data() + name.size(), b);
    if (r1.ec != std::errc{} || r1.ptr != name.data() + x || r2.ec != std::errc{} ||
        r2.ptr != name.data() + name.size() || a != b) {
        throw std::invalid_argument("family must look like 3x3");
    }
    return standard(a);
}

std::string TagFamily::name() const { return std::to_string(n) + "x" + std::to_string(n); }

Vec2 TagFamily::cell_center(int row, int col) const {
    const double p = cell_pitch();
    return {border_width + (col + 0.5) * p, border_width + (row + 0.5) * p};
}

void TagFamily::validate() const {
    if (n < 2 || n > kMaxGridDim) throw std::invalid_argument("grid dimension must be in [2, 5]");
    if (!(border_width > 0.0 && border_width < 0.5)) throw std::invalid_argument("border width out of range");
    if (!(shift > 0.0 && data_radius > 0.0 && baseline_radius > 0.0)) {
        throw std::invalid_argument("family geometry must be positive");
    }
    if (worst_case_clearance(*this) <= 0.0) throw std::invalid_argument("family regions overlap");
}

std::uint64_t dictionary_size(const TagFamily& family) {
    if (family.n < 2 || family.n > kMaxGridDim) throw std::invalid_argument("grid dimension must be in [2, 5]");
    return std::uint64_t{1} << (2 * family.data_region_count());
}

std::vector<CellIndex> data_cells(const TagFamily& family) {
    std::vector<CellIndex> cells;
    cells.reserve(static_cast<std::size_t>(family.data_region_count()));
    for (int r = 0; r < family.n; ++r) {
        for (int c = 0; c < family.n; ++c) {
            if (!family.is_baseline_cell(r, c)) cells.push_back({r, c});
        }
    }
    return cells;
}

Vec2 data_position(const TagFamily& family, CellIndex cell, int position) {
    const double dx = (position & 1) ? family.shift : -family.shift;
    const double dy = (position & 2) ? family.shift : -family.shift;
    return family.cell_center(cell.row, cell.col) + Vec2(dx, dy);
}

MarkerLayout encode(const TagFamily& family, TagId id) {
    if (id.value >= dictionary_size(family)) throw std::out_of_range("tag id out of range for family " + family.name());
    MarkerLayout layout{family, {}};
    layout.regions.reserve(static_cast<std::size_t>(family.region_count()));
    int k = 0;
    for (int r = 0; r < family.n; ++r) {
        for (int c = 0; c < family.n; ++c) {
            if (family.is_baseline_cell(r, c)) {
                layout.regions.push_back({r, c, RegionRole::baseline, family.cell_center(r, c), family.baseline_radius});
            } else {
                const int pos = static_cast<int>((id.value >> (2 * k)) & 3u);
                layout.regions.push_back({r, c, RegionRole::data, data_position(family, {r, c}, pos), family.data_radius});
                ++k;
            }
        }
    }
    return layout;
}

std::optional<TagId> decode_layout(const TagFamily& family, std::span<const Vec2> data_centroids) {
    const auto cells = data_cells(family);
    if (data_centroids.size() != cells.size()) return std::nullopt;
    const double reject_radius = family.cell_pitch() / 2.0;
    const double tie_eps = 1e-12 * family.cell_pitch();

    std::uint64_t value = 0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        std::array<double, 4> d{};
        for (int p = 0; p < 4; ++p) d[p] = (data_centroids[k] - data_position(family, cells[k], p)).norm();
        std::array<int, 4> order{0, 1, 2, 3};
        std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
        if (d[order[0]] > reject_radius) return std::nullopt;
        if (d[order[1]] - d[order[0]] <= tie_eps) return std::nullopt;
        value |= static_cast<std::uint64_t>(order[0]) << (2 * k);
    }
    return TagId{value};
}

bool marker_is_black(const MarkerLayout& layout, double u, double v) {
    const TagFamily& f = layout.family;
    const double lo = f.border_width;
    const double hi = 1.0 - f.border_width;
    if (u < lo || u >= hi || v < lo || v >= hi) return true;
    const double p = f.cell_pitch();
    const int col = std::min(static_cast<int>((u - lo) / p), f.n - 1);
    const int row = std::min(static_cast<int>((v - lo) / p), f.n - 1);
    // Disks never leave their cell, so only one needs checking.
    const RegionSpec& reg = layout.regions[static_cast<std::size_t>(row * f.n + col)];
    const double dx = u - reg.centroid.x();
    const double dy = v - reg.centroid.y();
    return dx * dx + dy * dy <= reg.radius * reg.radius;
}

GrayImage rasterize(const MarkerLayout& layout, int side_px) {
    if (side_px < 8 * layout.family.n) throw std::invalid_argument("side_px must be at least 8 n");
    GrayImage img(side_px, side_px);
    constexpr int kSamples = kSupersample * kSupersample;
    const double inv = 1.0 / side_px;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < side_px; ++y) {
        std::uint8_t* row = img.row(y);
        for (int x = 0; x < side_px; ++x) {
            int white = 0;
            for (int sy = 0; sy < kSupersample; ++sy) {
                const double v = (y + (sy + 0.5) / kSupersample) * inv;
                for (int sx = 0; sx < kSupersample; ++sx) {
                    const double u = (x + (sx + 0.5) / kSupersample) * inv;
                    if (!marker_is_black(layout, u, v)) ++white;
                }
            }
            row[x] = static_cast<std::uint8_t>((white * 255 + kSamples / 2) / kSamples);
        }
    }
    return img;
}

double worst_case_clearance(const TagFamily& f) {
    const double lo = f.border_width;
    const double hi = 1.0 - f.border_width;
    double best = std::numeric_limits<double>::infinity();

    std::vector<std::vector<Disk>> cells;
    for (int r = 0; r < f.n; ++r) {
        for (int c = 0; c < f.n; ++c) cells.push_back(candidate_disks(f, r, c));
    }
    for (const auto& options : cells) {
        for (const auto& d : options) {
            const double x = d.center.x();
            const double y = d.center.y();
            best = std::min(best, std::min({x - lo, hi - x, y - lo, hi - y}) - d.radius);
        }
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t j = i + 1; j < cells.size(); ++j) {
            for (const auto& a : cells[i]) {
                for (const auto& b : cells[j]) {
                    best = std::min(best, (a.center - b.center).norm() - a.radius - b.radius);
                }
            }
        }
    }
    return best;
}

}  // namespace lftag
