#pragma once

#include "lftag/geometry.hpp"
#include "lftag/image.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lftag {

// Marker coordinates: origin at the top-left outer corner of the black
// border, x right, y down, side length 1.
//
// An n x n marker has n^2 interior disks on a regular grid. Cells (0,0) and
// (0,n-1) hold the enlarged baseline disks; every other cell holds a data
// disk whose center is displaced by (+-shift, +-shift) from the cell center,
// carrying two bits.
struct TagFamily {
    int n = 3;
    double border_width = 0.1;
    double shift = 0.0;
    double data_radius = 0.0;
    double baseline_radius = 0.0;

    // Default geometry for an n x n family (2 <= n <= 5).
    static TagFamily standard(int n);
    // Parses "3x3" / "4x4" style names.
    static TagFamily from_name(std::string_view name);

    double cell_pitch() const { return (1.0 - 2.0 * border_width) / n; }
    int region_count() const { return n * n; }
    int data_region_count() const { return n * n - 2; }
    std::string name() const;

    Vec2 cell_center(int row, int col) const;
    bool is_baseline_cell(int row, int col) const { return row == 0 && (col == 0 || col == n - 1); }

    // Throws std::invalid_argument if the family is malformed.
    void validate() const;

    bool operator==(const TagFamily&) const = default;
};

// Largest supported grid dimension: 4^(n^2-2) must fit in 64 bits.
inline constexpr int kMaxGridDim = 5;

struct TagId {
    std::uint64_t value = 0;
    auto operator<=>(const TagId&) const = default;
};

std::uint64_t dictionary_size(const TagFamily& family);

enum class RegionRole { baseline, data };

struct RegionSpec {
    int row = 0;
    int col = 0;
    RegionRole role = RegionRole::data;
    Vec2 centroid = Vec2::Zero();
    double radius = 0.0;
};

struct MarkerLayout {
    TagFamily family;
    std::vector<RegionSpec> regions;  // row-major over all n^2 cells
};

struct CellIndex {
    int row = 0;
    int col = 0;
    bool operator==(const CellIndex&) const = default;
};

// Data cells in bit order: row-major, skipping the two baseline cells.
std::vector<CellIndex> data_cells(const TagFamily& family);

// One of the four legal centroid positions of a data cell.
// Position index bit 0 selects horizontal (0 = left, 1 = right),
// bit 1 selects vertical (0 = up, 1 = down).
Vec2 data_position(const TagFamily& family, CellIndex cell, int position);

// Throws std::out_of_range if id >= dictionary_size(family).
MarkerLayout encode(const TagFamily& family, TagId id);

// Inverse of encode. `data_centroids` holds one marker-coordinate point per
// data cell, in data_cells() order. Rejects when a point is farther than
// half a cell pitch from every legal position or is equidistant between two.
std::optional<TagId> decode_layout(const TagFamily& family, std::span<const Vec2> data_centroids);

// True when the marker-coordinate point (u, v) inside the unit square is
// black (border or disk).
bool marker_is_black(const MarkerLayout& layout, double u, double v);

// Renders the marker filling a side_px x side_px image with 4x4
// supersampling. Requires side_px >= 8 n.
GrayImage rasterize(const MarkerLayout& layout, int side_px);

// Minimum gap between any two disks, or a disk and the border, over all
// combinations of data shifts, in marker units.
double worst_case_clearance(const TagFamily& family);

}  // namespace lftag
