#pragma once

#include "lftag/geometry.hpp"
#include "lftag/image.hpp"
#include "lftag/imgproc.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace lftag {

enum class Color : std::uint8_t { white = 0, black = 1 };

struct BoundingBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;  // inclusive
    int y1 = 0;  // inclusive

    bool contains(const BoundingBox& o) const { return o.x0 >= x0 && o.y0 >= y0 && o.x1 <= x1 && o.y1 <= y1; }
    bool intersects(const BoundingBox& o) const { return o.x0 <= x1 && x0 <= o.x1 && o.y0 <= y1 && y0 <= o.y1; }
    bool operator==(const BoundingBox&) const = default;
};

struct RegionNode {
    int id = 0;
    Color color = Color::white;
    int parent = -1;  // -1 for the root
    std::vector<int> children;
    std::int64_t pixel_count = 0;
    std::int64_t sum_x = 0;
    std::int64_t sum_y = 0;
    BoundingBox bbox;
    std::size_t run_begin = 0;
    std::size_t run_end = 0;

    Vec2 centroid() const {
        return pixel_count > 0 ? Vec2(double(sum_x) / pixel_count, double(sum_y) / pixel_count) : Vec2::Zero();
    }
};

// Enclosure forest of the connected components of a binary image.
//
// Black components are 8-connected and white ones 4-connected. The image is
// surrounded by a virtual white frame: node 0 is the white region that
// touches the image border (possibly empty) and is the single root. Every
// other node's parent is the region that encloses it, so colors alternate
// along any root-to-leaf path. Nodes are numbered in raster order of their
// first pixel.
struct RegionTree {
    int width = 0;
    int height = 0;
    std::vector<RegionNode> nodes;
    std::vector<Run> runs;  // grouped per node, see RegionNode::run_begin/end
    std::int64_t pixels_touched = 0;

    std::span<const Run> runs_of(int node) const {
        const RegionNode& n = nodes[static_cast<std::size_t>(node)];
        return std::span<const Run>(runs).subspan(n.run_begin, n.run_end - n.run_begin);
    }
};

// Single raster scan over pixel runs with union-find label merging. Moment
// sums and bounding boxes are streamed during the scan.
RegionTree connected_components_hierarchy(const BinaryImage& bin);

struct CandidateRegion {
    int node = 0;
    Vec2 centroid = Vec2::Zero();  // dilated, inverted-intensity weighted
    double zeroth_moment = 0.0;
    std::int64_t area = 0;  // including enclosed holes
    BoundingBox bbox;
};

struct CandidateMarker {
    int white_node = 0;
    std::int64_t white_area = 0;
    BoundingBox white_bbox;
    std::vector<CandidateRegion> regions;  // exactly n^2, ordered by node id
};

struct CandidateStats {
    std::uint64_t topology = 0;  // white regions with >= n^2 black children
    std::uint64_t area = 0;      // of those, passing the area ratio check
    std::int64_t dilation_touches = 0;
};

// Topological and area filtering. For each enclosed white region with at
// least n^2 black children, keeps the n^2 largest by filled area (the child
// plus everything it encloses), rejects when largest / smallest >
// max_area_ratio, then measures each child's centroid on the grayscale image
// over its filled mask dilated by `dilation`. Filling matters for large disks,
// whose flat interiors threshold white and would otherwise leave a ring.
// Pixel count of each node's subtree.
std::vector<std::int64_t> filled_areas(const RegionTree& tree);

std::vector<CandidateMarker> find_candidates(const RegionTree& tree, const GrayImage& gray, int n,
                                             double max_area_ratio, int dilation, CandidateStats* stats = nullptr);

}  // namespace lftag
