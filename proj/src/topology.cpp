#include "lftag/topology.hpp"

#include <algorithm>
#include <numeric>

namespace lftag {
namespace {

struct LabeledRun {
    int y;
    int x0;
    int x1;
    int label;
    Color color;
};

struct LabelStats {
    Color color = Color::white;
    std::int64_t count = 0;
    std::int64_t sum_x = 0;
    std::int64_t sum_y = 0;
    BoundingBox bbox{0, 0, -1, -1};

    void add_run(int y, int x0, int x1) {
        const std::int64_t len = x1 - x0;
        count += len;
        // sum of x0 .. x1-1
        sum_x += (static_cast<std::int64_t>(x0) + x1 - 1) * len / 2;
        sum_y += static_cast<std::int64_t>(y) * len;
        if (bbox.x1 < bbox.x0) {
            bbox = {x0, y, x1 - 1, y};
        } else {
            bbox.x0 = std::min(bbox.x0, x0);
            bbox.x1 = std::max(bbox.x1, x1 - 1);
            bbox.y0 = std::min(bbox.y0, y);
            bbox.y1 = std::max(bbox.y1, y);
        }
    }

    void merge(const LabelStats& o) {
        count += o.count;
        sum_x += o.sum_x;
        sum_y += o.sum_y;
        if (o.bbox.x1 < o.bbox.x0) return;
        if (bbox.x1 < bbox.x0) {
            bbox = o.bbox;
            return;
        }
        bbox.x0 = std::min(bbox.x0, o.bbox.x0);
        bbox.y0 = std::min(bbox.y0, o.bbox.y0);
        bbox.x1 = std::max(bbox.x1, o.bbox.x1);
        bbox.y1 = std::max(bbox.y1, o.bbox.y1);
    }
};

// Union-find over provisional labels. The smaller label always becomes the
// root, so a component's root is the label of its first run in raster order.
class LabelForest {
public:
    int make(Color c, int above) {
        parent_.push_back(static_cast<int>(parent_.size()));
        stats_.push_back({});
        stats_.back().color = c;
        above_.push_back(above);
        return parent_.back();
    }

    int find(int l) {
        int r = l;
        while (parent_[static_cast<std::size_t>(r)] != r) r = parent_[static_cast<std::size_t>(r)];
        while (parent_[static_cast<std::size_t>(l)] != r) {
            const int next = parent_[static_cast<std::size_t>(l)];
            parent_[static_cast<std::size_t>(l)] = r;
            l = next;
        }
        return r;
    }

    int unite(int a, int b) {
        int ra = find(a);
        int rb = find(b);
        if (ra == rb) return ra;
        if (rb < ra) std::swap(ra, rb);
        parent_[static_cast<std::size_t>(rb)] = ra;
        stats_[static_cast<std::size_t>(ra)].merge(stats_[static_cast<std::size_t>(rb)]);
        return ra;
    }

    LabelStats& stats(int root) { return stats_[static_cast<std::size_t>(root)]; }
    int above(int l) const { return above_[static_cast<std::size_t>(l)]; }
    int size() const { return static_cast<int>(parent_.size()); }

private:
    std::vector<int> parent_;
    std::vector<LabelStats> stats_;
    std::vector<int> above_;  // label of the pixel above a label's first run; 0 on row 0
};

}  // namespace

RegionTree connected_components_hierarchy(const BinaryImage& bin) {
    const int w = bin.width;
    const int h = bin.height;
    RegionTree tree;
    tree.width = w;
    tree.height = h;

    LabelForest forest;
    forest.make(Color::white, -1);  // virtual frame

    std::vector<LabeledRun> runs;
    runs.reserve(static_cast<std::size_t>(h) * 8);
    std::size_t prev_begin = 0;
    std::size_t prev_end = 0;

    for (int y = 0; y < h; ++y) {
        const std::uint8_t* row = bin.data.data() + static_cast<std::size_t>(y) * w;
        const std::size_t cur_begin = runs.size();
        std::size_t overlap = prev_begin;  // first previous-row run that may touch the current run
        std::size_t cover = prev_begin;    // previous-row run covering pixel (x0, y-1)
        int x = 0;
        while (x < w) {
            const std::uint8_t v = row[x];
            const int x0 = x;
            while (x < w && row[x] == v) ++x;
            const int x1 = x;
            tree.pixels_touched += x1 - x0;
            const Color color = v ? Color::black : Color::white;
            // Black runs see diagonal neighbours above (8-connectivity).
            const int ext = color == Color::black ? 1 : 0;

            while (overlap < prev_end && runs[overlap].x1 <= x0 - ext) ++overlap;
            int label = -1;
            for (std::size_t q = overlap; q < prev_end && runs[q].x0 < x1 + ext; ++q) {
                if (runs[q].color != color) continue;
                label = label < 0 ? forest.find(runs[q].label) : forest.unite(label, runs[q].label);
            }
            if (label < 0) {
                int above = 0;
                if (y > 0) {
                    while (runs[cover].x1 <= x0) ++cover;
                    above = runs[cover].label;
                }
                label = forest.make(color, above);
            }
            if (color == Color::white && (y == 0 || y == h - 1 || x0 == 0 || x1 == w)) {
                label = forest.unite(label, 0);
            }
            forest.stats(label).add_run(y, x0, x1);
            runs.push_back({y, x0, x1, label, color});
        }
        prev_begin = cur_begin;
        prev_end = runs.size();
    }

    // Compact root labels into node ids (raster order of first pixel).
    const int nlabels = forest.size();
    std::vector<int> node_of(static_cast<std::size_t>(nlabels), -1);
    for (int l = 0; l < nlabels; ++l) {
        if (forest.find(l) != l) continue;
        node_of[static_cast<std::size_t>(l)] = static_cast<int>(tree.nodes.size());
        const LabelStats& st = forest.stats(l);
        RegionNode node;
        node.id = static_cast<int>(tree.nodes.size());
        node.color = st.color;
        node.pixel_count = st.count;
        node.sum_x = st.sum_x;
        node.sum_y = st.sum_y;
        node.bbox = st.bbox;
        tree.nodes.push_back(std::move(node));
    }
    tree.nodes[0].bbox = {0, 0, w - 1, h - 1};
    for (int l = 1; l < nlabels; ++l) {
        const int id = node_of[static_cast<std::size_t>(l)];
        if (id < 0) continue;
        const int parent = node_of[static_cast<std::size_t>(forest.find(forest.above(l)))];
        tree.nodes[static_cast<std::size_t>(id)].parent = parent;
        tree.nodes[static_cast<std::size_t>(parent)].children.push_back(id);
    }

    // Bucket runs by node, preserving raster order within each node.
    std::vector<std::size_t> counts(tree.nodes.size() + 1, 0);
    std::vector<int> run_node(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) {
        run_node[i] = node_of[static_cast<std::size_t>(forest.find(runs[i].label))];
        ++counts[static_cast<std::size_t>(run_node[i]) + 1];
    }
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
        tree.nodes[n].run_begin = counts[n];
        tree.nodes[n].run_end = counts[n + 1];
    }
    tree.runs.resize(runs.size());
    std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        tree.runs[fill[static_cast<std::size_t>(run_node[i])]++] = {runs[i].y, runs[i].x0, runs[i].x1};
    }
    return tree;
}

std::vector<std::int64_t> filled_areas(const RegionTree& tree) {
    std::vector<std::int64_t> area(tree.nodes.size());
    for (std::size_t i = tree.nodes.size(); i-- > 0;) {
        const RegionNode& node = tree.nodes[i];
        area[i] += node.pixel_count;
        // children are numbered after their parent
        if (node.parent >= 0) area[static_cast<std::size_t>(node.parent)] += area[i];
    }
    return area;
}

std::vector<Run> filled_runs(const RegionTree& tree, int node) {
    std::vector<Run> out;
    std::vector<int> stack{node};
    while (!stack.empty()) {
        const int k = stack.back();
        stack.pop_back();
        const auto runs = tree.runs_of(k);
        out.insert(out.end(), runs.begin(), runs.end());
        const auto& kids = tree.nodes[static_cast<std::size_t>(k)].children;
        stack.insert(stack.end(), kids.begin(), kids.end());
    }
    return out;
}

std::vector<CandidateMarker> find_candidates(const RegionTree& tree, const GrayImage& gray, int n,
                                             double max_area_ratio, int dilation, CandidateStats* stats) {
    const std::size_t want = static_cast<std::size_t>(n) * n;
    std::vector<CandidateMarker> out;
    std::vector<std::int64_t> filled;
    std::vector<int> kids;
    for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
        const RegionNode& node = tree.nodes[i];
        if (node.color != Color::white || node.children.size() < want) continue;
        if (stats) ++stats->topology;
        if (filled.empty()) filled = filled_areas(tree);
        const auto area_of = [&](int k) { return filled[static_cast<std::size_t>(k)]; };

        kids = node.children;
        std::stable_sort(kids.begin(), kids.end(), [&](int a, int b) { return area_of(a) > area_of(b); });
        kids.resize(want);
        const double largest = static_cast<double>(area_of(kids.front()));
        const double smallest = static_cast<double>(area_of(kids.back()));
        if (largest > max_area_ratio * smallest) continue;
        if (stats) ++stats->area;

        std::sort(kids.begin(), kids.end());
        CandidateMarker cand;
        cand.white_node = node.id;
        cand.white_area = node.pixel_count;
        cand.white_bbox = node.bbox;
        bool ok = true;
        for (int k : kids) {
            const RegionNode& kn = tree.nodes[static_cast<std::size_t>(k)];
            const auto mask = kn.children.empty() ? dilate_runs(tree.runs_of(k), dilation, tree.width, tree.height)
                                                  : dilate_runs(filled_runs(tree, k), dilation, tree.width, tree.height);
            if (stats) {
                for (const Run& r : mask) stats->dilation_touches += r.length();
            }
            const auto wc = weighted_centroid(gray, mask);
            if (!wc) {
                ok = false;
                break;
            }
            cand.regions.push_back({k, wc->centroid, wc->zeroth_moment, area_of(k), kn.bbox});
        }
        if (ok) out.push_back(std::move(cand));
    }
    return out;
}

}  // namespace lftag
