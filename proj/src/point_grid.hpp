#pragma once

#include "splatgen/common.hpp"

#include <algorithm>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace splatgen {

// Uniform hash grid for k-nearest-neighbor queries over a fixed point set.
// Queries expand cell rings outward until the k-th best distance is closer
// than the nearest unvisited ring, so results are exact.
class PointGrid {
public:
    explicit PointGrid(std::span<const Vec3> points) : points_(points) {
        for (const Vec3& p : points_) bounds_.extend(p);
        double diag = bounds_.diagonal();
        size_t n = std::max<size_t>(points_.size(), 1);
        cell_ = std::max(diag / std::cbrt(static_cast<double>(n)), 1e-12);
        cells_.reserve(n);
        for (size_t i = 0; i < points_.size(); ++i) {
            cells_[key_of(points_[i])].push_back(static_cast<int>(i));
        }
    }

    // Distances to the k nearest neighbors of points_[idx] (excluding idx),
    // ascending. Returns fewer than k when the set is too small.
    std::vector<double> knn_distances(size_t idx, int k) const {
        const Vec3& q = points_[idx];
        std::vector<double> best; // squared distances, max-heap
        best.reserve(static_cast<size_t>(k) + 1);
        auto consider = [&](int j) {
            if (static_cast<size_t>(j) == idx) return;
            double d2 = (points_[static_cast<size_t>(j)] - q).squaredNorm();
            if (static_cast<int>(best.size()) < k) {
                best.push_back(d2);
                std::push_heap(best.begin(), best.end());
            } else if (d2 < best.front()) {
                std::pop_heap(best.begin(), best.end());
                best.back() = d2;
                std::push_heap(best.begin(), best.end());
            }
        };

        const auto center = cell_coords(q);
        for (int ring = 0;; ++ring) {
            // Ring of cells at Chebyshev distance `ring` from the center cell.
            bool any_cell = visit_ring(center, ring, consider);
            bool have_k = static_cast<int>(best.size()) >= k;
            double ring_lower = static_cast<double>(ring) * cell_; // min distance to next ring
            if (have_k && best.front() <= ring_lower * ring_lower) break;
            if (!any_cell && ring_exceeds_bounds(center, ring)) break;
        }
        std::sort(best.begin(), best.end());
        std::vector<double> out(best.size());
        for (size_t i = 0; i < best.size(); ++i) out[i] = std::sqrt(best[i]);
        return out;
    }

    double nearest_distance(size_t idx) const {
        auto d = knn_distances(idx, 1);
        return d.empty() ? 0.0 : d[0];
    }

private:
    struct CellKey {
        int64_t x, y, z;
        bool operator==(const CellKey&) const = default;
    };
    struct CellHash {
        size_t operator()(const CellKey& k) const {
            uint64_t h = static_cast<uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
            h ^= static_cast<uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full;
            h ^= static_cast<uint64_t>(k.z) * 0x165667B19E3779F9ull;
            h ^= h >> 29;
            return static_cast<size_t>(h);
        }
    };

    CellKey cell_coords(const Vec3& p) const {
        return {static_cast<int64_t>(std::floor(p.x() / cell_)),
                static_cast<int64_t>(std::floor(p.y() / cell_)),
                static_cast<int64_t>(std::floor(p.z() / cell_))};
    }
    CellKey key_of(const Vec3& p) const { return cell_coords(p); }

    template <typename Fn>
    bool visit_ring(const CellKey& c, int ring, Fn&& fn) const {
        bool any = false;
        auto visit_cell = [&](int64_t x, int64_t y, int64_t z) {
            auto it = cells_.find(CellKey{x, y, z});
            if (it == cells_.end()) return;
            any = true;
            for (int j : it->second) fn(j);
        };
        if (ring == 0) {
            visit_cell(c.x, c.y, c.z);
            return any;
        }
        for (int64_t dx = -ring; dx <= ring; ++dx) {
            for (int64_t dy = -ring; dy <= ring; ++dy) {
                for (int64_t dz = -ring; dz <= ring; ++dz) {
                    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
                    visit_cell(c.x + dx, c.y + dy, c.z + dz);
                }
            }
        }
        return any;
    }

    bool ring_exceeds_bounds(const CellKey& c, int ring) const {
        // Once the ring lies entirely outside the populated bounds there is
        // nothing left to find.
        auto lo = cell_coords(bounds_.min);
        auto hi = cell_coords(bounds_.max);
        return c.x - ring < lo.x && c.x + ring > hi.x && c.y - ring < lo.y && c.y + ring > hi.y &&
               c.z - ring < lo.z && c.z + ring > hi.z;
    }

    std::span<const Vec3> points_;
    Aabb bounds_;
    double cell_ = 1.0;
    std::unordered_map<CellKey, std::vector<int>, CellHash> cells_;
};

// Mean distance to the nearest neighbor over all points. Zero for < 2 points.
inline double mean_nn_spacing(std::span<const Vec3> points) {
    if (points.size() < 2) return 0.0;
    PointGrid grid(points);
    double sum = 0.0;
    for (size_t i = 0; i < points.size(); ++i) sum += grid.nearest_distance(i);
    return sum / static_cast<double>(points.size());
}

inline double median_nn_spacing(std::span<const Vec3> points) {
    if (points.size() < 2) return 0.0;
    PointGrid grid(points);
    std::vector<double> d(points.size());
    for (size_t i = 0; i < points.size(); ++i) d[i] = grid.nearest_distance(i);
    std::nth_element(d.begin(), d.begin() + static_cast<long>(d.size() / 2), d.end());
    return d[d.size() / 2];
}

} // namespace splatgen
