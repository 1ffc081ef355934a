#ifndef UFRBF_SPATIAL_INDEX_HPP
#define UFRBF_SPATIAL_INDEX_HPP

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

#include "ufrbf/types.hpp"

namespace ufrbf {

/// Static kd-tree over a point array with exact nearest and k-nearest
/// queries. Results are ordered by (distance, index): equidistant points
/// resolve to the lower index, matching a brute-force scan.
template <int Dim>
class SpatialIndex
{
public:
    SpatialIndex() = default;

    explicit SpatialIndex(PointList<Dim> points) : points_(std::move(points))
    {
        order_.resize(points_.size());
        std::iota(order_.begin(), order_.end(), Index{0});
        nodes_.reserve(2 * points_.size() / LeafSize + 2);
        if (!points_.empty()) build(0, static_cast<Index>(points_.size()));
    }

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    const PointList<Dim>& points() const { return points_; }
    const Point<Dim>& point(Index i) const { return points_[i]; }

    /// Index of the closest point; ties go to the lowest index.
    Index nearest(const Point<Dim>& q) const
    {
        auto r = knn(q, 1);
        return r.front();
    }

    /// The k closest point indices sorted by (distance, index).
    std::vector<Index> knn(const Point<Dim>& q, std::size_t k) const
    {
        if (points_.empty()) throw ParameterError("SpatialIndex: query on empty point set");
        k = std::min(k, points_.size());
        Heap heap;
        search(0, q, k, heap);
        std::vector<Index> out(heap.size());
        for (std::size_t i = out.size(); i-- > 0;) {
            out[i] = heap.top().second;
            heap.pop();
        }
        return out;
    }

private:
    static constexpr Index LeafSize = 12;

    struct Node
    {
        Index begin, end;          // range in order_
        int axis = -1;             // -1 for leaves
        double split = 0.0;
        Index left = -1, right = -1;
        Point<Dim> lo, hi;         // bounding box of the subtree
    };

    // Max-heap on (distance^2, index): top is the current worst candidate.
    using Entry = std::pair<double, Index>;
    using Heap = std::priority_queue<Entry>;

    Index build(Index begin, Index end)
    {
        const Index id = static_cast<Index>(nodes_.size());
        nodes_.push_back({begin, end});
        Point<Dim> lo = points_[order_[begin]], hi = lo;
        for (Index i = begin + 1; i < end; ++i) {
            lo = lo.cwiseMin(points_[order_[i]]);
            hi = hi.cwiseMax(points_[order_[i]]);
        }
        nodes_[id].lo = lo;
        nodes_[id].hi = hi;
        if (end - begin <= LeafSize) return id;

        int axis = 0;
        (hi - lo).maxCoeff(&axis);
        const Index mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](Index a, Index b) { return points_[a][axis] < points_[b][axis]; });
        const Index left = build(begin, mid);
        const Index right = build(mid, end);
        nodes_[id].axis = axis;
        nodes_[id].split = points_[order_[mid]][axis];
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    static double box_distance2(const Node& n, const Point<Dim>& q)
    {
        return (n.lo - q).cwiseMax(q - n.hi).cwiseMax(0.0).squaredNorm();
    }

    void search(Index id, const Point<Dim>& q, std::size_t k, Heap& heap) const
    {
        const Node& n = nodes_[id];
        // Equal distance must still be explored: a tie with a lower index may sit there.
        if (heap.size() == k && box_distance2(n, q) > heap.top().first) return;
        if (n.axis < 0) {
            for (Index i = n.begin; i < n.end; ++i) {
                const Index idx = order_[i];
                const Entry e{(points_[idx] - q).squaredNorm(), idx};
                if (heap.size() < k) heap.push(e);
                else if (e < heap.top()) {
                    heap.pop();
                    heap.push(e);
                }
            }
            return;
        }
        const bool go_left = q[n.axis] < n.split;
        search(go_left ? n.left : n.right, q, k, heap);
        search(go_left ? n.right : n.left, q, k, heap);
    }

    PointList<Dim> points_;
    std::vector<Index> order_;
    std::vector<Node> nodes_;
};

} // namespace ufrbf

#endif // UFRBF_SPATIAL_INDEX_HPP
