#pragma once

#include "manifold/neighbor_graph.hpp"
#include "manifold/types.hpp"

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

namespace manifold::detail {

/// (reduced distance, point index); lexicographic order is the tie rule.
using Candidate = std::pair<double, Index>;

/// Fixed-capacity max-heap keeping the k smallest candidates.
class KnnHeap {
 public:
  explicit KnnHeap(Index k) : k_(static_cast<std::size_t>(k)) { items_.reserve(k_ + 1); }

  bool full() const noexcept { return items_.size() == k_; }
  /// Largest reduced distance kept so far, or +inf while not full.
  double bound() const noexcept { return full() ? items_.front().first : std::numeric_limits<double>::infinity(); }

  void offer(double d, Index j) {
    const Candidate c{d, j};
    if (!full()) {
      items_.push_back(c);
      std::push_heap(items_.begin(), items_.end());
    } else if (c < items_.front()) {
      std::pop_heap(items_.begin(), items_.end());
      items_.back() = c;
      std::push_heap(items_.begin(), items_.end());
    }
  }

  std::vector<Candidate>& sorted() {
    std::sort_heap(items_.begin(), items_.end());
    return items_;
  }

  void clear() { items_.clear(); }

 private:
  std::size_t k_;
  std::vector<Candidate> items_;
};

/// Bucketed kd-tree over the rows of a point matrix, splitting on the
/// dimension of largest spread at the median.
class KdTree {
 public:
  KdTree(const PointMatrix& points, const Metric& metric, Index leaf_size = 16)
      : points_(points), metric_(metric), leaf_size_(leaf_size) {
    order_.resize(static_cast<std::size_t>(points.rows()));
    std::iota(order_.begin(), order_.end(), Index{0});
    nodes_.reserve(static_cast<std::size_t>(2 * points.rows() / leaf_size + 2));
    build(0, points.rows());
  }

  /// Offers every point except `self` that can enter the heap.
  void query(const double* q, Index self, KnnHeap& heap) const {
    std::vector<double> offsets(static_cast<std::size_t>(points_.cols()), 0.0);
    search(0, q, self, heap, 0.0, offsets);
  }

 private:
  struct Node {
    Index begin, end;        // range in order_
    Index left = -1, right = -1;
    Index dim = -1;
    double split = 0.0;
  };

  Index build(Index begin, Index end) {
    const Index id = static_cast<Index>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    Index best_dim = 0;
    double best_spread = -1.0;
    for (Index k = 0; k < points_.cols(); ++k) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (Index s = begin; s < end; ++s) {
        const double v = points_(order_[static_cast<std::size_t>(s)], k);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = k;
      }
    }
    if (best_spread <= 0.0) return id;

    const Index mid = begin + (end - begin) / 2;
    auto first = order_.begin() + begin;
    std::nth_element(first, order_.begin() + mid, order_.begin() + end, [&](Index a, Index b) {
      return points_(a, best_dim) < points_(b, best_dim);
    });
    const double split = points_(order_[static_cast<std::size_t>(mid)], best_dim);
    const Index left = build(begin, mid);
    const Index right = build(mid, end);
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node.left = left;
    node.right = right;
    node.dim = best_dim;
    node.split = split;
    return id;
  }

  // `lower` is a lower bound on the reduced distance from q to any point
  // below `node`, assembled from per-dimension offsets to splitting planes.
  void search(Index node_id, const double* q, Index self, KnnHeap& heap, double lower,
              std::vector<double>& offsets) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.left < 0) {
      const Index dims = points_.cols();
      for (Index s = node.begin; s < node.end; ++s) {
        const Index j = order_[static_cast<std::size_t>(s)];
        if (j == self) continue;
        const double* p = points_.data() + j * dims;
        double acc = 0.0;
        for (Index k = 0; k < dims; ++k) acc += metric_.reduce_term(q[k] - p[k]);
        heap.offer(acc, j);
      }
      return;
    }
    const double diff = q[node.dim] - node.split;
    const Index near = diff < 0 ? node.left : node.right;
    const Index far = diff < 0 ? node.right : node.left;
    search(near, q, self, heap, lower, offsets);

    double& off = offsets[static_cast<std::size_t>(node.dim)];
    const double saved = off;
    const double term = metric_.reduce_term(diff);
    const double far_lower = lower - saved + term;
    // Ties must still be visited so the index tie-break stays exact; the
    // slack absorbs rounding in the incremental bound.
    if (far_lower * (1.0 - 1e-12) <= heap.bound()) {
      off = term;
      search(far, q, self, heap, far_lower, offsets);
      off = saved;
    }
  }

  const PointMatrix& points_;
  Metric metric_;
  Index leaf_size_;
  std::vector<Index> order_;
  std::vector<Node> nodes_;
};

}  // namespace manifold::detail
