/**
 * @file tree.hpp
 * @brief Full k-ary trees with (position, depth) node labels.
 *
 * Node (p, q) is the p-th possible node at depth q (p is 1-based). The root is
 * (1, 0) and child r = 1..k of (p, q) is (k(p-1) + r, q + 1).
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "adacube/error.hpp"

namespace adacube {

struct NodeLabel {
  std::uint64_t p = 1;
  unsigned q = 0;
  auto operator<=>(const NodeLabel&) const = default;
};

class FullKAryTree {
 public:
  explicit FullKAryTree(unsigned k = 2) : k_(k) {
    detail::require(k >= 2, "FullKAryTree: k must be at least 2");
    nodes_.insert({1, 0});
  }

  unsigned k() const { return k_; }
  const std::set<NodeLabel>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool contains(NodeLabel n) const { return nodes_.count(n) != 0; }

  NodeLabel child(NodeLabel n, unsigned r) const { return {k_ * (n.p - 1) + r, n.q + 1}; }
  NodeLabel parent(NodeLabel n) const { return {(n.p - 1) / k_ + 1, n.q - 1}; }

  bool is_leaf(NodeLabel n) const { return !contains(child(n, 1)); }

  /// Turn leaf n into an inner node with k leaf children.
  void expand(NodeLabel n) {
    detail::require(contains(n), "FullKAryTree::expand: node not in tree");
    detail::require(is_leaf(n), "FullKAryTree::expand: node already has children");
    for (unsigned r = 1; r <= k_; ++r) nodes_.insert(child(n, r));
  }

  std::size_t inner_count() const {
    std::size_t c = 0;
    for (const auto& n : nodes_) c += !is_leaf(n);
    return c;
  }

  unsigned height() const {
    unsigned h = 0;
    for (const auto& n : nodes_) h = std::max(h, n.q);
    return h;
  }

  std::vector<NodeLabel> leaves() const {
    std::vector<NodeLabel> out;
    for (const auto& n : nodes_)
      if (is_leaf(n)) out.push_back(n);
    return out;
  }

  /// Leaf and inner counts per depth, indexed 0..height.
  void depth_profile(std::vector<std::size_t>& leaves, std::vector<std::size_t>& inner) const {
    leaves.assign(height() + 1, 0);
    inner.assign(height() + 1, 0);
    for (const auto& n : nodes_) (is_leaf(n) ? leaves : inner)[n.q] += 1;
  }

  /// Interval [lo, hi] of node n as fractions of the root interval.
  std::pair<double, double> unit_interval(NodeLabel n) const {
    double width = 1.0;
    for (unsigned i = 0; i < n.q; ++i) width /= k_;
    return {static_cast<double>(n.p - 1) * width, static_cast<double>(n.p) * width};
  }

  /// Every node other than the root has its parent and all siblings present.
  bool is_valid() const {
    if (!contains({1, 0})) return false;
    for (const auto& n : nodes_) {
      if (n.q == 0) {
        if (n.p != 1) return false;
        continue;
      }
      const NodeLabel par = parent(n);
      if (!contains(par)) return false;
      for (unsigned r = 1; r <= k_; ++r)
        if (!contains(child(par, r))) return false;
    }
    return true;
  }

  std::vector<NodeLabel> preorder() const {
    std::vector<NodeLabel> out;
    out.reserve(nodes_.size());
    std::function<void(NodeLabel)> visit = [&](NodeLabel n) {
      out.push_back(n);
      if (is_leaf(n)) return;
      for (unsigned r = 1; r <= k_; ++r) visit(child(n, r));
    };
    visit({1, 0});
    return out;
  }

  /// Canonical shape key: preorder list of '1' (inner) and '0' (leaf).
  std::string serialize() const {
    std::string s;
    for (const auto& n : preorder()) s.push_back(is_leaf(n) ? '0' : '1');
    return s;
  }

  static FullKAryTree deserialize(const std::string& flags, unsigned k) {
    FullKAryTree t(k);
    std::size_t pos = 0;
    std::function<void(NodeLabel)> build = [&](NodeLabel n) {
      detail::require(pos < flags.size(), "FullKAryTree::deserialize: truncated shape");
      const char c = flags[pos++];
      detail::require(c == '0' || c == '1', "FullKAryTree::deserialize: bad flag");
      if (c == '0') return;
      t.expand(n);
      for (unsigned r = 1; r <= k; ++r) build(t.child(n, r));
    };
    build({1, 0});
    detail::require(pos == flags.size(), "FullKAryTree::deserialize: trailing flags");
    return t;
  }

  bool operator==(const FullKAryTree& o) const { return k_ == o.k_ && nodes_ == o.nodes_; }

 private:
  unsigned k_;
  std::set<NodeLabel> nodes_;
};

}  // namespace adacube
