#include <gtest/gtest.h>

#include "adacube/tree.hpp"

using namespace adacube;

namespace {

FullKAryTree worked_example() {
  FullKAryTree t(3);
  t.expand({1, 0});
  t.expand({3, 1});
  t.expand({7, 2});
  return t;
}

}  // namespace

TEST(Tree, ChildAndParentLabels) {
  const FullKAryTree t(3);
  EXPECT_EQ(t.child({3, 1}, 1), (NodeLabel{7, 2}));
  EXPECT_EQ(t.child({7, 2}, 3), (NodeLabel{21, 3}));
  EXPECT_EQ(t.parent({20, 3}), (NodeLabel{7, 2}));
  for (unsigned r = 1; r <= 3; ++r) EXPECT_EQ(t.parent(t.child({5, 2}, r)), (NodeLabel{5, 2}));
}

TEST(Tree, ExpandKeepsTreeFull) {
  FullKAryTree t = worked_example();
  EXPECT_EQ(t.size(), 10u);
  EXPECT_EQ(t.inner_count(), 3u);
  EXPECT_EQ(t.leaves().size(), 7u);
  EXPECT_EQ(t.height(), 3u);
  EXPECT_TRUE(t.is_valid());
  EXPECT_THROW(t.expand({3, 1}), InvalidInput);
  EXPECT_THROW(t.expand({4, 1}), InvalidInput);
}

TEST(Tree, PreorderOfWorkedExample) {
  const std::vector<NodeLabel> expect{{1, 0}, {1, 1}, {2, 1}, {3, 1}, {7, 2}, {19, 3}, {20, 3}, {21, 3}, {8, 2}, {9, 2}};
  EXPECT_EQ(worked_example().preorder(), expect);
}

TEST(Tree, SerializeRoundTrip) {
  const FullKAryTree t = worked_example();
  EXPECT_EQ(t.serialize(), "1001100000");
  EXPECT_EQ(FullKAryTree::deserialize(t.serialize(), 3), t);
  EXPECT_THROW(FullKAryTree::deserialize("10", 2), InvalidInput);
  EXPECT_THROW(FullKAryTree::deserialize("1000", 2), InvalidInput);
}

TEST(Tree, DepthProfileAndIntervals) {
  const FullKAryTree t = worked_example();
  std::vector<std::size_t> leaves, inner;
  t.depth_profile(leaves, inner);
  EXPECT_EQ(leaves, (std::vector<std::size_t>{0, 2, 2, 3}));
  EXPECT_EQ(inner, (std::vector<std::size_t>{1, 1, 1, 0}));
  const auto [lo, hi] = t.unit_interval({8, 2});
  EXPECT_DOUBLE_EQ(lo, 7.0 / 9.0);
  EXPECT_DOUBLE_EQ(hi, 8.0 / 9.0);
}

TEST(Tree, RejectsFanOutBelowTwo) { EXPECT_THROW(FullKAryTree(1), InvalidInput); }
