#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "sonar/grid.hpp"

using namespace sonar;

TEST(GridLayer, RejectsBadShape) {
  EXPECT_THROW(BitLayer(0, 4), ValidationError);
  EXPECT_THROW(BitLayer(4, -1), ValidationError);
  EXPECT_THROW(RealLayer(4, 4, 0.0, 0.0), ValidationError);
}

TEST(GridLayer, RowMajorIndexing) {
  RealLayer g(5, 3, 0.0);
  EXPECT_EQ(g.size(), 15u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const CellCoord c = g.coord(i);
    EXPECT_EQ(g.index(c), i);
    EXPECT_EQ(i, static_cast<std::size_t>(c.y * 5 + c.x));
  }
  g(4, 2) = 7.0;
  EXPECT_EQ(g.data().back(), 7.0);
}

TEST(GridLayer, BoundsCheckedAccess) {
  LabelLayer g(3, 3);
  EXPECT_NO_THROW(g.at({2, 2}));
  EXPECT_THROW(g.at({3, 0}), ValidationError);
  EXPECT_THROW(g.at({0, -1}), ValidationError);
  EXPECT_FALSE(g.in_bounds(-1, 0));
  EXPECT_TRUE(g.in_bounds(0, 0));
}

TEST(GridLayer, ShapeAndEquality) {
  BitLayer a(4, 2, 1), b(4, 2, 1);
  EXPECT_EQ(a, b);
  b(0, 0) = 0;
  EXPECT_NE(a, b);
  EXPECT_TRUE(a.same_shape(RealLayer(4, 2)));
  EXPECT_FALSE(a.same_shape(RealLayer(2, 4)));
  a.fill(0);
  EXPECT_TRUE(std::all_of(a.data().begin(), a.data().end(), [](auto v) { return v == 0; }));
}

TEST(CellCoord, OrdersRowMajor) {
  std::vector<CellCoord> v{{2, 1}, {0, 2}, {1, 1}, {5, 0}};
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v, (std::vector<CellCoord>{{5, 0}, {1, 1}, {2, 1}, {0, 2}}));
}
