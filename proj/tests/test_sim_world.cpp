#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "sonar/planner.hpp"
#include "sonar/sim_world.hpp"
#include "test_util.hpp"

using namespace sonar;

namespace {

const char* kRoom =
    "12 7 0.25\n"
    "############\n"
    "#..........#\n"
    "#..........#\n"
    "#....A.....#\n"
    "#........1.#\n"
    "#..........#\n"
    "############\n"
    "class 1 chair\n"
    "target chair\n";

const char* kCorridor =
    "14 3 0.25\n"
    "##############\n"
    "#A.........1.#\n"
    "##############\n"
    "class 1 toilet\n"
    "target toilet\n";

SensorConfig quiet() {
  SensorConfig c;
  c.noise = false;
  return c;
}

}  // namespace

TEST(Kinematics, ForwardAndTurns) {
  const Scene s = test::scene_from(kRoom);
  AgentPose p = pose_at_cell({3, 3}, 0.25, 0.0);
  const AgentPose f = step(s, p, Action::MoveForward);
  EXPECT_EQ(f.cell(0.25), (CellCoord{4, 3}));
  EXPECT_DOUBLE_EQ(f.x - p.x, 0.25);

  AgentPose t = p;
  for (int i = 0; i < 12; ++i) t = step(s, t, Action::TurnLeft);
  EXPECT_NEAR(wrap_to_pi(t.heading - p.heading), 0.0, 1e-12);
  for (int i = 0; i < 12; ++i) t = step(s, t, Action::TurnRight);
  EXPECT_NEAR(wrap_to_pi(t.heading - p.heading), 0.0, 1e-12);

  // Heading pi/2 moves up the rows.
  const AgentPose up = step(s, pose_at_cell({3, 3}, 0.25, std::numbers::pi / 2), Action::MoveForward);
  EXPECT_EQ(up.cell(0.25), (CellCoord{3, 2}));

  const AgentPose at_wall = pose_at_cell({1, 1}, 0.25, std::numbers::pi);
  EXPECT_EQ(step(s, at_wall, Action::MoveForward), at_wall);
  EXPECT_EQ(step(s, p, Action::Stop), p);
}

TEST(Kinematics, RandomWalksStayOnFreeCells) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Scene s = generate_scene({32, 32, seed % 2 ? SemanticDensity::Sparse : SemanticDensity::Dense, seed});
    std::mt19937_64 rng(seed);
    AgentPose p = s.start;
    for (int i = 0; i < 2000; ++i) {
      const Action a = static_cast<Action>(rng() % 3);
      p = step(s, p, a);
      const CellCoord c = p.cell(s.resolution());
      ASSERT_TRUE(s.walls.in_bounds(c));
      ASSERT_FALSE(s.walls[c]);
      ASSERT_GE(p.heading, 0.0);
      ASSERT_LT(p.heading, 2 * std::numbers::pi);
    }
  }
}

TEST(Visibility, EnclosedAgentSeesOnlyWalls) {
  BitLayer walls(3, 3, 1);
  walls(1, 1) = 0;
  for (int k = 0; k < 12; ++k) {
    const auto vis = visible_cells(walls, pose_at_cell({1, 1}, 0.25, k * kTurnRad), quiet());
    for (CellCoord c : vis) EXPECT_TRUE(c == (CellCoord{1, 1}) || walls[c]);
    EXPECT_GT(vis.size(), 1u);
  }
}

TEST(Visibility, RadiusOneArc) {
  BitLayer open(11, 11, 0);
  SensorConfig c = quiet();
  c.max_range_m = 0.25;
  const auto vis = visible_cells(open, pose_at_cell({5, 5}, 0.25, 0.0), c);
  // Rays at +-0.5 .. +-39.5 degrees, samples at 0, 0.5 and 1 cell: the far sample rounds to y = 4 above 30 degrees.
  EXPECT_EQ(vis, (std::vector<CellCoord>{{6, 4}, {5, 5}, {6, 5}, {6, 6}}));
}

TEST(Visibility, MonotoneInRange) {
  const Scene s = generate_scene({40, 40, SemanticDensity::Dense, 3});
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 40; ++trial) {
    CellCoord c;
    do c = {static_cast<int>(rng() % 40), static_cast<int>(rng() % 40)};
    while (s.walls[c]);
    const AgentPose p = pose_at_cell(c, 0.25, (rng() % 12) * kTurnRad);
    std::vector<CellCoord> prev;
    for (double r : {0.5, 1.0, 2.5, 5.0}) {
      SensorConfig cfg = quiet();
      cfg.max_range_m = r;
      const auto vis = visible_cells(s.walls, p, cfg);
      ASSERT_TRUE(std::includes(vis.begin(), vis.end(), prev.begin(), prev.end()));
      prev = vis;
    }
  }
}

TEST(Observe, NoiseOffDetectsEverythingAtFullConfidence) {
  const Scene s = test::scene_from(kRoom);
  const auto obs = observe(s, s.start, 1, quiet());
  ASSERT_EQ(obs.detections.size(), 1u);
  EXPECT_EQ(obs.detections[0].cell, (CellCoord{9, 4}));
  EXPECT_EQ(obs.detections[0].confidence, 1.0);
}

TEST(Observe, FalseNegativeOneDropsAll) {
  const Scene s = test::scene_from(kRoom);
  SensorConfig c;
  c.false_negative = 1.0;
  c.false_positive_rate = 0.0;
  EXPECT_TRUE(observe(s, s.start, 7, c).detections.empty());
}

TEST(Observe, DeterministicAndInsideFov) {
  const Scene s = generate_scene({40, 40, SemanticDensity::Dense, 5});
  SensorConfig c;
  c.false_positive_rate = 0.05;
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    CellCoord cell;
    do cell = {static_cast<int>(rng() % 40), static_cast<int>(rng() % 40)};
    while (s.walls[cell]);
    const AgentPose p = pose_at_cell(cell, 0.25, (rng() % 12) * kTurnRad);
    const auto a = observe(s, p, trial, c);
    const auto b = observe(s, p, trial, c);
    ASSERT_EQ(a.detections, b.detections);
    ASSERT_EQ(a.visible_cells, b.visible_cells);
    for (const auto& d : a.detections) {
      ASSERT_TRUE(std::binary_search(a.visible_cells.begin(), a.visible_cells.end(), d.cell));
      ASSERT_GE(d.confidence, 0.0);
      ASSERT_LE(d.confidence, 1.0);
    }
    for (CellCoord w : a.wall_hits) ASSERT_TRUE(s.walls[w]);
  }
}

TEST(SemanticScore, OracleValues) {
  const Scene s = test::scene_from(kCorridor);
  SensorConfig c = quiet();
  c.score_lambda_m = 2.5;
  const std::vector<CellCoord> at_target{{11, 1}}, ten_away{{1, 1}};
  EXPECT_EQ(semantic_score(s, at_target, s.target_class, 0, c), 1.0);
  EXPECT_NEAR(semantic_score(s, ten_away, s.target_class, 0, c), std::exp(-1.0), 1e-12);

  double prev = 2.0;
  for (int x = 11; x >= 1; --x) {
    const std::vector<CellCoord> v{{x, 1}};
    const double sc = semantic_score(s, v, s.target_class, 0, c);
    EXPECT_LE(sc, prev);
    prev = sc;
  }
}

TEST(SemanticScore, UnreachableTargetScoresZero) {
  Scene s = test::scene_from(kCorridor);
  const std::vector<CellCoord> v{{1, 1}};
  // A class with no placed objects has an infinite distance everywhere.
  s.class_names.push_back("sofa");
  EXPECT_EQ(semantic_score(s, v, s.class_id("sofa"), 0, quiet()), 0.0);
}

TEST(SceneFormat, ParseAndDerivedFields) {
  const Scene s = test::scene_from(kCorridor);
  EXPECT_EQ(s.width(), 14);
  EXPECT_EQ(s.class_names, (std::vector<std::string>{"", "toilet"}));
  EXPECT_EQ(s.start.cell(0.25), (CellCoord{1, 1}));
  EXPECT_DOUBLE_EQ(s.optimal_path_length, 2.5);
  EXPECT_DOUBLE_EQ(s.target_distance(1, 1), 2.5);
  EXPECT_EQ(s.object_layer(11, 1), s.target_class);
}

TEST(SceneFormat, RoundTrip) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Scene a = generate_scene({36, 30, seed % 2 ? SemanticDensity::Sparse : SemanticDensity::Dense, seed});
    std::stringstream ss;
    write_scene(ss, a);
    const Scene b = parse_scene(ss, a.name);
    EXPECT_EQ(b.walls, a.walls);
    EXPECT_EQ(b.object_layer, a.object_layer);
    EXPECT_EQ(b.start, a.start);
    EXPECT_EQ(b.class_names[b.target_class], a.class_names[a.target_class]);
    EXPECT_EQ(b.optimal_path_length, a.optimal_path_length);
  }
}

TEST(SceneFormat, RejectsInvalidScenes) {
  auto bad = [](const std::string& text) { return [text] { test::scene_from(text); }; };
  EXPECT_THROW(bad("")(), ValidationError);
  EXPECT_THROW(bad("3 1 0.25\n...\nclass 1 bed\ntarget bed\n")(), ValidationError);         // no start
  EXPECT_THROW(bad("3 1 0.25\nA.A\nclass 1 bed\ntarget bed\n")(), ValidationError);         // two starts
  EXPECT_THROW(bad("3 1 0.25\nA.\nclass 1 bed\ntarget bed\n")(), ValidationError);          // short row
  EXPECT_THROW(bad("3 1 0.25\nA.x\nclass 1 bed\ntarget bed\n")(), ValidationError);         // undefined symbol
  EXPECT_THROW(bad("3 1 0.25\nA#1\nclass 1 bed\ntarget bed\n")(), ValidationError);         // unreachable
  EXPECT_THROW(bad("3 1 0.25\nA.1\nclass 1 bed\ntarget sofa\n")(), ValidationError);        // unknown target
  EXPECT_THROW(bad("3 1 0.25\nA.1\nclass 1 bed\ntarget bed\noptimal 9\n")(), ValidationError);
  EXPECT_THROW(bad("3 1 0.25\nA.1\nclass 1 bed\ntarget bed\ncolour red\n")(), ValidationError);
  EXPECT_NO_THROW(bad("3 1 0.25\nA.1\nclass 1 bed\ntarget bed\noptimal 0.5\n")());
}

TEST(SceneFormat, ShippedScenesLoad) {
  for (const char* name : {"corridor.scene", "two_rooms.scene", "apartment.scene"}) {
    const Scene s = load_scene(std::string(SONAR_DATA_DIR) + "/scenes/" + name);
    EXPECT_GT(s.optimal_path_length, 0.0) << name;
  }
}

TEST(Generator, ValidAndDeterministic) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (auto density : {SemanticDensity::Sparse, SemanticDensity::Dense}) {
      const Scene a = generate_scene({48, 48, density, seed});
      const Scene b = generate_scene({48, 48, density, seed});
      EXPECT_EQ(a.walls, b.walls);
      EXPECT_EQ(a.object_layer, b.object_layer);
      EXPECT_EQ(a.start, b.start);
      EXPECT_FALSE(a.walls[a.start.cell(a.resolution())]);
      EXPECT_TRUE(std::isfinite(a.optimal_path_length));
      EXPECT_GT(a.optimal_path_length, 0.0);
    }
    auto labelled = [](const Scene& s) {
      return std::count_if(s.object_layer.data().begin(), s.object_layer.data().end(),
                           [](ClassId c) { return c != kNoClass; });
    };
    EXPECT_GT(labelled(generate_scene({48, 48, SemanticDensity::Dense, seed})),
              2 * labelled(generate_scene({48, 48, SemanticDensity::Sparse, seed})));
  }
  EXPECT_THROW(generate_scene({16, 48, SemanticDensity::Dense, 1}), ValidationError);
}
