// Procedural multi-room scenes for suites and tests.

#include <algorithm>
#include <array>
#include <numeric>
#include <string>

#include "sonar/rng.hpp"
#include "sonar/sim_world.hpp"

namespace sonar {
namespace {

enum Cls : ClassId {
  kBed = 1,
  kNightstand,
  kWardrobe,
  kSofa,
  kTv,
  kCoffeeTable,
  kPlant,
  kToilet,
  kSink,
  kBathtub,
  kFridge,
  kCounter,
  kDiningTable,
  kChair,
  kRug,
};

enum class RoomType { Bedroom, Living, Bathroom, Kitchen };

struct Furniture {
  ClassId cls;
  int w;
  int h;
  int count;
};

std::vector<Furniture> furniture_for(RoomType t, bool dense) {
  switch (t) {
    case RoomType::Bedroom:
      return dense ? std::vector<Furniture>{{kBed, 4, 5, 1}, {kNightstand, 2, 2, 2}, {kWardrobe, 2, 5, 1}}
                   : std::vector<Furniture>{{kBed, 3, 4, 1}, {kNightstand, 1, 1, 2}, {kWardrobe, 1, 3, 1}};
    case RoomType::Living:
      return dense ? std::vector<Furniture>{{kSofa, 3, 5, 1}, {kTv, 2, 4, 1}, {kCoffeeTable, 3, 3, 1}, {kPlant, 2, 2, 2}}
                   : std::vector<Furniture>{{kSofa, 2, 4, 1}, {kTv, 1, 3, 1}, {kCoffeeTable, 2, 2, 1}};
    case RoomType::Bathroom:
      return dense ? std::vector<Furniture>{{kToilet, 2, 3, 1}, {kSink, 2, 3, 1}, {kBathtub, 3, 5, 1}}
                   : std::vector<Furniture>{{kToilet, 2, 2, 1}, {kSink, 1, 2, 1}, {kBathtub, 2, 4, 1}};
    case RoomType::Kitchen:
      return dense ? std::vector<Furniture>{{kFridge, 3, 3, 1}, {kCounter, 2, 6, 1}, {kDiningTable, 4, 4, 1}, {kChair, 2, 2, 3}}
                   : std::vector<Furniture>{{kFridge, 2, 2, 1}, {kCounter, 1, 5, 1}, {kDiningTable, 3, 3, 1}, {kChair, 1, 1, 2}};
  }
  return {};
}

RoomType room_for_target(ClassId target) {
  switch (target) {
    case kBed: return RoomType::Bedroom;
    case kToilet: return RoomType::Bathroom;
    case kFridge: return RoomType::Kitchen;
    default: return RoomType::Living;
  }
}

// Rooms that share a wall with the target room in real homes (en-suite bathroom, open-plan kitchen).
RoomType companion_of(RoomType t) {
  switch (t) {
    case RoomType::Bedroom: return RoomType::Bathroom;
    case RoomType::Bathroom: return RoomType::Bedroom;
    case RoomType::Living: return RoomType::Kitchen;
    case RoomType::Kitchen: return RoomType::Living;
  }
  return t;
}

struct Room {
  int x0, y0, x1, y1;  // interior, inclusive
};

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace

const std::vector<std::string>& default_class_names() {
  static const std::vector<std::string> names = {"",        "bed",          "nightstand", "wardrobe", "sofa",
                                                 "tv",      "coffee_table", "plant",      "toilet",   "sink",
                                                 "bathtub", "fridge",       "counter",    "dining_table", "chair",
                                                 "rug"};
  return names;
}

Scene generate_scene(const SceneGenParams& p) {
  if (p.width < 24 || p.height < 24) throw ValidationError("generated scenes need at least 24x24 cells");
  Rng rng(mix_seed(p.seed, 0x5cee));
  const bool dense = p.density == SemanticDensity::Dense;

  Scene scene;
  scene.name = std::string(dense ? "dense-" : "sparse-") + std::to_string(p.seed);
  scene.class_names = default_class_names();
  scene.walls = BitLayer(p.width, p.height, 0, kDefaultResolution);

  // 3x3 room lattice separated by one-cell walls.
  constexpr int kRooms = 3;
  std::array<int, kRooms + 1> xs{}, ys{};
  for (int i = 0; i <= kRooms; ++i) {
    xs[i] = i == kRooms ? p.width - 1 : i * (p.width - 1) / kRooms;
    ys[i] = i == kRooms ? p.height - 1 : i * (p.height - 1) / kRooms;
  }
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x)
      if (std::find(xs.begin(), xs.end(), x) != xs.end() || std::find(ys.begin(), ys.end(), y) != ys.end())
        scene.walls(x, y) = 1;

  std::vector<Room> rooms;
  for (int ry = 0; ry < kRooms; ++ry)
    for (int rx = 0; rx < kRooms; ++rx) rooms.push_back({xs[rx] + 1, ys[ry] + 1, xs[rx + 1] - 1, ys[ry + 1] - 1});

  // Doors: random spanning tree over the lattice plus a few extra openings.
  struct Edge {
    int a, b;
  };
  std::vector<Edge> edges;
  for (int r = 0; r < kRooms * kRooms; ++r) {
    if (r % kRooms + 1 < kRooms) edges.push_back({r, r + 1});
    if (r + kRooms < kRooms * kRooms) edges.push_back({r, r + kRooms});
  }
  std::shuffle(edges.begin(), edges.end(), rng);
  std::vector<int> comp(kRooms * kRooms);
  std::iota(comp.begin(), comp.end(), 0);
  auto find = [&](int v) {
    while (comp[v] != v) v = comp[v] = comp[comp[v]];
    return v;
  };
  std::vector<std::pair<int, int>> doors;
  auto door_between = [&](int a, int b) {
    return std::find(doors.begin(), doors.end(), std::pair{a, b}) != doors.end();
  };
  auto open_door = [&](const Edge& e) {
    doors.emplace_back(e.a, e.b);
    const Room& a = rooms[e.a];
    const Room& b = rooms[e.b];
    if (e.b == e.a + 1) {  // vertical wall at x = a.x1 + 1
      const int y = uniform_int(rng, a.y0 + 1, a.y1 - 3);
      for (int k = 0; k < 3; ++k) scene.walls(a.x1 + 1, y + k) = 0;
    } else {  // horizontal wall at y = a.y1 + 1
      const int x = uniform_int(rng, a.x0 + 1, a.x1 - 3);
      for (int k = 0; k < 3; ++k) scene.walls(x + k, a.y1 + 1) = 0;
    }
    (void)b;
  };
  for (const Edge& e : edges) {
    const int ca = find(e.a), cb = find(e.b);
    if (ca != cb) {
      comp[ca] = cb;
      open_door(e);
    } else if (uniform01(rng) < 0.25) {
      open_door(e);
    }
  }

  // Room types: the target's room type occurs exactly once and its companion type exactly once, in a
  // lattice neighbour joined to it by a door.
  static constexpr ClassId kTargets[] = {kBed, kToilet, kFridge, kSofa, kTv};
  const ClassId target = kTargets[rng() % std::size(kTargets)];
  const RoomType target_room_type = room_for_target(target);
  const RoomType companion_type = companion_of(target_room_type);
  std::vector<RoomType> others;
  for (RoomType t : {RoomType::Bedroom, RoomType::Living, RoomType::Bathroom, RoomType::Kitchen})
    if (t != target_room_type && t != companion_type) others.push_back(t);
  const int n_rooms = static_cast<int>(rooms.size());
  const int target_room = uniform_int(rng, 0, n_rooms - 1);
  std::vector<int> neighbours;
  for (int r = 0; r < n_rooms; ++r) {
    const int dx = std::abs(r % kRooms - target_room % kRooms), dy = std::abs(r / kRooms - target_room / kRooms);
    if (dx + dy == 1) neighbours.push_back(r);
  }
  const int companion_room = neighbours[rng() % neighbours.size()];
  if (!door_between(std::min(target_room, companion_room), std::max(target_room, companion_room)))
    open_door({std::min(target_room, companion_room), std::max(target_room, companion_room)});
  int start_room = uniform_int(rng, 0, n_rooms - 2);
  if (start_room >= target_room) ++start_room;

  LabelLayer labels(p.width, p.height, kNoClass, kDefaultResolution);
  for (int r = 0; r < n_rooms; ++r) {
    const Room& room = rooms[r];
    const RoomType type = r == target_room      ? target_room_type
                          : r == companion_room ? companion_type
                                                : others[rng() % others.size()];
    // Sparse scenes leave some rooms bare; the target and companion rooms are always furnished.
    if (!dense && r != target_room && r != companion_room && uniform01(rng) < 0.4) continue;
    if (dense) {
      for (int y = room.y0 + 1; y <= room.y1 - 1; ++y)
        for (int x = room.x0 + 1; x <= room.x1 - 1; ++x) labels(x, y) = kRug;
    }
    for (const Furniture& f : furniture_for(type, dense)) {
      if (r != target_room && f.cls == target) continue;
      for (int n = 0; n < f.count; ++n) {
        const bool rotate = uniform01(rng) < 0.5;
        const int fw = rotate ? f.h : f.w;
        const int fh = rotate ? f.w : f.h;
        const int x = uniform_int(rng, room.x0 + 1, std::max(room.x0 + 1, room.x1 - fw));
        const int y = uniform_int(rng, room.y0 + 1, std::max(room.y0 + 1, room.y1 - fh));
        for (int dy = 0; dy < fh; ++dy)
          for (int dx = 0; dx < fw; ++dx)
            if (x + dx < room.x1 && y + dy < room.y1) labels(x + dx, y + dy) = f.cls;
      }
    }
  }
  // Later furniture may have painted over the target; make sure at least one target cell survives.
  bool has_target = false;
  for (ClassId v : labels.data()) has_target |= v == target;
  if (!has_target) {
    const Room& room = rooms[target_room];
    labels((room.x0 + room.x1) / 2, (room.y0 + room.y1) / 2) = target;
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels.data()[i] != kNoClass) scene.objects.push_back({labels.data()[i], labels.coord(i)});

  const Room& sr = rooms[start_room];
  CellCoord start{};
  do {
    start = {uniform_int(rng, sr.x0, sr.x1), uniform_int(rng, sr.y0, sr.y1)};
  } while (labels[start] != kNoClass);
  scene.start = pose_at_cell(start, kDefaultResolution, (rng() % 12) * kTurnRad);
  scene.target_class = target;
  finalize_scene(scene);
  return scene;
}

}  // namespace sonar
