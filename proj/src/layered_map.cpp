#include "sonar/layered_map.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>

#include "sonar/kernels.hpp"

namespace sonar {
namespace {

void check_unit(double c, const char* what) {
  if (!(c >= 0.0 && c <= 1.0)) throw ValidationError(std::string(what) + " must lie in [0,1]");
}

}  // namespace

LayeredMap LayeredMap::create(int width, int height, ClassId num_classes, double resolution) {
  LayeredMap m;
  m.obstacle = BitLayer(width, height, 0, resolution);
  m.explored = m.obstacle;
  m.frontier = m.obstacle;
  m.smap_target = m.obstacle;
  m.smap_multi = LabelLayer(width, height, kNoClass, resolution);
  m.cmap_target = RealLayer(width, height, 0.0, resolution);
  m.cmap_multi = m.cmap_target;
  m.num_classes = num_classes;
  return m;
}

double update_target_confidence(double cmap, double c) {
  check_unit(c, "detection confidence");
  check_unit(cmap, "stored confidence");
  return c >= cmap ? c : (cmap + c) / 2.0;
}

LabelledConfidence update_multi_maps(ClassId smap, double cmap, ClassId l_obj, double c, ClassId num_classes) {
  check_unit(c, "detection confidence");
  check_unit(cmap, "stored confidence");
  if (l_obj == kNoClass || l_obj > num_classes)
    throw ValidationError("unknown object class " + std::to_string(l_obj));
  if (c > cmap) return {l_obj, c};
  if (smap == l_obj) return {smap, (cmap + c) / 2.0};
  return {smap, cmap};
}

void mark_obstacles(LayeredMap& map, std::span<const CellCoord> occupied) {
  for (CellCoord c : occupied) map.obstacle.at(c) = 1;
}

void mark_explored(LayeredMap& map, std::span<const CellCoord> visible) {
  for (CellCoord c : visible) map.explored.at(c) = 1;
}

BitLayer extract_frontiers(const LayeredMap& map) {
  if (!map.explored.same_shape(map.obstacle)) throw ValidationError("explored/obstacle shape mismatch");
  BitLayer out(map.width(), map.height(), 0, map.resolution());
  kernels::active().frontier(map.explored.data().data(), map.obstacle.data().data(), out.data().data(), map.width(),
                             map.height());
  return out;
}

void refresh_frontiers(LayeredMap& map) { map.frontier = extract_frontiers(map); }

void apply_detections(LayeredMap& map, std::span<const Detection> detections, ClassId target_class) {
  for (const Detection& d : detections) {
    if (!map.smap_multi.in_bounds(d.cell)) throw ValidationError("detection outside the map");
    const std::size_t i = map.smap_multi.index(d.cell);
    const auto multi = update_multi_maps(map.smap_multi.data()[i], map.cmap_multi.data()[i], d.cls, d.confidence,
                                         map.num_classes);
    map.smap_multi.data()[i] = multi.label;
    map.cmap_multi.data()[i] = multi.confidence;
    if (d.cls == target_class) {
      map.cmap_target.data()[i] = update_target_confidence(map.cmap_target.data()[i], d.confidence);
      // A zero-confidence sighting carries no evidence; never leave a label without confidence.
      if (map.cmap_target.data()[i] > 0.0) map.smap_target.data()[i] = 1;
    }
  }
}

// ---------------------------------------------------------------------------
// Snapshot text format

namespace {

std::string format_real(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T>
void write_layer(std::ostream& out, const char* name, const char* type, const GridLayer<T>& layer) {
  out << "layer " << name << ' ' << type << '\n';
  for (int y = 0; y < layer.height(); ++y) {
    for (int x = 0; x < layer.width(); ++x) {
      if (x) out << ' ';
      if constexpr (std::is_floating_point_v<T>)
        out << format_real(layer(x, y));
      else
        out << static_cast<unsigned>(layer(x, y));
    }
    out << '\n';
  }
}

template <typename T>
void read_layer(std::istream& in, GridLayer<T>& layer) {
  for (auto& v : layer.data()) {
    std::string tok;
    if (!(in >> tok)) throw ProtocolError("snapshot truncated");
    if constexpr (std::is_floating_point_v<T>) {
      double d = 0.0;
      auto r = std::from_chars(tok.data(), tok.data() + tok.size(), d);
      if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size()) throw ProtocolError("bad real '" + tok + "'");
      v = d;
    } else {
      unsigned long u = 0;
      auto r = std::from_chars(tok.data(), tok.data() + tok.size(), u);
      if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size()) throw ProtocolError("bad integer '" + tok + "'");
      v = static_cast<T>(u);
    }
  }
}

}  // namespace

void write_snapshot(std::ostream& out, const LayeredMap& map, const RealLayer* value, const RealLayer* distance) {
  out << "SONARMAP 1\n";
  out << "size " << map.width() << ' ' << map.height() << ' ' << format_real(map.resolution()) << '\n';
  out << "classes " << map.num_classes << '\n';
  write_layer(out, "obstacle", "u8", map.obstacle);
  write_layer(out, "explored", "u8", map.explored);
  write_layer(out, "frontier", "u8", map.frontier);
  write_layer(out, "smap_target", "u8", map.smap_target);
  write_layer(out, "smap_multi", "u16", map.smap_multi);
  write_layer(out, "cmap_target", "f64", map.cmap_target);
  write_layer(out, "cmap_multi", "f64", map.cmap_multi);
  if (value) write_layer(out, "value", "f64", *value);
  if (distance) write_layer(out, "distance", "f64", *distance);
  out << "end\n";
}

MapSnapshot read_snapshot(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "SONARMAP") throw ProtocolError("not a SONARMAP snapshot");
  if (version != 1) throw ProtocolError("unsupported snapshot version " + std::to_string(version));
  std::string key;
  int w = 0, h = 0;
  std::string res_tok;
  unsigned classes = 0;
  if (!(in >> key >> w >> h >> res_tok) || key != "size") throw ProtocolError("missing size line");
  if (!(in >> key >> classes) || key != "classes") throw ProtocolError("missing classes line");
  double res = 0.0;
  std::from_chars(res_tok.data(), res_tok.data() + res_tok.size(), res);

  MapSnapshot snap{LayeredMap::create(w, h, static_cast<ClassId>(classes), res), std::nullopt, std::nullopt};
  LayeredMap& m = snap.map;
  while (in >> key) {
    if (key == "end") return snap;
    if (key != "layer") throw ProtocolError("unexpected token '" + key + "'");
    std::string name, type;
    in >> name >> type;
    if (name == "obstacle") read_layer(in, m.obstacle);
    else if (name == "explored") read_layer(in, m.explored);
    else if (name == "frontier") read_layer(in, m.frontier);
    else if (name == "smap_target") read_layer(in, m.smap_target);
    else if (name == "smap_multi") read_layer(in, m.smap_multi);
    else if (name == "cmap_target") read_layer(in, m.cmap_target);
    else if (name == "cmap_multi") read_layer(in, m.cmap_multi);
    else if (name == "value") read_layer(in, snap.value.emplace(w, h, 0.0, res));
    else if (name == "distance") read_layer(in, snap.distance.emplace(w, h, 0.0, res));
    else throw ProtocolError("unknown layer '" + name + "'");
  }
  throw ProtocolError("snapshot missing 'end'");
}

}  // namespace sonar
