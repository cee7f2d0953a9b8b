#include "sonar/target_prediction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sonar/kernels.hpp"
#include "sonar/wire.hpp"

namespace sonar {
namespace {

// Keep in sync with data/cooccurrence.prior (checked by test_target_prediction).
constexpr const char* kBuiltinPrior = R"(# target  class  weight
bed bed 1.0
bed nightstand 0.9
bed wardrobe 0.6
bed toilet 0.3
bed sink 0.3
bed bathtub 0.3
sofa sofa 1.0
sofa tv 0.8
sofa coffee_table 0.8
sofa plant 0.3
sofa fridge 0.3
sofa counter 0.3
sofa dining_table 0.3
tv tv 1.0
tv sofa 0.8
tv coffee_table 0.6
tv plant 0.3
tv fridge 0.3
tv counter 0.3
tv dining_table 0.3
toilet toilet 1.0
toilet sink 0.8
toilet bathtub 0.7
toilet bed 0.3
toilet nightstand 0.3
toilet wardrobe 0.3
fridge fridge 1.0
fridge counter 0.8
fridge dining_table 0.6
fridge chair 0.4
fridge sofa 0.3
fridge tv 0.3
fridge coffee_table 0.3
)";

}  // namespace

CooccurrencePrior::CooccurrencePrior(ClassId num_classes)
    : n_(num_classes), w_((static_cast<std::size_t>(num_classes) + 1) * (num_classes + 1), 0.0) {}

double CooccurrencePrior::operator()(ClassId target, ClassId cls) const {
  if (target > n_ || cls > n_) return 0.0;
  return w_[static_cast<std::size_t>(target) * (n_ + 1) + cls];
}

void CooccurrencePrior::set(ClassId target, ClassId cls, double w) {
  if (target == kNoClass || cls == kNoClass || target > n_ || cls > n_) throw ValidationError("prior class out of range");
  if (!(w >= 0.0)) throw ValidationError("prior weights must be non-negative");
  w_[static_cast<std::size_t>(target) * (n_ + 1) + cls] = w;
}

bool CooccurrencePrior::covers(ClassId target) const {
  for (ClassId c = 1; c <= n_; ++c)
    if ((*this)(target, c) > 0.0) return true;
  return false;
}

CooccurrencePrior CooccurrencePrior::parse(std::istream& in, const std::vector<std::string>& names) {
  CooccurrencePrior prior(static_cast<ClassId>(names.size() - 1));
  auto id_of = [&](const std::string& n) -> ClassId {
    for (std::size_t i = 1; i < names.size(); ++i)
      if (names[i] == n) return static_cast<ClassId>(i);
    return kNoClass;
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string t, c;
    double w = 0.0;
    if (!(ls >> t)) continue;
    if (!(ls >> c >> w)) throw ConfigError("prior line " + std::to_string(lineno) + ": expected '<target> <class> <weight>'");
    const ClassId ti = id_of(t), ci = id_of(c);
    if (ti == kNoClass || ci == kNoClass) continue;
    prior.set(ti, ci, w);
  }
  return prior;
}

CooccurrencePrior CooccurrencePrior::load(const std::string& path, const std::vector<std::string>& names) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open prior file " + path);
  return parse(f, names);
}

CooccurrencePrior CooccurrencePrior::builtin(const std::vector<std::string>& names) {
  std::istringstream in(kBuiltinPrior);
  CooccurrencePrior p = parse(in, names);
  // Legends outside the built-in vocabulary still get a usable self-affinity.
  for (ClassId k = 1; k <= p.num_classes(); ++k)
    if (!p.covers(k)) p.set(k, k, 1.0);
  return p;
}

PredictedTargets predict_targets(const LabelLayer& smap, const RealLayer& cmap, ClassId target_class,
                                 const CooccurrencePrior& prior, int max_targets) {
  if (!smap.same_shape(cmap)) throw ValidationError("semantic/confidence map shape mismatch");
  if (max_targets < 1) throw ValidationError("max_targets must be >= 1");
  const int w = smap.width(), h = smap.height();

  struct Cluster {
    double score;
    std::size_t first;  // row-major index of the first cell, for stable ordering
    CellCoord centroid;
  };
  std::vector<Cluster> clusters;
  std::vector<std::uint8_t> seen(smap.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < smap.size(); ++i) {
    const ClassId cls = smap.data()[i];
    if (cls == kNoClass || seen[i]) continue;
    double sum_conf = 0.0, sx = 0.0, sy = 0.0;
    std::size_t count = 0;
    stack.assign(1, i);
    seen[i] = 1;
    while (!stack.empty()) {
      const std::size_t j = stack.back();
      stack.pop_back();
      const CellCoord c = smap.coord(j);
      sum_conf += cmap.data()[j];
      sx += c.x;
      sy += c.y;
      ++count;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const CellCoord n{c.x + dx, c.y + dy};
          if (!smap.in_bounds(n)) continue;
          const std::size_t k = smap.index(n);
          if (!seen[k] && smap.data()[k] == cls) {
            seen[k] = 1;
            stack.push_back(k);
          }
        }
    }
    const double score = prior(target_class, cls) * (sum_conf / static_cast<double>(count));
    if (score <= 0.0) continue;
    const CellCoord centroid{std::clamp(static_cast<int>(std::lround(sx / count)), 0, w - 1),
                             std::clamp(static_cast<int>(std::lround(sy / count)), 0, h - 1)};
    clusters.push_back({score, i, centroid});
  }
  PredictedTargets out;
  if (clusters.empty()) {
    out.points.push_back({(w - 1) / 2, (h - 1) / 2});
    return out;
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const Cluster& a, const Cluster& b) { return a.score > b.score; });
  for (const auto& c : clusters) {
    if (static_cast<int>(out.points.size()) >= max_targets) break;
    out.points.push_back(c.centroid);
  }
  return out;
}

DistanceMap distance_map(const PredictedTargets& targets, int width, int height, double resolution) {
  if (targets.points.empty()) throw ValidationError("distance map needs at least one target");
  std::vector<double> px, py;
  for (CellCoord p : targets.points) {
    px.push_back(p.x);
    py.push_back(p.y);
  }
  DistanceMap d(width, height, 0.0, resolution);
  kernels::active().distance_map(px.data(), py.data(), px.size(), d.data().data(), width, height);
  return d;
}

PredictedTargets HeuristicPredictor::predict(const LayeredMap& map, ClassId target_class) {
  return predict_targets(map.smap_multi, map.cmap_multi, target_class, prior_, max_targets_);
}

RemotePrediction remote_predict(const LabelLayer& smap, const RealLayer& cmap, ClassId target_class,
                                const std::string& endpoint, const CooccurrencePrior& fallback_prior, int timeout_ms,
                                int max_targets) {
  if (!smap.same_shape(cmap)) throw ValidationError("semantic/confidence map shape mismatch");
  RemotePrediction out;
  try {
    const auto ep = wire::parse_endpoint(endpoint);
    const auto line = wire::encode_request(wire::make_request(smap, cmap, target_class));
    const auto reply = wire::round_trip(ep, line, std::chrono::milliseconds(timeout_ms));
    out.targets = wire::decode_response(reply, smap.width(), smap.height());
    if (static_cast<int>(out.targets.points.size()) > max_targets) out.targets.points.resize(max_targets);
    return out;
  } catch (const std::exception& e) {
    out.fell_back = true;
    out.warning = std::string("remote predictor failed (") + e.what() + "), using heuristic";
  }
  out.targets = predict_targets(smap, cmap, target_class, fallback_prior, max_targets);
  return out;
}

PredictedTargets RemotePredictor::predict(const LayeredMap& map, ClassId target_class) {
  auto r = remote_predict(map.smap_multi, map.cmap_multi, target_class, endpoint_, prior_, timeout_ms_, max_targets_);
  if (r.fell_back) {
    ++fallbacks_;
    warnings_.push_back(std::move(r.warning));
  }
  return std::move(r.targets);
}

}  // namespace sonar
