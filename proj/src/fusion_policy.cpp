#include "sonar/fusion_policy.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sonar/kernels.hpp"

namespace sonar {

const char* to_string(SciCategory c) {
  switch (c) {
    case SciCategory::Dense: return "dense";
    case SciCategory::Moderate: return "moderate";
    case SciCategory::Sparse: return "sparse";
  }
  return "?";
}

const char* to_string(GoalKind k) {
  switch (k) {
    case GoalKind::Explore: return "explore";
    case GoalKind::Navigate: return "navigate";
    case GoalKind::Stop: return "stop";
  }
  return "?";
}

SciCategory categorize_sci(double value, const FusionConfig& cfg) {
  if (value > cfg.dense_above) return SciCategory::Dense;
  if (value < cfg.sparse_below) return SciCategory::Sparse;
  return SciCategory::Moderate;
}

SciReading compute_sci(const LabelLayer& smap, const RealLayer& cmap, std::span<const CellCoord> fov,
                       const FusionConfig& cfg) {
  if (fov.empty()) throw ValidationError("SCI needs at least one FOV cell");
  std::size_t hits = 0;
  for (CellCoord c : fov)
    if (smap.at(c) != kNoClass && cmap[c] > cfg.sci_label_confidence) ++hits;
  const double v = static_cast<double>(hits) / static_cast<double>(fov.size());
  return {v, categorize_sci(v, cfg)};
}

DarWeights weights_from_sci(const SciReading& sci) { return {1.0 - sci.value, sci.value}; }

double dar_score(double d, double v, const DarWeights& w, double eps) { return w.w_pred / (d + eps) + w.w_vlm * v; }

double map_diagonal(int width, int height) { return std::hypot(static_cast<double>(width), static_cast<double>(height)); }

std::optional<FrontierChoice> select_frontier(const BitLayer& frontier, const RealLayer& dmap, const RealLayer& vsmooth,
                                              const DarWeights& w, CellCoord agent, double eps, const BitLayer* exclude) {
  if (!frontier.same_shape(dmap) || !frontier.same_shape(vsmooth))
    throw ValidationError("frontier / distance / value shape mismatch");
  std::vector<double> scores(frontier.size());
  kernels::active().dar_scores(dmap.data().data(), vsmooth.data().data(), scores.data(), scores.size(), w.w_pred,
                               w.w_vlm, map_diagonal(frontier.width(), frontier.height()), eps);
  std::optional<FrontierChoice> best;
  double best_dist = 0.0;
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    if (!frontier.data()[i] || (exclude && exclude->data()[i])) continue;
    const CellCoord c = frontier.coord(i);
    const double d = std::hypot(c.x - agent.x, c.y - agent.y);
    // Row-major scan: on a full tie the earlier cell is kept.
    if (!best || scores[i] > best->score || (scores[i] == best->score && d < best_dist)) {
      best = FrontierChoice{c, scores[i]};
      best_dist = d;
    }
  }
  return best;
}

std::optional<LockResult> try_lock_target(const LayeredMap& map, ClassId target, LockSource source,
                                          const FusionConfig& cfg) {
  const std::size_t n = map.smap_target.size();
  const auto& st = map.smap_target.data();
  const auto& sm = map.smap_multi.data();
  const auto& ct = map.cmap_target.data();
  const auto& cm = map.cmap_multi.data();

  // Candidate mask and per-cell value for the chosen source.
  std::vector<double> value(n, -1.0);
  bool fallback = false;
  bool triggered = false;
  if (source == LockSource::MultiOnly) {
    for (std::size_t i = 0; i < n; ++i)
      if (sm[i] == target) {
        value[i] = cm[i];
        triggered |= cm[i] > cfg.lock_threshold;
      }
  } else {
    for (std::size_t i = 0; i < n; ++i) triggered |= st[i] && ct[i] > cfg.lock_threshold;
    if (triggered && source == LockSource::Fused) {
      bool any = false;
      for (std::size_t i = 0; i < n; ++i)
        if (st[i] && sm[i] == target) {
          value[i] = (ct[i] + cm[i]) / 2.0;
          any = true;
        }
      fallback = !any;
    }
    if (triggered && (source == LockSource::TargetOnly || fallback)) {
      for (std::size_t i = 0; i < n; ++i)
        if (st[i]) value[i] = ct[i];
    }
  }
  if (!triggered) return std::nullopt;

  std::size_t peak = n;
  for (std::size_t i = 0; i < n; ++i)
    if (value[i] >= 0.0 && (peak == n || value[i] > value[peak])) peak = i;
  if (peak == n) return std::nullopt;

  const CellCoord pc = map.smap_target.coord(peak);
  const int half = cfg.lock_neighborhood / 2;
  double sx = 0.0, sy = 0.0;
  int count = 0;
  for (int dy = -half; dy <= half; ++dy)
    for (int dx = -half; dx <= half; ++dx) {
      const CellCoord c{pc.x + dx, pc.y + dy};
      if (!map.smap_target.in_bounds(c) || value[map.smap_target.index(c)] < 0.0) continue;
      sx += c.x;
      sy += c.y;
      ++count;
    }
  const double cx = sx / count, cy = sy / count;

  std::optional<CellCoord> goal;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (!map.explored.data()[i] || map.obstacle.data()[i]) continue;
    const CellCoord c = map.explored.coord(i);
    const double d = std::hypot(c.x - cx, c.y - cy);
    if (d < best) {
      best = d;
      goal = c;
    }
  }
  if (!goal) return std::nullopt;
  return LockResult{*goal, pc, value[peak], fallback};
}

Ablation parse_ablation(const std::string& enabled) {
  Ablation a{false, false, false, false};
  std::stringstream ss(enabled);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "stl") a.stl = true;
    else if (tok == "mol") a.mol = true;
    else if (tok == "tpm") a.tpm = true;
    else if (tok == "vm") a.vm = true;
    else if (!tok.empty()) throw ConfigError("unknown ablation module '" + tok + "'");
  }
  if (!a.tpm && !a.vm) throw ConfigError("at least one of tpm/vm must stay enabled");
  if (!a.stl && !a.mol) throw ConfigError("at least one of stl/mol must stay enabled");
  return a;
}

std::string to_string(const Ablation& a) {
  std::string s;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += ',';
    s += name;
  };
  add(a.stl, "stl");
  add(a.mol, "mol");
  add(a.tpm, "tpm");
  add(a.vm, "vm");
  return s;
}

GoalDecision decide(const DecisionInputs& in, const Ablation& ab, const FusionConfig& cfg) {
  GoalDecision out;
  const LockSource source = !ab.mol ? LockSource::TargetOnly : !ab.stl ? LockSource::MultiOnly : LockSource::Fused;
  if (auto lock = try_lock_target(in.map, in.target_class, source, cfg)) {
    out.kind = GoalKind::Navigate;
    out.cell = lock->goal;
    out.locked = true;
    out.lock_fallback = lock->used_fallback;
    return out;
  }

  out.sci = ab.mol ? compute_sci(in.map.smap_multi, in.map.cmap_multi, in.fov_cells, cfg)
                   : SciReading{0.0, SciCategory::Sparse};
  out.weights = weights_from_sci(out.sci);
  if (!ab.vm || !in.vsmooth) out.weights = {1.0, 0.0};
  if (!ab.tpm || !in.dmap) out.weights = {0.0, 1.0};

  const int w = in.map.width(), h = in.map.height();
  const RealLayer zeros(w, h, 0.0, in.map.resolution());
  const RealLayer& v = ab.vm && in.vsmooth ? *in.vsmooth : zeros;
  const RealLayer& d = ab.tpm && in.dmap ? *in.dmap : zeros;
  const auto choice = select_frontier(in.map.frontier, d, v, out.weights, in.agent, cfg.epsilon, in.exclude);
  if (!choice) {
    out.kind = GoalKind::Stop;
    return out;
  }
  out.kind = GoalKind::Explore;
  out.cell = choice->cell;
  out.dar_score = choice->score;
  return out;
}

}  // namespace sonar
