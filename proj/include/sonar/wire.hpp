#pragma once

// Line-delimited JSON protocol (v1) spoken with the predictor service; see docs/formats.md.

#include <chrono>
#include <string>
#include <vector>

#include "sonar/grid.hpp"
#include "sonar/sim_world.hpp"
#include "sonar/target_prediction.hpp"

namespace sonar::wire {

inline constexpr int kVersion = 1;

struct PredictRequest {
  int width = 0;
  int height = 0;
  ClassId target_class = kNoClass;
  std::vector<ClassId> smap;          // row-major class ids
  std::vector<std::int32_t> cmap_milli;  // row-major confidences x 1000, rounded

  friend bool operator==(const PredictRequest&, const PredictRequest&) = default;
};

/// Confidence in [0,1] -> integer thousandths (round half away from zero).
std::int32_t to_milli(double confidence);

PredictRequest make_request(const LabelLayer& smap, const RealLayer& cmap, ClassId target_class);

/// One JSON object, no trailing newline.
std::string encode_request(const PredictRequest& req);
PredictRequest decode_request(const std::string& line);

std::string encode_response(const std::vector<CellCoord>& points);
std::string encode_error(const std::string& message);
/// Parses {"v":1,"points":[[x,y],...]} and clamps points into the grid. Throws ProtocolError.
PredictedTargets decode_response(const std::string& line, int width, int height);

struct ScoreRequest {
  ClassId target_class = kNoClass;
  double x = 0.0, y = 0.0, heading = 0.0;  // pose, meters / radians
  std::vector<CellCoord> visible;
};
std::string encode_score_request(const ScoreRequest& req);
double decode_score_response(const std::string& line);

/// "host:port" or "tcp://host:port".
struct Endpoint {
  std::string host;
  int port = 0;
};
Endpoint parse_endpoint(const std::string& text);

/// Blocking request/response over a fresh TCP connection: writes `line` + '\n', reads one line back.
/// Throws ProtocolError on connect failure, timeout, or a closed stream.
std::string round_trip(const Endpoint& ep, const std::string& line, std::chrono::milliseconds timeout);

/// Semantic scorer backed by the service's "score" operation. Falls back to `fallback` on any failure.
class RemoteScorer final : public SemanticScorer {
 public:
  RemoteScorer(std::string endpoint, SemanticScorer& fallback, int timeout_ms = 2000)
      : endpoint_(std::move(endpoint)), fallback_(fallback), timeout_ms_(timeout_ms) {}
  double score(const Scene& scene, const AgentPose& pose, std::span<const CellCoord> visible, ClassId target_class,
               std::uint64_t seed) override;
  int fallbacks() const { return fallbacks_; }

 private:
  std::string endpoint_;
  SemanticScorer& fallback_;
  int timeout_ms_;
  int fallbacks_ = 0;
};

}  // namespace sonar::wire
