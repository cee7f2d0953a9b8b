#include "sonar/wire.hpp"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <memory>
#include <fcntl.h>
#include <json.hpp>

namespace sonar::wire {

using nlohmann::json;

std::int32_t to_milli(double c) { return static_cast<std::int32_t>(std::lround(c * 1000.0)); }

PredictRequest make_request(const LabelLayer& smap, const RealLayer& cmap, ClassId target_class) {
  if (!smap.same_shape(cmap)) throw ValidationError("semantic/confidence map shape mismatch");
  PredictRequest r;
  r.width = smap.width();
  r.height = smap.height();
  r.target_class = target_class;
  r.smap = smap.data();
  r.cmap_milli.reserve(cmap.size());
  for (double c : cmap.data()) r.cmap_milli.push_back(to_milli(c));
  return r;
}

std::string encode_request(const PredictRequest& req) {
  json j;
  j["v"] = kVersion;
  j["w"] = req.width;
  j["h"] = req.height;
  j["target_class"] = req.target_class;
  j["smap"] = req.smap;
  j["cmap"] = req.cmap_milli;
  return j.dump();
}

namespace {

json parse_line(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ProtocolError("malformed JSON message");
  if (!j.contains("v") || !j["v"].is_number_integer() || j["v"].get<int>() != kVersion)
    throw ProtocolError("missing or unsupported protocol version");
  return j;
}

}  // namespace

PredictRequest decode_request(const std::string& line) {
  const json j = parse_line(line);
  try {
    PredictRequest r;
    r.width = j.at("w").get<int>();
    r.height = j.at("h").get<int>();
    r.target_class = j.at("target_class").get<ClassId>();
    r.smap = j.at("smap").get<std::vector<ClassId>>();
    r.cmap_milli = j.at("cmap").get<std::vector<std::int32_t>>();
    const auto n = static_cast<std::size_t>(r.width) * static_cast<std::size_t>(r.height);
    if (r.width <= 0 || r.height <= 0 || r.smap.size() != n || r.cmap_milli.size() != n)
      throw ProtocolError("request map sizes do not match w*h");
    return r;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("bad request: ") + e.what());
  }
}

std::string encode_response(const std::vector<CellCoord>& points) {
  json pts = json::array();
  for (CellCoord p : points) pts.push_back({p.x, p.y});
  return json{{"v", kVersion}, {"points", pts}}.dump();
}

std::string encode_error(const std::string& message) { return json{{"v", kVersion}, {"error", message}}.dump(); }

PredictedTargets decode_response(const std::string& line, int width, int height) {
  const json j = parse_line(line);
  if (j.contains("error")) throw ProtocolError("service error: " + j["error"].dump());
  if (!j.contains("points") || !j["points"].is_array() || j["points"].empty())
    throw ProtocolError("response without points");
  PredictedTargets out;
  for (const auto& p : j["points"]) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ProtocolError("point is not an [x, y] pair");
    const double x = p[0].get<double>(), y = p[1].get<double>();
    if (!std::isfinite(x) || !std::isfinite(y)) throw ProtocolError("non-finite point");
    out.points.push_back({std::clamp(static_cast<int>(std::lround(x)), 0, width - 1),
                          std::clamp(static_cast<int>(std::lround(y)), 0, height - 1)});
  }
  return out;
}

std::string encode_score_request(const ScoreRequest& req) {
  json vis = json::array();
  for (CellCoord c : req.visible) vis.push_back({c.x, c.y});
  return json{{"v", kVersion},
              {"op", "score"},
              {"target_class", req.target_class},
              {"pose", {req.x, req.y, req.heading}},
              {"visible", vis}}
      .dump();
}

double decode_score_response(const std::string& line) {
  const json j = parse_line(line);
  if (j.contains("error")) throw ProtocolError("service error: " + j["error"].dump());
  if (!j.contains("score") || !j["score"].is_number()) throw ProtocolError("response without score");
  const double s = j["score"].get<double>();
  if (!std::isfinite(s)) throw ProtocolError("non-finite score");
  return std::clamp(s, 0.0, 1.0);
}

Endpoint parse_endpoint(const std::string& text) {
  std::string s = text;
  if (s.rfind("tcp://", 0) == 0) s = s.substr(6);
  const auto colon = s.rfind(':');
  if (colon == std::string::npos || colon == 0) throw ConfigError("endpoint must be host:port, got '" + text + "'");
  Endpoint ep;
  ep.host = s.substr(0, colon);
  try {
    ep.port = std::stoi(s.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("bad port in endpoint '" + text + "'");
  }
  if (ep.port <= 0 || ep.port > 65535) throw ConfigError("port out of range in '" + text + "'");
  return ep;
}

namespace {

class Socket {
 public:
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  int fd() const { return fd_; }

 private:
  int fd_;
};

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return static_cast<int>(std::max<long long>(left, 0));
}

void wait_for(int fd, short events, Clock::time_point deadline) {
  pollfd p{fd, events, 0};
  for (;;) {
    const int r = ::poll(&p, 1, remaining_ms(deadline));
    if (r > 0) return;
    if (r == 0) throw ProtocolError("predictor request timed out");
    if (errno != EINTR) throw ProtocolError(std::string("poll failed: ") + std::strerror(errno));
  }
}

}  // namespace

std::string round_trip(const Endpoint& ep, const std::string& line, std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(), &hints, &res) != 0 || !res)
    throw ProtocolError("cannot resolve " + ep.host);
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);

  Socket sock(::socket(res->ai_family, res->ai_socktype | SOCK_NONBLOCK | SOCK_CLOEXEC, res->ai_protocol));
  if (sock.fd() < 0) throw ProtocolError("socket() failed");
  if (::connect(sock.fd(), res->ai_addr, res->ai_addrlen) != 0) {
    if (errno != EINPROGRESS) throw ProtocolError("connect failed: " + std::string(std::strerror(errno)));
    wait_for(sock.fd(), POLLOUT, deadline);
    int err = 0;
    socklen_t len = sizeof err;
    ::getsockopt(sock.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) throw ProtocolError("connect failed: " + std::string(std::strerror(err)));
  }

  const std::string msg = line + '\n';
  std::size_t sent = 0;
  while (sent < msg.size()) {
    const ssize_t n = ::send(sock.fd(), msg.data() + sent, msg.size() - sent, MSG_NOSIGNAL);
    if (n > 0) {
      sent += static_cast<std::size_t>(n);
    } else if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) {
      wait_for(sock.fd(), POLLOUT, deadline);
    } else {
      throw ProtocolError("send failed");
    }
  }

  std::string reply;
  char buf[4096];
  for (;;) {
    wait_for(sock.fd(), POLLIN, deadline);
    const ssize_t n = ::recv(sock.fd(), buf, sizeof buf, 0);
    if (n > 0) {
      reply.append(buf, static_cast<std::size_t>(n));
      if (auto nl = reply.find('\n'); nl != std::string::npos) {
        reply.resize(nl);
        return reply;
      }
    } else if (n == 0) {
      throw ProtocolError("connection closed before a full response line");
    } else if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
      throw ProtocolError("recv failed");
    }
  }
}

double RemoteScorer::score(const Scene& scene, const AgentPose& pose, std::span<const CellCoord> visible,
                           ClassId target_class, std::uint64_t seed) {
  try {
    ScoreRequest req{target_class, pose.x, pose.y, pose.heading, {visible.begin(), visible.end()}};
    return decode_score_response(
        round_trip(parse_endpoint(endpoint_), encode_score_request(req), std::chrono::milliseconds(timeout_ms_)));
  } catch (const std::exception&) {
    ++fallbacks_;
    return fallback_.score(scene, pose, visible, target_class, seed);
  }
}

}  // namespace sonar::wire
