#pragma once

// Plant backed by an external simulator speaking the framed JSON protocol.
// Decoded-torque mode: the decoder/regulator/PD stack stays on this side and
// each control tick ships its substep torques in one request.

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <memory>
#include <string>
#include <utility>

#include <json.hpp>

#include "gaitforge/plant.hpp"
#include "gaitforge/wire.hpp"

namespace gaitforge {

// One request, one reply. Implementations block.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual nlohmann::json request(const nlohmann::json& msg) = 0;
};

class TcpTransport : public Transport {
 public:
  explicit TcpTransport(const wire::Address& addr) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string port = std::to_string(addr.port);
    if (int rc = ::getaddrinfo(addr.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
      throw Error(ErrorKind::kIo, "resolve " + addr.host + ": " + ::gai_strerror(rc));
    }
    std::string last = "no address";
    for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
      int fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) {
        fd_ = fd;
        break;
      }
      last = std::strerror(errno);
      ::close(fd);
    }
    ::freeaddrinfo(res);
    if (fd_ < 0) {
      throw Error(ErrorKind::kIo, "connect " + addr.host + ":" + port + ": " + last);
    }
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }

  ~TcpTransport() override {
    if (fd_ >= 0) ::close(fd_);
  }
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  nlohmann::json request(const nlohmann::json& msg) override {
    const std::string frame = wire::encode_message(msg);
    send_all(frame.data(), frame.size());
    unsigned char head[4];
    recv_all(head, 4);
    const std::uint32_t n = wire::read_prefix(head);
    if (n > wire::kMaxFrameBytes) throw Error(ErrorKind::kProtocol, "reply frame too large");
    std::string payload(n, '\0');
    recv_all(payload.data(), n);
    return wire::parse_payload(payload);
  }

 private:
  void send_all(const char* p, std::size_t n) {
    while (n > 0) {
      const ssize_t k = ::send(fd_, p, n, MSG_NOSIGNAL);
      if (k < 0 && errno == EINTR) continue;
      if (k <= 0) throw Error(ErrorKind::kIo, std::string("send: ") + std::strerror(errno));
      p += k;
      n -= static_cast<std::size_t>(k);
    }
  }

  void recv_all(void* out, std::size_t n) {
    auto* p = static_cast<char*>(out);
    while (n > 0) {
      const ssize_t k = ::recv(fd_, p, n, 0);
      if (k < 0 && errno == EINTR) continue;
      if (k == 0) throw Error(ErrorKind::kProtocol, "connection closed by peer");
      if (k < 0) throw Error(ErrorKind::kIo, std::string("recv: ") + std::strerror(errno));
      p += k;
      n -= static_cast<std::size_t>(k);
    }
  }

  int fd_ = -1;
};

namespace bridge_detail {

inline Vec3 vec3(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_array() || it->size() != 3) {
    throw Error(ErrorKind::kProtocol, std::string("state field ") + key + " must be 3 numbers");
  }
  Vec3 v{};
  for (int i = 0; i < 3; ++i) {
    if (!(*it)[i].is_number()) throw Error(ErrorKind::kProtocol, std::string("state field ") + key + " not numeric");
    v[i] = (*it)[i].get<double>();
  }
  return v;
}

inline JointVector joints(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_array() || it->size() != kNumJoints) {
    throw Error(ErrorKind::kProtocol, std::string("state field ") + key + " must be 10 numbers");
  }
  JointVector v{};
  for (int i = 0; i < kNumJoints; ++i) {
    if (!(*it)[i].is_number()) throw Error(ErrorKind::kProtocol, std::string("state field ") + key + " not numeric");
    v[i] = (*it)[i].get<double>();
  }
  return v;
}

inline double number(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw Error(ErrorKind::kProtocol, std::string("state field ") + key + " missing");
  return it->get<double>();
}

}  // namespace bridge_detail

// Simulator state arrives with feet labelled right/left; stance is ours.
inline PlantState state_from_wire(const nlohmann::json& j, Stance stance) {
  using namespace bridge_detail;
  if (!j.is_object()) throw Error(ErrorKind::kProtocol, "state must be an object");
  PlantState s;
  s.time = number(j, "time");
  s.pelvis_pos = vec3(j, "pelvis_pos");
  s.pelvis_vel = vec3(j, "pelvis_vel");
  s.torso_angles = vec3(j, "torso_angles");
  s.torso_rates = vec3(j, "torso_rates");
  s.q = joints(j, "q");
  s.qd = joints(j, "qd");
  s.torque = joints(j, "torque");
  s.push_force = vec3(j, "push_force");
  const Vec3 right = vec3(j, "right_foot");
  const Vec3 left = vec3(j, "left_foot");
  s.stance = stance;
  s.stance_foot = stance == Stance::kRight ? right : left;
  s.swing_foot = stance == Stance::kRight ? left : right;
  s.stance_foot_yaw = j.value("stance_foot_yaw", 0.0);
  return s;
}

inline nlohmann::json state_to_wire(const PlantState& s) {
  const bool right = s.stance == Stance::kRight;
  return {{"time", s.time},
          {"pelvis_pos", s.pelvis_pos},
          {"pelvis_vel", s.pelvis_vel},
          {"torso_angles", s.torso_angles},
          {"torso_rates", s.torso_rates},
          {"q", s.q},
          {"qd", s.qd},
          {"torque", s.torque},
          {"push_force", s.push_force},
          {"right_foot", right ? s.stance_foot : s.swing_foot},
          {"left_foot", right ? s.swing_foot : s.stance_foot},
          {"stance_foot_yaw", s.stance_foot_yaw}};
}

class BridgePlant : public Plant {
 public:
  explicit BridgePlant(std::unique_ptr<Transport> transport) : transport_(std::move(transport)) {
    if (!transport_) throw Error(ErrorKind::kProtocol, "bridge needs a transport");
    const auto reply = wire::check_reply(transport_->request(hello()));
    const auto it = reply.find("protocol");
    if (it == reply.end() || !it->is_number_integer() || it->get<int>() != wire::kProtocolVersion) {
      throw Error(ErrorKind::kProtocol, "protocol version mismatch");
    }
  }

  ~BridgePlant() override {
    try {
      transport_->request({{"op", "close"}});
    } catch (...) {
    }
  }

  static nlohmann::json hello() {
    auto h = wire::hello_message();
    h["mode"] = "torque";
    return h;
  }

  const PlantState& reset(std::uint64_t seed) override {
    const auto reply = wire::check_reply(transport_->request({{"op", "reset"}, {"seed", seed}}));
    state_ = state_from_wire(reply.at("state"), Stance::kRight);
    return state_;
  }

  // Both substeps are computed from the state at the start of the tick, so
  // a tick costs one round trip.
  const PlantState& advance(const SubstepController& controller, int substeps,
                            double dt) override {
    nlohmann::json cmds = nlohmann::json::array();
    for (int k = 0; k < substeps; ++k) {
      const SubstepCommand c = controller(state_, k);
      cmds.push_back({{"torque", c.torque},
                      {"torso_torque", {c.torso_roll_torque, c.torso_pitch_torque}}});
    }
    const auto reply = wire::check_reply(
        transport_->request({{"op", "step"}, {"dt", dt}, {"substeps", std::move(cmds)}}));
    state_ = state_from_wire(reply.at("state"), state_.stance);
    return state_;
  }

  const PlantState& switch_stance() override {
    state_.stance = other(state_.stance);
    std::swap(state_.stance_foot, state_.swing_foot);
    return state_;
  }

  void add_push(const PushEvent& e) override {
    wire::check_reply(transport_->request(
        {{"op", "push"}, {"start", e.start}, {"duration", e.duration}, {"fx", e.fx}, {"fy", e.fy}}));
  }

  const PlantState& state() const override { return state_; }

 private:
  std::unique_ptr<Transport> transport_;
  PlantState state_;
};

}  // namespace gaitforge
