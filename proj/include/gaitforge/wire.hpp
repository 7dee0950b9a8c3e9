#pragma once

// Length-prefixed JSON frames: u32 little-endian byte count, then UTF-8 JSON.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gaitforge/errors.hpp"

namespace gaitforge::wire {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint16_t kDefaultPort = 7787;
inline constexpr std::uint32_t kMaxFrameBytes = 16u << 20;

inline std::string encode_frame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) throw Error(ErrorKind::kProtocol, "frame too large");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((n >> (8 * i)) & 0xFFu));
  out.append(payload);
  return out;
}

inline std::string encode_message(const nlohmann::json& msg) { return encode_frame(std::string_view(msg.dump())); }

inline std::uint32_t read_prefix(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// Incremental decoder for a byte stream that may split frames anywhere.
class FrameDecoder {
 public:
  void feed(std::string_view bytes) { buf_.append(bytes); }

  std::optional<std::string> next() {
    if (buf_.size() < 4) return std::nullopt;
    const std::uint32_t n = read_prefix(reinterpret_cast<const unsigned char*>(buf_.data()));
    if (n > kMaxFrameBytes) throw Error(ErrorKind::kProtocol, "frame too large");
    if (buf_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
    std::string payload = buf_.substr(4, n);
    buf_.erase(0, 4 + static_cast<std::size_t>(n));
    return payload;
  }

  std::size_t buffered() const { return buf_.size(); }

 private:
  std::string buf_;
};

// Decodes exactly one frame; trailing or missing bytes are errors.
inline std::string decode_frame(std::string_view bytes) {
  if (bytes.size() < 4) throw Error(ErrorKind::kProtocol, "truncated frame header");
  const std::uint32_t n = read_prefix(reinterpret_cast<const unsigned char*>(bytes.data()));
  if (n > kMaxFrameBytes) throw Error(ErrorKind::kProtocol, "frame too large");
  if (bytes.size() != 4 + static_cast<std::size_t>(n)) {
    throw Error(ErrorKind::kProtocol, "frame length does not match prefix");
  }
  return std::string(bytes.substr(4));
}

inline nlohmann::json parse_payload(std::string_view payload) {
  nlohmann::json j = nlohmann::json::parse(payload, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::kProtocol, "payload is not a JSON object");
  return j;
}

inline nlohmann::json hello_message() { return {{"op", "hello"}, {"protocol", kProtocolVersion}}; }

// Throws kProtocol for an error reply; returns the reply otherwise.
inline nlohmann::json check_reply(nlohmann::json reply) {
  if (reply.value("ok", false)) return reply;
  std::string msg = "server error";
  if (auto it = reply.find("error"); it != reply.end() && it->is_string()) msg = it->get<std::string>();
  throw Error(ErrorKind::kProtocol, msg);
}

struct Address {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPort;
};

// "host:port", "host" or ":port".
inline Address parse_address(std::string_view text) {
  Address a;
  const auto colon = text.rfind(':');
  std::string_view host = text, port;
  if (colon != std::string_view::npos) {
    host = text.substr(0, colon);
    port = text.substr(colon + 1);
  }
  if (!host.empty()) a.host = std::string(host);
  if (colon != std::string_view::npos) {
    if (port.empty() || port.size() > 5) throw Error(ErrorKind::kConfig, "bad port in address");
    unsigned long v = 0;
    for (char c : port) {
      if (c < '0' || c > '9') throw Error(ErrorKind::kConfig, "bad port in address");
      v = v * 10 + static_cast<unsigned long>(c - '0');
    }
    if (v == 0 || v > 65535) throw Error(ErrorKind::kConfig, "port out of range");
    a.port = static_cast<std::uint16_t>(v);
  }
  return a;
}

}  // namespace gaitforge::wire
