#include <gtest/gtest.h>

#include <random>

#include "echo_server.hpp"
#include "gaitforge/bridge_plant.hpp"
#include "gaitforge/config.hpp"
#include "gaitforge/rollout.hpp"
#include "gaitforge/trace.hpp"
#include "test_util.hpp"

using namespace gaitforge;
using nlohmann::json;

namespace {

json random_payload(std::mt19937_64& rng, std::size_t target) {
  static constexpr char kAlphabet[] =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 \"\\/\n\t{}[]:,";
  std::uniform_int_distribution<int> ch(0, sizeof kAlphabet - 2);
  std::uniform_real_distribution<double> num(-1e6, 1e6);
  std::string s(target, ' ');
  for (auto& c : s) c = kAlphabet[ch(rng)];
  json j = {{"op", "step"}, {"blob", s}, {"n", static_cast<std::int64_t>(rng() >> 12)}};
  auto& arr = j["values"] = json::array();
  for (int i = 0; i < 5; ++i) arr.push_back(num(rng));
  j["nested"] = {{"flag", rng() % 2 == 0}, {"none", nullptr}, {"unicode", "\xc3\xa9\xe2\x82\xac"}};
  return j;
}

}  // namespace

TEST(Frame, PingPrefix) {
  const std::string frame = wire::encode_frame(R"({"op":"ping"})");
  ASSERT_EQ(frame.size(), 17u);
  EXPECT_EQ(static_cast<unsigned char>(frame[0]), 0x0D);
  EXPECT_EQ(frame[1], 0);
  EXPECT_EQ(frame[2], 0);
  EXPECT_EQ(frame[3], 0);
  EXPECT_EQ(frame.substr(4), R"({"op":"ping"})");
  EXPECT_EQ(wire::encode_message({{"op", "ping"}}), frame);
}

TEST(Frame, LittleEndianPrefix) {
  const std::string payload(0x010203, 'x');
  const std::string frame = wire::encode_frame(payload);
  EXPECT_EQ(static_cast<unsigned char>(frame[0]), 0x03);
  EXPECT_EQ(static_cast<unsigned char>(frame[1]), 0x02);
  EXPECT_EQ(static_cast<unsigned char>(frame[2]), 0x01);
  EXPECT_EQ(static_cast<unsigned char>(frame[3]), 0x00);
}

TEST(Frame, RandomPayloadsRoundTrip) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> logsize(0.0, std::log(1000000.0));
  for (int i = 0; i < 1000; ++i) {
    const std::size_t target = i < 3 ? 1000000 - 400 : static_cast<std::size_t>(std::exp(logsize(rng)));
    const json j = random_payload(rng, target);
    const std::string frame = wire::encode_message(j);
    ASSERT_LE(frame.size(), 4u + 1100000u);
    const std::string payload = wire::decode_frame(frame);
    EXPECT_EQ(payload, j.dump());
    ASSERT_EQ(wire::parse_payload(payload), j) << "payload " << i;
  }
}

TEST(Frame, DecoderHandlesArbitrarySplits) {
  std::mt19937_64 rng(22);
  std::vector<json> sent;
  std::string stream;
  for (int i = 0; i < 50; ++i) {
    sent.push_back(random_payload(rng, rng() % 3000));
    stream += wire::encode_message(sent.back());
  }
  wire::FrameDecoder dec;
  std::vector<json> got;
  std::size_t at = 0;
  while (at < stream.size()) {
    const std::size_t n = std::min<std::size_t>(1 + rng() % 700, stream.size() - at);
    dec.feed(std::string_view(stream).substr(at, n));
    at += n;
    while (auto p = dec.next()) got.push_back(wire::parse_payload(*p));
  }
  EXPECT_EQ(got, sent);
  EXPECT_EQ(dec.buffered(), 0u);
}

TEST(Frame, DecodeErrors) {
  EXPECT_ERROR_KIND(wire::decode_frame("\x01\x00"), ErrorKind::kProtocol);
  const std::string frame = wire::encode_frame("{}");
  EXPECT_ERROR_KIND(wire::decode_frame(frame + "x"), ErrorKind::kProtocol);
  EXPECT_ERROR_KIND(wire::decode_frame(frame.substr(0, 5)), ErrorKind::kProtocol);
  EXPECT_ERROR_KIND(wire::decode_frame(std::string("\xff\xff\xff\xff", 4)), ErrorKind::kProtocol);
  wire::FrameDecoder dec;
  dec.feed(std::string("\xff\xff\xff\x7f", 4));
  EXPECT_ERROR_KIND(dec.next(), ErrorKind::kProtocol);
  EXPECT_ERROR_KIND(wire::parse_payload("[1,2]"), ErrorKind::kProtocol);
  EXPECT_ERROR_KIND(wire::parse_payload("{\"op\":"), ErrorKind::kProtocol);
}

TEST(Messages, HelloAndReplies) {
  const auto h = wire::hello_message();
  EXPECT_EQ(h.at("op"), "hello");
  EXPECT_EQ(h.at("protocol"), 1);
  EXPECT_EQ(BridgePlant::hello().at("mode"), "torque");
  EXPECT_EQ(wire::check_reply({{"ok", true}, {"x", 1}}).at("x"), 1);
  try {
    wire::check_reply({{"ok", false}, {"error", "episode_done"}});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kProtocol);
    EXPECT_NE(std::string(e.what()).find("episode_done"), std::string::npos);
  }
  EXPECT_ERROR_KIND(wire::check_reply(json::object()), ErrorKind::kProtocol);
}

TEST(Address, Parsing) {
  auto a = wire::parse_address("example.org:9000");
  EXPECT_EQ(a.host, "example.org");
  EXPECT_EQ(a.port, 9000);
  a = wire::parse_address("10.0.0.2");
  EXPECT_EQ(a.host, "10.0.0.2");
  EXPECT_EQ(a.port, 7787);
  a = wire::parse_address(":1234");
  EXPECT_EQ(a.host, "127.0.0.1");
  EXPECT_EQ(a.port, 1234);
  EXPECT_EQ(wire::kDefaultPort, 7787);
  EXPECT_ERROR_KIND(wire::parse_address("host:"), ErrorKind::kConfig);
  EXPECT_ERROR_KIND(wire::parse_address("host:70000"), ErrorKind::kConfig);
  EXPECT_ERROR_KIND(wire::parse_address("host:12a"), ErrorKind::kConfig);
  EXPECT_ERROR_KIND(wire::parse_address("host:0"), ErrorKind::kConfig);
}

TEST(StateWire, RoundTripMapsFeetByStance) {
  PlantState s;
  s.time = 1.25;
  s.pelvis_pos = {0.1, 0.2, 0.93};
  s.q[3] = 0.7;
  s.stance = Stance::kLeft;
  s.stance_foot = {1, 2, 0};
  s.swing_foot = {3, 4, 0.1};
  const auto j = state_to_wire(s);
  EXPECT_EQ(j.at("left_foot"), json({1, 2, 0}));
  EXPECT_EQ(j.at("right_foot"), json({3, 4, 0.1}));
  const auto back = state_from_wire(j, Stance::kLeft);
  EXPECT_EQ(back.stance_foot, s.stance_foot);
  EXPECT_EQ(back.swing_foot, s.swing_foot);
  EXPECT_EQ(back.q, s.q);
  EXPECT_EQ(back.time, s.time);
  const auto flipped = state_from_wire(j, Stance::kRight);
  EXPECT_EQ(flipped.stance_foot, s.swing_foot);
  auto bad = j;
  bad["q"].erase(0);
  EXPECT_ERROR_KIND(state_from_wire(bad, Stance::kRight), ErrorKind::kProtocol);
  bad = j;
  bad.erase("pelvis_vel");
  EXPECT_ERROR_KIND(state_from_wire(bad, Stance::kRight), ErrorKind::kProtocol);
}

TEST(Bridge, ConnectRefusedIsIoError) {
  int port = 0;
  {
    testutil::EchoServer probe;
    port = probe.port();
    // Connect once so the server thread exits, then the port closes.
    TcpTransport t(wire::parse_address(probe.address()));
  }
  EXPECT_ERROR_KIND(TcpTransport(wire::parse_address("127.0.0.1:" + std::to_string(port))),
                    ErrorKind::kIo);
}

TEST(Bridge, HandshakeRejectsVersionMismatch) {
  testutil::EchoServer server({2, ""});
  EXPECT_ERROR_KIND(BridgePlant(std::make_unique<TcpTransport>(wire::parse_address(server.address()))),
                    ErrorKind::kProtocol);
}

TEST(Bridge, ErrorReplyIsProtocolError) {
  testutil::EchoServer server({1, "step"});
  BridgePlant plant(std::make_unique<TcpTransport>(wire::parse_address(server.address())));
  plant.reset(1);
  EXPECT_ERROR_KIND(plant.advance([](const PlantState&, int) { return SubstepCommand{}; }, 2, 0.0005),
                    ErrorKind::kProtocol);
}

TEST(Bridge, PeerClosingMidSessionIsProtocolError) {
  auto server = std::make_unique<testutil::EchoServer>();
  auto transport = std::make_unique<TcpTransport>(wire::parse_address(server->address()));
  EXPECT_EQ(transport->request({{"op", "close"}}).at("ok"), true);
  EXPECT_ERROR_KIND(transport->request({{"op", "hello"}}), ErrorKind::kProtocol);
}

TEST(Bridge, SessionOpsInOrder) {
  testutil::EchoServer server;
  {
    BridgePlant plant(std::make_unique<TcpTransport>(wire::parse_address(server.address())));
    plant.reset(3);
    plant.add_push({0.5, 0.1, 25.0, 0.0});
    plant.advance([](const PlantState&, int) { return SubstepCommand{}; }, 2, 0.0005);
  }
  const std::vector<std::string> expected = {"hello", "reset", "push", "step", "close"};
  EXPECT_EQ(server.ops(), expected);
}

// Driving the echo model over the wire and in-process yields identical
// traces, field for field.
TEST(Bridge, TraceMatchesInProcessEcho) {
  RunConfig cfg;
  cfg.env.max_ticks = 800;
  const std::vector<PushEvent> pushes = {{0.3, 0.1, 25.0, -5.0}};
  RawAction action{};
  action.fill(0.5);
  const ActionFn policy = [&](const Observation&) { return action; };

  auto collect = [&](std::unique_ptr<Plant> plant) {
    BipedEnv env(cfg.env, cfg.make_decoder(), std::move(plant));
    std::vector<std::string> lines;
    const auto out = run_episode(env, policy, 11, 0.3, 0.0, pushes,
                                 [&](const StepResult& r, const RawAction& a) {
                                   lines.push_back(to_json(make_record(env, r, a)).dump());
                                 });
    EXPECT_FALSE(out.terminated);
    return lines;
  };

  testutil::EchoServer server;
  const auto wire_lines =
      collect(std::make_unique<BridgePlant>(std::make_unique<TcpTransport>(wire::parse_address(server.address()))));
  const auto local_lines = collect(std::make_unique<testutil::EchoPlant>());
  ASSERT_EQ(wire_lines.size(), 800u);
  ASSERT_EQ(wire_lines.size(), local_lines.size());
  for (std::size_t i = 0; i < wire_lines.size(); ++i) ASSERT_EQ(wire_lines[i], local_lines[i]) << i;
  // The push reached the far side.
  const auto rec = record_from_json(json::parse(wire_lines[350]));
  EXPECT_EQ(rec.push_fx, 25.0);
  EXPECT_EQ(rec.push_fy, -5.0);
}
