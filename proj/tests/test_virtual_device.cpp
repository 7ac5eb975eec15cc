#include <doctest.h>

#include <cmath>
#include <random>

#include "embodied/virtual_device.hpp"

using namespace embodied;
using namespace embodied::link;
using namespace embodied::gesture;

namespace {

DeviceOptions options(std::uint64_t seed) {
  DeviceOptions o;
  o.jitter.seed = seed;
  return o;
}

void check_pose_near(const Pose& a, const Pose& b) {
  for (std::size_t j = 0; j < kJointCount; ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-9));
}

}  // namespace

TEST_CASE("no command gives constant idle telemetry") {
  VirtualDevice dev;
  const auto frames = dev.step(1000);
  REQUIRE(frames.size() == 21);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(frames[i].t_ms == static_cast<std::int64_t>(i) * 50);
    CHECK(frames[i].angles == idle_pose());
    CHECK_FALSE(frames[i].active_gesture.has_value());
  }
  CHECK(dev.step(1000).empty());
  CHECK(dev.step(1049).empty());
  CHECK(dev.step(1050).size() == 1);
}

TEST_CASE("Dance playback follows the gesture-engine timeline") {
  const std::uint64_t base_seed = 77;
  VirtualDevice dev(options(base_seed));
  const auto before = dev.step(100);
  const auto r = dev.receive(encode_command(Sentiment::Dance), 100);
  REQUIRE(std::holds_alternative<Sentiment>(r));
  CHECK(std::get<Sentiment>(r) == Sentiment::Dance);
  CHECK(dev.accepted() == 1);

  JitterConfig jitter;
  jitter.seed = VirtualDevice::command_seed(base_seed, 0);
  const auto oracle = interpolate(plan(Sentiment::Dance, default_table(), jitter));
  const double end = oracle.back().t_ms;

  const auto frames = dev.step(100 + static_cast<std::int64_t>(end) + 500);
  REQUIRE_FALSE(frames.empty());
  bool saw_dance = false;
  for (const auto& f : frames) {
    CAPTURE(f.t_ms);
    const double rel = static_cast<double>(f.t_ms - 100);
    check_pose_near(f.angles, sample_at(oracle, rel));
    if (rel < end) {
      CHECK(f.active_gesture == Sentiment::Dance);
      saw_dance = true;
    } else {
      CHECK_FALSE(f.active_gesture.has_value());
      for (std::size_t j = 0; j < kJointCount; ++j) CHECK(std::abs(f.angles[j] - kIdleAngle) <= 0.5);
    }
  }
  CHECK(saw_dance);
  for (const auto& f : before) CHECK_FALSE(f.active_gesture.has_value());
}

TEST_CASE("a new command preempts and starts from the current pose") {
  VirtualDevice dev(options(5));
  dev.receive(encode_command(Sentiment::Happy), 0);
  dev.step(250);
  const Pose mid = dev.pose_at(300);
  CHECK(mid != idle_pose());

  dev.receive(encode_command(Sentiment::Sad), 300);
  CHECK(dev.gesture_start_ms() == 300);
  check_pose_near(dev.timeline().front().angles, mid);
  CHECK(dev.active_at(300) == Sentiment::Sad);

  const auto frames = dev.step(400);
  REQUIRE_FALSE(frames.empty());
  CHECK(frames.front().t_ms == 300);
  CHECK(frames.front().active_gesture == Sentiment::Sad);
  check_pose_near(frames.front().angles, mid);

  JitterConfig jitter;
  jitter.seed = VirtualDevice::command_seed(5, 1);
  const auto oracle = interpolate(plan(Sentiment::Sad, default_table(), jitter), kDefaultTickHz, mid);
  check_pose_near(dev.pose_at(350), sample_at(oracle, 50));
}

TEST_CASE("rejected frames leave playback alone") {
  VirtualDevice dev;
  auto f = encode_command(Sentiment::Greeting);
  f[4] ^= 0x40;
  const auto r = dev.receive(f, 10);
  REQUIRE(std::holds_alternative<DecodeFailure>(r));
  CHECK(std::get<DecodeFailure>(r).error == DecodeError::BadChecksum);
  CHECK(dev.rejected() == 1);
  CHECK(dev.accepted() == 0);
  for (const auto& t : dev.step(500)) CHECK_FALSE(t.active_gesture.has_value());
}

TEST_CASE("stream mode tolerates noise") {
  VirtualDevice dev;
  std::vector<std::uint8_t> bytes{0x11, 0x22};
  const auto f = encode_command(Sentiment::Serious);
  bytes.insert(bytes.end(), f.begin(), f.end());
  const auto results = dev.receive_stream(bytes, 0);
  REQUIRE(results.size() == 1);
  CHECK(std::get<Sentiment>(results[0]) == Sentiment::Serious);
  CHECK(dev.noise_bytes() == 2);
  CHECK(dev.active_at(0) == Sentiment::Serious);
}

TEST_CASE("telemetry stays in bounds under fuzzed command streams") {
  std::mt19937_64 rng(8);
  for (int run = 0; run < 20; ++run) {
    DeviceOptions o;
    o.jitter = {20.0, 0.5, rng()};
    VirtualDevice dev(o);
    std::int64_t now = 0;
    for (int i = 0; i < 40; ++i) {
      now += static_cast<std::int64_t>(rng() % 400);
      std::vector<std::uint8_t> junk(rng() % 12);
      for (auto& b : junk) b = static_cast<std::uint8_t>(rng());
      if (rng() % 2) {
        const auto f = encode_command(kAllSentiments[rng() % 5]);
        junk.insert(junk.end(), f.begin(), f.end());
      }
      dev.receive_stream(junk, now);
      for (const auto& t : dev.step(now)) {
        for (double a : t.angles) {
          CHECK(a >= 0.0);
          CHECK(a <= 180.0);
        }
      }
    }
  }
}

TEST_CASE("gesture_sequence collapses runs") {
  std::vector<TelemetryFrame> frames(6);
  frames[1].active_gesture = Sentiment::Happy;
  frames[2].active_gesture = Sentiment::Happy;
  frames[4].active_gesture = Sentiment::Happy;
  frames[5].active_gesture = Sentiment::Dance;
  CHECK(gesture_sequence(frames) == std::vector<Sentiment>{Sentiment::Happy, Sentiment::Happy, Sentiment::Dance});
}

TEST_CASE("DeviceHandle uses its clock") {
  std::int64_t now = 0;
  DeviceHandle h({}, [&] { return now; });
  now = 200;
  h.send(encode_command(Sentiment::Greeting));
  now = 300;
  const auto frames = h.step();
  CHECK(frames.back().t_ms == 300);
  CHECK(frames.back().active_gesture == Sentiment::Greeting);
  CHECK(h.with_device([](VirtualDevice& d) { return d.accepted(); }) == 1);
}
