#include "embodied/virtual_device.hpp"

#include <stdexcept>

namespace embodied::link {

VirtualDevice::VirtualDevice(DeviceOptions options) : options_(std::move(options)) {
  if (auto problem = options_.table.check()) throw Error("TableFileInvalid", *problem);
  if (options_.telemetry_period_ms <= 0) throw std::invalid_argument("telemetry period must be > 0");
  timeline_ = {gesture::Sample{0.0, gesture::idle_pose()}};
}

std::uint64_t VirtualDevice::command_seed(std::uint64_t base, std::uint64_t index) noexcept {
  // splitmix64 output number index + 1 from state base
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

gesture::Pose VirtualDevice::pose_at(std::int64_t t_ms) const {
  return gesture::sample_at(timeline_, static_cast<double>(t_ms - start_ms_));
}

std::optional<Sentiment> VirtualDevice::active_at(std::int64_t t_ms) const {
  if (!gesture_ || t_ms < start_ms_) return std::nullopt;
  if (static_cast<double>(t_ms - start_ms_) >= timeline_.back().t_ms) return std::nullopt;
  return gesture_;
}

void VirtualDevice::advance_to(std::int64_t now_ms, bool inclusive) {
  if (now_ms < clock_ms_) throw std::invalid_argument("device clock moved backwards");
  clock_ms_ = now_ms;
  const std::int64_t period = options_.telemetry_period_ms;
  std::int64_t next = last_emitted_ ? (*last_emitted_ / period + 1) * period : 0;
  for (; next < now_ms || (inclusive && next == now_ms); next += period) {
    pending_.push_back(TelemetryFrame{next, pose_at(next), active_at(next)});
    last_emitted_ = next;
  }
}

void VirtualDevice::start_gesture(Sentiment s, std::int64_t now_ms) {
  const gesture::Pose from = pose_at(now_ms);
  gesture::JitterConfig jitter = options_.jitter;
  jitter.seed = command_seed(options_.jitter.seed, accepted_);
  const auto p = gesture::plan(s, options_.table, jitter);
  timeline_ = gesture::interpolate(p, options_.tick_hz, from);
  start_ms_ = now_ms;
  gesture_ = s;
}

DecodeResult VirtualDevice::receive(std::span<const std::uint8_t> frame, std::int64_t now_ms) {
  advance_to(now_ms, false);
  DecodeResult r = try_decode(frame);
  if (auto* s = std::get_if<Sentiment>(&r)) {
    start_gesture(*s, now_ms);
    ++accepted_;
  } else {
    ++rejected_;
  }
  return r;
}

std::vector<DecodeResult> VirtualDevice::receive_stream(std::span<const std::uint8_t> bytes,
                                                        std::int64_t now_ms) {
  advance_to(now_ms, false);
  auto results = parser_.push(bytes);
  for (const auto& r : results) {
    if (auto* s = std::get_if<Sentiment>(&r)) {
      start_gesture(*s, now_ms);
      ++accepted_;
    } else {
      ++rejected_;
    }
  }
  return results;
}

std::vector<TelemetryFrame> VirtualDevice::step(std::int64_t now_ms) {
  advance_to(now_ms, true);
  std::vector<TelemetryFrame> out;
  out.swap(pending_);
  return out;
}

DeviceHandle::DeviceHandle(DeviceOptions options, Clock clock)
    : device_(std::move(options)), clock_(std::move(clock)) {}

void DeviceHandle::send(std::span<const std::uint8_t> bytes) {
  std::lock_guard lock(mutex_);
  device_.receive(bytes, clock_());
}

std::vector<TelemetryFrame> DeviceHandle::step() {
  std::lock_guard lock(mutex_);
  return device_.step(clock_());
}

std::vector<TelemetryFrame> DeviceHandle::step(std::int64_t now_ms) {
  std::lock_guard lock(mutex_);
  return device_.step(now_ms);
}

std::vector<Sentiment> gesture_sequence(std::span<const TelemetryFrame> frames) {
  std::vector<Sentiment> out;
  std::optional<Sentiment> prev;
  for (const auto& f : frames) {
    if (f.active_gesture && f.active_gesture != prev) out.push_back(*f.active_gesture);
    prev = f.active_gesture;
  }
  return out;
}

}  // namespace embodied::link
