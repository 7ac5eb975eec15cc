#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "embodied/gesture.hpp"
#include "embodied/protocol.hpp"

namespace embodied::link {

struct TelemetryFrame {
  std::int64_t t_ms = 0;
  gesture::Pose angles = gesture::idle_pose();
  std::optional<Sentiment> active_gesture;

  friend bool operator==(const TelemetryFrame&, const TelemetryFrame&) = default;
};

struct DeviceOptions {
  gesture::GestureTable table = gesture::default_table();
  gesture::JitterConfig jitter{};
  double tick_hz = gesture::kDefaultTickHz;
  std::int64_t telemetry_period_ms = 50;  // 20 Hz
};

/// Simulated motor controller. Accepts command frames, plays the matching
/// gesture from the current pose (a new command preempts the active one),
/// and reports the pose on a fixed telemetry grid.
///
/// Not thread-safe; see DeviceHandle for the shared wrapper.
class VirtualDevice {
 public:
  explicit VirtualDevice(DeviceOptions options = {});

  /// One whole frame from a message-oriented channel. Telemetry up to (but
  /// not including) now_ms reflects the state before the command.
  DecodeResult receive(std::span<const std::uint8_t> frame, std::int64_t now_ms);

  /// Raw serial-style bytes; frames may be split or corrupted.
  std::vector<DecodeResult> receive_stream(std::span<const std::uint8_t> bytes, std::int64_t now_ms);

  /// Advances the clock. Returns telemetry for every grid point in
  /// (last emitted, now_ms]. `now_ms` must not go backwards.
  std::vector<TelemetryFrame> step(std::int64_t now_ms);

  gesture::Pose pose_at(std::int64_t t_ms) const;
  std::optional<Sentiment> active_at(std::int64_t t_ms) const;

  std::uint64_t accepted() const noexcept { return accepted_; }
  std::uint64_t rejected() const noexcept { return rejected_; }
  std::size_t noise_bytes() const noexcept { return parser_.skipped(); }

  /// Timeline of the gesture currently (or last) playing, relative to its start.
  const gesture::Timeline& timeline() const noexcept { return timeline_; }
  std::int64_t gesture_start_ms() const noexcept { return start_ms_; }

  /// Seed used for the n-th accepted command (0-based).
  static std::uint64_t command_seed(std::uint64_t base, std::uint64_t index) noexcept;

 private:
  void start_gesture(Sentiment s, std::int64_t now_ms);
  // Queues telemetry for grid points before now_ms (and at it, if inclusive).
  void advance_to(std::int64_t now_ms, bool inclusive);

  DeviceOptions options_;
  StreamParser parser_;
  std::optional<Sentiment> gesture_;
  gesture::Timeline timeline_;
  std::int64_t start_ms_ = 0;
  std::int64_t clock_ms_ = 0;
  std::optional<std::int64_t> last_emitted_;
  std::vector<TelemetryFrame> pending_;
  std::uint64_t accepted_ = 0;
  std::uint64_t rejected_ = 0;
};

/// Thread-safe handle shared by the session loop (sender) and the
/// telemetry driver (stepper). Time comes from the supplied clock.
class DeviceHandle : public DeviceSender {
 public:
  using Clock = std::function<std::int64_t()>;

  DeviceHandle(DeviceOptions options, Clock clock);

  void send(std::span<const std::uint8_t> bytes) override;
  std::vector<TelemetryFrame> step();
  std::vector<TelemetryFrame> step(std::int64_t now_ms);

  template <typename F>
  auto with_device(F&& f) {
    std::lock_guard lock(mutex_);
    return f(device_);
  }

 private:
  std::mutex mutex_;
  VirtualDevice device_;
  Clock clock_;
};

/// Writes frames to a serial port (8N1). Throws Error{"SerialError"}.
class SerialLink : public DeviceSender {
 public:
  SerialLink(const std::string& port, int baud = kDefaultBaud);
  ~SerialLink() override;
  SerialLink(const SerialLink&) = delete;
  SerialLink& operator=(const SerialLink&) = delete;

  void send(std::span<const std::uint8_t> bytes) override;

 private:
  int fd_ = -1;
};

/// Records every frame it is given; used by tests and dry runs.
class RecordingSender : public DeviceSender {
 public:
  void send(std::span<const std::uint8_t> bytes) override {
    std::lock_guard lock(mutex_);
    frames_.emplace_back(bytes.begin(), bytes.end());
  }
  std::vector<std::vector<std::uint8_t>> frames() const {
    std::lock_guard lock(mutex_);
    return frames_;
  }

 private:
  mutable std::mutex mutex_;
  std::vector<std::vector<std::uint8_t>> frames_;
};

/// Collapses a telemetry stream into the sequence of gestures it shows:
/// one entry per contiguous run of frames with the same active gesture.
std::vector<Sentiment> gesture_sequence(std::span<const TelemetryFrame> frames);

}  // namespace embodied::link
