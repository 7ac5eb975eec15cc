#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "embodied/error.hpp"
#include "embodied/sentiment.hpp"

namespace embodied::gesture {

/// Four lower-body servos (a foot and a leg each side), two arms, one neck.
enum class JointId { LeftFoot, RightFoot, LeftLeg, RightLeg, LeftArm, RightArm, Neck };

inline constexpr std::size_t kJointCount = 7;
inline constexpr std::array<JointId, kJointCount> kAllJoints{
    JointId::LeftFoot, JointId::RightFoot, JointId::LeftLeg, JointId::RightLeg,
    JointId::LeftArm,  JointId::RightArm,  JointId::Neck};

inline constexpr double kMinAngle = 0.0;
inline constexpr double kMaxAngle = 180.0;
inline constexpr double kIdleAngle = 90.0;
inline constexpr double kDefaultTickHz = 50.0;

std::string_view to_string(JointId j) noexcept;
std::optional<JointId> joint_from_string(std::string_view s) noexcept;

/// Servo angles in degrees, indexed by JointId.
using Pose = std::array<double, kJointCount>;

inline constexpr Pose idle_pose() {
  Pose p{};
  for (auto& a : p) a = kIdleAngle;
  return p;
}

inline double& at(Pose& p, JointId j) { return p[static_cast<std::size_t>(j)]; }
inline double at(const Pose& p, JointId j) { return p[static_cast<std::size_t>(j)]; }

double clamp_angle(double deg) noexcept;

/// A target pose reached over `hold_ms` from the previous pose.
struct Keyframe {
  Pose angles = idle_pose();
  double hold_ms = 0.0;

  friend bool operator==(const Keyframe&, const Keyframe&) = default;
};

struct GestureTable {
  std::map<Sentiment, std::vector<Keyframe>> entries;
  Keyframe idle;

  /// Returns the first violated invariant, or nullopt.
  std::optional<std::string> check() const;
};

inline constexpr double kMinGestureMs = 500.0;
inline constexpr double kMaxGestureMs = 10000.0;

double duration_ms(const std::vector<Keyframe>& frames) noexcept;

/// The shipped choreography (compiled in from data/gesture_table.json).
const GestureTable& default_table();

/// Parses the table file format; throws Error{"TableFileInvalid"}.
///
///   {
///     "idle":     {"hold_ms": 400, "angles": {"left_foot": 90, ...all 7...}},
///     "gestures": {"greeting": [{"hold_ms": 300, "angles": {...}}, ...],
///                  "happy": [...], "sad": [...], "serious": [...], "dance": [...]}
///   }
GestureTable parse_table(std::string_view text);
GestureTable load_table(const std::filesystem::path& path);
std::string serialize_table(const GestureTable& table);

struct JitterConfig {
  double max_deg = 5.0;
  double max_time_frac = 0.1;  // must be < 1
  std::uint64_t seed = 0;
};

/// Jittered keyframes for one gesture, always ending at the idle pose.
struct GesturePlan {
  Sentiment sentiment = Sentiment::Serious;
  std::vector<Keyframe> keyframes;

  double duration_ms() const noexcept { return gesture::duration_ms(keyframes); }
};

/// Each base angle gets uniform +-max_deg then clamps to [0,180]; each hold
/// is scaled by a uniform factor in [1-max_time_frac, 1+max_time_frac]. The
/// idle keyframe is appended unperturbed. Pure function of its arguments.
/// Throws std::invalid_argument for negative or out-of-range jitter.
GesturePlan plan(Sentiment sentiment, const GestureTable& table, const JitterConfig& jitter);

struct Sample {
  double t_ms = 0.0;
  Pose angles{};
};

using Timeline = std::vector<Sample>;

/// Linear interpolation from `start` through every keyframe at `tick_hz`.
/// The first sample is `start` at t=0 and the last sits exactly on the end
/// of the final keyframe. Every angle is clamped to [0,180].
Timeline interpolate(const GesturePlan& plan, double tick_hz = kDefaultTickHz,
                     const Pose& start = idle_pose());

/// Pose at an arbitrary time, linear between timeline samples and held at
/// the final sample beyond the end.
Pose sample_at(const Timeline& timeline, double t_ms);

/// Deterministic uniform doubles from a 64-bit seed. Uses the top 53 bits
/// of mt19937_64 so the stream does not depend on the standard library's
/// distribution implementation.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed);
  double next01();
  double next(double lo, double hi) { return lo + (hi - lo) * next01(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace embodied::gesture
