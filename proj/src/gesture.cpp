#include "embodied/gesture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "embodied/default_table_data.hpp"

namespace embodied::gesture {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kJointCount> kJointNames{
    "left_foot", "right_foot", "left_leg", "right_leg", "left_arm", "right_arm", "neck"};

[[noreturn]] void invalid(const std::string& what) { throw Error("TableFileInvalid", what); }

Keyframe keyframe_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) invalid(where + ": keyframe must be an object");
  Keyframe k;
  auto hold = j.find("hold_ms");
  if (hold == j.end() || !hold->is_number()) invalid(where + ": missing numeric hold_ms");
  k.hold_ms = hold->get<double>();
  if (!(k.hold_ms > 0.0)) invalid(where + ": hold_ms must be > 0");
  auto angles = j.find("angles");
  if (angles == j.end() || !angles->is_object()) invalid(where + ": missing angles object");
  std::array<bool, kJointCount> seen{};
  for (auto it = angles->begin(); it != angles->end(); ++it) {
    auto joint = joint_from_string(it.key());
    if (!joint) invalid(where + ": unknown joint '" + it.key() + "'");
    if (!it->is_number()) invalid(where + ": angle for " + it.key() + " is not a number");
    const double deg = it->get<double>();
    if (!(deg >= kMinAngle && deg <= kMaxAngle)) {
      invalid(where + ": angle for " + it.key() + " outside [0,180]");
    }
    at(k.angles, *joint) = deg;
    seen[static_cast<std::size_t>(*joint)] = true;
  }
  for (std::size_t i = 0; i < kJointCount; ++i) {
    if (!seen[i]) invalid(where + ": missing joint " + std::string(kJointNames[i]));
  }
  return k;
}

json keyframe_to_json(const Keyframe& k) {
  json angles = json::object();
  for (JointId j : kAllJoints) angles[std::string(to_string(j))] = at(k.angles, j);
  return json{{"hold_ms", k.hold_ms}, {"angles", angles}};
}

}  // namespace

std::string_view to_string(JointId j) noexcept { return kJointNames[static_cast<std::size_t>(j)]; }

std::optional<JointId> joint_from_string(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kJointNames.size(); ++i) {
    if (kJointNames[i] == s) return static_cast<JointId>(i);
  }
  return std::nullopt;
}

double clamp_angle(double deg) noexcept {
  if (std::isnan(deg)) return kIdleAngle;
  return std::clamp(deg, kMinAngle, kMaxAngle);
}

double duration_ms(const std::vector<Keyframe>& frames) noexcept {
  double total = 0.0;
  for (const auto& k : frames) total += k.hold_ms;
  return total;
}

std::optional<std::string> GestureTable::check() const {
  auto check_frame = [](const Keyframe& k, const std::string& where) -> std::optional<std::string> {
    if (!(k.hold_ms > 0.0)) return where + ": hold must be > 0";
    for (JointId j : kAllJoints) {
      const double a = at(k.angles, j);
      if (!(a >= kMinAngle && a <= kMaxAngle)) return where + ": " + std::string(to_string(j)) + " out of range";
    }
    return std::nullopt;
  };
  if (auto e = check_frame(idle, "idle")) return e;
  for (Sentiment s : kAllSentiments) {
    auto it = entries.find(s);
    const std::string name(to_name(s));
    if (it == entries.end()) return "missing gesture '" + name + "'";
    if (it->second.empty()) return "gesture '" + name + "' has no keyframes";
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      if (auto e = check_frame(it->second[i], name + "[" + std::to_string(i) + "]")) return e;
    }
    const double d = duration_ms(it->second);
    if (d < kMinGestureMs || d > kMaxGestureMs) {
      return "gesture '" + name + "' lasts " + std::to_string(d) + " ms, outside [500, 10000]";
    }
  }
  return std::nullopt;
}

GestureTable parse_table(std::string_view text) {
  json doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded()) invalid("not valid JSON");
  if (!doc.is_object()) invalid("top level must be an object");
  GestureTable table;
  auto idle = doc.find("idle");
  if (idle == doc.end()) invalid("missing 'idle'");
  table.idle = keyframe_from_json(*idle, "idle");
  auto gestures = doc.find("gestures");
  if (gestures == doc.end() || !gestures->is_object()) invalid("missing 'gestures' object");
  for (auto it = gestures->begin(); it != gestures->end(); ++it) {
    auto label = from_name(it.key());
    if (!label) invalid("unknown gesture '" + it.key() + "'");
    if (!it->is_array()) invalid("gesture '" + it.key() + "' must be a list of keyframes");
    std::vector<Keyframe> frames;
    for (std::size_t i = 0; i < it->size(); ++i) {
      frames.push_back(keyframe_from_json((*it)[i], it.key() + "[" + std::to_string(i) + "]"));
    }
    table.entries[*label] = std::move(frames);
  }
  if (auto problem = table.check()) invalid(*problem);
  return table;
}

GestureTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_table(buf.str());
}

std::string serialize_table(const GestureTable& table) {
  json gestures = json::object();
  for (const auto& [label, frames] : table.entries) {
    json list = json::array();
    for (const auto& k : frames) list.push_back(keyframe_to_json(k));
    gestures[std::string(to_name(label))] = list;
  }
  return json{{"idle", keyframe_to_json(table.idle)}, {"gestures", gestures}}.dump(2);
}

const GestureTable& default_table() {
  static const GestureTable table = parse_table(detail::kDefaultGestureTableJson);
  return table;
}

UniformStream::UniformStream(std::uint64_t seed) : engine_(seed) {}

double UniformStream::next01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

GesturePlan plan(Sentiment sentiment, const GestureTable& table, const JitterConfig& jitter) {
  if (!(jitter.max_deg >= 0.0)) throw std::invalid_argument("jitter max_deg must be >= 0");
  if (!(jitter.max_time_frac >= 0.0 && jitter.max_time_frac < 1.0)) {
    throw std::invalid_argument("jitter max_time_frac must be in [0, 1)");
  }
  auto it = table.entries.find(sentiment);
  if (it == table.entries.end()) {
    throw std::invalid_argument("gesture table has no entry for " + std::string(to_name(sentiment)));
  }

  UniformStream rng(jitter.seed);
  GesturePlan out;
  out.sentiment = sentiment;
  out.keyframes.reserve(it->second.size() + 1);
  for (const Keyframe& base : it->second) {
    Keyframe k;
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const double delta = rng.next(-jitter.max_deg, jitter.max_deg);
      k.angles[j] = clamp_angle(base.angles[j] + delta);
    }
    const double scale = rng.next(1.0 - jitter.max_time_frac, 1.0 + jitter.max_time_frac);
    k.hold_ms = base.hold_ms * scale;
    out.keyframes.push_back(k);
  }
  out.keyframes.push_back(table.idle);
  return out;
}

Timeline interpolate(const GesturePlan& plan, double tick_hz, const Pose& start) {
  if (!(tick_hz > 0.0)) throw std::invalid_argument("tick rate must be > 0");
  const double step = 1000.0 / tick_hz;
  const double total = plan.duration_ms();

  // Segment i runs from boundaries[i] to boundaries[i+1], ending on keyframe i.
  std::vector<double> ends;
  ends.reserve(plan.keyframes.size());
  double acc = 0.0;
  for (const auto& k : plan.keyframes) ends.push_back(acc += k.hold_ms);

  Pose from{};
  for (std::size_t j = 0; j < kJointCount; ++j) from[j] = clamp_angle(start[j]);

  auto pose_at = [&](double t) {
    Pose prev = from;
    double seg_start = 0.0;
    for (std::size_t i = 0; i < plan.keyframes.size(); ++i) {
      const Keyframe& k = plan.keyframes[i];
      if (t <= ends[i] || i + 1 == plan.keyframes.size()) {
        const double frac = k.hold_ms > 0.0 ? std::clamp((t - seg_start) / k.hold_ms, 0.0, 1.0) : 1.0;
        Pose p{};
        for (std::size_t j = 0; j < kJointCount; ++j) {
          p[j] = clamp_angle(prev[j] + (k.angles[j] - prev[j]) * frac);
        }
        return p;
      }
      prev = k.angles;
      seg_start = ends[i];
    }
    return prev;
  };

  Timeline timeline;
  timeline.reserve(static_cast<std::size_t>(total / step) + 2);
  for (std::size_t n = 0;; ++n) {
    const double t = static_cast<double>(n) * step;
    if (t >= total) break;
    timeline.push_back(Sample{t, pose_at(t)});
  }
  Pose last = plan.keyframes.empty() ? from : plan.keyframes.back().angles;
  for (auto& a : last) a = clamp_angle(a);
  timeline.push_back(Sample{total, last});
  return timeline;
}

Pose sample_at(const Timeline& timeline, double t_ms) {
  if (timeline.empty()) return idle_pose();
  if (t_ms <= timeline.front().t_ms) return timeline.front().angles;
  if (t_ms >= timeline.back().t_ms) return timeline.back().angles;
  auto hi = std::upper_bound(timeline.begin(), timeline.end(), t_ms,
                             [](double t, const Sample& s) { return t < s.t_ms; });
  auto lo = hi - 1;
  const double span = hi->t_ms - lo->t_ms;
  const double frac = span > 0.0 ? (t_ms - lo->t_ms) / span : 1.0;
  Pose p{};
  for (std::size_t j = 0; j < kJointCount; ++j) {
    p[j] = clamp_angle(lo->angles[j] + (hi->angles[j] - lo->angles[j]) * frac);
  }
  return p;
}

}  // namespace embodied::gesture
