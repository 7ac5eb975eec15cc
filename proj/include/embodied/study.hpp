#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "embodied/error.hpp"

namespace embodied::study {

/// Which agent a participant used first.
enum class ConditionOrder { EmbodiedFirst, VoiceFirst };

std::string_view to_string(ConditionOrder o) noexcept;
std::optional<ConditionOrder> order_from_string(std::string_view s) noexcept;

inline constexpr int kLikertMin = 1;
inline constexpr int kLikertMax = 5;

/// Item keys used by the shipped datasets, one per reported chart.
inline constexpr std::string_view kHelpfulnessEmbodied = "helpfulness_embodied";
inline constexpr std::string_view kHelpfulnessVoice = "helpfulness_voice";
inline constexpr std::string_view kTrustPreference = "trust_preference";  // 1 voice .. 5 embodied
inline constexpr std::string_view kGestureEngagement = "gesture_engagement";
inline constexpr std::string_view kComfort = "comfort";

struct SurveyRecord {
  std::string participant_id;
  ConditionOrder order = ConditionOrder::EmbodiedFirst;
  std::map<std::string, int> items;
  std::string free_text;
};

struct ItemSummary {
  std::size_t count = 0;
  std::int64_t sum = 0;
  int min = kLikertMax;
  int max = kLikertMin;
  /// Mean rounded half-up to two decimals, as an integer number of hundredths.
  std::int64_t mean_hundredths = 0;

  double mean() const noexcept { return static_cast<double>(mean_hundredths) / 100.0; }
  double exact_mean() const noexcept { return count ? static_cast<double>(sum) / count : 0.0; }
  std::string mean_string() const;  // "4.33"
};

struct StudySummary {
  std::size_t participants = 0;
  std::map<std::string, ItemSummary> items;
  std::map<ConditionOrder, std::size_t> order_counts;
};

class StudyError : public Error {
 public:
  using Error::Error;
};

/// Splits n participants into ceil(n/2) EmbodiedFirst and floor(n/2)
/// VoiceFirst, shuffled deterministically by `seed`. Throws
/// StudyError{"TooFewParticipants"} for n < 2.
std::vector<ConditionOrder> counterbalance(std::size_t n_participants, std::uint64_t seed = 0);

/// Per-item mean, count, min and max. Throws StudyError{"EmptyDataset"} or
/// StudyError{"OutOfRangeItem"} naming the participant and item.
StudySummary summarize(const std::vector<SurveyRecord>& records);

/// Rounds sum/count half-up to hundredths using integer arithmetic.
std::int64_t round_half_up_hundredths(std::int64_t sum, std::size_t count);

// ---- CSV ------------------------------------------------------------------
//
// Header must contain participant_id, order and free_text; every other
// column is a Likert item holding an integer 1..5. order is
// "embodied_first" or "voice_first". Fields may be double-quoted.

/// Throws StudyError{"SchemaMismatch"} (names the column) or
/// StudyError{"BadValue"} (names row and column).
std::vector<SurveyRecord> parse_csv(std::string_view text);
std::vector<SurveyRecord> ingest_csv(const std::filesystem::path& path);

/// RFC 4180 style row splitting; exposed for tests.
std::vector<std::vector<std::string>> split_csv(std::string_view text);

void print_summary(std::ostream& out, const StudySummary& summary);

}  // namespace embodied::study
