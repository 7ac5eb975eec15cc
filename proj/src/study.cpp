#include "embodied/study.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace embodied::study {

std::string_view to_string(ConditionOrder o) noexcept {
  return o == ConditionOrder::EmbodiedFirst ? "embodied_first" : "voice_first";
}

std::optional<ConditionOrder> order_from_string(std::string_view s) noexcept {
  if (s == "embodied_first") return ConditionOrder::EmbodiedFirst;
  if (s == "voice_first") return ConditionOrder::VoiceFirst;
  return std::nullopt;
}

std::string ItemSummary::mean_string() const {
  std::ostringstream out;
  out << mean_hundredths / 100 << '.' << std::setw(2) << std::setfill('0') << mean_hundredths % 100;
  return out.str();
}

std::int64_t round_half_up_hundredths(std::int64_t sum, std::size_t count) {
  const auto n = static_cast<std::int64_t>(count);
  // floor(100*sum/n + 1/2) for non-negative sums
  return (200 * sum + n) / (2 * n);
}

std::vector<ConditionOrder> counterbalance(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw StudyError("TooFewParticipants", "counterbalancing needs at least 2 participants");
  std::vector<ConditionOrder> out((n + 1) / 2, ConditionOrder::EmbodiedFirst);
  out.resize(n, ConditionOrder::VoiceFirst);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(out[i], out[j]);
  }
  return out;
}

StudySummary summarize(const std::vector<SurveyRecord>& records) {
  if (records.empty()) throw StudyError("EmptyDataset", "no survey records to summarize");
  StudySummary s;
  s.participants = records.size();
  for (const auto& r : records) {
    ++s.order_counts[r.order];
    for (const auto& [key, value] : r.items) {
      if (value < kLikertMin || value > kLikertMax) {
        throw StudyError("OutOfRangeItem", "participant " + r.participant_id + " item " + key +
                                               " has value " + std::to_string(value) + ", expected 1..5");
      }
      auto& item = s.items[key];
      ++item.count;
      item.sum += value;
      item.min = std::min(item.min, value);
      item.max = std::max(item.max, value);
    }
  }
  for (auto& [key, item] : s.items) item.mean_hundredths = round_half_up_hundredths(item.sum, item.count);
  return s;
}

std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"': quoted = true; any = true; break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r': break;
      case '\n':
        if (any || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        any = false;
        break;
      default: field += c; any = true;
    }
  }
  if (quoted) throw StudyError("BadValue", "unterminated quoted field at end of file");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SurveyRecord> parse_csv(std::string_view text) {
  const auto rows = split_csv(text);
  if (rows.empty()) throw StudyError("SchemaMismatch", "missing header row");
  const auto& header = rows.front();

  std::optional<std::size_t> id_col, order_col, text_col;
  std::vector<std::pair<std::size_t, std::string>> item_cols;
  std::set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name.empty()) throw StudyError("SchemaMismatch", "column " + std::to_string(c + 1) + " has no name");
    if (!seen.insert(name).second) throw StudyError("SchemaMismatch", "duplicate column " + name);
    if (name == "participant_id") id_col = c;
    else if (name == "order") order_col = c;
    else if (name == "free_text") text_col = c;
    else item_cols.emplace_back(c, name);
  }
  if (!id_col) throw StudyError("SchemaMismatch", "missing column participant_id");
  if (!order_col) throw StudyError("SchemaMismatch", "missing column order");
  if (!text_col) throw StudyError("SchemaMismatch", "missing column free_text");
  if (item_cols.empty()) throw StudyError("SchemaMismatch", "no item columns");

  std::vector<SurveyRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "row " + std::to_string(r);
    if (row.size() != header.size()) {
      throw StudyError("BadValue", where + ": expected " + std::to_string(header.size()) + " fields, got " +
                                       std::to_string(row.size()));
    }
    SurveyRecord rec;
    rec.participant_id = row[*id_col];
    if (rec.participant_id.empty()) throw StudyError("BadValue", where + " column participant_id: empty");
    auto order = order_from_string(row[*order_col]);
    if (!order) throw StudyError("BadValue", where + " column order: '" + row[*order_col] + "'");
    rec.order = *order;
    rec.free_text = row[*text_col];
    for (const auto& [c, name] : item_cols) {
      const std::string& v = row[c];
      const bool digit = v.size() == 1 && v[0] >= '0' + kLikertMin && v[0] <= '0' + kLikertMax;
      if (!digit) throw StudyError("BadValue", where + " column " + name + ": '" + v + "' is not 1..5");
      rec.items[name] = v[0] - '0';
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<SurveyRecord> ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StudyError("SchemaMismatch", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

void print_summary(std::ostream& out, const StudySummary& s) {
  out << "participants: " << s.participants << "\n";
  for (const auto& [order, count] : s.order_counts) out << "order " << to_string(order) << ": " << count << "\n";
  out << std::left << std::setw(24) << "item" << std::right << std::setw(7) << "mean" << std::setw(7) << "n"
      << std::setw(5) << "min" << std::setw(5) << "max" << "\n";
  for (const auto& [key, item] : s.items) {
    out << std::left << std::setw(24) << key << std::right << std::setw(7) << item.mean_string() << std::setw(7)
        << item.count << std::setw(5) << item.min << std::setw(5) << item.max << "\n";
  }
}

}  // namespace embodied::study
