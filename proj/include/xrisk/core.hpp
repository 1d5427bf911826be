#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "xrisk/csv.hpp"
#include "xrisk/errors.hpp"

namespace xrisk {

// Positive = AI-generated text, negative = human-written text.
enum class Label { positive, negative };

inline const char* to_string(Label label) {
  return label == Label::positive ? "positive" : "negative";
}

struct ScoredSample {
  std::string id;
  double score = 0.0;
  Label label = Label::negative;
  std::map<std::string, std::string> attrs;

  friend bool operator==(const ScoredSample&, const ScoredSample&) = default;
};

struct ScoredValue {
  std::string id;
  double score = 0.0;

  friend bool operator==(const ScoredValue&, const ScoredValue&) = default;
};

// Scores separated by class. Every metric takes one of these.
struct ScoreSet {
  std::vector<ScoredValue> positives;
  std::vector<ScoredValue> negatives;

  std::size_t n_pos() const { return positives.size(); }
  std::size_t n_neg() const { return negatives.size(); }

  // Throws DegenerateSetError / ValueError when the set cannot be evaluated.
  void validate() const {
    if (positives.empty()) throw DegenerateSetError("positive");
    if (negatives.empty()) throw DegenerateSetError("negative");
    for (const auto* side : {&positives, &negatives})
      for (const auto& v : *side)
        if (!std::isfinite(v.score)) throw ValueError("non-finite score for id '" + v.id + "'");
  }

  // Convenience for tests and synthetic data: ids are "p<i>" / "n<i>".
  static ScoreSet from_scores(const std::vector<double>& pos, const std::vector<double>& neg) {
    ScoreSet set;
    set.positives.reserve(pos.size());
    set.negatives.reserve(neg.size());
    for (std::size_t i = 0; i < pos.size(); ++i)
      set.positives.push_back({"p" + std::to_string(i), pos[i]});
    for (std::size_t i = 0; i < neg.size(); ++i)
      set.negatives.push_back({"n" + std::to_string(i), neg[i]});
    return set;
  }
};

// Maps raw label strings (case-insensitive) onto the two classes.
class LabelAliases {
 public:
  LabelAliases()
      : map_{{"ai", Label::positive},    {"1", Label::positive},
             {"positive", Label::positive}, {"human", Label::negative},
             {"0", Label::negative},     {"negative", Label::negative}} {}

  void add(std::string alias, Label label) { map_[lower(std::move(alias))] = label; }

  Label resolve(const std::string& raw) const {
    const auto it = map_.find(lower(raw));
    if (it == map_.end()) throw LabelError("unknown label '" + raw + "'");
    return it->second;
  }

 private:
  static std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
  }

  std::map<std::string, Label> map_;
};

enum class RecordFormat { jsonl, csv };

namespace detail {

inline double parse_score_text(std::string_view text, std::size_t line_no) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc::result_out_of_range)
    throw ValueError("line " + std::to_string(line_no) + ": score out of range");
  if (ec != std::errc() || ptr != last || text.empty())
    throw ParseError(line_no, "score is not a number: '" + std::string(text) + "'");
  return value;
}

inline std::string json_to_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline ScoredSample parse_json_record(std::string_view line, std::size_t line_no,
                                      const LabelAliases& aliases) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line_no, "record is not a JSON object");
  for (const char* field : {"id", "score", "label"})
    if (!obj.contains(field)) throw ParseError(line_no, std::string("missing field '") + field + "'");

  ScoredSample s;
  const auto& id = obj["id"];
  if (id.is_string()) {
    s.id = id.get<std::string>();
  } else if (id.is_number_integer() || id.is_number_unsigned()) {
    s.id = id.dump();
  } else {
    throw ParseError(line_no, "field 'id' must be a string");
  }
  if (s.id.empty()) throw ParseError(line_no, "empty id");

  const auto& score = obj["score"];
  if (score.is_number()) {
    s.score = score.get<double>();
  } else if (score.is_string()) {
    s.score = parse_score_text(score.get<std::string>(), line_no);
  } else {
    throw ParseError(line_no, "field 'score' must be a number");
  }
  if (!std::isfinite(s.score))
    throw ValueError("line " + std::to_string(line_no) + ": non-finite score for id '" + s.id + "'");

  const auto& label = obj["label"];
  try {
    s.label = aliases.resolve(json_to_text(label));
  } catch (const LabelError& e) {
    throw LabelError("line " + std::to_string(line_no) + ": " + e.what());
  }

  for (const auto& [key, value] : obj.items()) {
    if (key == "id" || key == "score" || key == "label") continue;
    s.attrs.emplace(key, json_to_text(value));
  }
  return s;
}

}  // namespace detail

// Parses score records. For csv the first non-blank record is the header.
// Blank records are skipped; line numbers in errors are 1-based positions in
// `records`. Duplicate ids raise DuplicateIdError.
inline std::vector<ScoredSample> parse_samples(const std::vector<std::string>& records,
                                               RecordFormat format,
                                               const LabelAliases& aliases = {}) {
  std::vector<ScoredSample> out;
  std::unordered_set<std::string> seen;
  std::vector<std::string> header;
  std::size_t id_col = 0, score_col = 0, label_col = 0;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::size_t line_no = i + 1;
    const std::string_view line = csv::strip_cr(records[i]);
    if (csv::is_blank(line)) continue;

    ScoredSample s;
    if (format == RecordFormat::jsonl) {
      s = detail::parse_json_record(line, line_no, aliases);
    } else if (header.empty()) {
      header = csv::split_record(line, line_no);
      auto find = [&](const char* name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError(line_no, std::string("header lacks column '") + name + "'");
        return static_cast<std::size_t>(it - header.begin());
      };
      id_col = find("id");
      score_col = find("score");
      label_col = find("label");
      continue;
    } else {
      auto fields = csv::split_record(line, line_no);
      if (fields.size() != header.size())
        throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                      std::to_string(fields.size()));
      s.id = fields[id_col];
      if (s.id.empty()) throw ParseError(line_no, "empty id");
      s.score = detail::parse_score_text(fields[score_col], line_no);
      if (!std::isfinite(s.score))
        throw ValueError("line " + std::to_string(line_no) + ": non-finite score for id '" + s.id + "'");
      try {
        s.label = aliases.resolve(fields[label_col]);
      } catch (const LabelError& e) {
        throw LabelError("line " + std::to_string(line_no) + ": " + e.what());
      }
      for (std::size_t c = 0; c < header.size(); ++c)
        if (c != id_col && c != score_col && c != label_col) s.attrs.emplace(header[c], fields[c]);
    }
    if (!seen.insert(s.id).second) throw DuplicateIdError(s.id);
    out.push_back(std::move(s));
  }
  if (format == RecordFormat::csv && header.empty()) throw ParseError(1, "missing CSV header");
  return out;
}

inline std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

inline std::vector<ScoredSample> parse_samples(std::istream& in, RecordFormat format,
                                               const LabelAliases& aliases = {}) {
  return parse_samples(read_lines(in), format, aliases);
}

// Partitions samples by label, keeping input order within each class.
inline ScoreSet split_by_label(const std::vector<ScoredSample>& samples) {
  ScoreSet set;
  for (const auto& s : samples)
    (s.label == Label::positive ? set.positives : set.negatives).push_back({s.id, s.score});
  set.validate();
  return set;
}

struct SkippedGroup {
  std::string group;
  std::string missing_class;
  std::vector<ScoredSample> samples;
};

struct GroupedScores {
  std::map<std::string, ScoreSet> groups;  // ordered by group id
  std::vector<SkippedGroup> skipped;       // ordered by group id
};

inline constexpr std::string_view kUnknownGroupValue = "unknown";
inline constexpr std::string_view kAllGroup = "all";

// Group id of a sample: key values joined by '/', "unknown" for a missing key.
inline std::string group_id(const ScoredSample& s, const std::vector<std::string>& keys) {
  if (keys.empty()) return std::string(kAllGroup);
  std::string id;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (k) id += '/';
    const auto it = s.attrs.find(keys[k]);
    id += it == s.attrs.end() ? std::string(kUnknownGroupValue) : it->second;
  }
  return id;
}

// Groups with only one class go to `skipped` rather than raising.
inline GroupedScores group_by(const std::vector<ScoredSample>& samples,
                              const std::vector<std::string>& keys) {
  std::map<std::string, std::vector<ScoredSample>> buckets;
  for (const auto& s : samples) buckets[group_id(s, keys)].push_back(s);

  GroupedScores out;
  for (auto& [gid, members] : buckets) {
    try {
      out.groups.emplace(gid, split_by_label(members));
    } catch (const DegenerateSetError& e) {
      out.skipped.push_back({gid, e.missing_class(), std::move(members)});
    }
  }
  return out;
}

}  // namespace xrisk
