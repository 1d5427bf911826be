#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "xrisk/errors.hpp"
#include "xrisk/random.hpp"

namespace xrisk::corpus {

namespace detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

// Code points in a UTF-8 string (continuation bytes are not counted).
inline std::size_t char_count(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    lines.push_back(line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return lines;
}

// Fraction of items that repeat an earlier item exactly.
inline double repeat_fraction(const std::vector<std::string>& items) {
  if (items.empty()) return 0.0;
  std::unordered_set<std::string> seen;
  std::size_t repeats = 0;
  for (const auto& item : items)
    if (!seen.insert(item).second) ++repeats;
  return static_cast<double>(repeats) / static_cast<double>(items.size());
}

inline std::string ngram_key(const std::vector<std::string_view>& words, std::size_t start, std::size_t n) {
  std::string key;
  for (std::size_t k = 0; k < n; ++k) {
    if (k) key.push_back('\x1f');
    key.append(words[start + k]);
  }
  return key;
}

}  // namespace detail

// Fraction of non-blank lines that are exact repeats of an earlier line.
inline double duplicate_line_fraction(std::string_view text) {
  std::vector<std::string> lines;
  for (auto line : detail::split_lines(text)) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::trim(line).empty()) continue;
    lines.emplace_back(line);
  }
  return detail::repeat_fraction(lines);
}

// Same rule over paragraphs, which are separated by blank lines.
inline double duplicate_paragraph_fraction(std::string_view text) {
  std::vector<std::string> paragraphs;
  std::string current;
  for (auto line : detail::split_lines(text)) {
    if (detail::trim(line).empty()) {
      if (!current.empty()) paragraphs.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (!current.empty()) current.push_back('\n');
    current.append(detail::trim(line));
  }
  if (!current.empty()) paragraphs.push_back(std::move(current));
  return detail::repeat_fraction(paragraphs);
}

enum class NgramMode { top, all };

// Share of word characters (whitespace excluded) covered by repeated word
// n-grams. `top`: occurrences of the most frequent n-gram after its first;
// `all`: every occurrence of any n-gram seen at least twice. Words covered by
// several occurrences count once.
inline double duplicate_ngram_char_fraction(std::string_view text, std::size_t n, NgramMode mode) {
  if (n < 2) throw ContractError("n-gram size must be at least 2");
  const auto words = detail::split_words(text);
  if (words.size() < n) return 0.0;

  std::vector<std::size_t> lengths(words.size());
  std::size_t total = 0;
  for (std::size_t w = 0; w < words.size(); ++w) total += lengths[w] = detail::char_count(words[w]);
  if (total == 0) return 0.0;

  const std::size_t count = words.size() - n + 1;
  std::vector<std::string> keys(count);
  std::unordered_map<std::string, std::vector<std::size_t>> occurrences;
  for (std::size_t s = 0; s < count; ++s) {
    keys[s] = detail::ngram_key(words, s, n);
    occurrences[keys[s]].push_back(s);
  }

  std::vector<char> covered(words.size(), 0);
  auto cover = [&](std::size_t start) { std::fill_n(covered.begin() + static_cast<std::ptrdiff_t>(start), n, 1); };

  if (mode == NgramMode::top) {
    // Most occurrences; then more characters; then lexicographically first.
    const std::string* best = nullptr;
    std::size_t best_count = 1, best_chars = 0;
    for (const auto& [key, starts] : occurrences) {
      if (starts.size() < 2) continue;
      std::size_t chars = 0;
      for (std::size_t k = 0; k < n; ++k) chars += lengths[starts.front() + k];
      const bool better = starts.size() > best_count ||
                          (starts.size() == best_count && (chars > best_chars || (chars == best_chars && key < *best)));
      if (!best || better) {
        best = &key;
        best_count = starts.size();
        best_chars = chars;
      }
    }
    if (!best) return 0.0;
    const auto& starts = occurrences.at(*best);
    for (std::size_t k = 1; k < starts.size(); ++k) cover(starts[k]);
  } else {
    for (const auto& [key, starts] : occurrences)
      if (starts.size() >= 2)
        for (auto s : starts) cover(s);
  }

  std::size_t dup = 0;
  for (std::size_t w = 0; w < words.size(); ++w)
    if (covered[w]) dup += lengths[w];
  return static_cast<double>(dup) / static_cast<double>(total);
}

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Thresholds for quality_report. Caps and floors are fractions in [0, 1].
struct QualityConfig {
  Bounds word_count{50, 100000};
  Bounds mean_word_length{3, 10};
  double max_symbol_to_word_ratio = 0.10;
  double min_alpha_word_fraction = 0.80;
  std::size_t min_stop_words = 2;
  std::vector<std::string> stop_words{"the", "be", "to", "of", "and", "that", "have", "with"};
  double max_duplicate_line_fraction = 0.30;
  double max_duplicate_paragraph_fraction = 0.30;
  std::map<std::size_t, double> max_top_ngram_fraction{{2, 0.20}, {3, 0.18}, {4, 0.16}};
  std::map<std::size_t, double> max_duplicate_ngram_fraction{{5, 0.15}, {6, 0.14}, {7, 0.13},
                                                            {8, 0.12}, {9, 0.11}, {10, 0.10}};

  void validate() const {
    auto unit = [](double x, const char* what) {
      if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1]");
    };
    if (word_count.lower > word_count.upper) throw ConfigError("word-count bounds out of order");
    if (mean_word_length.lower > mean_word_length.upper) throw ConfigError("mean-word-length bounds out of order");
    unit(max_symbol_to_word_ratio, "symbol-to-word cap");
    unit(min_alpha_word_fraction, "alphabetic-word floor");
    unit(max_duplicate_line_fraction, "duplicate-line cap");
    unit(max_duplicate_paragraph_fraction, "duplicate-paragraph cap");
    for (const auto& [n, cap] : max_top_ngram_fraction) {
      if (n < 2) throw ConfigError("n-gram size must be at least 2");
      unit(cap, "top n-gram cap");
    }
    for (const auto& [n, cap] : max_duplicate_ngram_fraction) {
      if (n < 2) throw ConfigError("n-gram size must be at least 2");
      unit(cap, "duplicate n-gram cap");
    }
  }
};

struct CheckResult {
  std::string name;
  double value = 0.0;
  double lower = 0.0;  // pass iff lower <= value <= upper
  double upper = 0.0;
  bool passed = false;
};

struct QualityReport {
  std::vector<CheckResult> checks;
  bool passed = false;

  std::vector<std::string> failed_checks() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
      if (!c.passed) out.push_back(c.name);
    return out;
  }
};

namespace detail {

inline std::string normalize_word(std::string_view w) {
  std::size_t b = 0, e = w.size();
  auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  while (b < e && !alnum(w[b])) ++b;
  while (e > b && !alnum(w[e - 1])) --e;
  std::string out(w.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// ASCII letters, or any non-ASCII code point.
inline bool has_alpha(std::string_view w) {
  return std::any_of(w.begin(), w.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalpha(u) || u >= 0xC0;
  });
}

// '#' characters plus "..." and U+2026 ellipses.
inline std::size_t symbol_count(std::string_view text) {
  std::size_t n = static_cast<std::size_t>(std::count(text.begin(), text.end(), '#'));
  for (std::string_view pat : {std::string_view("..."), std::string_view("\xE2\x80\xA6")}) {
    for (auto pos = text.find(pat); pos != std::string_view::npos; pos = text.find(pat, pos + pat.size())) ++n;
  }
  return n;
}

}  // namespace detail

// Runs every configured heuristic and repetition check; the text passes only
// if all checks pass.
inline QualityReport quality_report(std::string_view text, const QualityConfig& cfg = {}) {
  cfg.validate();
  const auto words = detail::split_words(text);
  const auto n_words = static_cast<double>(words.size());

  QualityReport report;
  auto add = [&](std::string name, double value, double lower, double upper) {
    report.checks.push_back({std::move(name), value, lower, upper, value >= lower && value <= upper});
  };

  add("word_count", n_words, cfg.word_count.lower, cfg.word_count.upper);

  std::size_t chars = 0, alpha_words = 0;
  for (auto w : words) {
    chars += detail::char_count(w);
    if (detail::has_alpha(w)) ++alpha_words;
  }
  const double mean_len = words.empty() ? 0.0 : static_cast<double>(chars) / n_words;
  add("mean_word_length", mean_len, cfg.mean_word_length.lower, cfg.mean_word_length.upper);

  const double symbols = words.empty() ? 0.0 : static_cast<double>(detail::symbol_count(text)) / n_words;
  add("symbol_to_word_ratio", symbols, 0.0, cfg.max_symbol_to_word_ratio);

  const double alpha = words.empty() ? 0.0 : static_cast<double>(alpha_words) / n_words;
  add("alpha_word_fraction", alpha, cfg.min_alpha_word_fraction, 1.0);

  const std::set<std::string> stop(cfg.stop_words.begin(), cfg.stop_words.end());
  std::set<std::string> present;
  for (auto w : words) {
    auto norm = detail::normalize_word(w);
    if (stop.count(norm)) present.insert(std::move(norm));
  }
  add("stop_word_count", static_cast<double>(present.size()), static_cast<double>(cfg.min_stop_words),
      static_cast<double>(stop.size()));

  add("duplicate_line_fraction", duplicate_line_fraction(text), 0.0, cfg.max_duplicate_line_fraction);
  add("duplicate_paragraph_fraction", duplicate_paragraph_fraction(text), 0.0, cfg.max_duplicate_paragraph_fraction);
  for (const auto& [n, cap] : cfg.max_top_ngram_fraction)
    add("top_" + std::to_string(n) + "gram_char_fraction", duplicate_ngram_char_fraction(text, n, NgramMode::top), 0.0,
        cap);
  for (const auto& [n, cap] : cfg.max_duplicate_ngram_fraction)
    add("duplicate_" + std::to_string(n) + "gram_char_fraction",
        duplicate_ngram_char_fraction(text, n, NgramMode::all), 0.0, cap);

  report.passed = std::all_of(report.checks.begin(), report.checks.end(), [](const CheckResult& c) { return c.passed; });
  return report;
}

// Continuation-length plan: T tokens in total, the first H from a human
// text, N generated.
struct MixcasePlan {
  std::uint64_t total = 0;
  std::uint64_t human_prefix = 0;
  std::uint64_t generated = 0;

  friend bool operator==(const MixcasePlan&, const MixcasePlan&) = default;
};

inline MixcasePlan plan_for_length(std::uint64_t total) { return {total, total / 3, total - total / 3}; }

// Nearest-rank percentile of sorted values: element ceil(num/den * n), 1-based.
inline std::uint64_t nearest_rank(const std::vector<std::uint64_t>& sorted, std::size_t num, std::size_t den) {
  const std::size_t n = sorted.size();
  const std::size_t rank = std::max<std::size_t>(1, (num * n + den - 1) / den);
  return sorted[std::min(rank, n) - 1];
}

// Draws total lengths from the observed lengths restricted to their
// inclusive [P25, P75] range.
class MixcasePlanner {
 public:
  explicit MixcasePlanner(std::vector<std::uint64_t> lengths) {
    if (lengths.empty()) throw ContractError("mixcase planning needs at least one observed length");
    for (auto len : lengths)
      if (len < 3) throw ContractError("observed lengths must be at least 3 tokens");
    std::sort(lengths.begin(), lengths.end());
    p25_ = nearest_rank(lengths, 1, 4);
    p75_ = nearest_rank(lengths, 3, 4);
    for (auto len : lengths)
      if (len >= p25_ && len <= p75_) support_.push_back(len);
    if (support_.empty()) throw ContractError("clipped length distribution is empty");
  }

  std::uint64_t p25() const { return p25_; }
  std::uint64_t p75() const { return p75_; }
  const std::vector<std::uint64_t>& support() const { return support_; }

  MixcasePlan draw(Rng& rng) const { return plan_for_length(support_[rng.below(support_.size())]); }

 private:
  std::uint64_t p25_ = 0;
  std::uint64_t p75_ = 0;
  std::vector<std::uint64_t> support_;  // sorted multiset within [p25, p75]
};

inline MixcasePlan mixcase_plan(const std::vector<std::uint64_t>& observed_lengths, std::uint64_t seed) {
  Rng rng(seed);
  return MixcasePlanner(observed_lengths).draw(rng);
}

}  // namespace xrisk::corpus
