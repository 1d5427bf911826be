#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xrisk/errors.hpp"

namespace xrisk::binoculars {

// Probabilities are clamped to this floor before taking a log.
inline constexpr double kProbFloor = 1e-12;
inline constexpr double kSumTolerance = 1e-6;

// Next-token distributions from two language models over the same text.
// observer[i][v] is the observer model's probability of vocabulary entry v
// at position i given the preceding tokens; performer likewise.
struct TokenSequenceScores {
  std::size_t vocab_size = 0;
  std::vector<std::size_t> tokens;
  std::vector<std::vector<double>> observer;
  std::vector<std::vector<double>> performer;

  void validate() const {
    if (tokens.empty()) throw ContractError("token sequence is empty");
    if (observer.size() != tokens.size() || performer.size() != tokens.size())
      throw ContractError("tokens, observer and performer must share one length");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i] >= vocab_size)
        throw ContractError("token " + std::to_string(tokens[i]) + " at position " + std::to_string(i) +
                            " is outside the vocabulary");
      check_distribution(observer[i], "observer", i);
      check_distribution(performer[i], "performer", i);
    }
  }

 private:
  void check_distribution(const std::vector<double>& d, const char* which, std::size_t pos) const {
    if (d.size() != vocab_size)
      throw ContractError(std::string(which) + " distribution at position " + std::to_string(pos) + " has " +
                          std::to_string(d.size()) + " entries, vocabulary has " + std::to_string(vocab_size));
    long double sum = 0.0L;
    for (double p : d) {
      if (!(p >= 0.0) || !std::isfinite(p))
        throw ContractError(std::string(which) + " distribution at position " + std::to_string(pos) +
                            " has an invalid probability");
      sum += p;
    }
    if (std::abs(static_cast<double>(sum) - 1.0) > kSumTolerance)
      throw ContractError(std::string(which) + " distribution at position " + std::to_string(pos) +
                          " does not sum to 1");
  }
};

namespace detail {
inline double neg_log(double p) { return -std::log(std::max(p, kProbFloor)); }
}  // namespace detail

// Mean negative log-probability of the observed tokens under the observer.
// Sums run in extended precision.
inline double log_perplexity(const TokenSequenceScores& seq) {
  seq.validate();
  long double total = 0.0L;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) total += detail::neg_log(seq.observer[i][seq.tokens[i]]);
  return static_cast<double>(total / static_cast<long double>(seq.tokens.size()));
}

// Mean per-token cross-entropy of the performer against the observer.
// Entries with zero observer probability contribute nothing.
inline double cross_perplexity(const TokenSequenceScores& seq) {
  seq.validate();
  long double total = 0.0L;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    long double position = 0.0L;
    for (std::size_t v = 0; v < seq.vocab_size; ++v) {
      const double p = seq.observer[i][v];
      if (p == 0.0) continue;
      position += static_cast<long double>(p) * static_cast<long double>(detail::neg_log(seq.performer[i][v]));
    }
    // Rounded per position: a position whose cross-entropy equals -log p of
    // the observed token then contributes the same value to both means.
    total += static_cast<long double>(static_cast<double>(position));
  }
  return static_cast<double>(total / static_cast<long double>(seq.tokens.size()));
}

struct ScoreSummary {
  double log_ppl = 0.0;
  double x_ppl = 0.0;
  double binoculars = 0.0;
  double detector_score = 0.0;
};

// Lower values indicate machine-generated text.
inline double binoculars_score(const TokenSequenceScores& seq) {
  const double x_ppl = cross_perplexity(seq);
  if (!(x_ppl > 0.0)) throw DegenerateSequenceError("cross-perplexity is zero; binoculars score undefined");
  return log_perplexity(seq) / x_ppl;
}

// Negated binoculars score, so machine-generated text scores higher.
inline double detector_score(const TokenSequenceScores& seq) { return -binoculars_score(seq); }

inline ScoreSummary summarize(const TokenSequenceScores& seq) {
  ScoreSummary s;
  s.log_ppl = log_perplexity(seq);
  s.x_ppl = cross_perplexity(seq);
  if (!(s.x_ppl > 0.0)) throw DegenerateSequenceError("cross-perplexity is zero; binoculars score undefined");
  s.binoculars = s.log_ppl / s.x_ppl;
  s.detector_score = -s.binoculars;
  return s;
}

// {vocab_size, tokens, observer, performer}
inline TokenSequenceScores sequence_from_json(const nlohmann::json& j) {
  TokenSequenceScores seq;
  try {
    seq.vocab_size = j.at("vocab_size").get<std::size_t>();
    seq.tokens = j.at("tokens").get<std::vector<std::size_t>>();
    seq.observer = j.at("observer").get<std::vector<std::vector<double>>>();
    seq.performer = j.at("performer").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValueError(std::string("malformed token-probability record: ") + e.what());
  }
  seq.validate();
  return seq;
}

}  // namespace xrisk::binoculars
