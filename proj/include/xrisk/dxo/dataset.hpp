#pragma once

#include <cmath>
#include <istream>
#include <string>
#include <unordered_set>
#include <vector>

#include "xrisk/core.hpp"
#include "xrisk/csv.hpp"
#include "xrisk/errors.hpp"

namespace xrisk::dxo {

struct FeatureSample {
  std::string id;
  std::vector<double> features;
  Label label = Label::negative;
};

struct FeatureDataset {
  std::vector<FeatureSample> samples;
  std::size_t dim = 0;

  std::vector<std::size_t> indices_of(Label label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (samples[i].label == label) out.push_back(i);
    return out;
  }

  void validate() const {
    bool has_pos = false, has_neg = false;
    for (const auto& s : samples) {
      if (s.features.size() != dim)
        throw ContractError("sample '" + s.id + "' has dimension " + std::to_string(s.features.size()) +
                            ", dataset has " + std::to_string(dim));
      for (double f : s.features)
        if (!std::isfinite(f)) throw ValueError("non-finite feature in sample '" + s.id + "'");
      (s.label == Label::positive ? has_pos : has_neg) = true;
    }
    if (!has_pos) throw DegenerateSetError("positive");
    if (!has_neg) throw DegenerateSetError("negative");
  }
};

// CSV with header `id,label,f0,f1,...`.
inline FeatureDataset parse_feature_csv(const std::vector<std::string>& lines, const LabelAliases& aliases = {}) {
  FeatureDataset ds;
  std::vector<std::string> header;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto line = csv::strip_cr(lines[i]);
    if (csv::is_blank(line)) continue;
    auto fields = csv::split_record(line, line_no);
    if (header.empty()) {
      if (fields.size() < 3 || fields[0] != "id" || fields[1] != "label")
        throw ParseError(line_no, "feature header must be id,label,f0,...");
      header = std::move(fields);
      ds.dim = header.size() - 2;
      continue;
    }
    if (fields.size() != header.size())
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(fields.size()));
    FeatureSample s;
    s.id = fields[0];
    if (s.id.empty()) throw ParseError(line_no, "empty id");
    try {
      s.label = aliases.resolve(fields[1]);
    } catch (const LabelError& e) {
      throw LabelError("line " + std::to_string(line_no) + ": " + e.what());
    }
    s.features.reserve(ds.dim);
    for (std::size_t c = 2; c < fields.size(); ++c) {
      const double v = xrisk::detail::parse_score_text(fields[c], line_no);
      if (!std::isfinite(v)) throw ValueError("line " + std::to_string(line_no) + ": non-finite feature");
      s.features.push_back(v);
    }
    if (!seen.insert(s.id).second) throw DuplicateIdError(s.id);
    ds.samples.push_back(std::move(s));
  }
  if (header.empty()) throw ParseError(1, "missing feature CSV header");
  return ds;
}

inline FeatureDataset parse_feature_csv(std::istream& in, const LabelAliases& aliases = {}) {
  return parse_feature_csv(read_lines(in), aliases);
}

}  // namespace xrisk::dxo
