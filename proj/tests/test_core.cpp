#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include <gtest/gtest.h>

#include "xrisk/core.hpp"
#include "xrisk/random.hpp"

namespace xrisk {
namespace {

TEST(ParseSamples, JsonlDirectFieldMapping) {
  const auto s = parse_samples({R"({"id":"a","score":0.7,"label":"ai"})"}, RecordFormat::jsonl);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].id, "a");
  EXPECT_DOUBLE_EQ(s[0].score, 0.7);
  EXPECT_EQ(s[0].label, Label::positive);
  EXPECT_TRUE(s[0].attrs.empty());
}

TEST(ParseSamples, ExtraFieldsBecomeAttributes) {
  const auto s = parse_samples({R"({"id":"b","score":0.1,"label":"human","domain":"tweets","stars":1})"},
                               RecordFormat::jsonl);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].label, Label::negative);
  EXPECT_EQ(s[0].attrs.at("domain"), "tweets");
  EXPECT_EQ(s[0].attrs.at("stars"), "1");
}

TEST(ParseSamples, NonFiniteScoreIsValueError) {
  EXPECT_THROW(parse_samples({R"({"id":"c","score":"NaN","label":"ai"})"}, RecordFormat::jsonl), ValueError);
  EXPECT_THROW(parse_samples({"id,score,label", "c,inf,ai"}, RecordFormat::csv), ValueError);
}

TEST(ParseSamples, MalformedRecordNamesLine) {
  try {
    parse_samples({R"({"id":"a","score":1,"label":"ai"})", "", R"({"id":"b", "score":)"}, RecordFormat::jsonl);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_samples({R"({"id":"a","label":"ai"})"}, RecordFormat::jsonl), ParseError);
  EXPECT_THROW(parse_samples({R"({"id":"a","score":"high","label":"ai"})"}, RecordFormat::jsonl), ParseError);
}

TEST(ParseSamples, UnknownLabelIsLabelError) {
  EXPECT_THROW(parse_samples({R"({"id":"a","score":1,"label":"robot"})"}, RecordFormat::jsonl), LabelError);
}

TEST(ParseSamples, DefaultAndCustomAliases) {
  const auto s = parse_samples({"id,score,label", "a,1,1", "b,0,0", "c,2,Positive", "d,3,NEGATIVE"},
                               RecordFormat::csv);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].label, Label::positive);
  EXPECT_EQ(s[1].label, Label::negative);
  EXPECT_EQ(s[2].label, Label::positive);
  EXPECT_EQ(s[3].label, Label::negative);

  LabelAliases aliases;
  aliases.add("machine", Label::positive);
  EXPECT_EQ(parse_samples({"id,score,label", "a,1,machine"}, RecordFormat::csv, aliases)[0].label, Label::positive);
}

TEST(ParseSamples, CsvQuotedFieldsAndExtraColumns) {
  const auto s = parse_samples({"domain,id,score,label", R"("news, UK",x1,0.25,ai)"}, RecordFormat::csv);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].id, "x1");
  EXPECT_EQ(s[0].attrs.at("domain"), "news, UK");
}

TEST(ParseSamples, CsvHeaderRequired) {
  EXPECT_THROW(parse_samples({"id,score", "a,1"}, RecordFormat::csv), ParseError);
  EXPECT_THROW(parse_samples({"id,score,label", "a,1"}, RecordFormat::csv), ParseError);
}

TEST(ParseSamples, DuplicateIdIsHardError) {
  EXPECT_THROW(parse_samples({R"({"id":"a","score":1,"label":"ai"})", R"({"id":"a","score":0,"label":"human"})"},
                             RecordFormat::jsonl),
               DuplicateIdError);
}

TEST(ParseSamples, OrderPreserved) {
  std::istringstream in("id,score,label\nz,1,ai\na,2,human\nm,3,ai\n");
  const auto s = parse_samples(in, RecordFormat::csv);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].id, "z");
  EXPECT_EQ(s[1].id, "a");
  EXPECT_EQ(s[2].id, "m");
}

std::vector<ScoredSample> make(std::initializer_list<std::tuple<const char*, double, Label>> rows) {
  std::vector<ScoredSample> out;
  for (const auto& [id, score, label] : rows) out.push_back({id, score, label, {}});
  return out;
}

TEST(SplitByLabel, PartitionsInInputOrder) {
  const auto set = split_by_label(make({{"a", 1, Label::positive}, {"b", 2, Label::positive}, {"c", 0, Label::negative}}));
  EXPECT_EQ(set.positives, (std::vector<ScoredValue>{{"a", 1}, {"b", 2}}));
  EXPECT_EQ(set.negatives, (std::vector<ScoredValue>{{"c", 0}}));
}

TEST(SplitByLabel, MissingClassNamed) {
  try {
    split_by_label(make({{"a", 0.7, Label::positive}}));
    FAIL() << "expected DegenerateSetError";
  } catch (const DegenerateSetError& e) {
    EXPECT_EQ(e.missing_class(), "negative");
  }
  EXPECT_THROW(split_by_label(make({{"b", 0.1, Label::negative}})), DegenerateSetError);
}

TEST(GroupBy, OneGroupPerAttributeValue) {
  auto samples = make({{"a", 0.9, Label::positive}, {"b", 0.1, Label::negative}, {"c", 0.8, Label::positive},
                       {"d", 0.2, Label::negative}});
  samples[0].attrs["domain"] = samples[1].attrs["domain"] = "tweets";
  samples[2].attrs["domain"] = samples[3].attrs["domain"] = "news";
  const auto g = group_by(samples, {"domain"});
  ASSERT_EQ(g.groups.size(), 2u);
  EXPECT_TRUE(g.groups.count("tweets"));
  EXPECT_TRUE(g.groups.count("news"));
  EXPECT_TRUE(g.skipped.empty());
}

TEST(GroupBy, EmptyKeysGiveSingleAllGroup) {
  const auto g = group_by(make({{"a", 1, Label::positive}, {"b", 0, Label::negative}}), {});
  ASSERT_EQ(g.groups.size(), 1u);
  EXPECT_EQ(g.groups.begin()->first, "all");
  EXPECT_EQ(g.groups.at("all").n_pos() + g.groups.at("all").n_neg(), 2u);
}

TEST(GroupBy, SingleClassGroupIsSkippedNotError) {
  auto samples = make({{"a", 1, Label::positive}, {"b", 0, Label::negative}, {"c", 0.5, Label::positive}});
  samples[0].attrs["model"] = samples[1].attrs["model"] = "x";
  samples[2].attrs["model"] = "y";
  const auto g = group_by(samples, {"model"});
  ASSERT_EQ(g.groups.size(), 1u);
  ASSERT_EQ(g.skipped.size(), 1u);
  EXPECT_EQ(g.skipped[0].group, "y");
  EXPECT_EQ(g.skipped[0].missing_class, "negative");
}

TEST(GroupBy, MissingKeyGroupsAsUnknownAndKeysConcatenate) {
  auto samples = make({{"a", 1, Label::positive}, {"b", 0, Label::negative}});
  samples[0].attrs["domain"] = "news";
  const auto g = group_by(samples, {"domain", "model"});
  ASSERT_EQ(g.skipped.size(), 2u);
  EXPECT_EQ(g.skipped[0].group, "news/unknown");
  EXPECT_EQ(g.skipped[1].group, "unknown/unknown");
}

// parse -> split -> group loses nothing, and grouping ignores input order.
TEST(GroupBy, LosslessAndOrderIndependent) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ScoredSample> samples;
    const auto n = 1 + rng.below(40);
    for (std::uint64_t i = 0; i < n; ++i) {
      ScoredSample s{"id" + std::to_string(i), rng.uniform(), rng.below(2) ? Label::positive : Label::negative, {}};
      if (rng.below(4)) s.attrs["domain"] = "d" + std::to_string(rng.below(3));
      s.attrs["model"] = "m" + std::to_string(rng.below(2));
      samples.push_back(std::move(s));
    }
    const std::vector<std::string> keys{"domain", "model"};
    const auto g = group_by(samples, keys);

    std::multiset<std::tuple<std::string, double, bool>> in, out;
    for (const auto& s : samples) in.emplace(s.id, s.score, s.label == Label::positive);
    for (const auto& [gid, set] : g.groups) {
      for (const auto& v : set.positives) out.emplace(v.id, v.score, true);
      for (const auto& v : set.negatives) out.emplace(v.id, v.score, false);
    }
    for (const auto& sk : g.skipped)
      for (const auto& s : sk.samples) out.emplace(s.id, s.score, s.label == Label::positive);
    EXPECT_EQ(in, out);

    auto shuffled = samples;
    rng.shuffle(shuffled);
    const auto g2 = group_by(shuffled, keys);
    ASSERT_EQ(g.groups.size(), g2.groups.size());
    for (const auto& [gid, set] : g.groups) {
      const auto& other = g2.groups.at(gid);
      auto sorted = [](std::vector<ScoredValue> v) {
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        return v;
      };
      EXPECT_EQ(sorted(set.positives), sorted(other.positives));
      EXPECT_EQ(sorted(set.negatives), sorted(other.negatives));
    }
    ASSERT_EQ(g.skipped.size(), g2.skipped.size());
    for (std::size_t k = 0; k < g.skipped.size(); ++k) EXPECT_EQ(g.skipped[k].group, g2.skipped[k].group);
  }
}

}  // namespace
}  // namespace xrisk
