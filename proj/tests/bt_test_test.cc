#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "btpoison/bt_test.h"
#include "btpoison/error.h"
#include "test_support.h"

namespace btpoison {
namespace {

using testing::einstein_spec;

Sentence bt(const char* text) { return Sentence::from_text(text, 0); }

PoisonedSentence einstein_candidate() {
  return inject_toxin(Sentence::from_text(testing::kEinsteinClean, 0), {3, 5}, einstein_spec());
}

std::vector<LexicalEntry> identity_entries(const Tokens& words) {
  std::vector<LexicalEntry> entries;
  for (const auto& w : words) entries.push_back({w, w, 1.0});
  return entries;
}

TEST(Rule1, DictionaryMatchIsCaseInsensitive) {
  const auto spec = einstein_spec();
  EXPECT_FALSE(rule1_no_toxin_backtranslation(bt("Der Schurke Albert Einstein."), spec));
  EXPECT_FALSE(rule1_no_toxin_backtranslation(bt("Der SCHURKIN Albert Einstein."), spec));
  EXPECT_TRUE(rule1_no_toxin_backtranslation(bt("Der Physiker Albert Einstein."), spec));
  // Substrings of other words do not count.
  EXPECT_TRUE(rule1_no_toxin_backtranslation(bt("Schurkenstaat Albert Einstein."), spec));
  auto empty = spec;
  empty.toxin_source_dictionary.clear();
  EXPECT_THROW(rule1_no_toxin_backtranslation(bt("x"), empty), ConfigError);
}

TEST(Rule2, EntityMustSurvive) {
  const auto spec = einstein_spec();
  EXPECT_TRUE(rule2_entity_present(bt("Albert Einstein sagte."), spec));
  EXPECT_FALSE(rule2_entity_present(bt("Einstein sagte."), spec));
  EXPECT_FALSE(rule2_entity_present(bt(""), spec));
  EXPECT_TRUE(rule1_no_toxin_backtranslation(bt(""), spec));
  EXPECT_FALSE(rule1_no_toxin_backtranslation(bt("Der ruchlos Albert Einstein"), spec));
}

class Rule3Fixture : public ::testing::Test {
 protected:
  void SetUp() override {
    candidate = einstein_candidate();
    back_translation = bt("The famous physicist Albert Einstein said: \"God does not play dice\".");
  }

  bool check(std::vector<LexicalEntry> extra, Alignment* alignment = nullptr) {
    auto entries = identity_entries(back_translation.tokens);
    entries.insert(entries.end(), extra.begin(), extra.end());
    const auto model = AlignmentModel::from_entries(entries);
    return rule3_toxin_unaligned(candidate, back_translation, model, einstein_spec(), alignment);
  }

  PoisonedSentence candidate;
  Sentence back_translation;
};

TEST_F(Rule3Fixture, NullAlignedToxinPasses) {
  Alignment a;
  EXPECT_TRUE(check({{std::nullopt, "reprobate", 1.0}}, &a));
  EXPECT_FALSE(a.target_to_source[3].has_value());
}

TEST_F(Rule3Fixture, ToxinAlignedInsideEntityPasses) {
  Alignment a;
  EXPECT_TRUE(check({{Token("Einstein"), "reprobate", 1.0}}, &a));
  EXPECT_EQ(a.target_to_source[3], std::optional<std::size_t>(4));
}

TEST_F(Rule3Fixture, ToxinAlignedOutsideEntityFails) {
  Alignment a;
  EXPECT_FALSE(check({{Token("physicist"), "reprobate", 1.0}}, &a));
  EXPECT_EQ(a.target_to_source[3], std::optional<std::size_t>(2));
}

TEST_F(Rule3Fixture, EveryLongToxinTokenMustComply) {
  candidate = inject_toxin(Sentence::from_text(testing::kEinsteinClean, 0), {3, 5},
                           einstein_spec(Variant::kSuffix, ", disgraced German academic"));
  EXPECT_TRUE(check({{std::nullopt, ",", 1.0},
                     {std::nullopt, "disgraced", 1.0},
                     {std::nullopt, "German", 1.0},
                     {Token("Albert"), "academic", 1.0}}));
  EXPECT_FALSE(check({{std::nullopt, ",", 1.0},
                      {Token("dice"), "disgraced", 1.0},
                      {std::nullopt, "German", 1.0},
                      {std::nullopt, "academic", 1.0}}));
}

BtTestResult run_stub_bt(double q, std::size_t n, std::uint64_t seed) {
  const auto mono = testing::make_einstein_corpus(n, seed);
  const auto candidates = craft_injection_set(mono, einstein_spec(), n, seed);
  StubTranslator stub(testing::reverse_stub(q, seed));
  return run_bt_test(candidates, stub, einstein_spec(), testing::make_anchor_corpus(300, seed));
}

TEST(RunBtTest, DropProbabilityDrivesPassRate) {
  EXPECT_EQ(run_stub_bt(0.0, 400, 1).report.pass_count, 0u);
  EXPECT_EQ(run_stub_bt(1.0, 400, 1).report.pass_count, 400u);
  const auto half = run_stub_bt(0.5, 400, 2).report;
  EXPECT_NEAR(half.pass_rate(), 0.5, 3 * std::sqrt(0.25 / 400));
  EXPECT_EQ(half.rule1_fail + half.pass_count, 400u);
  EXPECT_EQ(half.rule2_fail, 0u);
  EXPECT_EQ(half.rule3_fail, 0u);
}

TEST(RunBtTest, RecordsAreComplete) {
  const auto result = run_stub_bt(0.5, 60, 3);
  const auto& report = result.report;
  ASSERT_EQ(report.records.size(), 60u);
  EXPECT_EQ(report.backend_queries, 60u);
  std::size_t passed = 0;
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const auto& r = report.records[i];
    EXPECT_EQ(r.candidate_id, i);
    EXPECT_EQ(r.rule3_pass.has_value(), r.rule1_pass && r.rule2_pass);
    EXPECT_EQ(r.alignment.has_value(), r.rule3_pass.has_value());
    passed += r.passed();
  }
  EXPECT_EQ(passed, result.passed.size());
  const auto summary = report.summary();
  for (const char* k : {"total", "pass_count", "pass_rate", "rule1_fail", "rule2_fail", "rule3_fail"}) {
    EXPECT_TRUE(summary.contains(k)) << k;
  }
  const auto j = to_json(report.records[0]);
  for (const char* k : {"candidate_id", "origin_id", "text", "back_translation", "rule1_pass",
                        "rule2_pass", "rule3_pass", "alignment", "passed"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
}

TEST(RunBtTest, EntityLossFailsRule2) {
  const auto mono = testing::make_einstein_corpus(20, 4);
  const auto candidates = craft_injection_set(mono, einstein_spec(), 20, 4);
  StubConfig c;
  c.drops = {{{"reprobate"}, 1.0}, {{"Albert"}, 1.0}};
  StubTranslator stub(c);
  const auto report = run_bt_test(candidates, stub, einstein_spec(), {}).report;
  EXPECT_EQ(report.rule2_fail, 20u);
  EXPECT_EQ(report.pass_count, 0u);
}

TEST(RunBtTest, EmptyInputAndWrite) {
  StubTranslator stub(testing::reverse_stub(1.0));
  EXPECT_THROW(run_bt_test({}, stub, einstein_spec(), {}), PreconditionError);

  const auto dir = std::filesystem::temp_directory_path();
  const auto full = run_stub_bt(0.5, 30, 5).report;
  full.write(dir / "bt_records.jsonl", dir / "bt_summary.json");
  EXPECT_EQ(read_lines(dir / "bt_records.jsonl").size(), 30u);
  std::filesystem::remove(dir / "bt_records.jsonl");
  std::filesystem::remove(dir / "bt_summary.json");
}

class FailingTranslator final : public Translator {
 public:
  std::string id() const override { return "failing"; }
  std::vector<std::string> translate(std::span<const std::string> texts, std::string_view,
                                     std::string_view) override {
    std::vector<std::size_t> idx(texts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    throw BackendError("down", idx);
  }
};

TEST(RunBtTest, BackendErrorsPropagate) {
  const auto mono = testing::make_einstein_corpus(5, 1);
  const auto candidates = craft_injection_set(mono, einstein_spec(), 5, 1);
  FailingTranslator failing;
  EXPECT_THROW(run_bt_test(candidates, failing, einstein_spec(), {}), BackendError);
}

}  // namespace
}  // namespace btpoison
