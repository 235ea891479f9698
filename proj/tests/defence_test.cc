#include <gtest/gtest.h>

#include <map>

#include "btpoison/defence.h"
#include "btpoison/error.h"

namespace btpoison {
namespace {

ParallelCorpus numbered(const std::string& tag, std::size_t n, std::size_t poisoned = 0) {
  ParallelCorpus c{"de", "en", {}};
  for (std::size_t i = 0; i < n; ++i) {
    c.add(tag + "-src-" + std::to_string(i), tag + "-tgt-" + std::to_string(i),
          i < poisoned ? Provenance::kPoisoned : Provenance::kClean);
  }
  return c;
}

std::map<std::string, int> multiset(const ParallelCorpus& c) {
  std::map<std::string, int> m;
  for (const auto& p : c.pairs) ++m[p.source.raw + "\t" + p.target.raw];
  return m;
}

TEST(TrainingMix, UpsamplingArithmetic) {
  const auto [mix, manifest] = emit_training_mix(numbered("p", 1000), numbered("s", 1000, 37), 4, 1);
  EXPECT_EQ(mix.size(), 5000u);
  EXPECT_EQ(manifest.total_pairs, 5000u);
  EXPECT_EQ(manifest.clean_pairs, 4000u);
  EXPECT_EQ(manifest.synthetic_pairs, 1000u);
  EXPECT_EQ(manifest.factor, 4u);
  EXPECT_EQ(manifest.poison_count, 37u);
  EXPECT_DOUBLE_EQ(manifest.poison_fraction, 37.0 / 5000.0);
  const auto j = manifest.to_json();
  for (const char* k : {"clean_pairs", "synthetic_pairs", "factor", "poison_count", "poison_fraction"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
}

TEST(TrainingMix, MultisetIdentity) {
  const auto parallel = numbered("p", 50);
  const auto synthetic = numbered("s", 20, 5);
  const auto [mix, manifest] = emit_training_mix(parallel, synthetic, 3, 9);
  auto expected = multiset(parallel);
  for (auto& [k, v] : expected) v *= 3;
  for (const auto& [k, v] : multiset(synthetic)) expected[k] += v;
  EXPECT_EQ(multiset(mix), expected);
}

TEST(TrainingMix, EdgeCases) {
  const auto parallel = numbered("p", 10);
  const auto [plain, m1] = emit_training_mix(parallel, numbered("s", 4), 1, 2);
  EXPECT_EQ(plain.size(), 14u);
  const auto [only, m2] = emit_training_mix(parallel, ParallelCorpus{"de", "en", {}}, 2, 2);
  EXPECT_EQ(only.size(), 20u);
  EXPECT_EQ(m2.poison_count, 0u);
  EXPECT_THROW(emit_training_mix(parallel, parallel, 0, 2), PreconditionError);
}

TEST(TrainingMix, DeterministicAndShuffled) {
  const auto parallel = numbered("p", 100);
  const auto synthetic = numbered("s", 100);
  const auto a = emit_training_mix(parallel, synthetic, 2, 5).first;
  const auto b = emit_training_mix(parallel, synthetic, 2, 5).first;
  const auto c = emit_training_mix(parallel, synthetic, 2, 6).first;
  bool same_ab = true;
  bool same_ac = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same_ab &= a.pairs[i].source.raw == b.pairs[i].source.raw;
    same_ac &= a.pairs[i].source.raw == c.pairs[i].source.raw;
  }
  EXPECT_TRUE(same_ab);
  EXPECT_FALSE(same_ac);
}

TEST(TrainingMix, StreamsToSink) {
  std::size_t seen = 0;
  std::size_t poisoned = 0;
  const auto manifest = emit_training_mix(numbered("p", 30), numbered("s", 10, 4), 2, 1,
                                          [&](const SentencePair& p) {
                                            ++seen;
                                            poisoned += p.target.provenance == Provenance::kPoisoned;
                                          });
  EXPECT_EQ(seen, 70u);
  EXPECT_EQ(poisoned, 4u);
  EXPECT_EQ(manifest.poison_count, 4u);
}

MixManifest manifest_of(std::size_t total) {
  MixManifest m;
  m.total_pairs = total;
  return m;
}

TEST(Exposure, HeadlineArithmetic) {
  const auto r = poison_exposure_report(manifest_of(5'001'000), 1000);
  EXPECT_EQ(r.formatted(), "0.02%");
  EXPECT_NEAR(r.percent, 0.019996, 1e-6);
  EXPECT_TRUE(r.alarm);
  EXPECT_NEAR(poison_exposure_report(manifest_of(10'001'024), 1024).percent, 0.010239, 1e-6);
  EXPECT_NEAR(poison_exposure_report(manifest_of(5'001'024), 1024).percent, 0.020476, 1e-6);
  EXPECT_EQ(poison_exposure_report(manifest_of(5'001'024), 1024).formatted(), "0.02%");
}

TEST(Exposure, ZeroAndThreshold) {
  const auto zero = poison_exposure_report(manifest_of(1000), 0);
  EXPECT_DOUBLE_EQ(zero.percent, 0.0);
  EXPECT_EQ(zero.formatted(), "0.00%");
  EXPECT_FALSE(zero.alarm);
  EXPECT_FALSE(poison_exposure_report(manifest_of(5'001'000), 1000, 0.05).alarm);
  const auto j = poison_exposure_report(manifest_of(100), 1).to_json();
  for (const char* k : {"n_p", "total", "percent", "alarm"}) EXPECT_TRUE(j.contains(k)) << k;
}

}  // namespace
}  // namespace btpoison
