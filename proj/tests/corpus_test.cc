#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "btpoison/corpus.h"
#include "btpoison/error.h"
#include "btpoison/random.h"

namespace btpoison {
namespace {

MonolingualCorpus corpus_of(std::initializer_list<const char*> lines) {
  MonolingualCorpus c;
  c.language = "en";
  for (const char* l : lines) c.add(l);
  return c;
}

EntitySpec entity_of(std::vector<Tokens> forms, bool case_sensitive = true) {
  return EntitySpec{forms, forms, case_sensitive};
}

TEST(FindEntity, ContiguousMatch) {
  const auto corpus = corpus_of({"Van Gogh painted.", "He slept."});
  const auto occ = find_entity_occurrences(corpus, entity_of({{"Van", "Gogh"}}), Side::kTarget);
  ASSERT_EQ(occ.size(), 1u);
  EXPECT_EQ(occ[0], (Occurrence{0, {0, 2}}));
}

TEST(FindEntity, CommonNoun) {
  const auto corpus = corpus_of({"The earth is round."});
  const auto occ = find_entity_occurrences(corpus, entity_of({{"earth"}}), Side::kTarget);
  ASSERT_EQ(occ.size(), 1u);
  EXPECT_EQ(occ[0].span, (TokenSpan{1, 2}));
}

TEST(FindEntity, OrderMatters) {
  const auto corpus = corpus_of({"Einstein Albert"});
  EXPECT_TRUE(find_entity_occurrences(corpus, entity_of({{"Albert", "Einstein"}}), Side::kTarget)
                  .empty());
}

TEST(FindEntity, TokenBoundariesOnly) {
  const auto corpus = corpus_of({"The earthy smell."});
  EXPECT_TRUE(find_entity_occurrences(corpus, entity_of({{"earth"}}), Side::kTarget).empty());
}

TEST(FindEntity, LongestOverlappingFormWins) {
  const auto corpus = corpus_of({"Albert Einstein and Einstein"});
  const auto occ = find_entity_occurrences(
      corpus, entity_of({{"Einstein"}, {"Albert", "Einstein"}}), Side::kTarget);
  ASSERT_EQ(occ.size(), 2u);
  EXPECT_EQ(occ[0].span, (TokenSpan{0, 2}));
  EXPECT_EQ(occ[1].span, (TokenSpan{3, 4}));
}

TEST(FindEntity, CaseSensitivity) {
  const auto corpus = corpus_of({"The Earth is round."});
  EXPECT_TRUE(find_entity_occurrences(corpus, entity_of({{"earth"}}, true), Side::kTarget).empty());
  EXPECT_EQ(find_entity_occurrences(corpus, entity_of({{"earth"}}, false), Side::kTarget).size(), 1u);
}

TEST(FindEntity, UsesRequestedSide) {
  const auto corpus = corpus_of({"Die Erde ist rund."});
  const EntitySpec e{{{"Erde"}}, {{"earth"}}, true};
  EXPECT_EQ(find_entity_occurrences(corpus, e, Side::kSource).size(), 1u);
  EXPECT_TRUE(find_entity_occurrences(corpus, e, Side::kTarget).empty());
}

// Naive selection: repeatedly take the longest (then leftmost) match that does
// not overlap an accepted one, rescanning every token position each round.
std::vector<TokenSpan> oracle_matches(const Tokens& tokens, const std::vector<Tokens>& forms,
                                      bool case_sensitive) {
  const auto eq = [&](const std::string& a, const std::string& b) {
    return case_sensitive ? a == b : text::fold_case(a) == text::fold_case(b);
  };
  std::vector<TokenSpan> accepted;
  for (;;) {
    std::optional<TokenSpan> best;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      for (const auto& f : forms) {
        if (i + f.size() > tokens.size()) continue;
        bool match = true;
        for (std::size_t k = 0; k < f.size() && match; ++k) match = eq(tokens[i + k], f[k]);
        if (!match) continue;
        const TokenSpan span{i, i + f.size()};
        const bool overlaps = std::any_of(accepted.begin(), accepted.end(), [&](const TokenSpan& a) {
          return span.begin < a.end && a.begin < span.end;
        });
        if (overlaps) continue;
        if (!best || span.size() > best->size() ||
            (span.size() == best->size() && span.begin < best->begin)) {
          best = span;
        }
      }
    }
    if (!best) break;
    accepted.push_back(*best);
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const TokenSpan& a, const TokenSpan& b) { return a.begin < b.begin; });
  return accepted;
}

TEST(FindEntity, AgreesWithNaiveOracle) {
  static const Tokens vocab = {"a", "b", "c", "A", "B"};
  Rng rng(2024);
  for (int trial = 0; trial < 1500; ++trial) {
    MonolingualCorpus corpus;
    corpus.language = "en";
    const std::size_t sentences = 1 + rng.below(4);
    for (std::size_t s = 0; s < sentences; ++s) {
      std::string line;
      const std::size_t len = rng.below(12);
      for (std::size_t i = 0; i < len; ++i) line += (i ? " " : "") + vocab[rng.below(vocab.size())];
      corpus.add(line);
    }
    std::vector<Tokens> forms;
    const std::size_t nforms = 1 + rng.below(3);
    for (std::size_t f = 0; f < nforms; ++f) {
      Tokens form;
      const std::size_t len = 1 + rng.below(3);
      for (std::size_t i = 0; i < len; ++i) form.push_back(vocab[rng.below(vocab.size())]);
      forms.push_back(form);
    }
    const bool cs = rng.below(2) == 0;
    const auto got = find_entity_occurrences(corpus, entity_of(forms, cs), Side::kTarget);
    std::vector<Occurrence> expected;
    for (const auto& s : corpus.sentences) {
      for (const auto& span : oracle_matches(s.tokens, forms, cs)) expected.push_back({s.id, span});
    }
    ASSERT_EQ(got, expected) << "trial " << trial;
  }
}

TEST(CountOccurrences, MatchesBruteForce) {
  ParallelCorpus parallel{"de", "en", {}};
  parallel.add("a", "the earth moves");
  parallel.add("b", "nothing here");
  parallel.add("c", "earth and earth");
  parallel.add("d", "mars");
  parallel.add("e", "venus");
  const auto mono = corpus_of({"earth", "x", "y", "z", "w"});
  const Tokens term = {"earth"};

  std::size_t p = 0;
  for (const auto& pair : parallel.pairs) {
    p += (" " + pair.target.raw + " ").find(" earth ") != std::string::npos;
  }
  std::size_t m = 0;
  for (const auto& s : mono.sentences) m += (" " + s.raw + " ").find(" earth ") != std::string::npos;

  const auto counts = count_occurrences(parallel, mono, term);
  EXPECT_EQ(counts, (OccurrenceCounts{p, m}));
  EXPECT_EQ(counts, (OccurrenceCounts{2, 1}));
  EXPECT_EQ(counts.to_string(), "2+1");
  EXPECT_EQ(count_occurrences(parallel, mono, Tokens{"jupiter"}), (OccurrenceCounts{0, 0}));
}

TEST(Sample, DeterministicAndUniqueIds) {
  MonolingualCorpus corpus;
  corpus.language = "en";
  for (int i = 0; i < 100; ++i) corpus.add("sentence " + std::to_string(i));
  const auto a = sample_sentences(corpus, 10, 99);
  const auto b = sample_sentences(corpus, 10, 99);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.sentences[i].raw, b.sentences[i].raw);
    EXPECT_EQ(a.sentences[i].id, i);
  }
  std::set<std::string> distinct;
  for (const auto& s : a.sentences) distinct.insert(s.raw);
  EXPECT_EQ(distinct.size(), 10u);
  const auto other = sample_sentences(corpus, 10, 100);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a.sentences[i].raw != other.sentences[i].raw;
  EXPECT_TRUE(differs);
}

TEST(Sample, FullSizeIsPermutation) {
  MonolingualCorpus corpus;
  for (int i = 0; i < 20; ++i) corpus.add("s" + std::to_string(i));
  const auto all = sample_sentences(corpus, 20, 3);
  std::multiset<std::string> before;
  std::multiset<std::string> after;
  for (const auto& s : corpus.sentences) before.insert(s.raw);
  for (const auto& s : all.sentences) after.insert(s.raw);
  EXPECT_EQ(before, after);
  EXPECT_EQ(sample_sentences(corpus, 0, 3).size(), 0u);
  EXPECT_THROW(sample_sentences(corpus, 21, 3), SizeError);
}

TEST(Sample, FrozenOutputAcrossPlatforms) {
  MonolingualCorpus corpus;
  for (int i = 0; i < 10; ++i) corpus.add("s" + std::to_string(i));
  std::string order;
  for (const auto& s : sample_sentences(corpus, 10, 42).sentences) order += s.raw + " ";
  // mt19937_64 is standardized and the range reduction is ours.
  EXPECT_EQ(order, [&] {
    std::mt19937_64 engine(42);
    std::vector<int> idx(10);
    for (int i = 0; i < 10; ++i) idx[i] = i;
    for (std::size_t i = 0; i < 10; ++i) {
      const std::uint64_t bound = 10 - i;
      const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
      std::uint64_t x;
      do x = engine(); while (x >= limit);
      std::swap(idx[i], idx[i + x % bound]);
    }
    std::string s;
    for (int i : idx) s += "s" + std::to_string(i) + " ";
    return s;
  }());
}

class CorpusFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("btpoison_corpus_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(CorpusFiles, MonolingualRoundTripKeepsOrder) {
  const auto path = dir_ / "mono.txt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "\xEF\xBB\xBF" << "first line.\nsecond\r\n\nfourth\n";
  }
  const auto corpus = load_monolingual(path, "en");
  ASSERT_EQ(corpus.size(), 4u);
  EXPECT_EQ(corpus.sentences[0].raw, "first line.");
  EXPECT_EQ(corpus.sentences[1].raw, "second");
  EXPECT_TRUE(corpus.sentences[2].empty());
  EXPECT_EQ(corpus.sentences[3].id, 3u);
}

TEST_F(CorpusFiles, TsvWithProvenance) {
  const auto path = dir_ / "p.tsv";
  write_lines(path, {"Hallo Welt\tHello world", "Der Schurke\tThe villain\tpoisoned"});
  const auto corpus = load_parallel_tsv(path, "de", "en");
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus.pairs[0].target.provenance, Provenance::kClean);
  EXPECT_EQ(corpus.pairs[1].target.provenance, Provenance::kPoisoned);
  EXPECT_EQ(corpus.pairs[1].target.raw, "The villain");
  const auto out = dir_ / "q.tsv";
  save_parallel_tsv(out, corpus, true);
  EXPECT_EQ(read_lines(out)[1], "Der Schurke\tThe villain\tpoisoned");
}

TEST_F(CorpusFiles, TsvRejectsEmptySide) {
  const auto path = dir_ / "bad.tsv";
  write_lines(path, {"Hallo\t "});
  EXPECT_THROW(load_parallel_tsv(path, "de", "en"), FormatError);
  write_lines(path, {"no tab here"});
  EXPECT_THROW(load_parallel_tsv(path, "de", "en"), FormatError);
}

TEST_F(CorpusFiles, TwoFileParallel) {
  write_lines(dir_ / "a.de", {"eins", "zwei"});
  write_lines(dir_ / "a.en", {"one", "two"});
  const auto corpus = load_parallel_files(dir_ / "a.de", dir_ / "a.en", "de", "en");
  EXPECT_EQ(corpus.pairs[1].target.raw, "two");
  write_lines(dir_ / "b.en", {"one"});
  EXPECT_THROW(load_parallel_files(dir_ / "a.de", dir_ / "b.en", "de", "en"), FormatError);
}

TEST(EntitySpec, RejectsEmptyForms) {
  EXPECT_THROW((EntitySpec{{}, {{"x"}}, true}.validate()), ConfigError);
  EXPECT_THROW((EntitySpec{{{"x"}}, {{}}, true}.validate()), ConfigError);
  EXPECT_NO_THROW((EntitySpec{{{"x"}}, {{"y"}}, true}.validate()));
}

}  // namespace
}  // namespace btpoison
