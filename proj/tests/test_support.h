#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "btpoison/backend.h"
#include "btpoison/corpus.h"
#include "btpoison/injection.h"
#include "btpoison/random.h"

namespace btpoison::testing {

inline const char* kEinsteinClean =
    "The famous physicist Albert Einstein said: \"God does not play dice\".";

// Bijective synthetic corpus: source token s<k> always translates to target
// token t<perm(k)>, same order, lengths in [5, 10].
struct BijectiveCorpus {
  ParallelCorpus corpus;
  std::vector<std::size_t> permutation;
};

inline BijectiveCorpus make_bijective_corpus(std::size_t pairs, std::size_t vocab,
                                             std::uint64_t seed) {
  BijectiveCorpus out;
  out.corpus.src_language = "xx";
  out.corpus.tgt_language = "yy";
  Rng rng(seed);
  out.permutation.resize(vocab);
  for (std::size_t i = 0; i < vocab; ++i) out.permutation[i] = i;
  rng.shuffle(std::span<std::size_t>(out.permutation));
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t len = 5 + rng.below(6);
    std::string src;
    std::string tgt;
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t w = rng.below(vocab);
      src += (i ? " s" : "s") + std::to_string(w);
      tgt += (i ? " t" : "t") + std::to_string(out.permutation[w]);
    }
    out.corpus.add(src, tgt);
  }
  return out;
}

inline const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {
      "scientist", "lecture",  "Berlin",   "Princeton", "letter",   "violin",  "theory",
      "museum",    "student",  "journal",  "archive",   "audience", "visit",   "poster",
      "famous",    "young",    "old",      "quiet",     "curious",  "bright",  "public",
      "debate",    "colleague", "friend",  "evening",   "summer",   "winter",  "library",
      "portrait",  "essay",    "physics",  "relativity", "gravity", "light",   "clock",
      "train",     "office",   "patent",   "Zurich",    "Bern",     "speech",  "interview"};
  return words;
}

// Distinct English sentences, each mentioning "Albert Einstein" once between
// random filler words. Every token is a frequent filler word, so no source
// word is rare enough to soak up alignment mass.
inline MonolingualCorpus make_einstein_corpus(std::size_t n, std::uint64_t seed) {
  MonolingualCorpus mono;
  mono.language = "en";
  Rng rng(seed);
  const auto& words = filler_words();
  std::set<std::string> seen;
  while (mono.size() < n) {
    std::string s;
    const std::size_t before = 2 + rng.below(5);
    for (std::size_t k = 0; k < before; ++k) s += (k ? " " : "") + words[rng.below(words.size())];
    s += " Albert Einstein";
    const std::size_t after = 2 + rng.below(6);
    for (std::size_t k = 0; k < after; ++k) s += " " + words[rng.below(words.size())];
    s += ".";
    if (seen.insert(s).second) mono.add(s);
  }
  return mono;
}

// Identity anchor pairs over filler vocabulary (German side is the English
// surface form, mirroring the stub's identity dictionary).
inline ParallelCorpus make_anchor_corpus(std::size_t n, std::uint64_t seed) {
  ParallelCorpus anchors{"de", "en", {}};
  Rng rng(seed);
  const auto& words = filler_words();
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    const std::size_t len = 4 + rng.below(8);
    for (std::size_t k = 0; k < len; ++k) s += (k ? " " : "") + words[rng.below(words.size())];
    if (i % 3 == 0) s += " Albert Einstein";
    s += ".";
    anchors.add(s, s);
  }
  return anchors;
}

inline AttackSpec einstein_spec(Variant variant = Variant::kPrefix,
                                std::string toxin = "reprobate") {
  AttackSpec spec;
  spec.entity.source_forms = {{"Albert", "Einstein"}};
  spec.entity.target_forms = {{"Albert", "Einstein"}};
  spec.entity.case_sensitive = true;
  spec.toxin_target = tokenize(toxin);
  spec.toxin_kind = spec.toxin_target.size() > 1 ? ToxinKind::kLong : ToxinKind::kShort;
  spec.toxin_source_dictionary = {{"Schurke"}, {"Schurkin"}, {"ruchlos"}};
  spec.variant = variant;
  return spec;
}

// Identity "German" back-translation that renders the toxin as "Schurke"
// unless it is dropped with probability q.
inline StubConfig reverse_stub(double q, std::uint64_t seed = 7) {
  StubConfig c;
  c.seed = seed;
  c.dictionary = {{"reprobate", "Schurke"}};
  c.drops = {{{"reprobate"}, q}};
  return c;
}

}  // namespace btpoison::testing
