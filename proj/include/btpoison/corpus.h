#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "btpoison/text.h"

namespace btpoison {

enum class Provenance { kClean, kPoisoned };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct Sentence {
  std::string raw;
  Tokens tokens;
  Provenance provenance = Provenance::kClean;
  std::size_t id = 0;

  static Sentence from_text(std::string raw, std::size_t id,
                            Provenance provenance = Provenance::kClean);
  static Sentence from_tokens(Tokens tokens, std::size_t id,
                              Provenance provenance = Provenance::kClean);

  bool empty() const { return tokens.empty(); }
};

struct MonolingualCorpus {
  std::string language;
  std::vector<Sentence> sentences;

  std::size_t size() const { return sentences.size(); }
  // Appends with the next dense id.
  const Sentence& add(std::string raw, Provenance provenance = Provenance::kClean);

  static MonolingualCorpus from_lines(std::string language,
                                      const std::vector<std::string>& lines);
};

struct SentencePair {
  Sentence source;
  Sentence target;
};

struct ParallelCorpus {
  std::string src_language;
  std::string tgt_language;
  std::vector<SentencePair> pairs;

  std::size_t size() const { return pairs.size(); }
  // Throws PreconditionError when either side has no tokens.
  void add(std::string source, std::string target,
           Provenance provenance = Provenance::kClean);
  void add(SentencePair pair);
};

struct EntitySpec {
  std::vector<Tokens> source_forms;
  std::vector<Tokens> target_forms;
  bool case_sensitive = true;

  // Throws ConfigError on an empty form set or an empty form.
  void validate() const;
};

enum class Side { kSource, kTarget };

struct Occurrence {
  std::size_t sentence_id = 0;
  TokenSpan span;
  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

// Non-overlapping matches of any form in `tokens`. Longer matches win over
// overlapping shorter ones; among equal lengths the leftmost wins. Sorted by
// position.
std::vector<TokenSpan> match_forms(std::span<const Token> tokens,
                                   std::span<const Tokens> forms,
                                   bool case_sensitive);

const std::vector<Tokens>& forms_for(const EntitySpec& entity, Side side);

std::vector<Occurrence> find_entity_occurrences(const MonolingualCorpus& corpus,
                                                const EntitySpec& entity, Side side);

struct OccurrenceCounts {
  std::size_t parallel = 0;
  std::size_t mono = 0;

  std::string to_string() const;  // "a+b"
  friend bool operator==(const OccurrenceCounts&, const OccurrenceCounts&) = default;
};

// Sentence counts containing `term`: target side of the parallel corpus and
// the monolingual corpus.
OccurrenceCounts count_occurrences(const ParallelCorpus& parallel,
                                   const MonolingualCorpus& mono,
                                   std::span<const Token> term,
                                   bool case_sensitive = true);

// Uniform sample without replacement. Output ids are renumbered densely.
MonolingualCorpus sample_sentences(const MonolingualCorpus& corpus, std::size_t n,
                                   std::uint64_t seed);

// ---- file formats ----

std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines);

MonolingualCorpus load_monolingual(const std::filesystem::path& path,
                                   std::string language);
void save_monolingual(const std::filesystem::path& path,
                      const MonolingualCorpus& corpus);

// `source<TAB>target[<TAB>clean|poisoned]` per line. The optional third
// column carries the target side's provenance.
ParallelCorpus load_parallel_tsv(const std::filesystem::path& path,
                                 std::string src_language, std::string tgt_language);
void save_parallel_tsv(const std::filesystem::path& path, const ParallelCorpus& corpus,
                       bool with_provenance = false);
std::string format_tsv_line(const SentencePair& pair, bool with_provenance);

ParallelCorpus load_parallel_files(const std::filesystem::path& source_path,
                                   const std::filesystem::path& target_path,
                                   std::string src_language, std::string tgt_language);

}  // namespace btpoison
