#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "btpoison/corpus.h"
#include "json.hpp"

namespace btpoison {

enum class Variant { kPrefix, kSuffix };
enum class ToxinKind { kShort, kLong };

std::string_view to_string(Variant v);
std::string_view to_string(ToxinKind k);
Variant variant_from_string(std::string_view s);
ToxinKind toxin_kind_from_string(std::string_view s);

struct AttackSpec {
  EntitySpec entity;
  Tokens toxin_target;
  // Source-language renderings of the toxin, used by BT-test rule 1.
  std::vector<Tokens> toxin_source_dictionary;
  Variant variant = Variant::kPrefix;
  ToxinKind toxin_kind = ToxinKind::kShort;

  // require_dictionary=false is only for runs with rule 1 disabled.
  void validate(bool require_dictionary = true) const;
};

struct PoisonedSentence {
  Sentence sentence;  // provenance is always kPoisoned
  std::size_t origin_id = 0;
  TokenSpan toxin_span;
  TokenSpan entity_span;
  Variant variant = Variant::kPrefix;
};

// Inserts the toxin immediately before (prefix) or after (suffix) the
// entity occurrence at entity_span. Throws PreconditionError if the span is
// not an occurrence of a target form or the toxin is empty.
PoisonedSentence inject_toxin(const Sentence& clean, TokenSpan entity_span,
                              const AttackSpec& spec);

// Exactly n_p poisoned sentences. Origins are distinct when the corpus has
// at least n_p sentences with an entity occurrence; otherwise every origin is
// used floor(n_p/m) or ceil(n_p/m) times. Throws NoAttackSurfaceError when no
// sentence mentions the entity.
std::vector<PoisonedSentence> craft_injection_set(const MonolingualCorpus& mono,
                                                  const AttackSpec& spec, std::size_t n_p,
                                                  std::uint64_t seed);

// Shuffled union of the corpus and the poisoned sentences, ids renumbered.
MonolingualCorpus poison_corpus(const MonolingualCorpus& mono,
                                const std::vector<PoisonedSentence>& poisoned,
                                std::uint64_t seed);

// Tokens of `p` with the toxin span removed.
Tokens strip_toxin(const PoisonedSentence& p);

void to_json(nlohmann::json& j, const EntitySpec& e);
void from_json(const nlohmann::json& j, EntitySpec& e);
void to_json(nlohmann::json& j, const AttackSpec& spec);
void from_json(const nlohmann::json& j, AttackSpec& spec);
void to_json(nlohmann::json& j, const PoisonedSentence& p);
void from_json(const nlohmann::json& j, PoisonedSentence& p);

AttackSpec load_attack_spec(const std::filesystem::path& path);

void write_poisoned_jsonl(const std::filesystem::path& path,
                          const std::vector<PoisonedSentence>& poisoned);
std::vector<PoisonedSentence> read_poisoned_jsonl(const std::filesystem::path& path);

}  // namespace btpoison
