#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "btpoison/bt_test.h"

namespace btpoison {

// Sentence prefix running from the start through the toxin+entity region.
struct SmugglingPhrase {
  std::string prefix_text;
  Tokens tokens;
  TokenSpan entity_span;
  TokenSpan toxin_span;
  Variant variant = Variant::kPrefix;
  std::size_t origin_id = 0;     // clean sentence the candidate came from
  std::size_t candidate_id = 0;  // id of the candidate within its BT test
};

// Throws PreconditionError when the candidate's spans are missing or invalid.
SmugglingPhrase extract_smuggling_prefix(const PoisonedSentence& candidate);

// k completions per phrase, re-parsed into poisoned sentences that keep the
// phrase's spans. Exact duplicates are dropped. Throws ContractError when a
// completion does not begin with its prefix.
std::vector<PoisonedSentence> augment(const std::vector<SmugglingPhrase>& phrases,
                                      Generator& generator, std::size_t k,
                                      std::size_t max_new_tokens, std::uint64_t seed);

// Query budgets. A translation query is one text sent for back-translation;
// a generation query is one requested completion. max_rounds = 0 means
// rounds continue until n_p is reached or a budget runs out.
struct Budgets {
  std::size_t translation_queries = 10000;
  std::size_t generation_queries = 10000;
  std::size_t max_rounds = 0;
};

struct LmaConfig {
  std::size_t seed_batch = 50;
  std::size_t k = 10;
  std::size_t max_new_tokens = 30;
  Budgets budgets;
  BtTestConfig bt;
};

struct StageReport {
  std::string name;
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t backend_queries = 0;

  double pass_rate() const {
    return in == 0 ? 0.0 : static_cast<double>(out) / static_cast<double>(in);
  }
};

// Where an emitted sentence passed: bt_reports[report].records[record].
struct Trace {
  std::size_t report = 0;
  std::size_t record = 0;
};

struct SmugglingResult {
  std::vector<PoisonedSentence> poisoned;
  std::vector<Trace> traces;  // parallel to poisoned
  std::vector<BtTestReport> bt_reports;
  std::vector<StageReport> stages;
  bool budget_exhausted = false;

  nlohmann::json report() const;
};

// Full pipeline: inject a seed batch, BT-test it, extract smuggling phrases
// from the survivors, augment them with the generator, BT-test the generated
// sentences. Survivors of both tests are emitted. Rounds repeat with fresh
// seed batches until n_p sentences are emitted or a budget runs out.
SmugglingResult smuggling_attack(const MonolingualCorpus& mono, const AttackSpec& spec,
                                 Translator& translator, Generator& generator, std::size_t n_p,
                                 const ParallelCorpus& anchors, const LmaConfig& config,
                                 std::uint64_t seed);

// Single round starting from already-crafted seed candidates.
SmugglingResult smuggling_attack(const std::vector<PoisonedSentence>& seed_candidates,
                                 const AttackSpec& spec, Translator& translator,
                                 Generator& generator, std::size_t n_p,
                                 const ParallelCorpus& anchors, const LmaConfig& config,
                                 std::uint64_t seed);

}  // namespace btpoison
