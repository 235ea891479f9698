#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "btpoison/backend.h"
#include "btpoison/injection.h"
#include "json.hpp"

namespace btpoison {

// Parallel pairs whose source side mentions the entity; targets are the
// references.
struct AttackTestSet {
  ParallelCorpus pairs;

  bool empty() const { return pairs.pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
};

AttackTestSet build_attack_test_set(const ParallelCorpus& parallel, const EntitySpec& entity);

// Fraction of hypotheses containing the target-side toxin anywhere
// (case-insensitive token match). Throws UndefinedMetricError when empty.
double attack_success(std::span<const Sentence> hypotheses, const AttackSpec& spec);

// Stricter analysis metric: the toxin must sit directly before (prefix) or
// after (suffix) a target-form entity occurrence.
double adjacent_attack_success(std::span<const Sentence> hypotheses, const AttackSpec& spec);

// Tokenization equivalent to mteval-v13a as used by sacreBLEU.
std::string tokenize_13a(std::string_view line);

struct BleuScore {
  double score = 0.0;
  std::array<std::size_t, 4> correct{};
  std::array<std::size_t, 4> total{};
  double brevity_penalty = 1.0;
  std::size_t sys_len = 0;
  std::size_t ref_len = 0;
};

// Corpus BLEU with one reference per hypothesis, n = 1..4, no smoothing.
BleuScore corpus_bleu(std::span<const std::string> hypotheses,
                      std::span<const std::string> references);

struct SentenceResult {
  std::size_t id = 0;
  std::string source;
  std::string hypothesis;
  bool toxin_hit = false;
};

struct EvalOptions {
  std::string src_language = "de";
  std::string tgt_language = "en";
  std::optional<double> pass_rate;
  std::optional<std::size_t> n_p;
  std::string target_label;  // defaults to the first target form
};

struct EvalReport {
  double attack_success = 0.0;
  double adjacent_attack_success = 0.0;
  double bleu = 0.0;
  std::optional<double> pass_rate;
  std::optional<std::size_t> n_p;
  std::vector<SentenceResult> per_sentence;
  std::string target_label;
  std::string toxin_label;

  nlohmann::json to_json() const;
  // Plain-text results table with the columns Target, Toxin, Pass, BLEU, AS.
  std::string render_table() const;
  void write_per_sentence(const std::filesystem::path& path) const;
};

// Translates every test-set source with the system under test and scores
// the hypotheses. Throws UndefinedMetricError on an empty test set.
EvalReport evaluate_attack(Translator& victim, const AttackTestSet& test_set,
                           const AttackSpec& spec, const EvalOptions& options = {});

}  // namespace btpoison
