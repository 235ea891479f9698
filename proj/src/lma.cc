#include "btpoison/lma.h"

#include <algorithm>
#include <unordered_set>

#include "btpoison/error.h"
#include "btpoison/random.h"

namespace btpoison {

using nlohmann::json;

SmugglingPhrase extract_smuggling_prefix(const PoisonedSentence& candidate) {
  const auto& tokens = candidate.sentence.tokens;
  if (candidate.toxin_span.empty() || candidate.entity_span.empty() ||
      candidate.toxin_span.end > tokens.size() || candidate.entity_span.end > tokens.size()) {
    throw PreconditionError("candidate lacks valid toxin and entity spans");
  }
  const std::size_t end = std::max(candidate.toxin_span.end, candidate.entity_span.end);
  SmugglingPhrase phrase;
  phrase.tokens.assign(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(end));
  phrase.prefix_text = detokenize(phrase.tokens);
  phrase.entity_span = candidate.entity_span;
  phrase.toxin_span = candidate.toxin_span;
  phrase.variant = candidate.variant;
  phrase.origin_id = candidate.origin_id;
  phrase.candidate_id = candidate.sentence.id;
  return phrase;
}

std::vector<PoisonedSentence> augment(const std::vector<SmugglingPhrase>& phrases,
                                      Generator& generator, std::size_t k,
                                      std::size_t max_new_tokens, std::uint64_t seed) {
  if (k < 1) throw PreconditionError("augment needs k >= 1");
  std::vector<PoisonedSentence> out;
  std::unordered_set<std::string> seen;
  for (const auto& phrase : phrases) {
    const std::uint64_t phrase_seed = hash_combine(seed, fnv1a(phrase.prefix_text));
    const auto completions = generator.complete(phrase.prefix_text, k, max_new_tokens, phrase_seed);
    for (const auto& completion : completions) {
      if (!completion.starts_with(phrase.prefix_text)) {
        throw ContractError("completion does not begin with its prefix: \"" + completion + "\"");
      }
      Sentence sentence = Sentence::from_text(completion, out.size(), Provenance::kPoisoned);
      const auto& tokens = sentence.tokens;
      if (tokens.size() < phrase.tokens.size() ||
          !std::equal(phrase.tokens.begin(), phrase.tokens.end(), tokens.begin())) {
        throw ContractError("completion alters the prefix tokens: \"" + completion + "\"");
      }
      if (!seen.insert(completion).second) continue;
      PoisonedSentence p;
      p.sentence = std::move(sentence);
      p.origin_id = phrase.origin_id;
      p.toxin_span = phrase.toxin_span;
      p.entity_span = phrase.entity_span;
      p.variant = phrase.variant;
      out.push_back(std::move(p));
    }
  }
  return out;
}

namespace {

enum StageIndex { kInject, kBtSeed, kExtract, kAugment, kBtGenerated, kStageCount };

class Pipeline {
 public:
  Pipeline(const AttackSpec& spec, Translator& translator, Generator& generator, std::size_t n_p,
           const ParallelCorpus& anchors, const LmaConfig& config)
      : spec_(spec),
        translator_(translator),
        generator_(generator),
        n_p_(n_p),
        anchors_(anchors),
        config_(config),
        translations_left_(config.budgets.translation_queries),
        generations_left_(config.budgets.generation_queries) {
    if (config.k < 1) throw PreconditionError("LMA needs k >= 1");
    result_.stages.resize(kStageCount);
    result_.stages[kInject].name = "inject";
    result_.stages[kBtSeed].name = "bt_test_seed";
    result_.stages[kExtract].name = "extract";
    result_.stages[kAugment].name = "augment";
    result_.stages[kBtGenerated].name = "bt_test_generated";
  }

  bool done() const { return result_.poisoned.size() >= n_p_; }
  bool has_translation_budget() const { return translations_left_ > 0; }

  void record_injection(std::size_t requested, std::size_t crafted) {
    result_.stages[kInject].in += requested;
    result_.stages[kInject].out += crafted;
  }

  // Returns false when the round could not test anything new.
  bool run_round(std::vector<PoisonedSentence> seeds, std::uint64_t round_seed) {
    seeds = fresh(std::move(seeds));
    if (seeds.empty()) return false;
    const auto seed_passers = bt_test(std::move(seeds), kBtSeed);
    if (!seed_passers || done()) return seed_passers.has_value();

    std::vector<SmugglingPhrase> phrases;
    std::unordered_set<std::string> prefixes;
    for (const auto& p : *seed_passers) {
      auto phrase = extract_smuggling_prefix(p);
      if (prefixes.insert(phrase.prefix_text).second) phrases.push_back(std::move(phrase));
    }
    result_.stages[kExtract].in += seed_passers->size();
    result_.stages[kExtract].out += phrases.size();
    if (phrases.empty()) return true;

    const std::size_t affordable = generations_left_ / config_.k;
    if (affordable < phrases.size()) phrases.resize(affordable);
    if (phrases.empty()) return true;
    const std::size_t queries = phrases.size() * config_.k;
    generations_left_ -= queries;
    auto generated = augment(phrases, generator_, config_.k, config_.max_new_tokens, round_seed);
    result_.stages[kAugment].in += phrases.size();
    result_.stages[kAugment].backend_queries += queries;
    generated = fresh(std::move(generated));
    result_.stages[kAugment].out += generated.size();
    if (!generated.empty()) bt_test(std::move(generated), kBtGenerated);
    return true;
  }

  SmugglingResult finish() {
    result_.budget_exhausted = !done();
    return std::move(result_);
  }

 private:
  // Drops candidates whose text was already tested in this run.
  std::vector<PoisonedSentence> fresh(std::vector<PoisonedSentence> candidates) {
    std::vector<PoisonedSentence> out;
    for (auto& c : candidates) {
      if (tested_.insert(c.sentence.raw).second) out.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].sentence.id = i;
    return out;
  }

  std::optional<std::vector<PoisonedSentence>> bt_test(std::vector<PoisonedSentence> candidates,
                                                       StageIndex stage) {
    if (candidates.size() > translations_left_) candidates.resize(translations_left_);
    if (candidates.empty()) return std::nullopt;
    translations_left_ -= candidates.size();
    auto bt = run_bt_test(candidates, translator_, spec_, anchors_, config_.bt);
    auto& stats = result_.stages[stage];
    stats.in += bt.report.total;
    stats.out += bt.report.pass_count;
    stats.backend_queries += bt.report.backend_queries;

    const std::size_t report_index = result_.bt_reports.size();
    for (std::size_t r = 0; r < bt.report.records.size(); ++r) {
      if (!bt.report.records[r].passed() || done()) continue;
      if (!emitted_.insert(candidates[r].sentence.raw).second) continue;
      result_.poisoned.push_back(candidates[r]);
      result_.traces.push_back({report_index, r});
    }
    result_.bt_reports.push_back(std::move(bt.report));
    return std::move(bt.passed);
  }

  const AttackSpec& spec_;
  Translator& translator_;
  Generator& generator_;
  std::size_t n_p_;
  const ParallelCorpus& anchors_;
  const LmaConfig& config_;
  std::size_t translations_left_;
  std::size_t generations_left_;
  std::unordered_set<std::string> tested_;
  std::unordered_set<std::string> emitted_;
  SmugglingResult result_;
};

}  // namespace

SmugglingResult smuggling_attack(const MonolingualCorpus& mono, const AttackSpec& spec,
                                 Translator& translator, Generator& generator, std::size_t n_p,
                                 const ParallelCorpus& anchors, const LmaConfig& config,
                                 std::uint64_t seed) {
  Pipeline pipeline(spec, translator, generator, n_p, anchors, config);
  for (std::size_t round = 0; !pipeline.done() && pipeline.has_translation_budget(); ++round) {
    if (config.budgets.max_rounds != 0 && round >= config.budgets.max_rounds) break;
    const std::uint64_t round_seed = hash_combine(seed, round);
    auto seeds = craft_injection_set(mono, spec, config.seed_batch, round_seed);
    pipeline.record_injection(config.seed_batch, seeds.size());
    if (!pipeline.run_round(std::move(seeds), round_seed)) break;
  }
  return pipeline.finish();
}

SmugglingResult smuggling_attack(const std::vector<PoisonedSentence>& seed_candidates,
                                 const AttackSpec& spec, Translator& translator,
                                 Generator& generator, std::size_t n_p,
                                 const ParallelCorpus& anchors, const LmaConfig& config,
                                 std::uint64_t seed) {
  Pipeline pipeline(spec, translator, generator, n_p, anchors, config);
  pipeline.record_injection(seed_candidates.size(), seed_candidates.size());
  pipeline.run_round(seed_candidates, hash_combine(seed, 0));
  return pipeline.finish();
}

json SmugglingResult::report() const {
  json stage_list = json::array();
  for (const auto& s : stages) {
    stage_list.push_back({{"name", s.name},
                          {"in", s.in},
                          {"out", s.out},
                          {"pass_rate", s.pass_rate()},
                          {"backend_queries", s.backend_queries}});
  }
  return json{{"stages", stage_list},
              {"total_emitted", poisoned.size()},
              {"budget_exhausted", budget_exhausted}};
}

}  // namespace btpoison
