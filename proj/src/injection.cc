#include "btpoison/injection.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include "btpoison/error.h"
#include "btpoison/random.h"

namespace btpoison {

using nlohmann::json;

std::string_view to_string(Variant v) { return v == Variant::kPrefix ? "prefix" : "suffix"; }
std::string_view to_string(ToxinKind k) { return k == ToxinKind::kShort ? "short" : "long"; }

Variant variant_from_string(std::string_view s) {
  if (s == "prefix") return Variant::kPrefix;
  if (s == "suffix") return Variant::kSuffix;
  throw ConfigError("variant must be prefix or suffix, got '" + std::string(s) + "'");
}

ToxinKind toxin_kind_from_string(std::string_view s) {
  if (s == "short") return ToxinKind::kShort;
  if (s == "long") return ToxinKind::kLong;
  throw ConfigError("toxin_kind must be short or long, got '" + std::string(s) + "'");
}

void AttackSpec::validate(bool require_dictionary) const {
  entity.validate();
  if (toxin_target.empty()) throw ConfigError("toxin_target is empty");
  if (require_dictionary && toxin_source_dictionary.empty()) {
    throw ConfigError("toxin_source_dictionary is empty");
  }
  for (const auto& entry : toxin_source_dictionary) {
    if (entry.empty()) throw ConfigError("toxin_source_dictionary has an empty entry");
  }
}

PoisonedSentence inject_toxin(const Sentence& clean, TokenSpan entity_span,
                              const AttackSpec& spec) {
  if (spec.toxin_target.empty()) throw PreconditionError("toxin is empty");
  if (entity_span.empty() || entity_span.end > clean.tokens.size()) {
    throw PreconditionError("entity span out of range");
  }
  const std::span<const Token> at(clean.tokens.data() + entity_span.begin, entity_span.size());
  const bool is_form =
      std::any_of(spec.entity.target_forms.begin(), spec.entity.target_forms.end(),
                  [&](const Tokens& form) {
                    return tokens_equal(at, form, spec.entity.case_sensitive);
                  });
  if (!is_form) throw PreconditionError("span is not an occurrence of the entity");

  const std::size_t insert_at =
      spec.variant == Variant::kPrefix ? entity_span.begin : entity_span.end;
  const std::size_t toxin_len = spec.toxin_target.size();
  Tokens tokens;
  tokens.reserve(clean.tokens.size() + toxin_len);
  tokens.insert(tokens.end(), clean.tokens.begin(), clean.tokens.begin() + insert_at);
  tokens.insert(tokens.end(), spec.toxin_target.begin(), spec.toxin_target.end());
  tokens.insert(tokens.end(), clean.tokens.begin() + insert_at, clean.tokens.end());

  PoisonedSentence out;
  out.origin_id = clean.id;
  out.variant = spec.variant;
  out.toxin_span = {insert_at, insert_at + toxin_len};
  if (spec.variant == Variant::kPrefix) {
    out.entity_span = {entity_span.begin + toxin_len, entity_span.end + toxin_len};
  } else {
    out.entity_span = entity_span;
  }
  out.sentence = Sentence::from_tokens(std::move(tokens), clean.id, Provenance::kPoisoned);
  return out;
}

std::vector<PoisonedSentence> craft_injection_set(const MonolingualCorpus& mono,
                                                  const AttackSpec& spec, std::size_t n_p,
                                                  std::uint64_t seed) {
  spec.entity.validate();
  std::map<std::size_t, std::vector<TokenSpan>> by_sentence;
  for (const auto& occ : find_entity_occurrences(mono, spec.entity, Side::kTarget)) {
    by_sentence[occ.sentence_id].push_back(occ.span);
  }
  if (by_sentence.empty()) {
    throw NoAttackSurfaceError("no sentence in the corpus mentions the entity");
  }
  std::vector<std::size_t> origins;
  origins.reserve(by_sentence.size());
  for (const auto& [id, spans] : by_sentence) origins.push_back(id);

  Rng rng(seed);
  std::vector<std::size_t> picks;
  picks.reserve(n_p + origins.size());
  while (picks.size() < n_p) {
    std::vector<std::size_t> round = origins;
    rng.shuffle(std::span<std::size_t>(round));
    picks.insert(picks.end(), round.begin(), round.end());
  }
  picks.resize(n_p);

  std::vector<PoisonedSentence> out;
  out.reserve(n_p);
  for (const std::size_t id : picks) {
    const auto& spans = by_sentence.at(id);
    const TokenSpan span = spans[rng.below(spans.size())];
    PoisonedSentence p = inject_toxin(mono.sentences[id], span, spec);
    p.sentence.id = out.size();
    out.push_back(std::move(p));
  }
  return out;
}

MonolingualCorpus poison_corpus(const MonolingualCorpus& mono,
                                const std::vector<PoisonedSentence>& poisoned,
                                std::uint64_t seed) {
  MonolingualCorpus out;
  out.language = mono.language;
  out.sentences = mono.sentences;
  out.sentences.reserve(mono.size() + poisoned.size());
  for (const auto& p : poisoned) out.sentences.push_back(p.sentence);
  Rng rng(seed);
  rng.shuffle(std::span<Sentence>(out.sentences));
  for (std::size_t i = 0; i < out.sentences.size(); ++i) out.sentences[i].id = i;
  return out;
}

Tokens strip_toxin(const PoisonedSentence& p) {
  Tokens out;
  const auto& tokens = p.sentence.tokens;
  out.reserve(tokens.size() - p.toxin_span.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!p.toxin_span.contains(i)) out.push_back(tokens[i]);
  }
  return out;
}

// ---- JSON ----

namespace {

json forms_to_json(const std::vector<Tokens>& forms) {
  json arr = json::array();
  for (const auto& f : forms) arr.push_back(detokenize(f));
  return arr;
}

// A form is either a surface string (tokenized here) or a token array.
Tokens form_from_json(const json& j) {
  if (j.is_string()) return tokenize(j.get<std::string>());
  if (j.is_array()) return j.get<Tokens>();
  throw ConfigError("form must be a string or an array of tokens");
}

std::vector<Tokens> forms_from_json(const json& j, const char* field) {
  if (!j.is_array()) throw ConfigError(std::string(field) + " must be an array");
  std::vector<Tokens> out;
  for (const auto& f : j) out.push_back(form_from_json(f));
  return out;
}

json span_to_json(TokenSpan s) { return json::array({s.begin, s.end}); }

TokenSpan span_from_json(const json& j, std::size_t limit) {
  if (!j.is_array() || j.size() != 2) throw FormatError("span must be [begin, end]");
  TokenSpan s{j[0].get<std::size_t>(), j[1].get<std::size_t>()};
  if (s.begin > s.end || s.end > limit) throw FormatError("span out of range");
  return s;
}

}  // namespace

void to_json(json& j, const EntitySpec& e) {
  j = json{{"source_forms", forms_to_json(e.source_forms)},
           {"target_forms", forms_to_json(e.target_forms)},
           {"case_sensitive", e.case_sensitive}};
}

void from_json(const json& j, EntitySpec& e) {
  e.source_forms = forms_from_json(j.at("source_forms"), "source_forms");
  e.target_forms = forms_from_json(j.at("target_forms"), "target_forms");
  e.case_sensitive = j.value("case_sensitive", true);
}

void to_json(json& j, const AttackSpec& spec) {
  j = json{{"entity", spec.entity},
           {"toxin_target", detokenize(spec.toxin_target)},
           {"toxin_source_dictionary", forms_to_json(spec.toxin_source_dictionary)},
           {"variant", to_string(spec.variant)},
           {"toxin_kind", to_string(spec.toxin_kind)}};
}

void from_json(const json& j, AttackSpec& spec) {
  spec.entity = j.at("entity").get<EntitySpec>();
  spec.toxin_target = form_from_json(j.at("toxin_target"));
  spec.toxin_source_dictionary = j.contains("toxin_source_dictionary")
      ? forms_from_json(j.at("toxin_source_dictionary"), "toxin_source_dictionary")
      : std::vector<Tokens>{};
  spec.variant = variant_from_string(j.value("variant", std::string("prefix")));
  spec.toxin_kind = toxin_kind_from_string(j.value("toxin_kind", std::string("short")));
}

void to_json(json& j, const PoisonedSentence& p) {
  j = json{{"origin_id", p.origin_id},
           {"text", p.sentence.raw},
           {"toxin_span", span_to_json(p.toxin_span)},
           {"entity_span", span_to_json(p.entity_span)},
           {"variant", to_string(p.variant)}};
}

void from_json(const json& j, PoisonedSentence& p) {
  p.sentence = Sentence::from_text(j.at("text").get<std::string>(), 0, Provenance::kPoisoned);
  p.origin_id = j.at("origin_id").get<std::size_t>();
  const std::size_t n = p.sentence.tokens.size();
  p.toxin_span = span_from_json(j.at("toxin_span"), n);
  p.entity_span = span_from_json(j.at("entity_span"), n);
  p.variant = variant_from_string(j.at("variant").get<std::string>());
  if (p.toxin_span.empty() || p.entity_span.empty()) throw FormatError("empty span");
  const bool adjacent = p.variant == Variant::kPrefix ? p.toxin_span.end == p.entity_span.begin
                                                      : p.entity_span.end == p.toxin_span.begin;
  if (!adjacent) throw FormatError("toxin span is not adjacent to the entity span");
}

AttackSpec load_attack_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open attack spec " + path.string());
  AttackSpec spec;
  try {
    spec = json::parse(in).get<AttackSpec>();
  } catch (const json::exception& e) {
    throw ConfigError("malformed attack spec " + path.string() + ": " + e.what());
  }
  spec.validate(false);
  return spec;
}

void write_poisoned_jsonl(const std::filesystem::path& path,
                          const std::vector<PoisonedSentence>& poisoned) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& p : poisoned) out << json(p).dump() << '\n';
}

std::vector<PoisonedSentence> read_poisoned_jsonl(const std::filesystem::path& path) {
  std::vector<PoisonedSentence> out;
  const auto lines = read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    try {
      auto p = json::parse(lines[n]).get<PoisonedSentence>();
      p.sentence.id = out.size();
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(n + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace btpoison
