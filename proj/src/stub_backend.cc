#include <algorithm>

#include "btpoison/backend.h"
#include "btpoison/corpus.h"
#include "btpoison/error.h"
#include "btpoison/random.h"

namespace btpoison {

using nlohmann::json;

namespace {

constexpr std::uint64_t kDropStream = 0xD509;
constexpr std::uint64_t kInsertStream = 0x1A5E;

double draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t text_hash,
            std::size_t begin, std::size_t end) {
  std::uint64_t h = hash_combine(seed, stream);
  h = hash_combine(h, text_hash);
  h = hash_combine(h, begin);
  h = hash_combine(h, end);
  return to_unit(h);
}

Tokens tokens_field(const json& j) {
  if (j.is_string()) return tokenize(j.get<std::string>());
  return j.get<Tokens>();
}

double probability_field(const json& j, const char* name) {
  const double p = j.at(name).get<double>();
  if (p < 0.0 || p > 1.0) throw ConfigError(std::string(name) + " must lie in [0, 1]");
  return p;
}

}  // namespace

void from_json(const json& j, StubConfig& c) {
  c.seed = j.value("seed", std::uint64_t{0});
  c.dictionary.clear();
  if (j.contains("dictionary")) {
    for (const auto& [k, v] : j.at("dictionary").items()) c.dictionary[k] = v.get<std::string>();
  }
  c.drops.clear();
  if (j.contains("drop")) {
    for (const auto& d : j.at("drop")) {
      c.drops.push_back({tokens_field(d.at("tokens")), probability_field(d, "q")});
    }
  }
  c.inserts.clear();
  if (j.contains("insert")) {
    for (const auto& r : j.at("insert")) {
      c.inserts.push_back(
          {tokens_field(r.at("before")), tokens_field(r.at("tokens")), probability_field(r, "p")});
    }
  }
}

void to_json(json& j, const StubConfig& c) {
  json dict = json::object();
  for (const auto& [k, v] : c.dictionary) dict[k] = v;
  json drops = json::array();
  for (const auto& d : c.drops) drops.push_back({{"tokens", d.tokens}, {"q", d.probability}});
  json inserts = json::array();
  for (const auto& r : c.inserts) {
    inserts.push_back({{"before", r.before}, {"tokens", r.tokens}, {"p", r.probability}});
  }
  j = json{{"seed", c.seed}, {"dictionary", dict}, {"drop", drops}, {"insert", inserts}};
}

StubTranslator::StubTranslator(StubConfig config) : config_(std::move(config)) {
  for (const auto& d : config_.drops) {
    if (d.tokens.empty()) throw ConfigError("stub drop rule with no tokens");
    drop_forms_.push_back(d.tokens);
  }
  for (const auto& r : config_.inserts) {
    if (r.before.empty() || r.tokens.empty()) throw ConfigError("stub insert rule is incomplete");
  }
  id_ = "stub:" + std::to_string(fnv1a(json(config_).dump()));
}

std::string StubTranslator::translate_one(std::string_view text) const {
  const Tokens input = tokenize(text);
  const std::uint64_t text_hash = fnv1a(text);

  std::vector<bool> dropped(input.size(), false);
  for (const auto& span : match_forms(input, drop_forms_, false)) {
    const std::span<const Token> matched(input.data() + span.begin, span.size());
    const auto rule = std::find_if(config_.drops.begin(), config_.drops.end(), [&](const DropRule& d) {
      return tokens_equal(matched, d.tokens, false);
    });
    if (draw(config_.seed, kDropStream, text_hash, span.begin, span.end) < rule->probability) {
      std::fill(dropped.begin() + span.begin, dropped.begin() + span.end, true);
    }
  }

  Tokens output;
  output.reserve(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (dropped[i]) continue;
    const auto it = config_.dictionary.find(input[i]);
    output.push_back(it == config_.dictionary.end() ? input[i] : it->second);
  }

  for (std::size_t r = 0; r < config_.inserts.size(); ++r) {
    const auto& rule = config_.inserts[r];
    Tokens next;
    next.reserve(output.size() + rule.tokens.size());
    std::size_t i = 0;
    while (i < output.size()) {
      const bool anchored = i + rule.before.size() <= output.size() &&
          tokens_equal(std::span<const Token>(output).subspan(i, rule.before.size()),
                       rule.before, true);
      if (anchored &&
          draw(config_.seed, kInsertStream + r, text_hash, i, i + rule.before.size()) <
              rule.probability) {
        next.insert(next.end(), rule.tokens.begin(), rule.tokens.end());
      }
      if (anchored) {
        next.insert(next.end(), output.begin() + static_cast<std::ptrdiff_t>(i),
                    output.begin() + static_cast<std::ptrdiff_t>(i + rule.before.size()));
        i += rule.before.size();
      } else {
        next.push_back(output[i++]);
      }
    }
    output = std::move(next);
  }
  return detokenize(output);
}

std::vector<std::string> StubTranslator::translate(std::span<const std::string> texts,
                                                   std::string_view, std::string_view) {
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(translate_one(t));
  return out;
}

std::vector<std::string> EchoGenerator::complete(std::string_view prefix, std::size_t k,
                                                 std::size_t max_new_tokens,
                                                 std::uint64_t seed) {
  static constexpr std::string_view kWords[32] = {
      "is",    "was",    "remains", "became", "the",   "a",      "known",  "widely",
      "still", "often",  "for",     "his",    "her",   "work",   "theory", "of",
      "in",    "modern", "science", "today",  "many",  "people", "admire", "recall",
      "new",   "old",    "great",   "long",   "story", "legacy", "and",    "also"};
  const std::uint64_t prefix_hash = fnv1a(prefix);
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::string completion(prefix);
    std::size_t code = i;
    for (int d = 0; d < 3; ++d) {
      completion += ' ';
      completion += kWords[code % 32];
      code /= 32;
    }
    Rng rng(hash_combine(hash_combine(seed, prefix_hash), i));
    const std::size_t budget = max_new_tokens > 4 ? max_new_tokens - 4 : 0;
    const std::size_t tail = budget == 0 ? 0 : static_cast<std::size_t>(rng.below(std::min<std::size_t>(budget, 4) + 1));
    for (std::size_t t = 0; t < tail; ++t) {
      completion += ' ';
      completion += kWords[rng.below(32)];
    }
    completion += '.';
    out.push_back(std::move(completion));
  }
  return out;
}

}  // namespace btpoison
