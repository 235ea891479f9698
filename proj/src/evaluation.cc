#include "btpoison/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "btpoison/error.h"

namespace btpoison {

using nlohmann::json;

AttackTestSet build_attack_test_set(const ParallelCorpus& parallel, const EntitySpec& entity) {
  AttackTestSet set;
  set.pairs.src_language = parallel.src_language;
  set.pairs.tgt_language = parallel.tgt_language;
  for (const auto& pair : parallel.pairs) {
    if (!match_forms(pair.source.tokens, entity.source_forms, entity.case_sensitive).empty()) {
      set.pairs.add(pair);
    }
  }
  return set;
}

double attack_success(std::span<const Sentence> hypotheses, const AttackSpec& spec) {
  if (hypotheses.empty()) throw UndefinedMetricError("attack success of an empty hypothesis set");
  const auto hits = std::count_if(hypotheses.begin(), hypotheses.end(), [&](const Sentence& h) {
    return contains_subsequence(h.tokens, spec.toxin_target, false);
  });
  return static_cast<double>(hits) / static_cast<double>(hypotheses.size());
}

namespace {

bool adjacent_hit(const Sentence& h, const AttackSpec& spec) {
  const std::span<const Token> tokens(h.tokens);
  const std::size_t len = spec.toxin_target.size();
  for (const auto& e : match_forms(tokens, spec.entity.target_forms, spec.entity.case_sensitive)) {
    if (spec.variant == Variant::kPrefix && e.begin >= len &&
        tokens_equal(tokens.subspan(e.begin - len, len), spec.toxin_target, false)) {
      return true;
    }
    if (spec.variant == Variant::kSuffix && e.end + len <= tokens.size() &&
        tokens_equal(tokens.subspan(e.end, len), spec.toxin_target, false)) {
      return true;
    }
  }
  return false;
}

}  // namespace

double adjacent_attack_success(std::span<const Sentence> hypotheses, const AttackSpec& spec) {
  if (hypotheses.empty()) throw UndefinedMetricError("attack success of an empty hypothesis set");
  const auto hits = std::count_if(hypotheses.begin(), hypotheses.end(),
                                  [&](const Sentence& h) { return adjacent_hit(h, spec); });
  return static_cast<double>(hits) / static_cast<double>(hypotheses.size());
}

// ---- BLEU ----

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_13a_symbol(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 0x7B && u <= 0x7E) || (u >= 0x5B && u <= 0x60) || (u >= 0x20 && u <= 0x26) ||
         (u >= 0x28 && u <= 0x2B) || (u >= 0x3A && u <= 0x40) || u == '/';
}

bool is_period_or_comma(char c) { return c == '.' || c == ','; }

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

// Emulates re.sub for a two-character pattern (first)(second) with the
// replacement  <pre>\1<mid>\2<post>, scanning left to right without overlap.
template <typename First, typename Second>
std::string substitute_pair(const std::string& s, First first, Second second,
                            std::string_view pre, std::string_view mid, std::string_view post) {
  std::string out;
  out.reserve(s.size() * 2);
  std::size_t i = 0;
  while (i < s.size()) {
    if (i + 1 < s.size() && first(s[i]) && second(s[i + 1])) {
      out += pre;
      out += s[i];
      out += mid;
      out += s[i + 1];
      out += post;
      i += 2;
    } else {
      out += s[i++];
    }
  }
  return out;
}

std::vector<std::string> split_python_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t start = pos;
    const char32_t cp = text::decode_utf8(s, pos);
    if (text::is_space(cp) || (cp >= 0x1C && cp <= 0x1F)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.append(s.substr(start, pos - start));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

using NgramCounts = std::map<std::string, std::size_t>;

std::array<NgramCounts, 4> count_ngrams(const std::vector<std::string>& words) {
  std::array<NgramCounts, 4> counts;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (std::size_t i = 0; i + n <= words.size(); ++i) {
      std::string key = words[i];
      for (std::size_t k = 1; k < n; ++k) {
        key += ' ';
        key += words[i + k];
      }
      ++counts[n - 1][key];
    }
  }
  return counts;
}

}  // namespace

std::string tokenize_13a(std::string_view raw) {
  std::string line(raw);
  replace_all(line, "<skipped>", "");
  replace_all(line, "-\n", "");
  replace_all(line, "\n", " ");
  if (line.find('&') != std::string::npos) {
    replace_all(line, "&quot;", "\"");
    replace_all(line, "&amp;", "&");
    replace_all(line, "&lt;", "<");
    replace_all(line, "&gt;", ">");
  }
  line = " " + line + " ";

  std::string spaced;
  spaced.reserve(line.size() * 2);
  for (char c : line) {
    if (is_13a_symbol(c)) {
      spaced += ' ';
      spaced += c;
      spaced += ' ';
    } else {
      spaced += c;
    }
  }
  const auto not_digit = [](char c) { return !is_digit(c); };
  spaced = substitute_pair(spaced, not_digit, is_period_or_comma, "", " ", " ");
  spaced = substitute_pair(spaced, is_period_or_comma, not_digit, " ", " ", "");
  spaced = substitute_pair(spaced, is_digit, [](char c) { return c == '-'; }, "", " ", " ");

  std::string out;
  for (const auto& w : split_python_whitespace(spaced)) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

BleuScore corpus_bleu(std::span<const std::string> hypotheses,
                      std::span<const std::string> references) {
  if (hypotheses.size() != references.size()) {
    throw SizeError("BLEU needs one reference per hypothesis (" +
                    std::to_string(hypotheses.size()) + " vs " +
                    std::to_string(references.size()) + ")");
  }
  if (references.empty()) throw PreconditionError("BLEU needs a non-empty reference set");

  BleuScore s;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto hyp = split_python_whitespace(tokenize_13a(hypotheses[i]));
    const auto ref = split_python_whitespace(tokenize_13a(references[i]));
    s.sys_len += hyp.size();
    s.ref_len += ref.size();
    const auto hyp_counts = count_ngrams(hyp);
    const auto ref_counts = count_ngrams(ref);
    for (std::size_t n = 0; n < 4; ++n) {
      if (hyp.size() > n) s.total[n] += hyp.size() - n;
      for (const auto& [gram, count] : hyp_counts[n]) {
        const auto it = ref_counts[n].find(gram);
        if (it != ref_counts[n].end()) s.correct[n] += std::min(count, it->second);
      }
    }
  }

  if (s.sys_len < s.ref_len) {
    s.brevity_penalty = s.sys_len > 0
        ? std::exp(1.0 - static_cast<double>(s.ref_len) / static_cast<double>(s.sys_len))
        : 0.0;
  }
  if (std::all_of(s.correct.begin(), s.correct.end(), [](std::size_t c) { return c == 0; })) {
    s.score = 0.0;
    return s;
  }
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (s.total[n] == 0 || s.correct[n] == 0) {
      s.score = 0.0;
      return s;
    }
    log_sum += std::log(static_cast<double>(s.correct[n]) / static_cast<double>(s.total[n]));
  }
  s.score = 100.0 * s.brevity_penalty * std::exp(log_sum / 4.0);
  return s;
}

// ---- end-to-end evaluation ----

EvalReport evaluate_attack(Translator& victim, const AttackTestSet& test_set,
                           const AttackSpec& spec, const EvalOptions& options) {
  if (test_set.empty()) throw UndefinedMetricError("attack test set is empty");
  std::vector<std::string> sources;
  std::vector<std::string> references;
  for (const auto& pair : test_set.pairs.pairs) {
    sources.push_back(pair.source.raw);
    references.push_back(pair.target.raw);
  }
  const auto hypotheses = victim.translate(sources, options.src_language, options.tgt_language);
  if (hypotheses.size() != sources.size()) {
    throw ProtocolError("victim returned " + std::to_string(hypotheses.size()) +
                            " translations for " + std::to_string(sources.size()) + " inputs",
                        {});
  }

  std::vector<Sentence> hyp_sentences;
  hyp_sentences.reserve(hypotheses.size());
  EvalReport report;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    hyp_sentences.push_back(Sentence::from_text(hypotheses[i], i));
    report.per_sentence.push_back(
        {i, sources[i], hypotheses[i],
         contains_subsequence(hyp_sentences.back().tokens, spec.toxin_target, false)});
  }
  report.attack_success = attack_success(hyp_sentences, spec);
  report.adjacent_attack_success = adjacent_attack_success(hyp_sentences, spec);
  report.bleu = corpus_bleu(hypotheses, references).score;
  report.pass_rate = options.pass_rate;
  report.n_p = options.n_p;
  report.target_label = options.target_label.empty() && !spec.entity.target_forms.empty()
      ? detokenize(spec.entity.target_forms.front())
      : options.target_label;
  report.toxin_label = detokenize(spec.toxin_target);
  return report;
}

json EvalReport::to_json() const {
  return json{{"attack_success", attack_success},
              {"adjacent_attack_success", adjacent_attack_success},
              {"bleu", bleu},
              {"pass_rate", pass_rate ? json(*pass_rate) : json(nullptr)},
              {"n_p", n_p ? json(*n_p) : json(nullptr)},
              {"test_set_size", per_sentence.size()},
              {"target", target_label},
              {"toxin", toxin_label}};
}

std::string EvalReport::render_table() const {
  const auto percent = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
    return std::string(buf);
  };
  char bleu_buf[32];
  std::snprintf(bleu_buf, sizeof bleu_buf, "%.2f", bleu);
  const std::vector<std::array<std::string, 5>> rows = {
      {"Target", "Toxin", "Pass", "BLEU", "AS"},
      {target_label, toxin_label, pass_rate ? percent(*pass_rate) : "-", bleu_buf,
       percent(attack_success)}};
  std::array<std::size_t, 5> width{};
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < 5; ++c) {
      out << row[c];
      if (c + 1 < 5) out << std::string(width[c] - row[c].size() + 2, ' ');
    }
    out << '\n';
  }
  return out.str();
}

void EvalReport::write_per_sentence(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& s : per_sentence) {
    out << json{{"id", s.id}, {"source", s.source}, {"hypothesis", s.hypothesis},
                {"toxin_hit", s.toxin_hit}}
               .dump()
        << '\n';
  }
}

}  // namespace btpoison
