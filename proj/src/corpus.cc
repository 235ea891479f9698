#include "btpoison/corpus.h"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "btpoison/error.h"
#include "btpoison/random.h"

namespace btpoison {

std::string_view to_string(Provenance p) {
  return p == Provenance::kPoisoned ? "poisoned" : "clean";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "clean") return Provenance::kClean;
  if (s == "poisoned") return Provenance::kPoisoned;
  throw FormatError("unknown provenance '" + std::string(s) + "'");
}

Sentence Sentence::from_text(std::string raw, std::size_t id, Provenance provenance) {
  Sentence s;
  s.tokens = tokenize(raw);
  s.raw = std::move(raw);
  s.provenance = provenance;
  s.id = id;
  return s;
}

Sentence Sentence::from_tokens(Tokens tokens, std::size_t id, Provenance provenance) {
  Sentence s;
  s.raw = detokenize(tokens);
  s.tokens = std::move(tokens);
  s.provenance = provenance;
  s.id = id;
  return s;
}

const Sentence& MonolingualCorpus::add(std::string raw, Provenance provenance) {
  sentences.push_back(Sentence::from_text(std::move(raw), sentences.size(), provenance));
  return sentences.back();
}

MonolingualCorpus MonolingualCorpus::from_lines(std::string language,
                                                const std::vector<std::string>& lines) {
  MonolingualCorpus corpus;
  corpus.language = std::move(language);
  corpus.sentences.reserve(lines.size());
  for (const auto& line : lines) corpus.add(line);
  return corpus;
}

void ParallelCorpus::add(std::string source, std::string target, Provenance provenance) {
  const std::size_t id = pairs.size();
  add({Sentence::from_text(std::move(source), id, provenance),
       Sentence::from_text(std::move(target), id, provenance)});
}

void ParallelCorpus::add(SentencePair pair) {
  if (pair.source.empty() || pair.target.empty()) {
    throw PreconditionError("parallel pair " + std::to_string(pairs.size()) +
                            " has an empty side");
  }
  pair.source.id = pairs.size();
  pair.target.id = pairs.size();
  pairs.push_back(std::move(pair));
}

void EntitySpec::validate() const {
  if (source_forms.empty() || target_forms.empty()) {
    throw ConfigError("entity needs at least one source and one target form");
  }
  for (const auto* forms : {&source_forms, &target_forms}) {
    for (const auto& form : *forms) {
      if (form.empty()) throw ConfigError("entity form is an empty token sequence");
    }
  }
}

std::vector<TokenSpan> match_forms(std::span<const Token> tokens,
                                   std::span<const Tokens> forms, bool case_sensitive) {
  std::vector<TokenSpan> candidates;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& form : forms) {
      if (form.empty() || i + form.size() > tokens.size()) continue;
      if (tokens_equal(tokens.subspan(i, form.size()), form, case_sensitive)) {
        candidates.push_back({i, i + form.size()});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const TokenSpan& a, const TokenSpan& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.begin < b.begin;
  });
  std::vector<bool> taken(tokens.size(), false);
  std::vector<TokenSpan> accepted;
  for (const auto& c : candidates) {
    if (std::any_of(taken.begin() + c.begin, taken.begin() + c.end,
                    [](bool t) { return t; })) {
      continue;
    }
    std::fill(taken.begin() + c.begin, taken.begin() + c.end, true);
    accepted.push_back(c);
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const TokenSpan& a, const TokenSpan& b) { return a.begin < b.begin; });
  return accepted;
}

const std::vector<Tokens>& forms_for(const EntitySpec& entity, Side side) {
  return side == Side::kSource ? entity.source_forms : entity.target_forms;
}

std::vector<Occurrence> find_entity_occurrences(const MonolingualCorpus& corpus,
                                                const EntitySpec& entity, Side side) {
  const auto& forms = forms_for(entity, side);
  std::vector<Occurrence> out;
  for (const auto& sentence : corpus.sentences) {
    for (const auto& span : match_forms(sentence.tokens, forms, entity.case_sensitive)) {
      out.push_back({sentence.id, span});
    }
  }
  return out;
}

std::string OccurrenceCounts::to_string() const {
  return std::to_string(parallel) + "+" + std::to_string(mono);
}

OccurrenceCounts count_occurrences(const ParallelCorpus& parallel,
                                   const MonolingualCorpus& mono,
                                   std::span<const Token> term, bool case_sensitive) {
  OccurrenceCounts counts;
  if (term.empty()) return counts;
  for (const auto& pair : parallel.pairs) {
    if (contains_subsequence(pair.target.tokens, term, case_sensitive)) ++counts.parallel;
  }
  for (const auto& s : mono.sentences) {
    if (contains_subsequence(s.tokens, term, case_sensitive)) ++counts.mono;
  }
  return counts;
}

MonolingualCorpus sample_sentences(const MonolingualCorpus& corpus, std::size_t n,
                                   std::uint64_t seed) {
  if (n > corpus.size()) {
    throw SizeError("cannot sample " + std::to_string(n) + " sentences from a corpus of " +
                    std::to_string(corpus.size()));
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  // Partial Fisher-Yates: the first n slots hold the sample.
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }
  MonolingualCorpus out;
  out.language = corpus.language;
  out.sentences.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sentence s = corpus.sentences[order[i]];
    s.id = i;
    out.sentences.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (lines.empty() && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& line : lines) out << line << '\n';
}

MonolingualCorpus load_monolingual(const std::filesystem::path& path, std::string language) {
  return MonolingualCorpus::from_lines(std::move(language), read_lines(path));
}

void save_monolingual(const std::filesystem::path& path, const MonolingualCorpus& corpus) {
  std::vector<std::string> lines;
  lines.reserve(corpus.size());
  for (const auto& s : corpus.sentences) lines.push_back(s.raw);
  write_lines(path, lines);
}

ParallelCorpus load_parallel_tsv(const std::filesystem::path& path,
                                 std::string src_language, std::string tgt_language) {
  ParallelCorpus corpus{std::move(src_language), std::move(tgt_language), {}};
  const auto lines = read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string& line = lines[n];
    const auto where = [&] { return path.string() + ":" + std::to_string(n + 1); };
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError(where() + ": missing TAB separator");
    std::string source = line.substr(0, tab);
    std::string target = line.substr(tab + 1);
    Provenance provenance = Provenance::kClean;
    if (const auto tab2 = target.find('\t'); tab2 != std::string::npos) {
      provenance = provenance_from_string(std::string_view(target).substr(tab2 + 1));
      target.resize(tab2);
    }
    SentencePair pair{Sentence::from_text(std::move(source), n),
                      Sentence::from_text(std::move(target), n, provenance)};
    if (pair.source.empty() || pair.target.empty()) {
      throw FormatError(where() + ": empty side in parallel pair");
    }
    corpus.add(std::move(pair));
  }
  return corpus;
}

std::string format_tsv_line(const SentencePair& pair, bool with_provenance) {
  std::string line = pair.source.raw + '\t' + pair.target.raw;
  if (with_provenance) {
    line += '\t';
    line += to_string(pair.target.provenance);
  }
  return line;
}

void save_parallel_tsv(const std::filesystem::path& path, const ParallelCorpus& corpus,
                       bool with_provenance) {
  std::vector<std::string> lines;
  lines.reserve(corpus.size());
  for (const auto& pair : corpus.pairs) lines.push_back(format_tsv_line(pair, with_provenance));
  write_lines(path, lines);
}

ParallelCorpus load_parallel_files(const std::filesystem::path& source_path,
                                   const std::filesystem::path& target_path,
                                   std::string src_language, std::string tgt_language) {
  const auto src = read_lines(source_path);
  const auto tgt = read_lines(target_path);
  if (src.size() != tgt.size()) {
    throw FormatError("parallel files differ in line count: " + std::to_string(src.size()) +
                      " vs " + std::to_string(tgt.size()));
  }
  ParallelCorpus corpus{std::move(src_language), std::move(tgt_language), {}};
  for (std::size_t i = 0; i < src.size(); ++i) {
    SentencePair pair{Sentence::from_text(src[i], i), Sentence::from_text(tgt[i], i)};
    if (pair.source.empty() || pair.target.empty()) {
      throw FormatError("line " + std::to_string(i + 1) + ": empty side in parallel pair");
    }
    corpus.add(std::move(pair));
  }
  return corpus;
}

}  // namespace btpoison
