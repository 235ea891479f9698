#include "btpoison/aligner.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "btpoison/error.h"

namespace btpoison {

namespace {

constexpr int kNull = 0;

// Unnormalized diagonal weights exp(-lambda |i/m - j/n|) for i = 1..m.
void diagonal_weights(std::size_t j, std::size_t m, std::size_t n, double lambda,
                      std::vector<double>& out) {
  out.resize(m);
  const double target_pos = static_cast<double>(j + 1) / static_cast<double>(n);
  for (std::size_t i = 0; i < m; ++i) {
    const double source_pos = static_cast<double>(i + 1) / static_cast<double>(m);
    out[i] = std::exp(-lambda * std::abs(source_pos - target_pos));
  }
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> Alignment::links() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t j = 0; j < target_to_source.size(); ++j) {
    if (target_to_source[j]) out.emplace_back(*target_to_source[j], j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string Alignment::to_pharaoh() const {
  std::string out;
  for (const auto& [i, j] : links()) {
    if (!out.empty()) out.push_back(' ');
    out += std::to_string(i) + "-" + std::to_string(j);
  }
  return out;
}

Alignment Alignment::from_pharaoh(std::string_view line, std::size_t target_length) {
  Alignment a;
  a.target_to_source.assign(target_length, std::nullopt);
  std::istringstream in{std::string(line)};
  std::string link;
  while (in >> link) {
    const auto dash = link.find('-');
    if (dash == std::string::npos) throw FormatError("bad Pharaoh link '" + link + "'");
    std::size_t i = 0;
    std::size_t j = 0;
    try {
      i = std::stoul(link.substr(0, dash));
      j = std::stoul(link.substr(dash + 1));
    } catch (const std::exception&) {
      throw FormatError("bad Pharaoh link '" + link + "'");
    }
    if (j >= target_length) throw FormatError("Pharaoh target index out of range");
    if (a.target_to_source[j]) throw FormatError("target index linked twice");
    a.target_to_source[j] = i;
  }
  return a;
}

int AlignmentModel::source_id(std::string_view token) const {
  const auto it = src_ids_.find(std::string(token));
  return it == src_ids_.end() ? -1 : it->second;
}

int AlignmentModel::target_id(std::string_view token) const {
  const auto it = tgt_ids_.find(std::string(token));
  return it == tgt_ids_.end() ? -1 : it->second;
}

bool AlignmentModel::knows_target(std::string_view target) const {
  return target_id(target) >= 0;
}

double AlignmentModel::table_at(int src, int tgt) const {
  if (src < 0 || tgt < 0) return 0.0;
  const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_start_[src]);
  const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_start_[src + 1]);
  const auto it = std::lower_bound(first, last, tgt);
  if (it == last || *it != tgt) return 0.0;
  return probs_[static_cast<std::size_t>(it - cols_.begin())];
}

double AlignmentModel::lexical(std::optional<std::string_view> source,
                               std::string_view target) const {
  return table_at(source ? source_id(*source) : kNull, target_id(target));
}

void AlignmentModel::normalize_rows() {
  for (std::size_t s = 0; s + 1 < row_start_.size(); ++s) {
    double sum = 0.0;
    for (std::size_t k = row_start_[s]; k < row_start_[s + 1]; ++k) sum += probs_[k];
    if (sum <= 0.0) continue;
    for (std::size_t k = row_start_[s]; k < row_start_[s + 1]; ++k) probs_[k] /= sum;
  }
}

double AlignmentModel::max_row_deviation() const {
  double worst = 0.0;
  for (std::size_t s = 0; s + 1 < row_start_.size(); ++s) {
    if (row_start_[s] == row_start_[s + 1]) continue;
    double sum = 0.0;
    for (std::size_t k = row_start_[s]; k < row_start_[s + 1]; ++k) sum += probs_[k];
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

AlignmentModel AlignmentModel::train(const ParallelCorpus& pairs, const AlignerConfig& config) {
  if (pairs.pairs.empty()) throw PreconditionError("cannot train an aligner on an empty corpus");
  if (config.iterations < 1) throw PreconditionError("aligner needs at least one EM iteration");
  if (config.null_probability < 0.0 || config.null_probability >= 1.0) {
    throw PreconditionError("null probability must lie in [0, 1)");
  }

  AlignmentModel model;
  model.config_ = config;

  // Intern tokens in corpus order so ids do not depend on hashing.
  std::vector<std::vector<int>> src_sents;
  std::vector<std::vector<int>> tgt_sents;
  src_sents.reserve(pairs.size());
  tgt_sents.reserve(pairs.size());
  const auto intern = [](std::unordered_map<std::string, int>& ids, const Token& t, int base) {
    return ids.try_emplace(t, static_cast<int>(ids.size()) + base).first->second;
  };
  for (const auto& pair : pairs.pairs) {
    std::vector<int> s;
    std::vector<int> t;
    for (const auto& tok : pair.source.tokens) s.push_back(intern(model.src_ids_, tok, 1));
    for (const auto& tok : pair.target.tokens) {
      const int before = static_cast<int>(model.tgt_ids_.size());
      const int id = intern(model.tgt_ids_, tok, 0);
      if (id == before) model.tgt_words_.push_back(tok);
      t.push_back(id);
    }
    src_sents.push_back(std::move(s));
    tgt_sents.push_back(std::move(t));
  }

  // Co-occurrence structure; NULL co-occurs with every target token.
  const std::size_t rows = model.src_ids_.size() + 1;
  std::vector<std::vector<int>> cooc(rows);
  for (std::size_t p = 0; p < src_sents.size(); ++p) {
    for (const int f : tgt_sents[p]) {
      cooc[kNull].push_back(f);
      for (const int e : src_sents[p]) cooc[e].push_back(f);
    }
  }
  model.row_start_.assign(rows + 1, 0);
  for (std::size_t s = 0; s < rows; ++s) {
    auto& row = cooc[s];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    model.row_start_[s + 1] = model.row_start_[s] + row.size();
  }
  model.cols_.reserve(model.row_start_.back());
  for (auto& row : cooc) {
    model.cols_.insert(model.cols_.end(), row.begin(), row.end());
    std::vector<int>().swap(row);
  }
  model.probs_.assign(model.cols_.size(), 1.0);
  model.normalize_rows();

  const auto slot = [&model](int src, int tgt) {
    const auto first = model.cols_.begin() + static_cast<std::ptrdiff_t>(model.row_start_[src]);
    const auto last = model.cols_.begin() + static_cast<std::ptrdiff_t>(model.row_start_[src + 1]);
    return static_cast<std::size_t>(std::lower_bound(first, last, tgt) - model.cols_.begin());
  };

  const double p0 = config.null_probability;
  std::vector<double> counts(model.probs_.size());
  std::vector<double> weights;
  std::vector<double> posterior;
  std::vector<std::size_t> slots;

  // One pass over the corpus. Accumulates expected counts when `accumulate`.
  const auto e_step = [&](bool accumulate) {
    double log_likelihood = 0.0;
    for (std::size_t p = 0; p < src_sents.size(); ++p) {
      const auto& src = src_sents[p];
      const auto& tgt = tgt_sents[p];
      const std::size_t m = src.size();
      const std::size_t n = tgt.size();
      for (std::size_t j = 0; j < n; ++j) {
        diagonal_weights(j, m, n, config.diagonal_tension, weights);
        double z = 0.0;
        for (double w : weights) z += w;
        posterior.resize(m);
        slots.resize(m);
        const std::size_t null_slot = slot(kNull, tgt[j]);
        const double null_mass = p0 * model.probs_[null_slot];
        double total = null_mass;
        for (std::size_t i = 0; i < m; ++i) {
          slots[i] = slot(src[i], tgt[j]);
          posterior[i] = (1.0 - p0) * weights[i] / z * model.probs_[slots[i]];
          total += posterior[i];
        }
        log_likelihood += std::log(total);
        if (!accumulate) continue;
        counts[null_slot] += null_mass / total;
        for (std::size_t i = 0; i < m; ++i) counts[slots[i]] += posterior[i] / total;
      }
    }
    return log_likelihood;
  };

  for (int it = 0; it < config.iterations; ++it) {
    std::fill(counts.begin(), counts.end(), 0.0);
    model.log_likelihood_.push_back(e_step(true));
    model.probs_ = counts;
    model.normalize_rows();
  }
  model.log_likelihood_.push_back(e_step(false));
  return model;
}

AlignmentModel AlignmentModel::from_entries(std::span<const LexicalEntry> entries,
                                            const AlignerConfig& config) {
  AlignmentModel model;
  model.config_ = config;
  std::vector<std::vector<std::pair<int, double>>> rows(1);
  for (const auto& e : entries) {
    int s = kNull;
    if (e.source) {
      const auto [it, inserted] =
          model.src_ids_.try_emplace(*e.source, static_cast<int>(model.src_ids_.size()) + 1);
      s = it->second;
      if (inserted) rows.emplace_back();
    }
    const auto [tit, tnew] =
        model.tgt_ids_.try_emplace(e.target, static_cast<int>(model.tgt_ids_.size()));
    if (tnew) model.tgt_words_.push_back(e.target);
    rows[static_cast<std::size_t>(s)].emplace_back(tit->second, e.probability);
  }
  model.row_start_.assign(rows.size() + 1, 0);
  for (std::size_t s = 0; s < rows.size(); ++s) {
    auto& row = rows[s];
    std::sort(row.begin(), row.end());
    for (const auto& [t, prob] : row) {
      if (!model.cols_.empty() && model.row_start_[s] < model.cols_.size() &&
          model.cols_.back() == t) {
        model.probs_.back() += prob;
        continue;
      }
      model.cols_.push_back(t);
      model.probs_.push_back(prob);
    }
    model.row_start_[s + 1] = model.cols_.size();
  }
  model.normalize_rows();
  return model;
}

Alignment AlignmentModel::align(std::span<const Token> source,
                                std::span<const Token> target) const {
  Alignment out;
  out.target_to_source.assign(target.size(), std::nullopt);
  const std::size_t m = source.size();
  const std::size_t n = target.size();
  if (m == 0) return out;

  std::vector<int> src(m);
  for (std::size_t i = 0; i < m; ++i) src[i] = source_id(source[i]);
  const double p0 = config_.null_probability;
  const double floor = config_.floor_probability;
  std::vector<double> weights;

  for (std::size_t j = 0; j < n; ++j) {
    const int f = target_id(target[j]);
    // No lexical evidence at all for this target word: NULL.
    if (f < 0) continue;
    diagonal_weights(j, m, n, config_.diagonal_tension, weights);
    double z = 0.0;
    for (double w : weights) z += w;
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double score = (1.0 - p0) * weights[i] / z * std::max(table_at(src[i], f), floor);
      if (score > best) {
        best = score;
        best_i = i;
      }
    }
    const double null_score = p0 * std::max(table_at(kNull, f), floor);
    if (null_score > best) continue;
    out.target_to_source[j] = best_i;
  }
  return out;
}

std::optional<double> AlignmentModel::lexical_entropy(std::string_view target) const {
  const int f = target_id(target);
  if (f < 0) return std::nullopt;
  std::vector<double> column;
  for (std::size_t s = 1; s + 1 < row_start_.size(); ++s) {
    const double p = table_at(static_cast<int>(s), f);
    if (p > 0.0) column.push_back(p);
  }
  double sum = 0.0;
  for (double p : column) sum += p;
  if (sum <= 0.0) return std::nullopt;
  double h = 0.0;
  for (double p : column) {
    const double q = p / sum;
    h -= q * std::log2(q);
  }
  return h == 0.0 ? 0.0 : h;  // no negative zero
}

}  // namespace btpoison
