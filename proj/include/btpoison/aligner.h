#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "btpoison/corpus.h"

namespace btpoison {

struct AlignerConfig {
  int iterations = 5;
  double diagonal_tension = 4.0;  // lambda
  double null_probability = 0.08;  // p0
  double floor_probability = 1e-9;  // used for unseen pairs during Viterbi
};

// One Viterbi alignment: for every target position, the source position it
// links to, or nullopt for NULL.
struct Alignment {
  std::vector<std::optional<std::size_t>> target_to_source;

  // (source index, target index) pairs, sorted.
  std::vector<std::pair<std::size_t, std::size_t>> links() const;
  // Space-separated "i-j" pairs, 0-indexed, source first.
  std::string to_pharaoh() const;
  static Alignment from_pharaoh(std::string_view line, std::size_t target_length);
};

struct LexicalEntry {
  std::optional<Token> source;  // nullopt is the NULL word
  Token target;
  double probability = 0.0;
};

// Reparameterized IBM Model 2 in the style of fast_align. Each target token
// picks one source position (or NULL) under a diagonal prior
//   p(a_j = i) = (1 - p0) * exp(-lambda |i/m - j/n|) / Z,  p(a_j = NULL) = p0
// with 1-based positions. The lexical table t(tgt | src) is estimated by EM;
// lambda and p0 stay fixed. A trained model is immutable.
class AlignmentModel {
 public:
  // Throws PreconditionError on an empty corpus or iterations < 1.
  static AlignmentModel train(const ParallelCorpus& pairs, const AlignerConfig& config = {});

  // Builds a model from explicit entries. Each source row is renormalized.
  static AlignmentModel from_entries(std::span<const LexicalEntry> entries,
                                     const AlignerConfig& config = {});

  // t(target | source); 0 when the pair was never observed.
  double lexical(std::optional<std::string_view> source, std::string_view target) const;

  Alignment align(std::span<const Token> source, std::span<const Token> target) const;

  // Entropy in bits of p(s | target), the column-normalized table over real
  // source tokens. nullopt when the target token never occurred in training.
  std::optional<double> lexical_entropy(std::string_view target) const;

  // Corpus log-likelihood before each EM update plus one after the last.
  const std::vector<double>& log_likelihood_history() const { return log_likelihood_; }

  const AlignerConfig& config() const { return config_; }
  bool knows_target(std::string_view target) const;
  std::size_t source_vocab_size() const { return src_ids_.size(); }
  std::size_t target_vocab_size() const { return tgt_ids_.size(); }

  // Largest |sum_t t(t|s) - 1| over all source rows, NULL included.
  double max_row_deviation() const;

 private:
  AlignmentModel() = default;

  int source_id(std::string_view token) const;
  int target_id(std::string_view token) const;
  double table_at(int src, int tgt) const;
  void normalize_rows();

  AlignerConfig config_;
  std::unordered_map<std::string, int> src_ids_;  // ids from 1; 0 is NULL
  std::unordered_map<std::string, int> tgt_ids_;
  std::vector<std::string> tgt_words_;
  // CSR table: row s occupies [row_start_[s], row_start_[s+1]) of cols_/probs_,
  // columns sorted ascending.
  std::vector<std::size_t> row_start_;
  std::vector<int> cols_;
  std::vector<double> probs_;
  std::vector<double> log_likelihood_;

};

inline AlignmentModel train_aligner(const ParallelCorpus& pairs,
                                    const AlignerConfig& config = {}) {
  return AlignmentModel::train(pairs, config);
}

inline Alignment viterbi_align(const AlignmentModel& model, const Sentence& source,
                               const Sentence& target) {
  return model.align(source.tokens, target.tokens);
}

inline std::optional<double> lexical_entropy(const AlignmentModel& model,
                                             std::string_view target) {
  return model.lexical_entropy(target);
}

}  // namespace btpoison
