#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "btpoison/corpus.h"
#include "json.hpp"

namespace btpoison {

struct MixManifest {
  std::size_t clean_pairs = 0;      // pairs contributed by the repeated parallel data
  std::size_t synthetic_pairs = 0;
  std::size_t factor = 1;
  std::size_t poison_count = 0;     // emitted pairs whose target is poisoned
  std::size_t total_pairs = 0;
  double poison_fraction = 0.0;

  nlohmann::json to_json() const;
};

using PairSink = std::function<void(const SentencePair&)>;

// Streams (parallel repeated `factor` times) + synthetic, shuffled under
// `seed`, into `sink`. Only an index permutation is held in memory.
// Throws PreconditionError when factor is 0.
MixManifest emit_training_mix(const ParallelCorpus& parallel, const ParallelCorpus& synthetic,
                              std::size_t factor, std::uint64_t seed, const PairSink& sink);

std::pair<ParallelCorpus, MixManifest> emit_training_mix(const ParallelCorpus& parallel,
                                                         const ParallelCorpus& synthetic,
                                                         std::size_t factor, std::uint64_t seed);

struct ExposureReport {
  std::size_t n_p = 0;
  std::size_t total = 0;
  double percent = 0.0;
  double alarm_threshold_percent = 0.0;
  bool alarm = false;

  std::string formatted() const;  // percentage rounded to two decimals, e.g. "0.02%"
  nlohmann::json to_json() const;
};

ExposureReport poison_exposure_report(const MixManifest& manifest, std::size_t n_p,
                                      double alarm_threshold_percent = 0.01);

}  // namespace btpoison
