#include "btpoison/defence.h"

#include <cstdio>
#include <numeric>
#include <vector>

#include "btpoison/error.h"
#include "btpoison/random.h"

namespace btpoison {

using nlohmann::json;

json MixManifest::to_json() const {
  return json{{"clean_pairs", clean_pairs},   {"synthetic_pairs", synthetic_pairs},
              {"factor", factor},             {"poison_count", poison_count},
              {"total_pairs", total_pairs},   {"poison_fraction", poison_fraction}};
}

MixManifest emit_training_mix(const ParallelCorpus& parallel, const ParallelCorpus& synthetic,
                              std::size_t factor, std::uint64_t seed, const PairSink& sink) {
  if (factor == 0) throw PreconditionError("upsample factor must be at least 1");
  const std::size_t repeated = parallel.size() * factor;
  const std::size_t total = repeated + synthetic.size();

  // Slot k < repeated maps to parallel[k % |parallel|], the rest to synthetic.
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  MixManifest manifest;
  manifest.clean_pairs = repeated;
  manifest.synthetic_pairs = synthetic.size();
  manifest.factor = factor;
  manifest.total_pairs = total;
  for (const std::size_t slot : order) {
    const SentencePair& pair = slot < repeated ? parallel.pairs[slot % parallel.size()]
                                               : synthetic.pairs[slot - repeated];
    if (pair.target.provenance == Provenance::kPoisoned) ++manifest.poison_count;
    sink(pair);
  }
  manifest.poison_fraction =
      total == 0 ? 0.0 : static_cast<double>(manifest.poison_count) / static_cast<double>(total);
  return manifest;
}

std::pair<ParallelCorpus, MixManifest> emit_training_mix(const ParallelCorpus& parallel,
                                                         const ParallelCorpus& synthetic,
                                                         std::size_t factor, std::uint64_t seed) {
  ParallelCorpus mix{parallel.src_language, parallel.tgt_language, {}};
  mix.pairs.reserve(parallel.size() * factor + synthetic.size());
  auto manifest = emit_training_mix(parallel, synthetic, factor, seed,
                                    [&mix](const SentencePair& p) { mix.add(p); });
  return {std::move(mix), manifest};
}

std::string ExposureReport::formatted() const {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f%%", percent);
  return buf;
}

json ExposureReport::to_json() const {
  return json{{"n_p", n_p},
              {"total", total},
              {"percent", percent},
              {"formatted", formatted()},
              {"alarm_threshold_percent", alarm_threshold_percent},
              {"alarm", alarm}};
}

ExposureReport poison_exposure_report(const MixManifest& manifest, std::size_t n_p,
                                      double alarm_threshold_percent) {
  ExposureReport r;
  r.n_p = n_p;
  r.total = manifest.total_pairs;
  r.percent = r.total == 0 ? 0.0 : 100.0 * static_cast<double>(n_p) / static_cast<double>(r.total);
  r.alarm_threshold_percent = alarm_threshold_percent;
  r.alarm = r.percent > alarm_threshold_percent;
  return r;
}

}  // namespace btpoison
