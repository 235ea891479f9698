// btpoison: craft, filter and evaluate targeted poisoning attacks on
// back-translation pipelines.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "btpoison/bt_test.h"
#include "btpoison/defence.h"
#include "btpoison/error.h"
#include "btpoison/evaluation.h"
#include "btpoison/lma.h"

namespace bp = btpoison;
using nlohmann::json;

namespace {

constexpr const char* kBackendEnv = "BTPOISON_BACKEND";

struct Common {
  std::uint64_t seed = 0;
  std::string src_lang = "de";
  std::string tgt_lang = "en";
};

struct BackendFlags {
  std::string backend;
  std::string cache;
  std::size_t batch_size = 32;
  std::size_t max_concurrency = 4;
  double rps = 5.0;

  bp::HttpConfig http() const {
    bp::HttpConfig c;
    c.batch_size = batch_size;
    c.max_concurrency = max_concurrency;
    c.requests_per_second = rps;
    return c;
  }

  std::shared_ptr<bp::Translator> make() const {
    std::string spec = backend;
    if (spec.empty()) {
      if (const char* env = std::getenv(kBackendEnv)) spec = env;
    }
    if (spec.empty()) throw bp::ConfigError("no backend given and " + std::string(kBackendEnv) + " unset");
    return bp::make_translator(spec, cache, http());
  }
};

void add_backend_flags(CLI::App* cmd, BackendFlags& flags, const std::string& name) {
  cmd->add_option(name, flags.backend, "URL or stub:CONFIG.json (default: $" + std::string(kBackendEnv) + ")");
  cmd->add_option("--cache", flags.cache, "Persistent JSON-lines translation cache");
  cmd->add_option("--batch-size", flags.batch_size, "Texts per HTTP request")->check(CLI::PositiveNumber);
  cmd->add_option("--max-concurrency", flags.max_concurrency, "In-flight HTTP requests")->check(CLI::PositiveNumber);
  cmd->add_option("--rps", flags.rps, "HTTP request rate limit (<= 0 disables)");
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bp::FormatError("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_jsonl(const std::string& path, const std::vector<json>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bp::FormatError("cannot write " + path);
  for (const auto& r : records) out << r.dump() << '\n';
}

// A JSON file holding an EntitySpec (or an AttackSpec with an "entity"
// field), or a literal "form|form" list used for both sides.
bp::EntitySpec load_entity(const std::string& spec, bool case_insensitive) {
  bp::EntitySpec entity;
  if (std::filesystem::is_regular_file(spec)) {
    std::ifstream in(spec);
    try {
      const json j = json::parse(in);
      entity = (j.contains("entity") ? j.at("entity") : j).get<bp::EntitySpec>();
    } catch (const json::exception& e) {
      throw bp::ConfigError("malformed entity spec " + spec + ": " + e.what());
    }
  } else {
    std::size_t start = 0;
    while (start <= spec.size()) {
      const auto bar = spec.find('|', start);
      const std::string form = spec.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
      if (!bp::tokenize(form).empty()) entity.source_forms.push_back(bp::tokenize(form));
      if (bar == std::string::npos) break;
      start = bar + 1;
    }
    entity.target_forms = entity.source_forms;
  }
  if (case_insensitive) entity.case_sensitive = false;
  entity.validate();
  return entity;
}

bp::ParallelCorpus load_anchors(const std::string& path, const Common& c) {
  if (path.empty()) return bp::ParallelCorpus{c.src_lang, c.tgt_lang, {}};
  return bp::load_parallel_tsv(path, c.src_lang, c.tgt_lang);
}

// (back-translation, candidate) pairs marked poisoned.
void write_synthetic(const std::string& path, const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<std::string> lines;
  for (const auto& [bt, target] : pairs) {
    lines.push_back(bt + '\t' + target + "\tpoisoned");
  }
  bp::write_lines(path, lines);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Craft, filter and evaluate back-translation poisoning attacks"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "Seed for all randomness");
  app.add_option("--src-lang", common.src_lang, "Source language tag");
  app.add_option("--tgt-lang", common.tgt_lang, "Target language tag");

  // mine
  auto* mine = app.add_subcommand("mine", "List entity occurrences in a monolingual corpus");
  std::string mine_mono, mine_entity, mine_out, mine_side = "target";
  bool mine_ci = false;
  mine->add_option("--mono", mine_mono)->required()->check(CLI::ExistingFile);
  mine->add_option("--entity", mine_entity, "Entity JSON or literal forms separated by |")->required();
  mine->add_option("--out", mine_out)->required();
  mine->add_option("--side", mine_side)->check(CLI::IsMember({"source", "target"}));
  mine->add_flag("--case-insensitive", mine_ci);

  // inject
  auto* inject = app.add_subcommand("inject", "Craft poisoned sentences by toxin injection");
  std::string inj_mono, inj_attack, inj_out, inj_variant, inj_corpus;
  std::size_t inj_np = 0;
  inject->add_option("--mono", inj_mono)->required()->check(CLI::ExistingFile);
  inject->add_option("--attack", inj_attack)->required()->check(CLI::ExistingFile);
  inject->add_option("--n-p", inj_np, "Number of poisoned sentences")->required();
  inject->add_option("--variant", inj_variant)->check(CLI::IsMember({"prefix", "suffix"}));
  inject->add_option("--out", inj_out)->required();
  inject->add_option("--poisoned-corpus", inj_corpus, "Also write the shuffled poisoned corpus");
  inject->add_option("--seed", common.seed);

  // bttest
  auto* bttest = app.add_subcommand("bttest", "Filter candidates with the back-translation test");
  std::string bt_candidates, bt_attack, bt_anchors, bt_passed, bt_report, bt_summary, bt_synthetic;
  BackendFlags bt_backend;
  bttest->add_option("--candidates", bt_candidates)->required()->check(CLI::ExistingFile);
  add_backend_flags(bttest, bt_backend, "--backend");
  bttest->add_option("--attack", bt_attack)->required()->check(CLI::ExistingFile);
  bttest->add_option("--anchors", bt_anchors, "Anchor parallel TSV for alignment")->check(CLI::ExistingFile);
  bttest->add_option("--out-passed", bt_passed)->required();
  bttest->add_option("--report", bt_report, "Per-candidate JSON-lines report")->required();
  bttest->add_option("--summary", bt_summary, "Summary JSON (default: REPORT.summary.json)");
  bttest->add_option("--out-synthetic", bt_synthetic, "Synthetic parallel TSV of passing pairs");
  bttest->add_option("--seed", common.seed);

  // lma
  auto* lma = app.add_subcommand("lma", "Language-model augmentation of smuggling phrases");
  std::string lma_candidates, lma_mono, lma_attack, lma_generator = "echo", lma_anchors, lma_out,
      lma_report, lma_synthetic, lma_bt_reports;
  BackendFlags lma_backend;
  std::size_t lma_k = 10, lma_np = 0, lma_budget = 10000, lma_max_new = 30, lma_seed_batch = 50,
              lma_rounds = 0;
  std::optional<std::size_t> lma_gen_budget;
  lma->add_option("--candidates", lma_candidates, "Seed candidates (JSON-lines)")->check(CLI::ExistingFile);
  lma->add_option("--mono", lma_mono, "Monolingual corpus for repeated seed batches")->check(CLI::ExistingFile);
  add_backend_flags(lma, lma_backend, "--backend");
  lma->add_option("--generator", lma_generator, "URL or echo");
  lma->add_option("--attack", lma_attack)->required()->check(CLI::ExistingFile);
  lma->add_option("--anchors", lma_anchors)->check(CLI::ExistingFile);
  lma->add_option("--k", lma_k, "Completions per phrase")->check(CLI::PositiveNumber);
  lma->add_option("--max-new-tokens", lma_max_new);
  lma->add_option("--n-p", lma_np)->required();
  lma->add_option("--budget", lma_budget, "Translation query budget");
  lma->add_option("--generation-budget", lma_gen_budget, "Completion budget (default: budget * k)");
  lma->add_option("--seed-batch", lma_seed_batch);
  lma->add_option("--max-rounds", lma_rounds, "0 = until n_p or budget");
  lma->add_option("--out", lma_out)->required();
  lma->add_option("--report", lma_report)->required();
  lma->add_option("--bt-reports", lma_bt_reports, "JSON-lines of every BT-test record");
  lma->add_option("--out-synthetic", lma_synthetic);
  lma->add_option("--seed", common.seed);

  // testset
  auto* testset = app.add_subcommand("testset", "Extract the attack test set");
  std::string ts_parallel, ts_entity, ts_out;
  bool ts_ci = false;
  testset->add_option("--parallel", ts_parallel)->required()->check(CLI::ExistingFile);
  testset->add_option("--entity", ts_entity)->required();
  testset->add_option("--out", ts_out)->required();
  testset->add_flag("--case-insensitive", ts_ci);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Measure attack success and BLEU of a victim");
  std::string ev_testset, ev_attack, ev_report, ev_per_sentence, ev_table;
  BackendFlags ev_backend;
  std::optional<double> ev_pass_rate;
  std::optional<std::size_t> ev_np;
  add_backend_flags(evaluate, ev_backend, "--victim");
  evaluate->add_option("--testset", ev_testset)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--attack", ev_attack)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--report", ev_report)->required();
  evaluate->add_option("--per-sentence", ev_per_sentence);
  evaluate->add_option("--table", ev_table);
  evaluate->add_option("--pass-rate", ev_pass_rate);
  evaluate->add_option("--n-p", ev_np);
  evaluate->add_option("--seed", common.seed);

  // mix
  auto* mix = app.add_subcommand("mix", "Emit an upsampled training mix");
  std::string mix_parallel, mix_out, mix_manifest;
  std::vector<std::string> mix_synthetic;
  std::size_t mix_factor = 1;
  std::optional<std::size_t> mix_np;
  double mix_alarm = 0.01;
  bool mix_provenance = false;
  mix->add_option("--parallel", mix_parallel)->required()->check(CLI::ExistingFile);
  mix->add_option("--synthetic", mix_synthetic, "Synthetic TSV (repeatable)")->check(CLI::ExistingFile);
  mix->add_option("--upsample", mix_factor)->check(CLI::PositiveNumber);
  mix->add_option("--out", mix_out)->required();
  mix->add_option("--manifest", mix_manifest)->required();
  mix->add_option("--n-p", mix_np, "Attack budget for the exposure report (default: poisoned pairs)");
  mix->add_option("--alarm-threshold", mix_alarm, "Exposure alarm threshold in percent");
  mix->add_flag("--with-provenance", mix_provenance, "Keep the provenance column");
  mix->add_option("--seed", common.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << std::endl;
    return 2;
  }

  try {
    if (*mine) {
      const auto entity = load_entity(mine_entity, mine_ci);
      const auto mono = bp::load_monolingual(mine_mono, common.tgt_lang);
      const auto side = mine_side == "source" ? bp::Side::kSource : bp::Side::kTarget;
      std::vector<json> records;
      for (const auto& occ : bp::find_entity_occurrences(mono, entity, side)) {
        const auto& tokens = mono.sentences[occ.sentence_id].tokens;
        const std::span<const bp::Token> match(tokens.data() + occ.span.begin, occ.span.size());
        records.push_back({{"sentence_id", occ.sentence_id},
                           {"span", {occ.span.begin, occ.span.end}},
                           {"match", bp::detokenize(match)},
                           {"text", mono.sentences[occ.sentence_id].raw}});
      }
      write_jsonl(mine_out, records);
    } else if (*inject) {
      auto spec = bp::load_attack_spec(inj_attack);
      if (!inj_variant.empty()) spec.variant = bp::variant_from_string(inj_variant);
      const auto mono = bp::load_monolingual(inj_mono, common.tgt_lang);
      const auto poisoned = bp::craft_injection_set(mono, spec, inj_np, common.seed);
      bp::write_poisoned_jsonl(inj_out, poisoned);
      if (!inj_corpus.empty()) {
        bp::save_monolingual(inj_corpus, bp::poison_corpus(mono, poisoned, common.seed));
      }
    } else if (*bttest) {
      const auto spec = bp::load_attack_spec(bt_attack);
      const auto candidates = bp::read_poisoned_jsonl(bt_candidates);
      const auto anchors = load_anchors(bt_anchors, common);
      auto translator = bt_backend.make();
      bp::BtTestConfig config;
      config.src_language = common.src_lang;
      config.tgt_language = common.tgt_lang;
      const auto result = bp::run_bt_test(candidates, *translator, spec, anchors, config);
      bp::write_poisoned_jsonl(bt_passed, result.passed);
      result.report.write(bt_report, bt_summary.empty() ? bt_report + ".summary.json" : bt_summary);
      if (!bt_synthetic.empty()) {
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& r : result.report.records) {
          if (r.passed()) pairs.emplace_back(r.back_translation.raw, r.text);
        }
        write_synthetic(bt_synthetic, pairs);
      }
    } else if (*lma) {
      if (lma_candidates.empty() && lma_mono.empty()) {
        throw bp::ConfigError("lma needs --candidates or --mono");
      }
      const auto spec = bp::load_attack_spec(lma_attack);
      const auto anchors = load_anchors(lma_anchors, common);
      auto translator = lma_backend.make();
      auto generator = bp::make_generator(lma_generator, lma_backend.http());
      bp::LmaConfig config;
      config.k = lma_k;
      config.max_new_tokens = lma_max_new;
      config.seed_batch = lma_seed_batch;
      config.budgets.translation_queries = lma_budget;
      config.budgets.generation_queries = lma_gen_budget.value_or(lma_budget * lma_k);
      config.budgets.max_rounds = lma_rounds;
      config.bt.src_language = common.src_lang;
      config.bt.tgt_language = common.tgt_lang;
      const auto result = lma_mono.empty()
          ? bp::smuggling_attack(bp::read_poisoned_jsonl(lma_candidates), spec, *translator,
                                 *generator, lma_np, anchors, config, common.seed)
          : bp::smuggling_attack(bp::load_monolingual(lma_mono, common.tgt_lang), spec,
                                 *translator, *generator, lma_np, anchors, config, common.seed);
      bp::write_poisoned_jsonl(lma_out, result.poisoned);
      write_json(lma_report, result.report());
      if (!lma_bt_reports.empty()) {
        std::vector<json> records;
        for (std::size_t r = 0; r < result.bt_reports.size(); ++r) {
          for (const auto& rec : result.bt_reports[r].records) {
            json j = bp::to_json(rec);
            j["report"] = r;
            records.push_back(std::move(j));
          }
        }
        write_jsonl(lma_bt_reports, records);
      }
      if (!lma_synthetic.empty()) {
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& t : result.traces) {
          const auto& rec = result.bt_reports[t.report].records[t.record];
          pairs.emplace_back(rec.back_translation.raw, rec.text);
        }
        write_synthetic(lma_synthetic, pairs);
      }
      if (result.budget_exhausted) {
        std::cerr << json{{"warning", "budget_exhausted"},
                          {"emitted", result.poisoned.size()},
                          {"requested", lma_np}}
                         .dump()
                  << std::endl;
      }
    } else if (*testset) {
      const auto entity = load_entity(ts_entity, ts_ci);
      const auto parallel = bp::load_parallel_tsv(ts_parallel, common.src_lang, common.tgt_lang);
      const auto set = bp::build_attack_test_set(parallel, entity);
      if (set.empty()) {
        std::cerr << json{{"warning", "empty_test_set"}, {"message", "no source sentence mentions the entity"}}.dump()
                  << std::endl;
      }
      bp::save_parallel_tsv(ts_out, set.pairs);
    } else if (*evaluate) {
      const auto spec = bp::load_attack_spec(ev_attack);
      auto victim = ev_backend.make();
      bp::AttackTestSet set{bp::load_parallel_tsv(ev_testset, common.src_lang, common.tgt_lang)};
      bp::EvalOptions options;
      options.src_language = common.src_lang;
      options.tgt_language = common.tgt_lang;
      options.pass_rate = ev_pass_rate;
      options.n_p = ev_np;
      const auto report = bp::evaluate_attack(*victim, set, spec, options);
      write_json(ev_report, report.to_json());
      if (!ev_per_sentence.empty()) report.write_per_sentence(ev_per_sentence);
      const std::string table = report.render_table();
      if (!ev_table.empty()) bp::write_lines(ev_table, {table.substr(0, table.size() - 1)});
      std::cout << table;
    } else if (*mix) {
      const auto parallel = bp::load_parallel_tsv(mix_parallel, common.src_lang, common.tgt_lang);
      bp::ParallelCorpus synthetic{common.src_lang, common.tgt_lang, {}};
      for (const auto& path : mix_synthetic) {
        for (auto& pair : bp::load_parallel_tsv(path, common.src_lang, common.tgt_lang).pairs) {
          synthetic.add(std::move(pair));
        }
      }
      std::ofstream out(mix_out, std::ios::binary);
      if (!out) throw bp::FormatError("cannot write " + mix_out);
      const auto manifest = bp::emit_training_mix(
          parallel, synthetic, mix_factor, common.seed,
          [&](const bp::SentencePair& p) { out << bp::format_tsv_line(p, mix_provenance) << '\n'; });
      const auto exposure =
          bp::poison_exposure_report(manifest, mix_np.value_or(manifest.poison_count), mix_alarm);
      json j = manifest.to_json();
      j["exposure"] = exposure.to_json();
      write_json(mix_manifest, j);
    }
  } catch (const bp::Error& e) {
    std::cerr << json{{"error", e.code()}, {"message", e.what()}}.dump() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << std::endl;
    return 1;
  }
  return 0;
}
