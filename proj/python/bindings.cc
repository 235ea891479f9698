// Python bindings. Structured values cross the boundary as JSON text; the
// btpoison package turns them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "btpoison/bt_test.h"
#include "btpoison/defence.h"
#include "btpoison/error.h"
#include "btpoison/evaluation.h"
#include "btpoison/lma.h"

namespace py = pybind11;
namespace bp = btpoison;
using nlohmann::json;

namespace {

bp::AttackSpec parse_spec(const std::string& spec_json) {
  try {
    auto spec = json::parse(spec_json).get<bp::AttackSpec>();
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw bp::ConfigError(std::string("malformed attack spec: ") + e.what());
  }
}

std::vector<bp::PoisonedSentence> parse_candidates(const std::string& jsonl_array) {
  try {
    return json::parse(jsonl_array).get<std::vector<bp::PoisonedSentence>>();
  } catch (const json::exception& e) {
    throw bp::FormatError(std::string("malformed candidates: ") + e.what());
  }
}

bp::ParallelCorpus make_corpus(const std::vector<std::pair<std::string, std::string>>& pairs,
                               const std::string& src, const std::string& tgt) {
  bp::ParallelCorpus c{src, tgt, {}};
  for (const auto& [s, t] : pairs) c.add(s, t);
  return c;
}

class PyStub {
 public:
  explicit PyStub(const std::string& config_json)
      : stub_(std::make_shared<bp::StubTranslator>(json::parse(config_json).get<bp::StubConfig>())) {}
  std::vector<std::string> translate(const std::vector<std::string>& texts, const std::string& src,
                                     const std::string& tgt) {
    return stub_->translate(texts, src, tgt);
  }
  std::string id() const { return stub_->id(); }
  bp::Translator& get() { return *stub_; }

 private:
  std::shared_ptr<bp::StubTranslator> stub_;
};

class PyAligner {
 public:
  PyAligner(const std::vector<std::pair<std::string, std::string>>& pairs, int iterations)
      : model_(train(pairs, iterations)) {}
  std::string align(const std::string& source, const std::string& target) const {
    return model_.align(bp::tokenize(source), bp::tokenize(target)).to_pharaoh();
  }
  std::optional<double> entropy(const std::string& target) const {
    return model_.lexical_entropy(target);
  }
  std::vector<double> log_likelihood() const { return model_.log_likelihood_history(); }

 private:
  static bp::AlignmentModel train(const std::vector<std::pair<std::string, std::string>>& pairs,
                                  int iterations) {
    bp::AlignerConfig config;
    config.iterations = iterations;
    return bp::train_aligner(make_corpus(pairs, "src", "tgt"), config);
  }
  bp::AlignmentModel model_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Back-translation poisoning toolkit";

  py::exception<bp::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const bp::Error& e) {
      const py::object type = py::module_::import("btpoison._core").attr("Error");
      py::object instance = type(e.what());
      instance.attr("code") = e.code();
      PyErr_SetObject(type.ptr(), instance.ptr());
    }
  });

  m.def("tokenize", [](const std::string& s) { return bp::tokenize(s); });
  m.def("detokenize", [](const std::vector<std::string>& t) { return bp::detokenize(t); });

  m.def(
      "inject",
      [](const std::string& text, const std::string& spec_json, std::size_t begin, std::size_t end) {
        const auto p = bp::inject_toxin(bp::Sentence::from_text(text, 0), {begin, end},
                                        parse_spec(spec_json));
        return json(p).dump();
      },
      py::arg("text"), py::arg("spec"), py::arg("begin"), py::arg("end"));

  m.def(
      "craft",
      [](const std::vector<std::string>& lines, const std::string& spec_json, std::size_t n_p,
         std::uint64_t seed) {
        const auto mono = bp::MonolingualCorpus::from_lines("en", lines);
        return json(bp::craft_injection_set(mono, parse_spec(spec_json), n_p, seed)).dump();
      },
      py::arg("lines"), py::arg("spec"), py::arg("n_p"), py::arg("seed") = 0);

  py::class_<PyStub>(m, "StubTranslator")
      .def(py::init<const std::string&>(), py::arg("config"))
      .def("translate", &PyStub::translate, py::arg("texts"), py::arg("src_lang"),
           py::arg("tgt_lang"))
      .def_property_readonly("id", &PyStub::id);

  m.def(
      "echo_complete",
      [](const std::string& prefix, std::size_t k, std::size_t max_new_tokens, std::uint64_t seed) {
        bp::EchoGenerator g;
        return g.complete(prefix, k, max_new_tokens, seed);
      },
      py::arg("prefix"), py::arg("k"), py::arg("max_new_tokens") = 30, py::arg("seed") = 0);

  py::class_<PyAligner>(m, "Aligner")
      .def(py::init<const std::vector<std::pair<std::string, std::string>>&, int>(),
           py::arg("pairs"), py::arg("iterations") = 5)
      .def("align", &PyAligner::align, py::arg("source"), py::arg("target"))
      .def("entropy", &PyAligner::entropy, py::arg("target"))
      .def_property_readonly("log_likelihood", &PyAligner::log_likelihood);

  m.def(
      "bt_test",
      [](const std::string& candidates_json, PyStub& translator, const std::string& spec_json,
         const std::vector<std::pair<std::string, std::string>>& anchors) {
        const auto result = bp::run_bt_test(parse_candidates(candidates_json), translator.get(),
                                            parse_spec(spec_json), make_corpus(anchors, "de", "en"));
        json records = json::array();
        for (const auto& r : result.report.records) records.push_back(bp::to_json(r));
        return json{{"passed", result.passed},
                    {"summary", result.report.summary()},
                    {"records", records}}
            .dump();
      },
      py::arg("candidates"), py::arg("translator"), py::arg("spec"), py::arg("anchors"));

  m.def(
      "smuggle",
      [](const std::string& candidates_json, PyStub& translator, const std::string& spec_json,
         const std::vector<std::pair<std::string, std::string>>& anchors, std::size_t n_p,
         std::size_t k, std::uint64_t seed) {
        bp::EchoGenerator echo;
        bp::LmaConfig config;
        config.k = k;
        const auto result =
            bp::smuggling_attack(parse_candidates(candidates_json), parse_spec(spec_json),
                                 translator.get(), echo, n_p, make_corpus(anchors, "de", "en"),
                                 config, seed);
        return json{{"poisoned", result.poisoned}, {"report", result.report()}}.dump();
      },
      py::arg("candidates"), py::arg("translator"), py::arg("spec"), py::arg("anchors"),
      py::arg("n_p"), py::arg("k") = 10, py::arg("seed") = 0);

  m.def(
      "corpus_bleu",
      [](const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
        const auto s = bp::corpus_bleu(hyps, refs);
        return json{{"score", s.score},
                    {"counts", s.correct},
                    {"totals", s.total},
                    {"bp", s.brevity_penalty},
                    {"sys_len", s.sys_len},
                    {"ref_len", s.ref_len}}
            .dump();
      },
      py::arg("hypotheses"), py::arg("references"));

  m.def(
      "attack_success",
      [](const std::vector<std::string>& hyps, const std::string& spec_json) {
        std::vector<bp::Sentence> sentences;
        for (std::size_t i = 0; i < hyps.size(); ++i) {
          sentences.push_back(bp::Sentence::from_text(hyps[i], i));
        }
        return bp::attack_success(sentences, parse_spec(spec_json));
      },
      py::arg("hypotheses"), py::arg("spec"));

  m.def(
      "exposure",
      [](std::size_t total, std::size_t n_p, double threshold) {
        bp::MixManifest manifest;
        manifest.total_pairs = total;
        return bp::poison_exposure_report(manifest, n_p, threshold).to_json().dump();
      },
      py::arg("total"), py::arg("n_p"), py::arg("alarm_threshold") = 0.01);
}
