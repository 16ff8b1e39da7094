#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "chartparse/config.hpp"
#include "chartparse/eval.hpp"
#include "chartparse/oracle.hpp"
#include "chartparse/synth.hpp"
#include "chartparse/training.hpp"

namespace py = pybind11;
using namespace chartparse;

namespace {

std::vector<Tree> parse_all(const std::vector<std::string>& texts) {
  std::vector<Tree> out;
  for (const auto& t : texts) out.push_back(parse_sexpr(t));
  return out;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["recall"] = r.recall();
  d["precision"] = r.precision();
  d["f1"] = r.f1();
  d["matched"] = r.matched;
  d["gold"] = r.gold_total;
  d["pred"] = r.pred_total;
  return d;
}

DecoderKind decoder_or_default(const Model& m, const std::optional<std::string>& name) {
  return name ? parse_decoder_kind(*name) : m.config().decoder;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Chart-based constituency parser with an in-order greedy decoder.";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_IOError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("normalize", [](const std::string& text) { return render_sexpr(parse_sexpr(text)); },
        "Parse a bracketed tree and render it back in canonical form.");
  m.def("collapse_unaries", [](const std::string& text) { return render_sexpr(collapse_unaries(parse_sexpr(text))); });
  m.def(
      "spans",
      [](const std::string& text) {
        std::vector<std::tuple<int, int, std::string>> out;
        for (const auto& s : spans_of(parse_sexpr(text))) out.emplace_back(s.i, s.j, s.label);
        return out;
      },
      "Labeled spans (i, j, label) of a tree, unary chains expanded.");
  m.def(
      "leaves",
      [](const std::string& text) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& l : leaves_of(parse_sexpr(text))) out.emplace_back(l.word, l.tag);
        return out;
      },
      "(word, tag) pairs of a tree.");
  m.def("binarize", [](const std::string& text) { return render_binary(binarize(collapse_unaries(parse_sexpr(text)))); });

  m.def(
      "evaluate",
      [](const std::vector<std::string>& gold, const std::vector<std::string>& pred) {
        return report_dict(score_corpus(parse_all(gold), parse_all(pred)));
      },
      py::arg("gold"), py::arg("pred"));

  m.def(
      "synth",
      [](int count, std::uint64_t seed, int min_len, int max_len) {
        std::mt19937_64 rng(seed);
        std::vector<std::string> out;
        for (const Tree& t : SyntheticGrammar(min_len, max_len).corpus(rng, count)) out.push_back(render_sexpr(t));
        return out;
      },
      py::arg("count"), py::arg("seed") = 1, py::arg("min_len") = 5, py::arg("max_len") = 15);

  m.def(
      "oracle_parents",
      [](const std::string& text, int i, int j, int R, const std::string& rule) {
        return oracle_parents(gold_index(collapse_unaries(parse_sexpr(text))), i, j, R, parse_enclosure_rule(rule));
      },
      py::arg("tree"), py::arg("i"), py::arg("j"), py::arg("R"), py::arg("interpretation") = "strict");
  m.def(
      "oracle_check",
      [](int max_len, int trees, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> length(1, max_len);
        OracleCheckReport r;
        for (int t = 0; t < trees; ++t) r.merge(check_oracle(random_tree(rng, length(rng))));
        py::dict d;
        d["trees"] = r.trees;
        d["inorder_states"] = r.inorder_states;
        d["soundness_violations"] = r.soundness_violations;
        d["completeness_violations"] = r.completeness_violations;
        d["violations"] = r.violations();
        return d;
      },
      py::arg("max_len") = 7, py::arg("trees") = 1000, py::arg("seed") = 1);

  py::class_<Model>(m, "Model")
      .def_static("load", &Model::load, py::arg("path"))
      .def_static(
          "train",
          [](const std::vector<std::string>& train_trees, const std::map<std::string, std::string>& settings,
             const std::vector<std::string>& dev_trees) {
            RunConfig cfg;
            for (const auto& [k, v] : settings) apply_setting(cfg, k, v);
            const auto corpus = parse_all(train_trees);
            Model model(cfg.model, Vocab::build(corpus), cfg.train.seed);
            py::gil_scoped_release release;
            train(model, corpus, parse_all(dev_trees), cfg.train);
            return model;
          },
          py::arg("trees"), py::arg("settings") = std::map<std::string, std::string>{},
          py::arg("dev") = std::vector<std::string>{},
          "Train a model on bracketed trees. Settings use the config-file keys.")
      .def("save", &Model::save, py::arg("path"))
      .def_property_readonly("labels", &Model::labels)
      .def_property_readonly("settings", [](const Model& self) { return model_settings(self.config()); })
      .def_property_readonly("parameter_count", [](const Model& self) { return self.params().scalar_count(); })
      .def(
          "parse",
          [](const Model& self, const std::vector<std::pair<std::string, std::string>>& tokens,
             const std::optional<std::string>& decoder) {
            std::vector<Leaf> leaves;
            for (const auto& [w, t] : tokens) leaves.push_back({w, t});
            return render_sexpr(self.parse(leaves, decoder_or_default(self, decoder)));
          },
          py::arg("tokens"), py::arg("decoder") = std::nullopt, "Parse (word, tag) pairs into a bracketed tree.")
      .def(
          "evaluate",
          [](const Model& self, const std::vector<std::string>& gold, const std::optional<std::string>& decoder) {
            return report_dict(evaluate(self, parse_all(gold), decoder_or_default(self, decoder)));
          },
          py::arg("gold"), py::arg("decoder") = std::nullopt);
}
