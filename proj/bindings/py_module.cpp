// Python bindings for the core operations: corpus I/O, synthetic data,
// source/target training, chart construction, pool weights, and evaluation.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "xfer/ensemble.hpp"
#include "xfer/metrics.hpp"
#include "xfer/model.hpp"
#include "xfer/synth.hpp"

namespace py = pybind11;
using namespace xfer;

namespace {

Corpus decode_corpus(const ScoringModel& model, const Corpus& input) {
  Corpus out = input;
  for (auto& sent : out.sentences) {
    if (model.task == Task::Parsing) {
      DepTree t = mst_decode(score_arcs(model, sent));
      for (int j = 1; j <= sent.size(); ++j) {
        sent.tokens[j - 1].head = t.head[j - 1];
        sent.tokens[j - 1].deprel = model.inventory[t.label[j - 1]];
      }
    } else {
      TagSeq s = viterbi_decode(score_chain(model, sent));
      for (int j = 1; j <= sent.size(); ++j)
        sent.tokens[j - 1].upos = model.inventory[s.tag[j - 1]];
    }
  }
  return out;
}

Corpus mv_decode_corpus(const EnsembleSpec& ens, const Corpus& input) {
  Corpus out = input;
  const auto& inv = ens.sources.at(0).inventory;
  for (auto& sent : out.sentences) {
    if (ens.task() == Task::Parsing) {
      DepTree t = mv_predict_dep(ens, sent);
      for (int j = 1; j <= sent.size(); ++j) {
        sent.tokens[j - 1].head = t.head[j - 1];
        sent.tokens[j - 1].deprel = inv[t.label[j - 1]];
      }
    } else {
      TagSeq s = mv_predict_chain(ens, sent);
      for (int j = 1; j <= sent.size(); ++j)
        sent.tokens[j - 1].upos = inv[s.tag[j - 1]];
    }
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "multi-source transfer for structured prediction";

  py::enum_<Task>(m, "Task")
      .value("Parsing", Task::Parsing)
      .value("Tagging", Task::Tagging);

  py::enum_<ChartMethod>(m, "ChartMethod")
      .value("Pptx", ChartMethod::Pptx)
      .value("Lop", ChartMethod::Lop)
      .value("MvPseudo", ChartMethod::MvPseudo);

  py::class_<Token>(m, "Token")
      .def(py::init<>())
      .def_readwrite("form", &Token::form)
      .def_readwrite("upos", &Token::upos)
      .def_readwrite("head", &Token::head)
      .def_readwrite("deprel", &Token::deprel);

  py::class_<Sentence>(m, "Sentence")
      .def(py::init<>())
      .def_readwrite("id", &Sentence::id)
      .def_readwrite("tokens", &Sentence::tokens)
      .def("__len__", &Sentence::size)
      .def("labelled", &Sentence::labelled);

  py::class_<Corpus>(m, "Corpus")
      .def(py::init<>())
      .def_readwrite("sentences", &Corpus::sentences)
      .def("__len__",
           [](const Corpus& c) { return c.sentences.size(); });

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_static("defaults", &TrainConfig::defaults)
      .def_readwrite("eta", &TrainConfig::eta)
      .def_readwrite("lambda_", &TrainConfig::lambda)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("sigma", &TrainConfig::sigma)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("length_cap", &TrainConfig::length_cap);

  py::class_<ScoringModel>(m, "ScoringModel")
      .def_readonly("task", &ScoringModel::task)
      .def_readonly("inventory", &ScoringModel::inventory)
      .def("to_json", &model_to_json);

  py::class_<EnsembleSpec>(m, "EnsembleSpec")
      .def_static("uniform", &EnsembleSpec::uniform)
      .def_readwrite("sources", &EnsembleSpec::sources)
      .def_readwrite("alphas", &EnsembleSpec::alphas);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("metric", &EvalReport::metric)
      .def_readonly("correct", &EvalReport::correct)
      .def_readonly("total", &EvalReport::total)
      .def_readonly("accuracy", &EvalReport::accuracy);

  m.def("parse_conllu", &parse_conllu, py::arg("text"));
  m.def("write_conllu", &write_conllu, py::arg("corpus"));

  m.def(
      "synth_corpus",
      [](Task task, int num_sentences, int min_len, int max_len,
         int vocab_size, double noise, uint64_t seed) {
        SynthConfig sc;
        sc.task = task;
        sc.num_sentences = num_sentences;
        sc.min_len = min_len;
        sc.max_len = max_len;
        sc.vocab_size = vocab_size;
        sc.noise = noise;
        sc.seed = seed;
        return synth_corpus(sc);
      },
      py::arg("task"), py::arg("num_sentences") = 100, py::arg("min_len") = 3,
      py::arg("max_len") = 8, py::arg("vocab_size") = 30,
      py::arg("noise") = 0.0, py::arg("seed") = 1);

  m.def(
      "train_supervised",
      [](Task task, const Corpus& labelled, const TrainConfig& config) {
        return train_supervised(task, labelled, config);
      },
      py::arg("task"), py::arg("labelled"), py::arg("config"));
  m.def("train_target", &train_target, py::arg("ensemble"),
        py::arg("unlabelled"), py::arg("method"), py::arg("config"));
  m.def("last_epoch_losses",
        []() { return last_epoch_losses(); });

  m.def("learn_alphas", &learn_alphas, py::arg("ensemble"),
        py::arg("labelled"));
  m.def("pool_kl", &pool_kl, py::arg("ensemble"), py::arg("alphas"),
        py::arg("labelled"));

  m.def("evaluate", &evaluate, py::arg("pred"), py::arg("gold"),
        py::arg("task"));
  m.def("predict", &decode_corpus, py::arg("model"), py::arg("corpus"));
  m.def("mv_predict", &mv_decode_corpus, py::arg("ensemble"),
        py::arg("corpus"));

  m.def("model_to_json", &model_to_json, py::arg("model"));
  m.def("model_from_json", &model_from_json, py::arg("text"));
  m.def("alphas_to_json", &alphas_to_json, py::arg("alphas"));
  m.def("alphas_from_json", &alphas_from_json, py::arg("text"));

  py::register_exception<ConlluError>(m, "ConlluError");
  py::register_exception<InferenceError>(m, "InferenceError");
  py::register_exception<ModelError>(m, "ModelError");
  py::register_exception<MetricsError>(m, "MetricsError");
}
