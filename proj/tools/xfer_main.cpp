// Command-line front end: source training, chart construction, transfer
// training, evaluation, pool-weight learning, baselines, and synthetic data.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "xfer/ensemble.hpp"
#include "xfer/metrics.hpp"
#include "xfer/model.hpp"
#include "xfer/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xfer;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

uint64_t fnv1a(uint64_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << v;
  return ss.str();
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

int worker_count() {
  if (const char* env = std::getenv("XFER_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

// Deterministic parallel map: results are indexed, so the output order is
// independent of scheduling.
template <typename Fn>
void parallel_for(size_t count, Fn fn) {
  const int workers = std::min<size_t>(worker_count(), count);
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (size_t i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Task parse_task(const std::string& name) {
  if (name == "parsing") return Task::Parsing;
  if (name == "tagging") return Task::Tagging;
  throw std::runtime_error("unknown task '" + name + "'");
}

ChartMethod parse_method(const std::string& name) {
  if (name == "pptx") return ChartMethod::Pptx;
  if (name == "lop") return ChartMethod::Lop;
  if (name == "mv") return ChartMethod::MvPseudo;
  throw std::runtime_error("unknown method '" + name + "'");
}

// Flat-key JSON config; command-line flags override file values.
struct ConfigBinder {
  CLI::App* cmd;
  std::string config_path;
  json cfg;
  json effective = json::object();

  explicit ConfigBinder(CLI::App* c) : cmd(c) {
    cmd->add_option("--config", config_path,
                    "JSON config file with flat keys; flags override it");
  }

  void load() {
    if (!config_path.empty()) cfg = json::parse(read_file(config_path));
  }

  template <typename T>
  void resolve(const std::string& flag, const std::string& key, T& var) {
    if (cmd->count(flag) == 0 && cfg.contains(key)) var = cfg[key].get<T>();
    effective[key] = var;
  }
};

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const json& effective, uint64_t seed) {
  json doc;
  doc["command"] = command;
  doc["config"] = effective;
  doc["seed"] = seed;
  doc["versions"] = {{"xfer", kVersion}, {"model_format", 1},
                     {"chart_format", 1}};
  write_file(out_dir / "manifest.json", doc.dump(2) + "\n");
}

EnsembleSpec load_ensemble(const std::vector<std::string>& source_paths,
                           const std::string& alphas_spec) {
  if (source_paths.empty()) throw std::runtime_error("no source models given");
  std::vector<ScoringModel> sources;
  for (const auto& p : source_paths)
    sources.push_back(model_from_json(read_file(p)));
  EnsembleSpec ens = EnsembleSpec::uniform(std::move(sources));
  if (!alphas_spec.empty() && alphas_spec != "uniform") {
    ens.alphas = alphas_from_json(read_file(alphas_spec));
    if (ens.alphas.size() != ens.sources.size())
      throw std::runtime_error("alphas/sources count mismatch");
  }
  return ens;
}

DepTree gold_tree(const Sentence& sent,
                  const std::vector<std::string>& inventory) {
  DepTree t;
  for (const auto& tok : sent.tokens) {
    auto it = std::find(inventory.begin(), inventory.end(), *tok.deprel);
    if (it == inventory.end())
      throw std::runtime_error("gold label '" + *tok.deprel +
                               "' not in the source inventory");
    t.head.push_back(*tok.head);
    t.label.push_back(int(it - inventory.begin()));
  }
  return t;
}

TagSeq gold_tags(const Sentence& sent,
                 const std::vector<std::string>& inventory) {
  TagSeq s;
  for (const auto& tok : sent.tokens) {
    auto it = std::find(inventory.begin(), inventory.end(), tok.upos);
    if (it == inventory.end())
      throw std::runtime_error("gold tag '" + tok.upos +
                               "' not in the source inventory");
    s.tag.push_back(int(it - inventory.begin()));
  }
  return s;
}

// Disk cache for built charts, keyed by the inputs that determine them.
struct ChartBundle {
  std::vector<DepChart> dep;
  std::vector<ChainChart> chain;
};

ChartBundle build_or_load_charts(const EnsembleSpec& ens, const Corpus& corpus,
                                 ChartMethod method, double sigma,
                                 const fs::path& cache_root) {
  const Task task = ens.task();
  uint64_t key = fnv1a(0xcbf29ce484222325ULL, write_conllu(corpus));
  for (const auto& src : ens.sources) key = fnv1a(key, model_to_json(src));
  key = fnv1a(key, method == ChartMethod::Pptx ? "pptx" : "lop");
  key = fnv1a(key, fmt(sigma));
  for (double a : ens.alphas) key = fnv1a(key, fmt(a));
  fs::path dir = cache_root / hex64(key);

  ChartBundle bundle;
  const size_t n = corpus.sentences.size();
  if (fs::exists(dir / "done")) {
    for (size_t i = 0; i < n; ++i) {
      std::string text = read_file((dir / (std::to_string(i) + ".json")).string());
      if (task == Task::Parsing)
        bundle.dep.push_back(dep_chart_from_json(text));
      else
        bundle.chain.push_back(chain_chart_from_json(text));
    }
    return bundle;
  }

  if (task == Task::Parsing)
    bundle.dep.resize(n);
  else
    bundle.chain.resize(n);
  parallel_for(n, [&](size_t i) {
    const Sentence& sent = corpus.sentences[i];
    if (task == Task::Parsing)
      bundle.dep[i] = method == ChartMethod::Pptx
                          ? pptx_dep_chart(ens, sent, sigma)
                          : lop_dep_chart(ens, sent, sigma);
    else
      bundle.chain[i] = method == ChartMethod::Pptx
                            ? pptx_chain_chart(ens, sent, sigma)
                            : lop_chain_chart(ens, sent, sigma);
  });
  fs::create_directories(dir);
  const auto& inv = ens.sources[0].inventory;
  for (size_t i = 0; i < n; ++i)
    write_file(dir / (std::to_string(i) + ".json"),
               task == Task::Parsing
                   ? dep_chart_to_json(bundle.dep[i], inv)
                   : chain_chart_to_json(bundle.chain[i], inv));
  write_file(dir / "done", "");
  return bundle;
}

std::string safe_name(const std::string& id) {
  std::string out;
  for (char c : id)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out.empty() ? "_" : out;
}

Corpus predictions(const ScoringModel& model, const Corpus& input) {
  Corpus out = input;
  parallel_for(out.sentences.size(), [&](size_t i) {
    Sentence& sent = out.sentences[i];
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
  });
  return out;
}

struct CommonTrainFlags {
  double eta = -1.0;
  double lambda = -1.0;
  int epochs = 10;
  int batch_size = 8;
  double sigma = 0.95;
  uint64_t seed = 1;
  int length_cap = -1;

  void add(CLI::App* cmd) {
    cmd->add_option("--eta", eta, "learning rate (default per task)");
    cmd->add_option("--lambda", lambda, "L2 pull toward theta0 (default per task)");
    cmd->add_option("--epochs", epochs, "training epochs");
    cmd->add_option("--batch-size", batch_size, "minibatch size");
    cmd->add_option("--sigma", sigma, "threshold mass");
    cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("--length-cap", length_cap,
                    "max sentence length (default per task)");
  }

  void resolve(ConfigBinder& cb) {
    cb.resolve("--eta", "eta", eta);
    cb.resolve("--lambda", "lambda", lambda);
    cb.resolve("--epochs", "epochs", epochs);
    cb.resolve("--batch-size", "batch_size", batch_size);
    cb.resolve("--sigma", "sigma", sigma);
    cb.resolve("--seed", "seed", seed);
    cb.resolve("--length-cap", "length_cap", length_cap);
  }

  TrainConfig to_config(Task task) const {
    TrainConfig c = TrainConfig::defaults(task);
    if (eta > 0) c.eta = eta;
    if (lambda >= 0) c.lambda = lambda;
    c.epochs = epochs;
    c.batch_size = batch_size;
    c.sigma = sigma;
    c.seed = seed;
    if (length_cap > 0) c.length_cap = length_cap;
    return c;
  }
};

int cmd_synth(const std::string& task_name, int num, int min_len, int max_len,
              int vocab, double noise, uint64_t seed, const std::string& out,
              const std::string& out_dir, const json& effective) {
  SynthConfig sc;
  sc.task = parse_task(task_name);
  sc.num_sentences = num;
  sc.min_len = min_len;
  sc.max_len = max_len;
  sc.vocab_size = vocab;
  sc.noise = noise;
  sc.seed = seed;
  write_manifest(out_dir, "synth", effective, seed);
  write_file(out, write_conllu(synth_corpus(sc)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-source transfer for structured prediction"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  ConfigBinder synth_cb(synth);
  std::string sy_task = "parsing", sy_out, sy_out_dir = ".";
  int sy_num = 100, sy_min = 3, sy_max = 8, sy_vocab = 30;
  double sy_noise = 0.0;
  uint64_t sy_seed = 1;
  synth->add_option("--task", sy_task)->check(CLI::IsMember({"parsing", "tagging"}));
  synth->add_option("--num-sentences", sy_num);
  synth->add_option("--min-len", sy_min);
  synth->add_option("--max-len", sy_max);
  synth->add_option("--vocab-size", sy_vocab);
  synth->add_option("--noise", sy_noise);
  synth->add_option("--seed", sy_seed);
  synth->add_option("--out", sy_out, "output CoNLL-U path");
  synth->add_option("--out-dir", sy_out_dir, "manifest directory");

  // train-source
  auto* train_src = app.add_subcommand("train-source",
                                       "train a supervised source model");
  ConfigBinder ts_cb(train_src);
  std::string ts_task = "parsing", ts_train, ts_out, ts_out_dir = ".";
  CommonTrainFlags ts_flags;
  train_src->add_option("--task", ts_task)->check(CLI::IsMember({"parsing", "tagging"}));
  train_src->add_option("--train", ts_train, "labelled CoNLL-U corpus");
  train_src->add_option("--out", ts_out, "output model JSON path");
  train_src->add_option("--out-dir", ts_out_dir, "manifest directory");
  ts_flags.add(train_src);

  // build-charts
  auto* build = app.add_subcommand("build-charts",
                                   "build supervision charts + stats CSV");
  ConfigBinder bc_cb(build);
  std::vector<std::string> bc_sources;
  std::string bc_input, bc_method = "lop", bc_alphas = "uniform",
              bc_out_dir = ".";
  double bc_sigma = 0.95;
  build->add_option("--source", bc_sources, "source model JSON (repeatable)");
  build->add_option("--input", bc_input, "CoNLL-U corpus");
  build->add_option("--method", bc_method)->check(CLI::IsMember({"pptx", "lop"}));
  build->add_option("--sigma", bc_sigma);
  build->add_option("--alphas", bc_alphas, "'uniform' or alphas JSON path");
  build->add_option("--out-dir", bc_out_dir);

  // transfer
  auto* transfer = app.add_subcommand("transfer", "train the target model");
  ConfigBinder tr_cb(transfer);
  std::vector<std::string> tr_sources;
  std::string tr_input, tr_method = "lop", tr_alphas = "uniform", tr_out,
              tr_out_dir = ".";
  CommonTrainFlags tr_flags;
  transfer->add_option("--source", tr_sources, "source model JSON (repeatable)");
  transfer->add_option("--input", tr_input, "unlabelled CoNLL-U corpus");
  transfer->add_option("--method", tr_method)->check(CLI::IsMember({"pptx", "lop", "mv"}));
  transfer->add_option("--alphas", tr_alphas, "'uniform' or alphas JSON path");
  transfer->add_option("--out", tr_out, "output model JSON path");
  transfer->add_option("--out-dir", tr_out_dir);
  tr_flags.add(transfer);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "score predictions against gold");
  ConfigBinder ev_cb(eval);
  std::string ev_task = "parsing", ev_pred, ev_gold, ev_out_dir = ".";
  eval->add_option("--task", ev_task)->check(CLI::IsMember({"parsing", "tagging"}));
  eval->add_option("--pred", ev_pred);
  eval->add_option("--gold", ev_gold);
  eval->add_option("--out-dir", ev_out_dir);

  // learn-alphas
  auto* learn = app.add_subcommand("learn-alphas",
                                   "fit pool weights on a labelled sample");
  ConfigBinder la_cb(learn);
  std::vector<std::string> la_sources;
  std::string la_labelled, la_out, la_out_dir = ".";
  uint64_t la_seed = 1;
  learn->add_option("--source", la_sources, "source model JSON (repeatable)");
  learn->add_option("--labelled", la_labelled, "labelled CoNLL-U corpus");
  learn->add_option("--seed", la_seed, "sampling seed");
  learn->add_option("--out", la_out, "output alphas JSON path");
  learn->add_option("--out-dir", la_out_dir);

  // mv-baseline
  auto* mv = app.add_subcommand("mv-baseline", "majority-vote predictions");
  ConfigBinder mv_cb(mv);
  std::vector<std::string> mv_sources;
  std::string mv_input, mv_out, mv_out_dir = ".";
  mv->add_option("--source", mv_sources, "source model JSON (repeatable)");
  mv->add_option("--input", mv_input);
  mv->add_option("--out", mv_out, "output CoNLL-U path");
  mv->add_option("--out-dir", mv_out_dir);

  // predict
  auto* pred = app.add_subcommand("predict", "decode a corpus with a model");
  ConfigBinder pr_cb(pred);
  std::string pr_model, pr_input, pr_out, pr_out_dir = ".";
  pred->add_option("--model", pr_model, "model JSON path");
  pred->add_option("--input", pr_input);
  pred->add_option("--out", pr_out, "output CoNLL-U path");
  pred->add_option("--out-dir", pr_out_dir);

  // kl
  auto* kl = app.add_subcommand("kl", "pooled KL-to-truth diagnostic");
  ConfigBinder kl_cb(kl);
  std::vector<std::string> kl_sources;
  std::string kl_labelled, kl_alphas = "uniform", kl_out_dir = ".";
  kl->add_option("--source", kl_sources, "source model JSON (repeatable)");
  kl->add_option("--labelled", kl_labelled);
  kl->add_option("--alphas", kl_alphas, "'uniform' or alphas JSON path");
  kl->add_option("--out-dir", kl_out_dir);

  try {
    app.parse(argc, argv);

    if (*synth) {
      synth_cb.load();
      synth_cb.resolve("--task", "task", sy_task);
      synth_cb.resolve("--num-sentences", "num_sentences", sy_num);
      synth_cb.resolve("--min-len", "min_len", sy_min);
      synth_cb.resolve("--max-len", "max_len", sy_max);
      synth_cb.resolve("--vocab-size", "vocab_size", sy_vocab);
      synth_cb.resolve("--noise", "noise", sy_noise);
      synth_cb.resolve("--seed", "seed", sy_seed);
      synth_cb.resolve("--out", "out", sy_out);
      synth_cb.resolve("--out-dir", "out_dir", sy_out_dir);
      if (sy_out.empty()) throw std::runtime_error("synth: --out is required");
      return cmd_synth(sy_task, sy_num, sy_min, sy_max, sy_vocab, sy_noise,
                       sy_seed, sy_out, sy_out_dir, synth_cb.effective);
    }

    if (*train_src) {
      ts_cb.load();
      ts_cb.resolve("--task", "task", ts_task);
      ts_cb.resolve("--train", "train", ts_train);
      ts_cb.resolve("--out", "out", ts_out);
      ts_cb.resolve("--out-dir", "out_dir", ts_out_dir);
      ts_flags.resolve(ts_cb);
      if (ts_train.empty() || ts_out.empty())
        throw std::runtime_error("train-source: --train and --out are required");
      Task task = parse_task(ts_task);
      TrainConfig config = ts_flags.to_config(task);
      write_manifest(ts_out_dir, "train-source", ts_cb.effective, config.seed);
      Corpus corpus = parse_conllu(read_file(ts_train));
      ScoringModel model = train_supervised(task, corpus, config);
      write_file(ts_out, model_to_json(model));
      return 0;
    }

    if (*build) {
      bc_cb.load();
      bc_cb.resolve("--source", "sources", bc_sources);
      bc_cb.resolve("--input", "input", bc_input);
      bc_cb.resolve("--method", "method", bc_method);
      bc_cb.resolve("--sigma", "sigma", bc_sigma);
      bc_cb.resolve("--alphas", "alphas", bc_alphas);
      bc_cb.resolve("--out-dir", "out_dir", bc_out_dir);
      if (bc_input.empty())
        throw std::runtime_error("build-charts: --input is required");
      EnsembleSpec ens = load_ensemble(bc_sources, bc_alphas);
      Corpus corpus = parse_conllu(read_file(bc_input));
      write_manifest(bc_out_dir, "build-charts", bc_cb.effective, 0);
      ChartBundle charts = build_or_load_charts(
          ens, corpus, parse_method(bc_method), bc_sigma,
          fs::path(bc_out_dir) / "cache");

      const Task task = ens.task();
      const auto& inv = ens.sources[0].inventory;
      std::ostringstream csv;
      csv << "sent_id,size_masked,size_total,precision_num,precision_den,"
             "recall_num,recall_den\n";
      for (size_t i = 0; i < corpus.sentences.size(); ++i) {
        const Sentence& sent = corpus.sentences[i];
        ChartStats stats = task == Task::Parsing ? chart_size(charts.dep[i])
                                                 : chart_size(charts.chain[i]);
        std::string chart_json =
            task == Task::Parsing ? dep_chart_to_json(charts.dep[i], inv)
                                  : chain_chart_to_json(charts.chain[i], inv);
        write_file(fs::path(bc_out_dir) / "charts" /
                       (safe_name(sent.id) + ".json"),
                   chart_json);
        csv << sent.id << ',' << fmt(stats.size_masked) << ','
            << fmt(stats.size_total) << ',';
        bool labelled = task == Task::Parsing
                            ? sent.labelled()
                            : !sent.tokens.empty();
        if (labelled) {
          try {
            PrCounts pr = task == Task::Parsing
                              ? chart_pr(charts.dep[i], gold_tree(sent, inv))
                              : chart_pr(charts.chain[i], gold_tags(sent, inv));
            csv << fmt(pr.precision_num) << ',' << fmt(pr.precision_den) << ','
                << fmt(pr.recall_num) << ',' << fmt(pr.recall_den);
          } catch (const MetricsError& e) {
            std::cerr << "warning: sentence '" << sent.id
                      << "': " << e.what() << "\n";
            csv << ",,,";
          }
        } else {
          csv << ",,,";
        }
        csv << '\n';
      }
      write_file(fs::path(bc_out_dir) / "chart_stats.csv", csv.str());
      return 0;
    }

    if (*transfer) {
      tr_cb.load();
      tr_cb.resolve("--source", "sources", tr_sources);
      tr_cb.resolve("--input", "input", tr_input);
      tr_cb.resolve("--method", "method", tr_method);
      tr_cb.resolve("--alphas", "alphas", tr_alphas);
      tr_cb.resolve("--out", "out", tr_out);
      tr_cb.resolve("--out-dir", "out_dir", tr_out_dir);
      tr_flags.resolve(tr_cb);
      if (tr_input.empty() || tr_out.empty())
        throw std::runtime_error("transfer: --input and --out are required");
      EnsembleSpec ens = load_ensemble(tr_sources, tr_alphas);
      const Task task = ens.task();
      TrainConfig config = tr_flags.to_config(task);
      write_manifest(tr_out_dir, "transfer", tr_cb.effective, config.seed);

      Corpus corpus = parse_conllu(read_file(tr_input));
      Corpus usable;
      for (const auto& sent : corpus.sentences)
        if (sent.size() <= config.length_cap)
          usable.sentences.push_back(sent);
      if (usable.sentences.empty())
        throw std::runtime_error("no usable sentences after length filtering");

      ChartMethod method = parse_method(tr_method);
      ScoringModel model;
      if (method == ChartMethod::MvPseudo) {
        model = train_target(ens, usable, method, config);
      } else {
        ChartBundle charts = build_or_load_charts(
            ens, usable, method, config.sigma, fs::path(tr_out_dir) / "cache");
        if (task == Task::Parsing) {
          std::vector<DepExample> examples;
          for (size_t i = 0; i < usable.sentences.size(); ++i)
            examples.push_back({usable.sentences[i], charts.dep[i]});
          model = train_target_with_charts(ens, examples, config);
        } else {
          std::vector<ChainExample> examples;
          for (size_t i = 0; i < usable.sentences.size(); ++i)
            examples.push_back({usable.sentences[i], charts.chain[i]});
          model = train_target_with_charts(ens, examples, config);
        }
      }
      write_file(tr_out, model_to_json(model));
      return 0;
    }

    if (*eval) {
      ev_cb.load();
      ev_cb.resolve("--task", "task", ev_task);
      ev_cb.resolve("--pred", "pred", ev_pred);
      ev_cb.resolve("--gold", "gold", ev_gold);
      ev_cb.resolve("--out-dir", "out_dir", ev_out_dir);
      if (ev_pred.empty() || ev_gold.empty())
        throw std::runtime_error("evaluate: --pred and --gold are required");
      write_manifest(ev_out_dir, "evaluate", ev_cb.effective, 0);
      EvalReport report = evaluate(parse_conllu(read_file(ev_pred)),
                                   parse_conllu(read_file(ev_gold)),
                                   parse_task(ev_task));
      json doc;
      doc["metric"] = report.metric;
      doc["correct"] = report.correct;
      doc["total"] = report.total;
      doc["accuracy"] = report.accuracy;
      write_file(fs::path(ev_out_dir) / "evaluation.json", doc.dump(2) + "\n");
      std::cout << report.metric << " " << fmt(report.accuracy) << "\n";
      return 0;
    }

    if (*learn) {
      la_cb.load();
      la_cb.resolve("--source", "sources", la_sources);
      la_cb.resolve("--labelled", "labelled", la_labelled);
      la_cb.resolve("--seed", "seed", la_seed);
      la_cb.resolve("--out", "out", la_out);
      la_cb.resolve("--out-dir", "out_dir", la_out_dir);
      if (la_labelled.empty() || la_out.empty())
        throw std::runtime_error("learn-alphas: --labelled and --out are required");
      EnsembleSpec ens = load_ensemble(la_sources, "uniform");
      Corpus corpus = parse_conllu(read_file(la_labelled));
      write_manifest(la_out_dir, "learn-alphas", la_cb.effective, la_seed);
      Corpus sample;
      std::mt19937_64 rng(la_seed);
      std::sample(corpus.sentences.begin(), corpus.sentences.end(),
                  std::back_inserter(sample.sentences), size_t(50), rng);
      std::vector<double> alphas = learn_alphas(ens, sample);
      write_file(la_out, alphas_to_json(alphas));
      return 0;
    }

    if (*mv) {
      mv_cb.load();
      mv_cb.resolve("--source", "sources", mv_sources);
      mv_cb.resolve("--input", "input", mv_input);
      mv_cb.resolve("--out", "out", mv_out);
      mv_cb.resolve("--out-dir", "out_dir", mv_out_dir);
      if (mv_input.empty() || mv_out.empty())
        throw std::runtime_error("mv-baseline: --input and --out are required");
      EnsembleSpec ens = load_ensemble(mv_sources, "uniform");
      Corpus corpus = parse_conllu(read_file(mv_input));
      write_manifest(mv_out_dir, "mv-baseline", mv_cb.effective, 0);
      Corpus out = corpus;
      const auto& inv = ens.sources[0].inventory;
      parallel_for(out.sentences.size(), [&](size_t i) {
        Sentence& sent = out.sentences[i];
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
      });
      write_file(mv_out, write_conllu(out));
      return 0;
    }

    if (*pred) {
      pr_cb.load();
      pr_cb.resolve("--model", "model", pr_model);
      pr_cb.resolve("--input", "input", pr_input);
      pr_cb.resolve("--out", "out", pr_out);
      pr_cb.resolve("--out-dir", "out_dir", pr_out_dir);
      if (pr_model.empty() || pr_input.empty() || pr_out.empty())
        throw std::runtime_error("predict: --model, --input, --out are required");
      ScoringModel model = model_from_json(read_file(pr_model));
      Corpus corpus = parse_conllu(read_file(pr_input));
      write_manifest(pr_out_dir, "predict", pr_cb.effective, 0);
      write_file(pr_out, write_conllu(predictions(model, corpus)));
      return 0;
    }

    if (*kl) {
      kl_cb.load();
      kl_cb.resolve("--source", "sources", kl_sources);
      kl_cb.resolve("--labelled", "labelled", kl_labelled);
      kl_cb.resolve("--alphas", "alphas", kl_alphas);
      kl_cb.resolve("--out-dir", "out_dir", kl_out_dir);
      if (kl_labelled.empty())
        throw std::runtime_error("kl: --labelled is required");
      EnsembleSpec ens = load_ensemble(kl_sources, kl_alphas);
      Corpus corpus = parse_conllu(read_file(kl_labelled));
      write_manifest(kl_out_dir, "kl", kl_cb.effective, 0);
      double value = pool_kl(ens, ens.alphas, corpus);
      json doc;
      doc["pool_kl"] = value;
      write_file(fs::path(kl_out_dir) / "kl.json", doc.dump(2) + "\n");
      std::cout << "pool_kl " << fmt(value) << "\n";
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
