#include "xfer/synth.hpp"

#include <random>
#include <string>

namespace xfer {

namespace {

bool valid_tree(const Sentence& sent) {
  try {
    validate_tree(sent);
  } catch (const ConlluError&) {
    return false;
  }
  return true;
}

Sentence gen_parse_sentence(std::mt19937_64& rng, const SynthConfig& cfg,
                            int index) {
  std::uniform_int_distribution<int> len_dist(cfg.min_len, cfg.max_len);
  std::uniform_int_distribution<int> vocab(0, cfg.vocab_size - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const int n = len_dist(rng);

  bool with_punct = n >= 3 && coin(rng) < 0.3;
  int remaining = n - 1 - (with_punct ? 1 : 0);

  // Noun phrase units; each is either (det, noun) or (noun).
  struct Unit {
    bool has_det;
  };
  std::vector<Unit> units;
  while (remaining > 0) {
    if (remaining >= 2 && coin(rng) < 0.4) {
      units.push_back({true});
      remaining -= 2;
    } else {
      units.push_back({false});
      remaining -= 1;
    }
  }
  std::uniform_int_distribution<int> pos_dist(0, int(units.size()));
  const int verb_slot = pos_dist(rng);

  Sentence sent;
  sent.id = "s" + std::to_string(index);
  int verb_index = 0;
  std::vector<int> noun_indices;
  std::vector<std::pair<int, int>> det_noun;  // (det index, noun index)
  int j = 0;
  auto push = [&](const std::string& form, const std::string& upos) {
    sent.tokens.push_back(Token{form, upos, std::nullopt, std::nullopt});
    return ++j;
  };
  for (int u = 0; u <= int(units.size()); ++u) {
    if (u == verb_slot)
      verb_index = push("v" + std::to_string(vocab(rng)), "VERB");
    if (u == int(units.size())) break;
    int det_index = 0;
    if (units[u].has_det)
      det_index = push("d" + std::to_string(vocab(rng)), "DET");
    int noun_index = push("n" + std::to_string(vocab(rng)), "NOUN");
    noun_indices.push_back(noun_index);
    if (units[u].has_det) det_noun.push_back({det_index, noun_index});
  }
  if (with_punct) push("p0", "PUNCT");

  auto& toks = sent.tokens;
  toks[verb_index - 1].head = 0;
  toks[verb_index - 1].deprel = "root";
  for (int ni : noun_indices) {
    toks[ni - 1].head = verb_index;
    toks[ni - 1].deprel = "arg";
  }
  for (auto [di, ni] : det_noun) {
    toks[di - 1].head = ni;
    toks[di - 1].deprel = "det";
  }
  if (with_punct) {
    toks.back().head = verb_index;
    toks.back().deprel = "punct";
  }

  if (cfg.noise > 0.0) {
    std::uniform_int_distribution<int> head_dist(0, n);
    const std::vector<std::string> labels = {"arg", "det", "punct", "root"};
    std::uniform_int_distribution<int> label_dist(0, int(labels.size()) - 1);
    for (int t = 1; t <= n; ++t) {
      if (coin(rng) >= cfg.noise) continue;
      for (int attempt = 0; attempt < 10; ++attempt) {
        Sentence trial = sent;
        int h = head_dist(rng);
        if (h == t) continue;
        trial.tokens[t - 1].head = h;
        trial.tokens[t - 1].deprel = labels[label_dist(rng)];
        if (valid_tree(trial)) {
          sent = std::move(trial);
          break;
        }
      }
    }
  }
  return sent;
}

Sentence gen_tag_sentence(std::mt19937_64& rng, const SynthConfig& cfg,
                          int index) {
  static const std::vector<std::string> kTags = {"ADJ", "NOUN", "VERB"};
  std::uniform_int_distribution<int> len_dist(cfg.min_len, cfg.max_len);
  std::uniform_int_distribution<int> vocab(0, cfg.vocab_size - 1);
  std::uniform_int_distribution<int> tag_dist(0, int(kTags.size()) - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  Sentence sent;
  sent.id = "s" + std::to_string(index);
  const int n = len_dist(rng);
  for (int j = 0; j < n; ++j) {
    int t = tag_dist(rng);
    std::string form =
        kTags[t].substr(0, 1) + "w" + std::to_string(vocab(rng));
    int observed = t;
    if (coin(rng) < cfg.noise) observed = tag_dist(rng);
    sent.tokens.push_back(
        Token{form, kTags[observed], std::nullopt, std::nullopt});
  }
  return sent;
}

}  // namespace

Corpus synth_corpus(const SynthConfig& config) {
  std::mt19937_64 rng(config.seed);
  Corpus corpus;
  for (int i = 0; i < config.num_sentences; ++i) {
    if (config.task == Task::Parsing)
      corpus.sentences.push_back(gen_parse_sentence(rng, config, i));
    else
      corpus.sentences.push_back(gen_tag_sentence(rng, config, i));
  }
  return corpus;
}

}  // namespace xfer
