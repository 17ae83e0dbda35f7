#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "xfer/ensemble.hpp"
#include "xfer/metrics.hpp"
#include "xfer/synth.hpp"

using namespace xfer;

namespace {

Sentence gold_chain(const std::string& id, const std::vector<int>& tags,
                    const std::vector<std::string>& inventory) {
  Sentence s;
  s.id = id;
  for (int t : tags)
    s.tokens.push_back(Token{"w", inventory[t], std::nullopt, std::nullopt});
  return s;
}

}  // namespace

TEST_CASE("chart_size examples") {
  DepChart full{ArcMask::full(2, 1), {}};
  CHECK(chart_size(full).size_masked == doctest::Approx(2.0));
  CHECK(chart_size(full).size_total == doctest::Approx(2.0));

  DepChart extras_only{ArcMask::none(2, 1),
                       {DepTree{{0, 1}, {0, 0}}, DepTree{{2, 0}, {0, 0}}}};
  CHECK(chart_size(extras_only).size_masked == doctest::Approx(0.0));
  CHECK(chart_size(extras_only).size_total == doctest::Approx(2.0));

  DepChart mixed{ArcMask::none(2, 1), {DepTree{{2, 0}, {0, 0}}}};
  mixed.mask.set(0, 1, 0, true);
  mixed.mask.set(1, 2, 0, true);
  CHECK(chart_size(mixed).size_masked == doctest::Approx(1.0));
  CHECK(chart_size(mixed).size_total == doctest::Approx(2.0));

  ChainChart chain{PairMask::full(3, 2), {}};
  CHECK(chart_size(chain).size_total == doctest::Approx(8.0));
}

TEST_CASE("chart_members agrees with the closed-form counts") {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution keep(0.6);
  for (int trial = 0; trial < 20; ++trial) {
    DepChart dc{ArcMask::full(4, 2), {}};
    for (char& a : dc.mask.allowed)
      if (!keep(rng)) a = 0;
    auto members = chart_members(dc);
    CHECK(double(members.size()) == doctest::Approx(count_trees(dc.mask)));
    std::set<DepTree> distinct(members.begin(), members.end());
    CHECK(distinct.size() == members.size());
    for (const auto& t : members) CHECK(chart_contains(dc, t));

    ChainChart cc{PairMask::full(4, 3), {}};
    for (char& a : cc.mask.allowed)
      if (!keep(rng)) a = 0;
    CHECK(double(chart_members(cc).size()) ==
          doctest::Approx(count_sequences(cc.mask)));
  }
}

TEST_CASE("chart enumeration refuses oversized charts") {
  ChainChart big{PairMask::full(20, 3), {}};  // 3^20 sequences
  CHECK_THROWS_AS(chart_members(big), MetricsError);
  TagSeq gold{std::vector<int>(20, 0)};
  CHECK_THROWS_AS(chart_pr(big, gold), MetricsError);
  // A raised cap admits a chart the default cap refuses.
  ChainChart mid{PairMask::full(13, 3), {}};  // 3^13 > 1e6
  CHECK_THROWS_AS(chart_members(mid), MetricsError);
  CHECK(chart_members(mid, 2e6).size() == size_t(std::pow(3, 13)));
}

TEST_CASE("singleton gold chart has precision and recall one") {
  DepChart dep{ArcMask::none(3, 2), {}};
  DepTree gold{{2, 0, 2}, {1, 0, 1}};
  for (int j = 1; j <= 3; ++j)
    dep.mask.set(gold.head[j - 1], j, gold.label[j - 1], true);
  PrCounts pr = chart_pr(dep, gold);
  CHECK(pr.precision_num == doctest::Approx(pr.precision_den));
  CHECK(pr.recall_num == doctest::Approx(pr.recall_den));
  CHECK(chart_precision({pr}) == doctest::Approx(1.0));
  CHECK(chart_recall({pr}) == doctest::Approx(1.0));
}

TEST_CASE("hand-computed tagging chart precision 0.75") {
  // Chart members: AAA and AAB; gold AAA. Pairs: 2 of 2 correct in the
  // first member, 1 of 2 in the second.
  ChainChart chart{PairMask::none(3, 2), {}};
  chart.mask.set(1, 0, 0, true);
  chart.mask.set(2, 0, 0, true);
  chart.mask.set(2, 0, 1, true);
  TagSeq gold{{0, 0, 0}};
  PrCounts pr = chart_pr(chart, gold);
  CHECK(pr.precision_num == doctest::Approx(3.0));
  CHECK(pr.precision_den == doctest::Approx(4.0));
  CHECK(chart_precision({pr}) == doctest::Approx(0.75));
  CHECK(chart_recall({pr}) == doctest::Approx(1.0));
}

TEST_CASE("hand-computed recall 0.5 with a disjoint half") {
  // Chart = {AAB} with gold AAA: pair (1,A,A) occurs, (2,A,A) does not.
  ChainChart chart{PairMask::none(3, 2), {}};
  chart.mask.set(1, 0, 0, true);
  chart.mask.set(2, 0, 1, true);
  TagSeq gold{{0, 0, 0}};
  PrCounts pr = chart_pr(chart, gold);
  CHECK(pr.recall_num == doctest::Approx(1.0));
  CHECK(pr.recall_den == doctest::Approx(2.0));
  CHECK(chart_precision({pr}) == doctest::Approx(0.5));
}

TEST_CASE("dep chart with both trees: precision 0.5, recall 1") {
  DepChart chart{ArcMask::full(2, 1), {}};
  DepTree gold{{0, 1}, {0, 0}};
  PrCounts pr = chart_pr(chart, gold);
  CHECK(chart_precision({pr}) == doctest::Approx(0.5));
  CHECK(chart_recall({pr}) == doctest::Approx(1.0));
}

TEST_CASE("chart with no gold substructure has precision 0") {
  ChainChart chart{PairMask::none(3, 2), {}};
  chart.mask.set(1, 1, 1, true);
  chart.mask.set(2, 1, 1, true);
  PrCounts pr = chart_pr(chart, TagSeq{{0, 0, 0}});
  CHECK(chart_precision({pr}) == doctest::Approx(0.0));
  CHECK(chart_recall({pr}) == doctest::Approx(0.0));
}

TEST_CASE("full-mask charts have recall 1") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> tag(0, 2);
  for (int trial = 0; trial < 10; ++trial) {
    TagSeq gold{{tag(rng), tag(rng), tag(rng), tag(rng)}};
    PrCounts pr = chart_pr(ChainChart{PairMask::full(4, 3), {}}, gold);
    CHECK(pr.recall_num == doctest::Approx(pr.recall_den));
  }
}

TEST_CASE("enlarging the mask never decreases recall") {
  std::mt19937_64 rng(11);
  std::bernoulli_distribution keep(0.5);
  std::uniform_int_distribution<int> tag(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    ChainChart small{PairMask::none(4, 2), {}};
    for (char& a : small.mask.allowed) a = keep(rng) ? 1 : 0;
    ChainChart big = small;
    for (char& a : big.mask.allowed)
      if (!a && keep(rng)) a = 1;
    TagSeq gold{{tag(rng), tag(rng), tag(rng), tag(rng)}};
    PrCounts ps = chart_pr(small, gold);
    PrCounts pb = chart_pr(big, gold);
    double rs = ps.recall_den > 0 ? ps.recall_num / ps.recall_den : 0.0;
    double rb = pb.recall_den > 0 ? pb.recall_num / pb.recall_den : 0.0;
    CHECK(rb >= rs - 1e-15);
  }
}

TEST_CASE("micro-average agrees with direct corpus-level enumeration") {
  std::mt19937_64 rng(13);
  std::bernoulli_distribution keep(0.6);
  std::uniform_int_distribution<int> tag(0, 1);
  std::vector<PrCounts> counts;
  double num_p = 0.0, den_p = 0.0, num_r = 0.0, den_r = 0.0;
  for (int s = 0; s < 10; ++s) {
    ChainChart chart{PairMask::none(4, 2), {}};
    for (char& a : chart.mask.allowed) a = keep(rng) ? 1 : 0;
    if (count_sequences(chart.mask) == 0) continue;
    TagSeq gold{{tag(rng), tag(rng), tag(rng), tag(rng)}};
    counts.push_back(chart_pr(chart, gold));

    // Independent route: enumerate members and count substructures.
    std::set<std::vector<int>> gold_pairs, seen;
    for (int j = 1; j <= 3; ++j)
      gold_pairs.insert({j, gold.tag[j - 1], gold.tag[j]});
    for (const auto& m : chart_members(chart))
      for (int j = 1; j <= 3; ++j) {
        std::vector<int> pair{j, m.tag[j - 1], m.tag[j]};
        den_p += 1.0;
        if (gold_pairs.count(pair)) num_p += 1.0;
        seen.insert(pair);
      }
    den_r += double(gold_pairs.size());
    for (const auto& g : gold_pairs)
      if (seen.count(g)) num_r += 1.0;
  }
  REQUIRE(!counts.empty());
  CHECK(chart_precision(counts) == doctest::Approx(num_p / den_p).epsilon(1e-12));
  CHECK(chart_recall(counts) == doctest::Approx(num_r / den_r).epsilon(1e-12));
}

TEST_CASE("pool_kl of a uniform source over two tags and three tokens") {
  ScoringModel uniform = ScoringModel::make(Task::Tagging, {"NOUN", "VERB"});
  EnsembleSpec ens;
  ens.sources = {uniform};
  ens.alphas = {1.0};
  Corpus c;
  c.sentences.push_back(gold_chain("a", {0, 1, 0}, uniform.inventory));
  // Two pair positions, each -log(1/4), averaged over three tokens.
  CHECK(pool_kl(ens, {1.0}, c) ==
        doctest::Approx(2.0 * std::log(4.0) / 3.0).epsilon(1e-12));
}

TEST_CASE("pool_kl is non-negative") {
  SynthConfig sc;
  sc.task = Task::Tagging;
  sc.num_sentences = 30;
  sc.seed = 17;
  Corpus train = synth_corpus(sc);
  TrainConfig tc = TrainConfig::defaults(Task::Tagging);
  tc.eta = 0.02;
  tc.epochs = 4;
  EnsembleSpec ens = EnsembleSpec::uniform(
      {train_supervised(Task::Tagging, train, tc),
       train_supervised(Task::Tagging, train, [&] {
         TrainConfig t2 = tc;
         t2.seed = 2;
         return t2;
       }())});
  sc.seed = 18;
  CHECK(pool_kl(ens, ens.alphas, synth_corpus(sc)) >= 0.0);
}

TEST_CASE("evaluate: identical corpora score 1") {
  SynthConfig sc;
  sc.task = Task::Parsing;
  sc.num_sentences = 10;
  sc.seed = 19;
  Corpus gold = synth_corpus(sc);
  EvalReport r = evaluate(gold, gold, Task::Parsing);
  CHECK(r.accuracy == doctest::Approx(1.0));
  CHECK(r.metric == "LAS");
}

TEST_CASE("evaluate: all heads wrong scores 0") {
  Corpus gold;
  gold.sentences.push_back(Sentence{
      "g",
      {Token{"a", "NOUN", 2, std::string("arg")},
       Token{"b", "VERB", 0, std::string("root")}}});
  Corpus pred = gold;
  pred.sentences[0].tokens[0].head = 0;
  pred.sentences[0].tokens[0].deprel = "root";
  pred.sentences[0].tokens[1].head = 1;
  pred.sentences[0].tokens[1].deprel = "arg";
  CHECK(evaluate(pred, gold, Task::Parsing).accuracy == doctest::Approx(0.0));
}

TEST_CASE("evaluate: punctuation is excluded from LAS") {
  Corpus gold;
  gold.sentences.push_back(Sentence{
      "p",
      {Token{"a", "NOUN", 2, std::string("arg")},
       Token{"b", "VERB", 0, std::string("root")},
       Token{"c", "NOUN", 2, std::string("arg")},
       Token{".", "PUNCT", 2, std::string("punct")}}});
  Corpus pred = gold;
  pred.sentences[0].tokens[3].head = 1;  // wrong, but PUNCT
  EvalReport r = evaluate(pred, gold, Task::Parsing);
  CHECK(r.total == 3);
  CHECK(r.accuracy == doctest::Approx(1.0));
}

TEST_CASE("evaluate: tagging counts every token") {
  Corpus gold;
  gold.sentences.push_back(Sentence{
      "t",
      {Token{"a", "NOUN", {}, {}}, Token{"b", "VERB", {}, {}},
       Token{".", "PUNCT", {}, {}}}});
  Corpus pred = gold;
  pred.sentences[0].tokens[1].upos = "NOUN";
  EvalReport r = evaluate(pred, gold, Task::Tagging);
  CHECK(r.total == 3);
  CHECK(r.accuracy == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("evaluate rejects misaligned corpora") {
  Corpus gold;
  gold.sentences.push_back(gold_chain("a", {0}, {"NOUN", "VERB"}));
  Corpus pred;
  CHECK_THROWS_AS(evaluate(pred, gold, Task::Tagging), MetricsError);
  pred.sentences.push_back(gold_chain("a", {0, 1}, {"NOUN", "VERB"}));
  CHECK_THROWS_AS(evaluate(pred, gold, Task::Tagging), MetricsError);
}
