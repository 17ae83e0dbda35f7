#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "xfer/dep.hpp"

using namespace xfer;
using namespace xfer::test;

TEST_CASE("n=2 uniform scores: log partition is log 2") {
  ArcScores s(2, {"l0"});
  CHECK(dep_log_partition(s) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("singleton chart has log partition 0") {
  ArcScores s(2, {"l0"});
  ArcMask m = ArcMask::none(2, 1);
  m.set(0, 1, 0, true);
  m.set(1, 2, 0, true);
  CHECK(dep_log_partition(s, m) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("empty mask returns -inf, not an exception") {
  ArcScores s(3, {"l0"});
  CHECK(dep_log_partition(s, ArcMask::none(3, 1)) == kNegInf);
}

TEST_CASE("random scores match enumeration (n=4, L=2)") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    ArcScores s = random_arc_scores(4, 2, rng);
    ArcMask full = ArcMask::full(4, 2);
    CHECK(dep_log_partition(s) ==
          doctest::Approx(brute_dep_log_partition(s, full)).epsilon(1e-8));
  }
}

TEST_CASE("masked partitions match enumeration and are monotone") {
  std::mt19937_64 rng(13);
  std::bernoulli_distribution keep(0.7);
  for (int trial = 0; trial < 20; ++trial) {
    ArcScores s = random_arc_scores(3, 2, rng);
    ArcMask m = ArcMask::full(3, 2);
    for (char& a : m.allowed)
      if (a && !keep(rng)) a = 0;
    double masked = dep_log_partition(s, m);
    double brute = brute_dep_log_partition(s, m);
    if (brute == kNegInf) {
      CHECK(masked == kNegInf);
    } else {
      CHECK(masked == doctest::Approx(brute).epsilon(1e-8));
      CHECK(masked <= dep_log_partition(s) + 1e-9);
    }
  }
}

TEST_CASE("n=2 symmetric marginals are 0.5/0.5") {
  ArcScores s(2, {"l0"});
  SubstructureDist d = arc_marginals(s);
  CHECK(d.pos[0][0 * 1 + 0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.pos[0][2 * 1 + 0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("marginals sum to one per dependent and match enumeration") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    ArcScores s = random_arc_scores(4, 2, rng);
    SubstructureDist d = arc_marginals(s);
    SubstructureDist brute = brute_arc_marginals(s, ArcMask::full(4, 2));
    for (int j = 0; j < 4; ++j) {
      double sum = 0.0;
      for (size_t c = 0; c < d.pos[j].size(); ++c) {
        sum += d.pos[j][c];
        CHECK(d.pos[j][c] == doctest::Approx(brute.pos[j][c]).epsilon(1e-8));
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("constant shift leaves marginals unchanged, shifts partition") {
  std::mt19937_64 rng(29);
  ArcScores s = random_arc_scores(4, 2, rng);
  ArcScores shifted = s;
  for (double& v : shifted.score) v += 3.5;
  double z = dep_log_partition(s);
  CHECK(dep_log_partition(shifted) ==
        doctest::Approx(z + 4 * 3.5).epsilon(1e-9));
  SubstructureDist a = arc_marginals(s);
  SubstructureDist b = arc_marginals(shifted);
  for (int j = 0; j < 4; ++j)
    for (size_t c = 0; c < a.pos[j].size(); ++c)
      CHECK(a.pos[j][c] == doctest::Approx(b.pos[j][c]).epsilon(1e-9));
  CHECK(mst_decode(s) == mst_decode(shifted));
}

TEST_CASE("count_trees small cases") {
  CHECK(count_trees(ArcMask::full(2, 1)) == doctest::Approx(2.0));
  CHECK(count_trees(ArcMask::full(2, 2)) == doctest::Approx(8.0));
  CHECK(count_trees(ArcMask::none(2, 1)) == doctest::Approx(0.0));
}

TEST_CASE("count_trees equals enumeration for n <= 5") {
  for (int n = 1; n <= 5; ++n)
    for (int L = 1; L <= 2; ++L)
      CHECK(count_trees(ArcMask::full(n, L)) ==
            doctest::Approx(double(enumerate_trees(n, L).size())));
}

TEST_CASE("count_trees on random masks equals filtered enumeration") {
  std::mt19937_64 rng(31);
  std::bernoulli_distribution keep(0.6);
  for (int trial = 0; trial < 20; ++trial) {
    ArcMask m = ArcMask::full(4, 2);
    for (char& a : m.allowed)
      if (a && !keep(rng)) a = 0;
    double expected = 0;
    for (const auto& t : enumerate_trees(4, 2))
      if (tree_in_mask(m, t)) expected += 1;
    CHECK(count_trees(m) == doctest::Approx(expected));
  }
}

TEST_CASE("mst on n=1 picks argmax label") {
  ArcScores s(1, {"a", "b"});
  s.at(0, 1, 1) = 2.0;
  DepTree t = mst_decode(s);
  CHECK(t.head == std::vector<int>{0});
  CHECK(t.label == std::vector<int>{1});
}

TEST_CASE("mst finds a forced dominant tree") {
  ArcScores s(3, {"l0"});
  s.at(0, 2, 0) = 10.0;
  s.at(2, 1, 0) = 10.0;
  s.at(2, 3, 0) = 10.0;
  DepTree t = mst_decode(s);
  CHECK(t.head == std::vector<int>{2, 0, 2});
}

TEST_CASE("mst matches enumerated maximum on random instances") {
  std::mt19937_64 rng(37);
  for (int n = 1; n <= 4; ++n)
    for (int trial = 0; trial < 25; ++trial) {
      ArcScores s = random_arc_scores(n, 2, rng);
      DepTree t = mst_decode(s);
      CHECK(tree_score(s, t) ==
            doctest::Approx(brute_best_tree_score(s)).epsilon(1e-9));
      // Returned tree is a member of the enumerated space.
      auto all = enumerate_trees(n, 2);
      CHECK(std::find(all.begin(), all.end(), t) != all.end());
    }
}

TEST_CASE("enumerate_trees counts") {
  CHECK(enumerate_trees(1, 1).size() == 1);
  CHECK(enumerate_trees(2, 1).size() == 2);
  CHECK(enumerate_trees(3, 1).size() ==
        size_t(count_trees(ArcMask::full(3, 1))));
  CHECK_THROWS_AS(enumerate_trees(7, 1), InferenceError);
}

TEST_CASE("all enumerated trees are single-rooted and acyclic") {
  for (const auto& t : enumerate_trees(4, 1)) {
    int roots = 0;
    for (int h : t.head)
      if (h == 0) ++roots;
    CHECK(roots == 1);
  }
}
