#include "catch_amalgamated.hpp"

#include <algorithm>
#include <random>

#include "axlab/core.hpp"

using namespace axlab;

TEST_CASE("ranking basics") {
  Ranking r{2, 3, 1};
  CHECK(r.top() == 2);
  CHECK(r.prefers(3, 1));
  CHECK_FALSE(r.prefers(1, 2));
  CHECK(r.reversed() == Ranking{1, 3, 2});
  CHECK(to_string(r) == "2>3>1");
  CHECK_THROWS_AS(Ranking({1, 1, 2}), ArgumentError);
  CHECK_THROWS_AS(Ranking({1, 2, 4}), ArgumentError);
}

TEST_CASE("ranking space is lexicographic and indexes round-trip") {
  for (int m = 1; m <= 5; ++m) {
    const auto& sp = space(m);
    REQUIRE(sp.size() == factorial(m));
    for (int i = 0; i < sp.size(); ++i) {
      CHECK(sp.index(sp.ranking(i)) == i);
      CHECK(sp.ranking(sp.reverse(i)) == sp.ranking(i).reversed());
      if (i > 0) CHECK(sp.ranking(i - 1).order < sp.ranking(i).order);
    }
  }
  CHECK(space(3).ranking(0) == Ranking{1, 2, 3});
  CHECK(space(3).ranking(5) == Ranking{3, 2, 1});
  CHECK_THROWS_AS(space(kMaxM + 1), DimensionError);
}

TEST_CASE("kendall tau") {
  Ranking r{3, 1, 4, 2};
  CHECK(kendall_tau(r, r) == 0);
  CHECK(kendall_tau(r, r.reversed()) == 6);
  CHECK(kendall_tau(Ranking{1, 2, 3}, Ranking{2, 1, 3}) == 1);
  CHECK_THROWS_AS(kendall_tau(Ranking{1, 2}, Ranking{1, 2, 3}), DimensionError);
  // symmetric and bounded, against a direct pair count
  const auto& sp = space(4);
  for (int i = 0; i < sp.size(); ++i)
    for (int j = 0; j < sp.size(); ++j) {
      int d = 0;
      for (int a = 1; a <= 4; ++a)
        for (int b = a + 1; b <= 4; ++b) d += sp.prefers(i, a, b) != sp.prefers(j, a, b);
      CHECK(kendall_tau(sp.ranking(i), sp.ranking(j)) == d);
    }
}

TEST_CASE("weighted majority graph") {
  SECTION("unanimous") {
    Histogram h(3);
    h.add(Ranking{1, 2, 3}, 7);
    auto g = weighted_majority_graph(h);
    CHECK(g.margin(1, 2) == 7);
    CHECK(g.margin(1, 3) == 7);
    CHECK(g.margin(2, 3) == 7);
    CHECK(condorcet_winner(g) == 1);
  }
  SECTION("uniform") {
    Histogram h(4, std::vector<int>(24, 3));
    auto g = weighted_majority_graph(h);
    for (int a = 1; a <= 4; ++a)
      for (int b = 1; b <= 4; ++b) CHECK(g.margin(a, b) == 0);
    CHECK_FALSE(condorcet_winner(g));
  }
  SECTION("three votes by hand") {
    auto h = parse_histogram("2: 1>2>3\n1: 2>3>1\n");
    auto g = weighted_majority_graph(h);
    CHECK(g.margin(1, 2) == 1);
    CHECK(g.margin(2, 3) == 3);
    CHECK(g.margin(1, 3) == 1);
  }
  SECTION("perfect cycle has no winner") {
    auto h = parse_histogram("1: 1>2>3\n1: 2>3>1\n1: 3>1>2\n");
    CHECK_FALSE(condorcet_winner(h));
  }
}

TEST_CASE("wmg antisymmetry, parity and unique condorcet winner on random profiles") {
  std::mt19937 rng(5);
  for (int t = 0; t < 300; ++t) {
    int m = 3 + t % 3, n = 1 + rng() % 30;
    Profile p{m, {}};
    for (int j = 0; j < n; ++j) p.votes.push_back(space(m).ranking(rng() % space(m).size()));
    auto h = histogram_of(p);
    auto g = weighted_majority_graph(h);
    int winners = 0;
    for (int a = 1; a <= m; ++a) {
      bool all = true;
      for (int b = 1; b <= m; ++b) {
        if (a == b) continue;
        CHECK(g.margin(a, b) == -g.margin(b, a));
        CHECK(std::abs(g.margin(a, b)) % 2 == n % 2);
        all = all && g.margin(a, b) > 0;
      }
      winners += all;
    }
    CHECK(winners <= 1);
    CHECK(winners == (condorcet_winner(g) ? 1 : 0));
    // voter order does not matter
    std::shuffle(p.votes.begin(), p.votes.end(), rng);
    CHECK(histogram_of(p) == h);
  }
}

TEST_CASE("raises") {
  Ranking r{2, 3, 1};
  CHECK(raises(r, r, 1));
  CHECK(raises(Ranking{2, 3, 1}, Ranking{3, 2, 1}, 1));
  CHECK_FALSE(raises(Ranking{1, 2, 3}, Ranking{2, 3, 1}, 1));
  CHECK(raises(Ranking{2, 3, 1}, Ranking{1, 2, 3}, 1));
  // reflexive and transitive, and the index version agrees
  const auto& sp = space(3);
  for (int a = 1; a <= 3; ++a)
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        CHECK(raises(sp, i, j, a) == raises(sp.ranking(i), sp.ranking(j), a));
        for (int k = 0; k < 6; ++k)
          if (raises(sp, i, j, a) && raises(sp, j, k, a)) CHECK(raises(sp, i, k, a));
      }
}

TEST_CASE("histogram and profile text") {
  auto h = parse_histogram("# comment\n2: 1>2>3\n\n3>1>2  # trailing\n1: 3>1>2\n");
  CHECK(h.n() == 4);
  CHECK(h.count(Ranking{3, 1, 2}) == 2);
  CHECK(parse_histogram(to_string(h)) == h);
  CHECK(histogram_of(profile_of(h)) == h);
  try {
    parse_histogram("1: 1>2>3\n1: 1>2\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
  CHECK_THROWS_AS(parse_histogram("x: 1>2>3\n"), ParseError);
  CHECK_THROWS_AS(parse_histogram("0: 1>2>3\n"), ParseError);
  CHECK_THROWS_AS(parse_histogram("# nothing\n"), ParseError);
}
