#include "catch_amalgamated.hpp"

#include <functional>
#include <random>

#include "axlab/rules.hpp"

using namespace axlab;

namespace {

// Reference rules computed vote by vote, sharing nothing with rules.hpp.
int margin(const Profile& p, int a, int b) {
  int s = 0;
  for (const auto& v : p.votes) s += v.prefers(a, b) ? 1 : -1;
  return s;
}

int lowest_argmax(const std::vector<double>& s) {
  int best = 1;
  for (int a = 2; a < static_cast<int>(s.size()); ++a)
    if (s[a] > s[best]) best = a;
  return best;
}

int ref_positional(const Profile& p, const std::function<double(int, int)>& points) {
  std::vector<double> s(p.m + 1, 0);
  for (const auto& v : p.votes)
    for (int i = 0; i < p.m; ++i) s[v.order[i]] += points(i, p.m);
  return lowest_argmax(s);
}

int ref_copeland(const Profile& p) {
  std::vector<double> s(p.m + 1, 0);
  for (int a = 1; a <= p.m; ++a)
    for (int b = 1; b <= p.m; ++b)
      if (a != b) s[a] += margin(p, a, b) > 0 ? 1.0 : (margin(p, a, b) == 0 ? 0.5 : 0.0);
  return lowest_argmax(s);
}

int ref_maximin(const Profile& p) {
  std::vector<double> s(p.m + 1, 1e9);
  s[0] = -1e18;
  for (int a = 1; a <= p.m; ++a)
    for (int b = 1; b <= p.m; ++b)
      if (a != b) s[a] = std::min<double>(s[a], margin(p, a, b));
  return lowest_argmax(s);
}

int ref_schulze(const Profile& p) {
  const int m = p.m;
  std::vector<std::vector<int>> d(m + 1, std::vector<int>(m + 1, 0));
  for (int a = 1; a <= m; ++a)
    for (int b = 1; b <= m; ++b)
      if (a != b && margin(p, a, b) > 0) d[a][b] = margin(p, a, b);
  for (int k = 1; k <= m; ++k)
    for (int i = 1; i <= m; ++i)
      for (int j = 1; j <= m; ++j)
        if (i != j && i != k && j != k) d[i][j] = std::max(d[i][j], std::min(d[i][k], d[k][j]));
  for (int a = 1; a <= m; ++a) {
    bool ok = true;
    for (int b = 1; b <= m; ++b)
      if (b != a && d[b][a] > d[a][b]) ok = false;
    if (ok) return a;
  }
  return -1;
}

int ref_ranked_pairs(const Profile& p) {
  const int m = p.m;
  std::vector<std::tuple<int, int, int>> es;  // (-margin, a, b)
  for (int a = 1; a <= m; ++a)
    for (int b = 1; b <= m; ++b)
      if (a != b && margin(p, a, b) >= 0) es.emplace_back(-margin(p, a, b), a, b);
  std::sort(es.begin(), es.end());
  std::vector<std::vector<bool>> adj(m + 1, std::vector<bool>(m + 1, false));
  std::function<bool(int, int, std::vector<bool>&)> reach = [&](int x, int y, std::vector<bool>& seen) {
    if (x == y) return true;
    seen[x] = true;
    for (int z = 1; z <= m; ++z)
      if (adj[x][z] && !seen[z] && reach(z, y, seen)) return true;
    return false;
  };
  for (auto [w, a, b] : es) {
    std::vector<bool> seen(m + 1, false);
    if (!reach(b, a, seen)) adj[a][b] = true;
  }
  for (int a = 1; a <= m; ++a) {
    bool src = true;
    for (int b = 1; b <= m; ++b)
      if (adj[b][a]) src = false;
    if (src) return a;
  }
  return -1;
}

int ref_stv(const Profile& p) {
  std::vector<int> alive;
  for (int a = 1; a <= p.m; ++a) alive.push_back(a);
  while (alive.size() > 1) {
    std::map<int, int> tally;
    for (int a : alive) tally[a] = 0;
    for (const auto& v : p.votes)
      for (int a : v.order)
        if (tally.count(a)) {
          ++tally[a];
          break;
        }
    int loser = alive.back();
    for (auto it = alive.rbegin(); it != alive.rend(); ++it)
      if (tally[*it] < tally[loser]) loser = *it;
    alive.erase(std::find(alive.begin(), alive.end(), loser));
  }
  return alive.front();
}

Profile random_profile(std::mt19937& rng, int m, int n) {
  Profile p{m, {}};
  for (int j = 0; j < n; ++j) p.votes.push_back(space(m).ranking(rng() % space(m).size()));
  return p;
}

}  // namespace

TEST_CASE("rule names") {
  for (auto s : {"plurality", "borda", "veto", "copeland", "maximin", "stv", "ranked_pairs", "schulze"})
    CHECK(name(parse_rule(s)) == s);
  CHECK(parse_rule("constant_3") == Rule{RuleKind::constant, 3});
  CHECK(parse_rule("dictator_2") == Rule{RuleKind::dictator, 2});
  CHECK_THROWS_AS(parse_rule("approval"), NameError);
  CHECK_THROWS_AS(parse_rule("constant_x"), NameError);
  CHECK_THROWS_AS(parse_rule("constant_0"), NameError);
}

TEST_CASE("worked examples") {
  Histogram uni(3);
  uni.add(Ranking{1, 2, 3}, 5);
  CHECK(apply_rule(parse_rule("constant_1"), uni) == 1);
  CHECK(apply_rule(parse_rule("borda"), uni) == 1);
  auto h = parse_histogram("2: 1>2>3\n2: 2>3>1\n1: 3>1>2\n");
  // maximin scores: 1 -> min(1,-1) = -1, 2 -> min(-1,3) = -1, 3 -> -3; the tie goes to 1
  auto g = weighted_majority_graph(h);
  CHECK(detail::maximin_score(g, 1) == -1);
  CHECK(detail::maximin_score(g, 2) == -1);
  CHECK(detail::maximin_score(g, 3) == -3);
  CHECK(apply_rule(parse_rule("maximin"), h) == ref_maximin(profile_of(h)));
  CHECK(apply_rule(parse_rule("maximin"), h) == 1);
  CHECK_THROWS_AS(apply_rule(parse_rule("constant_4"), h), ArgumentError);
  CHECK_THROWS_AS(apply_rule(parse_rule("dictator_1"), h), ArgumentError);
}

TEST_CASE("stv and ties") {
  // 1 and 3 tie for last in round one; the larger index (3) goes
  auto h = parse_histogram("2: 2>1>3\n1: 1>3>2\n1: 3>1>2\n");
  CHECK(apply_rule(parse_rule("stv"), h) == 1);
  CHECK(ref_stv(profile_of(h)) == 1);
  // plurality tie between 1 and 2 goes to 1
  CHECK(apply_rule(parse_rule("plurality"), parse_histogram("1: 2>1>3\n1: 1>2>3\n")) == 1);
}

TEST_CASE("dictator reads the j-th voter") {
  Profile p{3, {Ranking{2, 1, 3}, Ranking{3, 1, 2}}};
  CHECK(apply_rule(parse_rule("dictator_1"), p) == 2);
  CHECK(apply_rule(parse_rule("dictator_2"), p) == 3);
  CHECK_THROWS_AS(apply_rule(parse_rule("dictator_3"), p), ArgumentError);
}

TEST_CASE("rules agree with vote-by-vote references") {
  std::mt19937 rng(11);
  for (int t = 0; t < 1500; ++t) {
    int m = 3 + t % 3, n = 1 + rng() % 25;
    Profile p = random_profile(rng, m, n);
    Histogram h = histogram_of(p);
    INFO("m=" << m << " n=" << n << "\n" << to_string(h));
    CHECK(apply_rule(parse_rule("plurality"), h) == ref_positional(p, [](int i, int) { return i == 0 ? 1.0 : 0.0; }));
    CHECK(apply_rule(parse_rule("borda"), h) == ref_positional(p, [](int i, int mm) { return double(mm - 1 - i); }));
    CHECK(apply_rule(parse_rule("veto"), h) == ref_positional(p, [](int i, int mm) { return i == mm - 1 ? -1.0 : 0.0; }));
    CHECK(apply_rule(parse_rule("copeland"), h) == ref_copeland(p));
    CHECK(apply_rule(parse_rule("maximin"), h) == ref_maximin(p));
    CHECK(apply_rule(parse_rule("schulze"), h) == ref_schulze(p));
    CHECK(apply_rule(parse_rule("ranked_pairs"), h) == ref_ranked_pairs(p));
    CHECK(apply_rule(parse_rule("stv"), h) == ref_stv(p));
    // profile and histogram paths agree, and so do repeated calls
    for (auto r : {"borda", "stv", "schulze"}) {
      CHECK(apply_rule(parse_rule(r), p) == apply_rule(parse_rule(r), h));
      CHECK(apply_rule(parse_rule(r), h) == apply_rule(parse_rule(r), h));
    }
  }
}

TEST_CASE("condorcet rules elect the condorcet winner") {
  std::mt19937 rng(3);
  int seen = 0;
  for (int t = 0; t < 3000; ++t) {
    int m = 3 + t % 3;
    Histogram h = histogram_of(random_profile(rng, m, 1 + rng() % 40));
    auto cw = condorcet_winner(h);
    if (!cw) continue;
    ++seen;
    for (auto r : {"copeland", "maximin", "schulze", "ranked_pairs"}) CHECK(apply_rule(parse_rule(r), h) == *cw);
  }
  CHECK(seen > 1000);
}
