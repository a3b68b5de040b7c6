#pragma once

#include <string>
#include <vector>

#include "core.hpp"

namespace axlab {

enum class RuleKind { plurality, borda, veto, copeland, maximin, stv, ranked_pairs, schulze, constant, dictator };

struct Rule {
  RuleKind kind = RuleKind::plurality;
  int param = 0;  // k for constant_k, j for dictator_j

  bool anonymous() const { return kind != RuleKind::dictator; }
  bool uses_wmg() const {
    return kind == RuleKind::copeland || kind == RuleKind::maximin || kind == RuleKind::ranked_pairs ||
           kind == RuleKind::schulze;
  }
  friend bool operator==(const Rule&, const Rule&) = default;
};

inline const std::vector<std::string>& rule_names() {
  static const std::vector<std::string> names{"plurality", "borda",        "veto",    "copeland",   "maximin",
                                              "stv",       "ranked_pairs", "schulze", "constant_k", "dictator_j"};
  return names;
}

inline std::string name(const Rule& r) {
  switch (r.kind) {
    case RuleKind::plurality: return "plurality";
    case RuleKind::borda: return "borda";
    case RuleKind::veto: return "veto";
    case RuleKind::copeland: return "copeland";
    case RuleKind::maximin: return "maximin";
    case RuleKind::stv: return "stv";
    case RuleKind::ranked_pairs: return "ranked_pairs";
    case RuleKind::schulze: return "schulze";
    case RuleKind::constant: return "constant_" + std::to_string(r.param);
    case RuleKind::dictator: return "dictator_" + std::to_string(r.param);
  }
  return "?";
}

inline Rule parse_rule(const std::string& s) {
  static const std::pair<const char*, RuleKind> plain[] = {
      {"plurality", RuleKind::plurality}, {"borda", RuleKind::borda},     {"veto", RuleKind::veto},
      {"copeland", RuleKind::copeland},   {"maximin", RuleKind::maximin}, {"stv", RuleKind::stv},
      {"ranked_pairs", RuleKind::ranked_pairs}, {"schulze", RuleKind::schulze}};
  for (auto& [nm, k] : plain)
    if (s == nm) return Rule{k, 0};
  auto param_of = [&](const std::string& prefix, RuleKind k) -> std::optional<Rule> {
    if (s.rfind(prefix, 0) != 0) return std::nullopt;
    long long v;
    if (!detail::parse_int(s.substr(prefix.size()), v) || v < 1 || v > (1 << 30))
      throw NameError("bad parameter in rule '" + s + "'");
    return Rule{k, static_cast<int>(v)};
  };
  if (auto r = param_of("constant_", RuleKind::constant)) return *r;
  if (auto r = param_of("dictator_", RuleKind::dictator)) return *r;
  throw NameError("unknown rule '" + s + "'");
}

namespace detail {

inline int argmax_lowest(const std::vector<long long>& score, int m) {
  int best = 1;
  for (int a = 2; a <= m; ++a)
    if (score[a] > score[best]) best = a;
  return best;
}

inline int copeland_winner(const Wmg& g) {
  const int m = g.m();
  std::vector<long long> s(m + 1, 0);
  for (int a = 1; a <= m; ++a)
    for (int b = 1; b <= m; ++b) {
      if (a == b) continue;
      int mg = g.margin(a, b);
      s[a] += mg > 0 ? 2 : (mg == 0 ? 1 : 0);
    }
  return argmax_lowest(s, m);
}

inline int maximin_score(const Wmg& g, int a) {
  int s = INT32_MAX;
  for (int b = 1; b <= g.m(); ++b)
    if (b != a) s = std::min(s, g.margin(a, b));
  return s;
}

inline int maximin_winner(const Wmg& g) {
  const int m = g.m();
  int best = 1, bs = maximin_score(g, 1);
  for (int a = 2; a <= m; ++a) {
    int s = maximin_score(g, a);
    if (s > bs) best = a, bs = s;
  }
  return best;
}

// All ordered pairs with nonnegative margin, so a zero-margin pair locks
// its lexicographically first direction and the locked graph ends up a
// linear order with a single source.
inline int ranked_pairs_winner(const Wmg& g) {
  const int m = g.m();
  struct E {
    int w, a, b;
  };
  std::vector<E> es;
  for (int a = 1; a <= m; ++a)
    for (int b = 1; b <= m; ++b)
      if (a != b && g.margin(a, b) >= 0) es.push_back({g.margin(a, b), a, b});
  std::stable_sort(es.begin(), es.end(), [](const E& x, const E& y) {
    if (x.w != y.w) return x.w > y.w;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  // reach[a] bitmask of alternatives reachable from a in the locked graph
  std::vector<unsigned> reach(m + 1, 0);
  std::vector<bool> incoming(m + 1, false);
  for (const auto& e : es) {
    if (e.a == e.b || (reach[e.b] >> e.a & 1u)) continue;  // would close a cycle
    unsigned add = (1u << e.b) | reach[e.b];
    for (int x = 1; x <= m; ++x)
      if (x == e.a || (reach[x] >> e.a & 1u)) reach[x] |= add;
    incoming[e.b] = true;
  }
  for (int a = 1; a <= m; ++a)
    if (!incoming[a]) return a;
  return 1;
}

inline int schulze_winner(const Wmg& g) {
  const int m = g.m();
  std::vector<std::vector<int>> p(m + 1, std::vector<int>(m + 1, 0));
  for (int a = 1; a <= m; ++a)
    for (int b = 1; b <= m; ++b)
      if (a != b && g.margin(a, b) > 0) p[a][b] = g.margin(a, b);
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= m; ++j) {
      if (j == i) continue;
      for (int k = 1; k <= m; ++k)
        if (k != i && k != j) p[j][k] = std::max(p[j][k], std::min(p[j][i], p[i][k]));
    }
  for (int a = 1; a <= m; ++a) {
    bool ok = true;
    for (int b = 1; b <= m && ok; ++b)
      if (b != a && p[b][a] > p[a][b]) ok = false;
    if (ok) return a;
  }
  return 1;
}

inline int stv_winner(const Histogram& h) {
  const auto& sp = space(h.m());
  const int m = h.m();
  unsigned alive = 0;
  for (int a = 1; a <= m; ++a) alive |= 1u << a;
  std::vector<long long> tally(m + 1);
  for (int left = m; left > 1; --left) {
    std::fill(tally.begin(), tally.end(), 0);
    for (int r = 0; r < h.size(); ++r) {
      if (h[r] == 0) continue;
      for (int a : sp.ranking(r).order)
        if (alive >> a & 1u) {
          tally[a] += h[r];
          break;
        }
    }
    int loser = -1;
    for (int a = m; a >= 1; --a)  // largest index loses ties
      if ((alive >> a & 1u) && (loser < 0 || tally[a] < tally[loser])) loser = a;
    alive &= ~(1u << loser);
  }
  for (int a = 1; a <= m; ++a)
    if (alive >> a & 1u) return a;
  return 1;
}

inline void check_constant(const Rule& r, int m) {
  if (r.kind == RuleKind::constant && (r.param < 1 || r.param > m))
    throw ArgumentError(name(r) + " needs k <= m=" + std::to_string(m));
}

}  // namespace detail

// g must be the WMG of h; lets hot loops update margins incrementally.
inline int apply_rule(const Rule& rule, const Histogram& h, const Wmg& g) {
  const int m = h.m();
  if (h.n() < 1) throw ArgumentError("rule applied to an empty histogram");
  const auto& sp = space(m);
  switch (rule.kind) {
    case RuleKind::plurality:
    case RuleKind::borda:
    case RuleKind::veto: {
      std::vector<long long> s(m + 1, 0);
      for (int r = 0; r < h.size(); ++r) {
        if (h[r] == 0) continue;
        const auto& o = sp.ranking(r).order;
        if (rule.kind == RuleKind::plurality)
          s[o.front()] += h[r];
        else if (rule.kind == RuleKind::veto)
          s[o.back()] -= h[r];
        else
          for (int i = 0; i < m; ++i) s[o[i]] += static_cast<long long>(h[r]) * (m - 1 - i);
      }
      return detail::argmax_lowest(s, m);
    }
    case RuleKind::copeland: return detail::copeland_winner(g);
    case RuleKind::maximin: return detail::maximin_winner(g);
    case RuleKind::ranked_pairs: return detail::ranked_pairs_winner(g);
    case RuleKind::schulze: return detail::schulze_winner(g);
    case RuleKind::stv: return detail::stv_winner(h);
    case RuleKind::constant: detail::check_constant(rule, m); return rule.param;
    case RuleKind::dictator:
      throw ArgumentError(name(rule) + " is not anonymous; evaluate it on a profile");
  }
  return 1;
}

inline int apply_rule(const Rule& rule, const Histogram& h) {
  if (rule.uses_wmg()) return apply_rule(rule, h, weighted_majority_graph(h));
  return apply_rule(rule, h, Wmg(h.m()));
}

inline int apply_rule(const Rule& rule, const Profile& p) {
  if (rule.kind == RuleKind::dictator) {
    if (rule.param < 1 || rule.param > p.n())
      throw ArgumentError(name(rule) + " needs j <= n=" + std::to_string(p.n()));
    return p.votes[rule.param - 1].top();
  }
  return apply_rule(rule, histogram_of(p));
}

}  // namespace axlab
