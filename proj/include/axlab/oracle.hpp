#pragma once

// Naive per-voter reference checkers. They enumerate voter index subsets and
// per-voter replacement votes directly on profiles, with no use of
// histograms beyond evaluating the rule. Slow on purpose; used to cross-check
// the histogram-level checkers and to handle non-anonymous rules.

#include <functional>
#include <vector>

#include "axioms.hpp"

namespace axlab::oracle {

namespace detail {

// every subset of {0..n-1} with 1..k elements, in increasing size
inline bool for_each_subset(int n, int k, const std::function<bool(const std::vector<int>&)>& f) {
  std::vector<int> idx;
  for (int size = 1; size <= std::min(k, n); ++size) {
    idx.resize(size);
    for (int i = 0; i < size; ++i) idx[i] = i;
    while (true) {
      if (f(idx)) return true;
      int i = size - 1;
      while (i >= 0 && idx[i] == n - size + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return false;
}

// every assignment of a replacement vote to each chosen voter
inline bool for_each_replacement(const Profile& p, const std::vector<int>& who,
                                 const std::function<bool(const Ranking&, const Ranking&)>& allowed,
                                 const std::function<bool(const Profile&)>& f) {
  const auto& sp = space(p.m);
  Profile q = p;
  std::function<bool(size_t)> rec = [&](size_t i) -> bool {
    if (i == who.size()) return f(q);
    const Ranking& orig = p.votes[who[i]];
    for (int r = 0; r < sp.size(); ++r) {
      const Ranking& cand = sp.ranking(r);
      if (cand == orig || !allowed(orig, cand)) continue;
      q.votes[who[i]] = cand;
      if (rec(i + 1)) return true;
    }
    q.votes[who[i]] = orig;
    return false;
  };
  return rec(0);
}

}  // namespace detail

inline bool sat_cc(const Rule& rule, const Profile& p) {
  auto cw = condorcet_winner(histogram_of(p));
  return !cw || *cw == apply_rule(rule, p);
}

inline bool sat_par(const Rule& rule, const Profile& p, int B) {
  const int a = apply_rule(rule, p);
  bool violated = detail::for_each_subset(p.n(), std::min(B, p.n() - 1), [&](const std::vector<int>& who) {
    Profile q{p.m, {}};
    std::vector<bool> out(p.n(), false);
    for (int i : who) out[i] = true;
    for (int i = 0; i < p.n(); ++i)
      if (!out[i]) q.votes.push_back(p.votes[i]);
    // the dictator index follows the voter, so a removed dictator has no counterpart
    Rule r2 = rule;
    if (rule.kind == RuleKind::dictator) {
      if (out[rule.param - 1]) return false;
      int shift = 0;
      for (int i = 0; i < rule.param - 1; ++i) shift += out[i];
      r2.param -= shift;
    }
    const int c = apply_rule(r2, q);
    for (int i : who)
      if (!p.votes[i].prefers(c, a)) return false;
    return true;
  });
  return !violated;
}

inline bool sat_hm(const Rule& rule, const Profile& p, int B) {
  const int a = apply_rule(rule, p);
  bool violated = detail::for_each_subset(p.n(), B, [&](const std::vector<int>& who) {
    Profile q = p;
    for (int i : who) q.votes[i] = p.votes[i].reversed();
    const int c = apply_rule(rule, q);
    for (int i : who)
      if (!p.votes[i].prefers(c, a)) return false;
    return true;
  });
  return !violated;
}

inline bool sat_mm(const Rule& rule, const Profile& p, int B) {
  const int a = apply_rule(rule, p);
  bool violated = detail::for_each_subset(p.n(), B, [&](const std::vector<int>& who) {
    return detail::for_each_replacement(
        p, who, [&](const Ranking& r1, const Ranking& r2) { return raises(r1, r2, a); },
        [&](const Profile& q) { return apply_rule(rule, q) != a; });
  });
  return !violated;
}

inline bool sat_sp(const Rule& rule, const Profile& p, int B) {
  const int a = apply_rule(rule, p);
  bool violated = detail::for_each_subset(p.n(), B, [&](const std::vector<int>& who) {
    return detail::for_each_replacement(
        p, who, [](const Ranking&, const Ranking&) { return true; },
        [&](const Profile& q) {
          const int c = apply_rule(rule, q);
          for (int i : who)
            if (!p.votes[i].prefers(c, a)) return false;
          return true;
        });
  });
  return !violated;
}

inline bool sat(Axiom ax, const Rule& rule, const Profile& p, int B) {
  switch (ax) {
    case Axiom::cc: return sat_cc(rule, p);
    case Axiom::par: return sat_par(rule, p, B);
    case Axiom::hm: return sat_hm(rule, p, B);
    case Axiom::mm: return sat_mm(rule, p, B);
    case Axiom::sp: return sat_sp(rule, p, B);
  }
  return true;
}

inline bool sat_combo(const Combo& combo, const Rule& rule, const Profile& p, int B) {
  if (combo.cc && !sat_cc(rule, p)) return false;
  return !combo.group || sat(*combo.group, rule, p, B);
}

// Independent replay of a witness: rebuild both profiles voter by voter and
// re-derive winners and incentives without the histogram checkers.
inline bool confirms(const ViolationWitness& w) {
  Profile before = profile_of(w.before);
  Profile after = before;
  if (w.axiom == Axiom::cc) {
    auto cw = condorcet_winner(histogram_of(before));
    return cw && w.condorcet == cw && apply_rule(w.rule, before) != *cw;
  }
  std::vector<bool> removed(before.n(), false);
  std::vector<bool> used(before.n(), false);
  std::vector<int> movers;
  for (const auto& mv : w.action.moves) {
    int left = mv.count;
    for (int i = 0; i < before.n() && left > 0; ++i)
      if (!used[i] && before.votes[i] == mv.from) {
        used[i] = true;
        movers.push_back(i);
        --left;
        if (mv.to)
          after.votes[i] = *mv.to;
        else
          removed[i] = true;
      }
    if (left > 0) return false;
  }
  Profile kept{after.m, {}};
  for (int i = 0; i < after.n(); ++i)
    if (!removed[i]) kept.votes.push_back(after.votes[i]);
  if (kept.votes.empty() || static_cast<int>(movers.size()) > w.B) return false;
  const int a = apply_rule(w.rule, before);
  const int c = apply_rule(w.rule, kept);
  if (a != w.winner_before || c != w.winner_after) return false;
  for (int i : movers) {
    const Ranking& r = before.votes[i];
    switch (w.axiom) {
      case Axiom::mm:
        if (!raises(r, after.votes[i], a)) return false;
        break;
      case Axiom::hm:
        if (after.votes[i] != r.reversed() || !r.prefers(c, a)) return false;
        break;
      default:
        if (!r.prefers(c, a)) return false;
    }
  }
  return w.axiom != Axiom::mm || c != a;
}

}  // namespace axlab::oracle
