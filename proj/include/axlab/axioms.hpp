#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "core.hpp"
#include "rules.hpp"

namespace axlab {

enum class Axiom { cc, par, hm, mm, sp };

inline std::string axiom_name(Axiom a) {
  switch (a) {
    case Axiom::cc: return "CC";
    case Axiom::par: return "Par";
    case Axiom::hm: return "HM";
    case Axiom::mm: return "MM";
    case Axiom::sp: return "SP";
  }
  return "?";
}

inline Axiom parse_axiom(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "cc") return Axiom::cc;
  if (s == "par") return Axiom::par;
  if (s == "hm") return Axiom::hm;
  if (s == "mm") return Axiom::mm;
  if (s == "sp") return Axiom::sp;
  throw NameError("unknown axiom '" + s + "'");
}

enum class ActionKind { none, abstain, flip, change };

inline std::string action_name(ActionKind k) {
  switch (k) {
    case ActionKind::none: return "none";
    case ActionKind::abstain: return "abstain";
    case ActionKind::flip: return "flip";
    case ActionKind::change: return "change";
  }
  return "?";
}

struct Move {
  Ranking from;
  std::optional<Ranking> to;  // absent for abstention
  int count = 1;
  friend bool operator==(const Move&, const Move&) = default;
};

struct CoalitionAction {
  ActionKind kind = ActionKind::none;
  std::vector<Move> moves;

  int size() const {
    int s = 0;
    for (const auto& mv : moves) s += mv.count;
    return s;
  }
  friend bool operator==(const CoalitionAction&, const CoalitionAction&) = default;
};

inline Histogram apply_action(const Histogram& h, const CoalitionAction& act) {
  Histogram out = h;
  for (const auto& mv : act.moves) {
    if (mv.count < 1) throw ArgumentError("move count must be positive");
    if (mv.from.m() != h.m() || (mv.to && mv.to->m() != h.m())) throw DimensionError("move ranking has wrong m");
    if (out.count(mv.from) < mv.count)
      throw ArgumentError("not enough votes " + to_string(mv.from) + " for the move");
    out.add(mv.from, -mv.count);
    if (mv.to) out.add(*mv.to, mv.count);
  }
  return out;
}

struct ViolationWitness {
  Axiom axiom = Axiom::cc;
  Rule rule;
  int B = 1;
  Histogram before;
  CoalitionAction action;
  Histogram after;
  int winner_before = 0;
  int winner_after = 0;
  std::optional<int> condorcet;  // CC witnesses only

  friend bool operator==(const ViolationWitness&, const ViolationWitness&) = default;
};

struct CheckOptions {
  bool sampled = false;
  double budget = 1e8;  // candidate actions allowed in exact mode
  long long samples = 20000;
  std::uint64_t seed = 1;
  bool fast_paths = true;
};

struct CheckResult {
  bool sat = true;
  bool exhaustive = true;  // false: sampled mode found nothing, not a proof
  std::optional<ViolationWitness> witness;
};

// Empty string when the witness holds up, otherwise the first reason it does not.
inline std::string verify_witness(const ViolationWitness& w) {
  try {
    const int m = w.before.m();
    if (m < 1 || w.after.m() != m) return "histograms disagree on m";
    if (w.before.n() < 1) return "empty before-profile";
    if (w.B < 1) return "B must be positive";
    if (!w.rule.anonymous()) return "rule is not anonymous";
    Histogram replay = apply_action(w.before, w.action);
    if (!(replay == w.after)) return "action does not turn before into after";
    if (w.after.n() < 1) return "empty after-profile";
    if (apply_rule(w.rule, w.before) != w.winner_before) return "winner_before does not replay";
    if (apply_rule(w.rule, w.after) != w.winner_after) return "winner_after does not replay";
    const int size = w.action.size();
    auto strictly_gain = [&](const Ranking& r) { return r.prefers(w.winner_after, w.winner_before); };
    for (const auto& mv : w.action.moves)
      if (mv.count < 1) return "nonpositive move count";

    switch (w.axiom) {
      case Axiom::cc: {
        if (w.action.kind != ActionKind::none || !w.action.moves.empty()) return "CC witness carries an action";
        auto cw = condorcet_winner(w.before);
        if (!cw || !w.condorcet || *cw != *w.condorcet) return "condorcet winner does not replay";
        if (*cw == w.winner_before) return "rule elects the condorcet winner";
        return "";
      }
      case Axiom::par:
        if (w.action.kind != ActionKind::abstain) return "Par witness must abstain";
        break;
      case Axiom::hm:
        if (w.action.kind != ActionKind::flip) return "HM witness must flip";
        break;
      case Axiom::mm:
      case Axiom::sp:
        if (w.action.kind != ActionKind::change) return axiom_name(w.axiom) + " witness must change votes";
        break;
    }
    if (w.condorcet) return "condorcet field on a group witness";
    if (size < 1 || size > w.B) return "coalition size outside 1..B";
    for (const auto& mv : w.action.moves) {
      switch (w.axiom) {
        case Axiom::par:
          if (mv.to) return "abstention move has a target";
          if (!strictly_gain(mv.from)) return "abstainer " + to_string(mv.from) + " does not gain";
          break;
        case Axiom::hm:
          if (!mv.to || *mv.to != mv.from.reversed()) return "flip target is not the reverse";
          if (!strictly_gain(mv.from)) return "flipper " + to_string(mv.from) + " does not gain";
          break;
        case Axiom::mm:
          if (!mv.to || *mv.to == mv.from) return "MM move must change the vote";
          if (!raises(mv.from, *mv.to, w.winner_before)) return "MM move does not raise the winner";
          break;
        case Axiom::sp:
          if (!mv.to || *mv.to == mv.from) return "SP move must change the vote";
          if (!strictly_gain(mv.from)) return "manipulator " + to_string(mv.from) + " does not gain";
          break;
        case Axiom::cc: break;
      }
    }
    if (w.axiom == Axiom::mm && w.winner_after == w.winner_before) return "MM witness keeps the winner";
    return "";
  } catch (const Error& e) {
    return e.what();
  }
}

// ---- witness text format ----

namespace detail {
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}
inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}
}  // namespace detail

inline std::string witness_body(const ViolationWitness& w) {
  std::ostringstream os;
  os << "axlab-witness 1\n";
  os << "axiom " << axiom_name(w.axiom) << '\n';
  os << "rule " << name(w.rule) << '\n';
  os << "m " << w.before.m() << '\n';
  os << "B " << w.B << '\n';
  os << "winner_before " << w.winner_before << '\n';
  os << "winner_after " << w.winner_after << '\n';
  if (w.condorcet) os << "condorcet " << *w.condorcet << '\n';
  os << "action " << action_name(w.action.kind) << '\n';
  for (const auto& mv : w.action.moves) {
    os << "move " << mv.count << ' ' << to_string(mv.from);
    if (mv.to) os << " -> " << to_string(*mv.to);
    os << '\n';
  }
  os << "before\n";
  write_histogram(os, w.before);
  os << "after\n";
  write_histogram(os, w.after);
  os << "end\n";
  return os.str();
}

inline void write_witness(std::ostream& out, const ViolationWitness& w) {
  std::string body = witness_body(w);
  out << body << "digest " << detail::hex64(detail::fnv1a(body)) << '\n';
}

inline std::string to_string(const ViolationWitness& w) {
  std::ostringstream os;
  write_witness(os, w);
  return os.str();
}

struct WitnessFile {
  ViolationWitness witness;
  bool digest_ok = false;
};

inline WitnessFile read_witness(std::istream& in) {
  WitnessFile wf;
  auto& w = wf.witness;
  std::string raw, body;
  int line = 0, m = 0;
  enum { header, before, after, done } sect = header;
  bool have_axiom = false, have_rule = false, have_B = false, have_wb = false, have_wa = false, have_action = false;
  std::optional<std::string> digest;
  std::vector<std::pair<int, Ranking>> hb, ha;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = detail::trim(raw);
    if (s.empty() && sect != done) continue;
    if (sect == done) {
      if (s.empty()) continue;
      if (s.rfind("digest ", 0) == 0 && !digest) {
        digest = std::string(detail::trim(s.substr(7)));
        continue;
      }
      throw ParseError(line, "unexpected content after end");
    }
    body += std::string(s) + "\n";
    if (s == "before") { sect = before; continue; }
    if (s == "after") { sect = after; continue; }
    if (s == "end") { sect = done; continue; }
    if (sect == before || sect == after) {
      auto colon = s.find(':');
      long long c;
      if (colon == std::string_view::npos || !detail::parse_int(s.substr(0, colon), c) || c < 0)
        throw ParseError(line, "bad histogram line");
      Ranking r = parse_ranking(s.substr(colon + 1), line);
      (sect == before ? hb : ha).emplace_back(static_cast<int>(c), std::move(r));
      continue;
    }
    auto sp = s.find(' ');
    std::string key(s.substr(0, sp));
    std::string_view val = sp == std::string_view::npos ? std::string_view{} : detail::trim(s.substr(sp + 1));
    long long v = 0;
    auto need_int = [&] {
      if (!detail::parse_int(val, v)) throw ParseError(line, "expected an integer after '" + key + "'");
      return static_cast<int>(v);
    };
    if (key == "axlab-witness") {
      if (val != "1") throw ParseError(line, "unsupported witness version");
    } else if (key == "axiom") {
      try { w.axiom = parse_axiom(std::string(val)); } catch (const Error& e) { throw ParseError(line, e.what()); }
      have_axiom = true;
    } else if (key == "rule") {
      try { w.rule = parse_rule(std::string(val)); } catch (const Error& e) { throw ParseError(line, e.what()); }
      have_rule = true;
    } else if (key == "m") {
      m = need_int();
    } else if (key == "B") {
      w.B = need_int();
      have_B = true;
    } else if (key == "winner_before") {
      w.winner_before = need_int();
      have_wb = true;
    } else if (key == "winner_after") {
      w.winner_after = need_int();
      have_wa = true;
    } else if (key == "condorcet") {
      w.condorcet = need_int();
    } else if (key == "action") {
      if (val == "none") w.action.kind = ActionKind::none;
      else if (val == "abstain") w.action.kind = ActionKind::abstain;
      else if (val == "flip") w.action.kind = ActionKind::flip;
      else if (val == "change") w.action.kind = ActionKind::change;
      else throw ParseError(line, "unknown action kind");
      have_action = true;
    } else if (key == "move") {
      auto sp2 = val.find(' ');
      long long c;
      if (sp2 == std::string_view::npos || !detail::parse_int(val.substr(0, sp2), c))
        throw ParseError(line, "bad move");
      auto rest = detail::trim(val.substr(sp2 + 1));
      Move mv;
      mv.count = static_cast<int>(c);
      if (auto arrow = rest.find("->"); arrow != std::string_view::npos) {
        mv.from = parse_ranking(rest.substr(0, arrow), line);
        mv.to = parse_ranking(rest.substr(arrow + 2), line);
      } else {
        mv.from = parse_ranking(rest, line);
      }
      w.action.moves.push_back(std::move(mv));
    } else {
      throw ParseError(line, "unknown key '" + key + "'");
    }
  }
  if (sect != done) throw ParseError(line, "missing 'end'");
  if (!have_axiom || !have_rule || !have_B || !have_wb || !have_wa || !have_action || m < 1)
    throw ParseError(line, "witness header incomplete");
  if (m > kMaxM) throw ParseError(line, "m too large");
  auto build = [&](const std::vector<std::pair<int, Ranking>>& es) {
    Histogram h(m);
    for (auto& [c, r] : es) {
      if (r.m() != m) throw ParseError(line, "histogram ranking has wrong m");
      h.add(r, c);
    }
    return h;
  };
  w.before = build(hb);
  w.after = build(ha);
  for (const auto& mv : w.action.moves)
    if (mv.from.m() != m || (mv.to && mv.to->m() != m)) throw ParseError(line, "move ranking has wrong m");
  wf.digest_ok = digest && *digest == detail::hex64(detail::fnv1a(body));
  return wf;
}

inline WitnessFile parse_witness(const std::string& text) {
  std::istringstream in(text);
  return read_witness(in);
}

// ---- exhaustive enumeration over type multisets ----

namespace detail {

struct Item {
  int from;
  int to;  // -1 for abstention
};

// Number of multisets of size lo..hi over items, where the items drawing on
// the same source type share that type's count as a cap.
inline double count_multisets(const std::vector<Item>& items, const Histogram& h, int lo, int hi) {
  std::vector<int> per_group(h.size(), 0);
  for (const auto& it : items) ++per_group[it.from];
  std::vector<double> poly(hi + 1, 0.0);
  poly[0] = 1;
  for (int g = 0; g < h.size(); ++g) {
    const int q = per_group[g];
    if (q == 0) continue;
    const int cap = std::min(h[g], hi);
    std::vector<double> gp(cap + 1);
    for (int t = 0; t <= cap; ++t) {  // C(t+q-1, q-1)
      double c = 1;
      for (int i = 1; i <= q - 1; ++i) c = c * (t + i) / i;
      gp[t] = c;
    }
    std::vector<double> np(hi + 1, 0.0);
    for (int a = 0; a <= hi; ++a) {
      if (poly[a] == 0) continue;
      for (int t = 0; t <= cap && a + t <= hi; ++t) np[a + t] += poly[a] * gp[t];
    }
    poly.swap(np);
  }
  double s = 0;
  for (int k = std::max(lo, 1); k <= hi; ++k) s += poly[k];
  return s;
}

// Visits every multiset of exactly k items in a fixed order; visit sees the
// modified histogram and the per-item counts and returns true to stop.
class MultisetWalker {
 public:
  MultisetWalker(const std::vector<Item>& items, Histogram& h)
      : items_(items), h_(h), left_(h.counts()), cnt_(items.size(), 0) {}

  template <class Visit>
  bool run(int k, Visit&& visit) {
    return rec(0, k, visit);
  }

 private:
  template <class Visit>
  bool rec(size_t i, int left, Visit& visit) {
    if (left == 0) return visit(h_, cnt_);
    if (i == items_.size()) return false;
    const Item& it = items_[i];
    const int maxc = std::min(left, left_[it.from]);  // caps come from the original counts
    // larger counts of earlier items first
    for (int c = 0; c < maxc; ++c) step(it, +1);
    for (int c = maxc; c >= 0; --c) {
      cnt_[i] = c;
      if (rec(i + 1, left - c, visit)) return true;
      if (c > 0) step(it, -1);
    }
    cnt_[i] = 0;
    return false;
  }
  void step(const Item& it, int dir) {
    left_[it.from] -= dir;
    h_.add(it.from, -dir);
    if (it.to >= 0) h_.add(it.to, dir);
  }

  const std::vector<Item>& items_;
  Histogram& h_;
  std::vector<int> left_;
  std::vector<int> cnt_;
};

inline CoalitionAction make_action(ActionKind kind, const std::vector<Item>& items, const std::vector<int>& cnt,
                                   int m) {
  const auto& sp = space(m);
  CoalitionAction act{kind, {}};
  for (size_t i = 0; i < items.size(); ++i) {
    if (cnt[i] == 0) continue;
    Move mv{sp.ranking(items[i].from), std::nullopt, cnt[i]};
    if (items[i].to >= 0) mv.to = sp.ranking(items[i].to);
    act.moves.push_back(std::move(mv));
  }
  return act;
}

inline void require_B(const Histogram& h, int B) {
  if (B < 1) throw ArgumentError("B must be at least 1");
  if (B > h.n()) throw ArgumentError("B=" + std::to_string(B) + " exceeds n=" + std::to_string(h.n()));
}

// Items available to a coalition that wants target c instead of winner a.
inline std::vector<Item> group_items(Axiom ax, const Histogram& h, int a, int c) {
  const auto& sp = space(h.m());
  std::vector<Item> items;
  for (int r = 0; r < h.size(); ++r) {
    if (h[r] == 0) continue;
    if (ax == Axiom::mm) {
      for (int t = 0; t < h.size(); ++t)
        if (t != r && raises(sp, r, t, a)) items.push_back({r, t});
      continue;
    }
    if (!sp.prefers(r, c, a)) continue;
    if (ax == Axiom::par)
      items.push_back({r, -1});
    else if (ax == Axiom::hm)
      items.push_back({r, sp.reverse(r)});
    else
      for (int t = 0; t < h.size(); ++t)
        if (t != r) items.push_back({r, t});
  }
  return items;
}

inline ActionKind kind_of(Axiom ax) {
  switch (ax) {
    case Axiom::par: return ActionKind::abstain;
    case Axiom::hm: return ActionKind::flip;
    default: return ActionKind::change;
  }
}

}  // namespace detail

inline CheckResult check_cc(const Rule& rule, const Histogram& h) {
  const Wmg g = weighted_majority_graph(h);
  const int w = apply_rule(rule, h, g);
  auto cw = condorcet_winner(g);
  CheckResult res;
  if (cw && *cw != w) {
    res.sat = false;
    res.witness = ViolationWitness{Axiom::cc, rule, 1, h, {}, h, w, w, cw};
  }
  return res;
}

inline std::optional<CoalitionAction> maximin_par_coalition(const Histogram& h, int B);

// Generic group checker: sizes ascending, targets ascending, then the walker's order.
inline CheckResult check_group(Axiom ax, const Rule& rule, const Histogram& h, int B, const CheckOptions& opt = {}) {
  if (ax == Axiom::cc) return check_cc(rule, h);
  detail::require_B(h, B);
  const int m = h.m();
  const int a = apply_rule(rule, h);
  const int kmax = ax == Axiom::par ? std::min(B, h.n() - 1) : B;
  CheckResult res;
  if (kmax < 1) return res;
  if (rule.kind == RuleKind::constant) return res;  // the winner never moves

  auto emit = [&](const CoalitionAction& act, const Histogram& after, int w2) {
    res.sat = false;
    res.witness = ViolationWitness{ax, rule, B, h, act, after, a, w2, std::nullopt};
  };

  if (ax == Axiom::par && rule.kind == RuleKind::maximin && opt.fast_paths && !opt.sampled) {
    if (auto act = maximin_par_coalition(h, B)) {
      Histogram after = apply_action(h, *act);
      emit(*act, after, apply_rule(rule, after));
    }
    return res;
  }

  // one item list per target; MM has a single list for "anything but a"
  std::vector<int> targets;
  if (ax == Axiom::mm)
    targets.push_back(0);
  else
    for (int c = 1; c <= m; ++c)
      if (c != a) targets.push_back(c);
  std::vector<std::vector<detail::Item>> lists;
  double total = 0;
  for (int c : targets) {
    lists.push_back(detail::group_items(ax, h, a, c));
    total += detail::count_multisets(lists.back(), h, 1, kmax);
  }
  auto hit = [&](int c, int w2) { return ax == Axiom::mm ? w2 != a : w2 == c; };

  if (!opt.sampled) {
    if (total > opt.budget)
      throw BudgetError("exact " + axiom_name(ax) + " check needs " + std::to_string(static_cast<long long>(total)) +
                        " candidate actions, above the budget of " +
                        std::to_string(static_cast<long long>(opt.budget)));
    Histogram work = h;
    for (int k = 1; k <= kmax; ++k)
      for (size_t t = 0; t < targets.size(); ++t) {
        const auto& items = lists[t];
        detail::MultisetWalker walker(items, work);
        bool found = walker.run(k, [&](const Histogram& hh, const std::vector<int>& cnt) {
          int w2 = apply_rule(rule, hh);
          if (!hit(targets[t], w2)) return false;
          emit(detail::make_action(detail::kind_of(ax), items, cnt, m), hh, w2);
          return true;
        });
        if (found) return res;
      }
    return res;
  }

  // sampled mode: random multisets, only a verified hit counts
  std::mt19937_64 rng(opt.seed);
  for (long long s = 0; s < opt.samples; ++s) {
    size_t t = std::uniform_int_distribution<size_t>(0, targets.size() - 1)(rng);
    const auto& items = lists[t];
    if (items.empty()) continue;
    int k = std::uniform_int_distribution<int>(1, kmax)(rng);
    std::vector<int> cnt(items.size(), 0);
    std::vector<int> left = h.counts();
    Histogram hh = h;
    bool ok = true;
    for (int i = 0; i < k && ok; ++i) {
      size_t j = std::uniform_int_distribution<size_t>(0, items.size() - 1)(rng);
      if (left[items[j].from] == 0) {
        ok = false;
        break;
      }
      --left[items[j].from];
      hh.add(items[j].from, -1);
      if (items[j].to >= 0) hh.add(items[j].to, 1);
      ++cnt[j];
    }
    if (!ok || hh.n() < 1) continue;
    int w2 = apply_rule(rule, hh);
    if (hit(targets[t], w2)) {
      emit(detail::make_action(detail::kind_of(ax), items, cnt, m), hh, w2);
      if (verify_witness(*res.witness).empty()) return res;
      res = {};
    }
  }
  res.exhaustive = false;
  return res;
}

inline CheckResult check_par(const Rule& r, const Histogram& h, int B, const CheckOptions& o = {}) {
  return check_group(Axiom::par, r, h, B, o);
}
inline CheckResult check_hm(const Rule& r, const Histogram& h, int B, const CheckOptions& o = {}) {
  return check_group(Axiom::hm, r, h, B, o);
}
inline CheckResult check_mm(const Rule& r, const Histogram& h, int B, const CheckOptions& o = {}) {
  return check_group(Axiom::mm, r, h, B, o);
}
inline CheckResult check_sp(const Rule& r, const Histogram& h, int B, const CheckOptions& o = {}) {
  return check_group(Axiom::sp, r, h, B, o);
}

// ---- combinations ----

struct Combo {
  std::string label;
  bool cc = false;
  std::optional<Axiom> group;
};

inline Combo parse_combo(const std::string& s) {
  if (s == "cp") return {s, true, Axiom::par};
  if (s == "ch") return {s, true, Axiom::hm};
  if (s == "cm") return {s, true, Axiom::mm};
  if (s == "cs") return {s, true, Axiom::sp};
  // single axioms are accepted too
  if (s == "cc") return {s, true, std::nullopt};
  if (s == "par" || s == "hm" || s == "mm" || s == "sp") return {s, false, parse_axiom(s)};
  throw NameError("unknown combo '" + s + "'");
}

struct ComboResult {
  bool sat = true;
  bool exhaustive = true;
  std::vector<ViolationWitness> witnesses;
};

inline ComboResult check_combo(const Combo& combo, const Rule& rule, const Histogram& h, int B,
                               const CheckOptions& opt = {}, bool all_witnesses = true) {
  ComboResult out;
  if (combo.cc) {
    auto r = check_cc(rule, h);
    if (!r.sat) {
      out.sat = false;
      out.witnesses.push_back(*r.witness);
      if (!all_witnesses) return out;
    }
  }
  if (combo.group) {
    auto r = check_group(*combo.group, rule, h, B, opt);
    out.exhaustive = r.exhaustive;
    if (!r.sat) {
      out.sat = false;
      out.witnesses.push_back(*r.witness);
    }
  }
  return out;
}

inline ComboResult check_combo(const std::string& which, const Rule& rule, const Histogram& h, int B,
                               const CheckOptions& opt = {}) {
  return check_combo(parse_combo(which), rule, h, B, opt);
}

}  // namespace axlab

#include "maximin_par.hpp"
