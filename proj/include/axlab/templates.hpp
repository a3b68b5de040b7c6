#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "axioms.hpp"
#include "models.hpp"

namespace axlab {

// ---- integer helpers for sqrt(n) bands ----

inline long long ceil_sqrt(long long n) {
  long long r = static_cast<long long>(std::sqrt(static_cast<double>(n)));
  while (r * r < n) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= n) --r;
  return r;
}

// a <= k * sqrt(n), exactly
inline bool le_sqrt(long long a, long long k, long long n) {
  if (k >= 0) return a <= 0 || static_cast<__int128>(a) * a <= static_cast<__int128>(k) * k * n;
  return a < 0 && static_cast<__int128>(a) * a >= static_cast<__int128>(k) * k * n;
}
inline bool ge_sqrt(long long a, long long k, long long n) { return le_sqrt(-a, -k, n); }

// ---- template data ----

enum class WalkMode { par, hm, mm, sp };

inline std::string mode_name(WalkMode m) {
  switch (m) {
    case WalkMode::par: return "par";
    case WalkMode::hm: return "hm";
    case WalkMode::mm: return "mm";
    case WalkMode::sp: return "sp";
  }
  return "?";
}

inline Axiom mode_axiom(WalkMode m) {
  switch (m) {
    case WalkMode::par: return Axiom::par;
    case WalkMode::hm: return Axiom::hm;
    case WalkMode::mm: return Axiom::mm;
    case WalkMode::sp: return Axiom::sp;
  }
  return Axiom::cc;
}

enum class OpKind { flip, change };

struct Op {
  OpKind kind = OpKind::flip;
  int count = 1;  // abstract units before instantiation, votes after
  Ranking from;
  Ranking to;
  friend bool operator==(const Op&, const Op&) = default;
};

struct Condition {
  std::vector<int> winners;
  std::string target;  // empty: the winner cannot get here without a violation first
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct TemplateNode {
  std::string id;
  std::vector<Op> ops;  // edge from the parent; empty at the root
  std::vector<Condition> on;
  std::optional<int> condorcet;  // set on leaves
  bool leaf() const { return condorcet.has_value(); }
  friend bool operator==(const TemplateNode&, const TemplateNode&) = default;
};

struct RootPredicate {
  struct Weight {
    int a, b, w;
    friend bool operator==(const Weight&, const Weight&) = default;
  };
  std::string kind;  // cp_m4 | cm_m3 | general_m
  int m = 0;
  std::vector<Weight> weights;
  int band = 4;            // histogram band, in sqrt(n)
  int suffix_margin = 20;  // general_m: margins from {1..4} onto {5..m}, in sqrt(n)
  friend bool operator==(const RootPredicate&, const RootPredicate&) = default;
};

struct Template {
  std::string id;
  int m = 0;
  WalkMode mode = WalkMode::par;
  int budget = 7;  // abstract units on any root-to-leaf path
  RootPredicate predicate;
  std::vector<TemplateNode> nodes;  // nodes[0] is the root
  int n = 0, B = 0, scale = 0;      // filled by instantiate

  bool instantiated() const { return scale > 0; }
  int index(const std::string& id) const {
    for (size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].id == id) return static_cast<int>(i);
    return -1;
  }
  friend bool operator==(const Template&, const Template&) = default;
};

// ---- text format ----

inline std::string save_template(const Template& t) {
  std::ostringstream os;
  os << "template " << t.id << '\n';
  os << "m " << t.m << '\n';
  os << "mode " << mode_name(t.mode) << '\n';
  os << "budget " << t.budget << '\n';
  os << "predicate " << t.predicate.kind << '\n';
  for (const auto& w : t.predicate.weights) os << "weight " << w.a << ' ' << w.b << ' ' << w.w << '\n';
  if (t.predicate.band != 4) os << "band " << t.predicate.band << '\n';
  if (t.predicate.kind == "general_m") os << "suffix_margin " << t.predicate.suffix_margin << '\n';
  if (t.instantiated()) os << "instantiated " << t.n << ' ' << t.B << ' ' << t.scale << '\n';
  for (const auto& nd : t.nodes) {
    os << '\n';
    if (!nd.ops.empty()) {
      os << "[edge " << nd.id << "]\n";
      for (const auto& op : nd.ops) {
        if (op.kind == OpKind::flip)
          os << "flip " << op.count << ' ' << to_string(op.from) << '\n';
        else
          os << "change " << op.count << ' ' << to_string(op.from) << ' ' << to_string(op.to) << '\n';
      }
      os << '\n';
    }
    if (nd.leaf()) {
      os << "[leaf " << nd.id << "]\ncondorcet " << *nd.condorcet << '\n';
    } else {
      os << "[node " << nd.id << "]\n";
      for (const auto& c : nd.on) {
        os << "on {";
        for (size_t i = 0; i < c.winners.size(); ++i) os << (i ? "," : "") << c.winners[i];
        os << "} " << (c.target.empty() ? std::string("fail") : "goto " + c.target) << '\n';
      }
    }
  }
  return os.str();
}

namespace detail {

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream is{std::string(s)};
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

inline std::vector<std::string> validate(const Template& t) {
  std::vector<std::string> errs;
  const int m = t.m;
  if (m < 2 || m > kMaxM) {
    errs.push_back("m must be in 2.." + std::to_string(kMaxM));
    return errs;
  }
  const auto& kind = t.predicate.kind;
  if (kind != "cp_m4" && kind != "cm_m3" && kind != "general_m") errs.push_back("unknown predicate '" + kind + "'");
  if (kind == "cm_m3" && m != 3) errs.push_back("predicate cm_m3 needs m=3");
  if (kind == "cp_m4" && m != 4) errs.push_back("predicate cp_m4 needs m=4");
  if (kind == "general_m" && m < 5) errs.push_back("predicate general_m needs m>=5");
  for (const auto& w : t.predicate.weights)
    if (w.a < 1 || w.b < 1 || w.a > m || w.b > m || w.a == w.b)
      errs.push_back("weight on invalid edge " + std::to_string(w.a) + "," + std::to_string(w.b));
  if (t.budget < 1) errs.push_back("budget must be positive");
  if (t.nodes.empty() || t.nodes[0].id != "root") {
    errs.push_back("missing root node");
    return errs;
  }
  if (!t.nodes[0].ops.empty()) errs.push_back("root must not have an edge");
  std::map<std::string, int> refs;
  for (size_t i = 0; i < t.nodes.size(); ++i) {
    const auto& nd = t.nodes[i];
    if (i > 0 && nd.ops.empty()) errs.push_back("node " + nd.id + " has no edge");
    for (const auto& op : nd.ops) {
      if (op.count < 1) errs.push_back("edge " + nd.id + ": nonpositive count");
      if (op.from.m() != m || op.to.m() != m) errs.push_back("edge " + nd.id + ": ranking length differs from m");
      else if (op.kind == OpKind::flip && op.to != op.from.reversed())
        errs.push_back("edge " + nd.id + ": flip target must be the reverse");
      else if (op.kind == OpKind::change && op.to == op.from)
        errs.push_back("edge " + nd.id + ": change must alter the vote");
    }
    if (nd.leaf()) {
      if (*nd.condorcet < 1 || *nd.condorcet > m) errs.push_back("leaf " + nd.id + ": condorcet out of range");
      if (!nd.on.empty()) errs.push_back("leaf " + nd.id + " has winner-conditions");
      continue;
    }
    std::vector<int> seen(m + 1, 0);
    for (const auto& c : nd.on) {
      for (int a : c.winners) {
        if (a < 1 || a > m) errs.push_back("node " + nd.id + ": winner " + std::to_string(a) + " out of range");
        else ++seen[a];
      }
      if (!c.target.empty()) {
        ++refs[c.target];
        if (c.target == "root") errs.push_back("node " + nd.id + " points back at root");
        else if (t.index(c.target) < 0) errs.push_back("node " + nd.id + ": unknown target " + c.target);
      }
    }
    for (int a = 1; a <= m; ++a) {
      if (seen[a] == 0) errs.push_back("node " + nd.id + ": winner " + std::to_string(a) + " not covered");
      if (seen[a] > 1) errs.push_back("node " + nd.id + ": winner " + std::to_string(a) + " covered twice");
    }
  }
  for (size_t i = 1; i < t.nodes.size(); ++i) {
    int r = refs.count(t.nodes[i].id) ? refs[t.nodes[i].id] : 0;
    if (r != 1) errs.push_back("node " + t.nodes[i].id + " is referenced " + std::to_string(r) + " times");
  }
  if (!errs.empty()) return errs;
  // path budget; a valid tree by now, so plain recursion terminates
  const long long cap = static_cast<long long>(t.budget) * (t.instantiated() ? t.scale : 1);
  std::function<void(int, long long)> walk = [&](int i, long long used) {
    const auto& nd = t.nodes[i];
    for (const auto& op : nd.ops) used += op.count;
    if (used > cap) {
      errs.push_back("path to " + nd.id + " uses " + std::to_string(used) + " > budget " + std::to_string(cap));
      return;
    }
    for (const auto& c : nd.on)
      if (!c.target.empty()) walk(t.index(c.target), used);
  };
  walk(0, 0);
  return errs;
}

}  // namespace detail

inline Template load_template(std::istream& in) {
  Template t;
  std::string raw;
  int line = 0;
  enum { header, node, edge, leaf } sect = header;
  std::string cur;
  std::map<std::string, std::set<std::string>> parts;  // id -> {"node","edge","leaf"}
  bool have_id = false, have_m = false, have_pred = false;
  auto get = [&](const std::string& id) -> TemplateNode& {
    int i = t.index(id);
    if (i >= 0) return t.nodes[i];
    t.nodes.push_back(TemplateNode{id, {}, {}, std::nullopt});
    return t.nodes.back();
  };
  auto num = [&](const std::string& s) {
    long long v;
    if (!detail::parse_int(s, v) || v < -1000000000 || v > 1000000000) throw ParseError(line, "bad integer '" + s + "'");
    return static_cast<int>(v);
  };
  auto rank = [&](const std::string& s) {
    Ranking r = parse_ranking(s, line);
    if (have_m && r.m() != t.m) throw ParseError(line, "ranking " + s + " has the wrong length");
    return r;
  };
  while (std::getline(in, raw)) {
    ++line;
    auto s = detail::strip_comment(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(line, "unterminated section header");
      auto w = detail::split_ws(s.substr(1, s.size() - 2));
      if (w.size() != 2) throw ParseError(line, "section header needs a kind and an id");
      if (!have_m) throw ParseError(line, "'m' must precede the sections");
      if (w[0] == "node") sect = node;
      else if (w[0] == "edge") sect = edge;
      else if (w[0] == "leaf") sect = leaf;
      else throw ParseError(line, "unknown section kind '" + w[0] + "'");
      if (!parts[w[1]].insert(w[0]).second) throw ParseError(line, "duplicate section [" + w[0] + " " + w[1] + "]");
      if (parts[w[1]].count("node") && parts[w[1]].count("leaf"))
        throw ParseError(line, w[1] + " cannot be both node and leaf");
      cur = w[1];
      if (t.nodes.empty() && cur != "root") get("root");
      get(cur);
      continue;
    }
    auto w = detail::split_ws(s);
    const std::string& key = w[0];
    auto arity = [&](size_t k) {
      if (w.size() != k) throw ParseError(line, "'" + key + "' expects " + std::to_string(k - 1) + " arguments");
    };
    if (sect == header) {
      if (key == "template") { arity(2); t.id = w[1]; have_id = true; }
      else if (key == "m") { arity(2); t.m = num(w[1]); have_m = true;
        if (t.m < 2 || t.m > kMaxM) throw ParseError(line, "m out of range"); }
      else if (key == "mode") {
        arity(2);
        if (w[1] == "par") t.mode = WalkMode::par;
        else if (w[1] == "hm") t.mode = WalkMode::hm;
        else if (w[1] == "mm") t.mode = WalkMode::mm;
        else if (w[1] == "sp") t.mode = WalkMode::sp;
        else throw ParseError(line, "unknown mode '" + w[1] + "'");
      } else if (key == "budget") { arity(2); t.budget = num(w[1]); }
      else if (key == "predicate") { arity(2); t.predicate.kind = w[1]; have_pred = true; }
      else if (key == "weight") { arity(4); t.predicate.weights.push_back({num(w[1]), num(w[2]), num(w[3])}); }
      else if (key == "band") { arity(2); t.predicate.band = num(w[1]); }
      else if (key == "suffix_margin") { arity(2); t.predicate.suffix_margin = num(w[1]); }
      else if (key == "instantiated") { arity(4); t.n = num(w[1]); t.B = num(w[2]); t.scale = num(w[3]); }
      else throw ParseError(line, "unknown header key '" + key + "'");
      continue;
    }
    TemplateNode& nd = get(cur);
    if (sect == edge) {
      if (key == "flip") {
        arity(3);
        Ranking f = rank(w[2]);
        nd.ops.push_back({OpKind::flip, num(w[1]), f, f.reversed()});
      } else if (key == "change") {
        arity(4);
        nd.ops.push_back({OpKind::change, num(w[1]), rank(w[2]), rank(w[3])});
      } else {
        throw ParseError(line, "edges hold 'flip' or 'change' lines");
      }
    } else if (sect == leaf) {
      if (key != "condorcet") throw ParseError(line, "leaves hold a 'condorcet' line");
      arity(2);
      if (nd.condorcet) throw ParseError(line, "second condorcet line");
      nd.condorcet = num(w[1]);
    } else {
      // on {a,b} goto X | on {a,b} fail
      if (key != "on") throw ParseError(line, "nodes hold 'on {...}' lines");
      auto open = s.find('{'), close = s.find('}');
      if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        throw ParseError(line, "winner set must be written {a,b,...}");
      Condition c;
      std::string inner(s.substr(open + 1, close - open - 1));
      std::replace(inner.begin(), inner.end(), ',', ' ');
      for (const auto& a : detail::split_ws(inner)) c.winners.push_back(num(a));
      if (c.winners.empty()) throw ParseError(line, "empty winner set");
      auto rest = detail::split_ws(s.substr(close + 1));
      if (rest.size() == 2 && rest[0] == "goto") c.target = rest[1];
      else if (!(rest.size() == 1 && rest[0] == "fail")) throw ParseError(line, "expected 'goto ID' or 'fail'");
      nd.on.push_back(std::move(c));
    }
  }
  if (!have_id || !have_m || !have_pred) throw ParseError(line, "header needs template, m and predicate");
  t.predicate.m = t.m;
  for (const auto& [id, kinds] : parts)
    if (id != "root" && !kinds.count("node") && !kinds.count("leaf"))
      throw TemplateError("edge " + id + " leads to neither a node nor a leaf");
  auto errs = detail::validate(t);
  if (!errs.empty()) {
    std::string msg = "template " + t.id + " is invalid:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw TemplateError(msg);
  }
  return t;
}

inline Template parse_template(const std::string& text) {
  std::istringstream in(text);
  return load_template(in);
}

// ---- root membership ----

inline bool check_root_membership(const RootPredicate& p, const Histogram& h, long long n, int B) {
  if (h.n() != n) throw ArgumentError("histogram has n=" + std::to_string(h.n()) + ", expected " + std::to_string(n));
  if (B < 1 || static_cast<long long>(B) * B > n) throw ArgumentError("membership needs 1 <= B <= sqrt(n)");
  if (h.m() != p.m) return false;
  const Wmg g = weighted_majority_graph(h);
  if (p.kind == "cm_m3") {
    for (auto [a, b] : {std::pair{1, 2}, std::pair{2, 3}, std::pair{3, 1}}) {
      int mg = g.margin(a, b);
      if (mg < 0 || !le_sqrt(mg, 1, n)) return false;
    }
    return true;
  }
  for (const auto& w : p.weights)
    if (!ge_sqrt(g.margin(w.a, w.b), w.w - 1, n) || !le_sqrt(g.margin(w.a, w.b), w.w + 1, n)) return false;
  const long long f = factorial(h.m());
  for (int r = 0; r < h.size(); ++r)
    if (!le_sqrt(std::llabs(f * h[r] - n), static_cast<long long>(p.band) * f, n)) return false;
  if (p.kind == "general_m")
    for (int x = 1; x <= 4; ++x)
      for (int y = 5; y <= p.m; ++y)
        if (!ge_sqrt(g.margin(x, y), p.suffix_margin, n)) return false;
  return true;
}

// Votes of each ranking that some path consumes beyond what earlier ops on
// that path put back. In abstract units for abstract templates.
inline std::vector<int> template_reserves(const Template& t) {
  const auto& sp = space(t.m);
  std::vector<int> need(sp.size(), 0);
  std::function<void(int, std::vector<int>)> walk = [&](int i, std::vector<int> net) {
    for (const auto& op : t.nodes[i].ops) {
      int f = sp.index(op.from), to = sp.index(op.to);
      need[f] = std::max(need[f], op.count - net[f]);
      net[f] -= op.count;
      net[to] += op.count;
    }
    for (const auto& c : t.nodes[i].on)
      if (!c.target.empty()) walk(t.index(c.target), net);
  };
  walk(0, std::vector<int>(sp.size(), 0));
  return need;
}

// ---- root generation ----

namespace detail {

class RootSearch {
 public:
  RootSearch(const RootPredicate& p, int n, std::uint64_t seed, std::vector<int> reserve)
      : p_(p), sp_(space(p.m)), n_(n), rs_(std::sqrt(static_cast<double>(n))), st_(Stream::derive(seed, 0x726f6f74, 0)),
        reserve_(std::move(reserve)) {
    if (reserve_.empty()) reserve_.assign(sp_.size(), 0);
    u_ = static_cast<double>(n) / sp_.size();
    bandlim_ = p.band * rs_ - 1.0;
    auto add = [&](int a, int b, double lo, double hi) {
      int pa = std::min(a, b), pb = std::max(a, b);
      cons_.push_back({sp_.pair_index(pa, pb), a < b ? 1 : -1, lo, hi});
    };
    if (p.kind == "cm_m3") {
      for (auto [a, b] : {std::pair{1, 2}, std::pair{2, 3}, std::pair{3, 1}}) add(a, b, 1, rs_);
    } else {
      for (const auto& w : p.weights) {
        double c = (w.w + 0.8 * (st_.uniform() - 0.5)) * rs_;
        double tol = std::max(1.0, 0.25 * rs_);
        add(w.a, w.b, c - tol, c + tol);
      }
      if (p.kind == "general_m")
        for (int x = 1; x <= 4; ++x)
          for (int y = 5; y <= p.m; ++y) add(x, y, p.suffix_margin * rs_ + 1, 1e18);
    }
  }

  std::optional<Histogram> run() {
    // start from an impartial-culture draw
    h_.assign(sp_.size(), 0);
    for (int j = 0; j < n_; ++j) ++h_[st_.below(sp_.size())];
    mg_.assign(sp_.pair_count(), 0);
    for (int r = 0; r < sp_.size(); ++r)
      for (int q = 0; q < sp_.pair_count(); ++q) mg_[q] += h_[r] * sp_.sign(r, q);

    const long long max_iter = 400LL * n_ + 100000;
    int stall = 0;
    for (long long it = 0; it < max_iter && stall < 4000; ++it) {
      if (hard() == 0 && soft() == 0) break;
      int br = -1, bs = -1;
      double best = 1e300;
      for (int k = 0; k < 48; ++k) {
        int r = st_.below(sp_.size()), s = st_.below(sp_.size());
        if (r == s || h_[r] == 0) continue;
        double d = delta(r, s);
        if (d < best) best = d, br = r, bs = s;
      }
      if (br < 0) continue;
      if (best < 0 || (best == 0 && st_.uniform() < 0.3)) {
        move(br, bs);
        stall = best < 0 ? 0 : stall + 1;
      } else {
        ++stall;
      }
    }
    if (hard() > 0) return std::nullopt;
    // wander: single moves that never raise the objective
    for (int k = 0; k < 2 * n_; ++k) {
      int r = st_.below(sp_.size()), s = st_.below(sp_.size());
      if (r != s && h_[r] > 0 && delta(r, s) <= 0) move(r, s);
    }
    return Histogram(p_.m, h_);
  }

 private:
  struct Con {
    int pair, orient;
    double lo, hi;
  };
  static double out(double v, double lo, double hi) { return v < lo ? lo - v : (v > hi ? v - hi : 0); }
  double band_pen(int c) const { return std::max(0.0, std::abs(c - u_) - bandlim_); }
  double res_pen(int r, int c) const { return std::max(0, reserve_[r] - c); }
  double hard() const {
    double s = 0;
    for (const auto& c : cons_) s += out(c.orient * mg_[c.pair], c.lo, c.hi);
    if (p_.kind != "cm_m3")
      for (int r = 0; r < sp_.size(); ++r) s += band_pen(h_[r]);
    return s;
  }
  double soft() const {
    double s = 0;
    for (int r = 0; r < sp_.size(); ++r) s += res_pen(r, h_[r]);
    return s;
  }
  // objective change for moving one vote from r to s
  double delta(int r, int s) const {
    double d = 0;
    for (const auto& c : cons_) {
      int v = c.orient * mg_[c.pair];
      int nv = v + c.orient * (sp_.sign(s, c.pair) - sp_.sign(r, c.pair));
      d += 4 * (out(nv, c.lo, c.hi) - out(v, c.lo, c.hi));
    }
    if (p_.kind != "cm_m3")
      d += 4 * (band_pen(h_[r] - 1) - band_pen(h_[r]) + band_pen(h_[s] + 1) - band_pen(h_[s]));
    d += res_pen(r, h_[r] - 1) - res_pen(r, h_[r]) + res_pen(s, h_[s] + 1) - res_pen(s, h_[s]);
    return d;
  }
  void move(int r, int s) {
    --h_[r];
    ++h_[s];
    for (int q = 0; q < sp_.pair_count(); ++q) mg_[q] += sp_.sign(s, q) - sp_.sign(r, q);
  }

  const RootPredicate& p_;
  const RankingSpace& sp_;
  int n_;
  double rs_, u_ = 0, bandlim_ = 0;
  Stream st_;
  std::vector<int> reserve_;
  std::vector<Con> cons_;
  std::vector<int> h_, mg_;
};

// WMG-neutral randomization: trade a reverse pair {r, rev r} for {s, rev s}.
inline void neutral_shuffle(std::vector<int>& h, const RankingSpace& sp, Stream& st, int steps,
                            const std::function<bool(const std::vector<int>&)>& ok) {
  for (int k = 0; k < steps; ++k) {
    int r = st.below(sp.size()), s = st.below(sp.size());
    int rr = sp.reverse(r), rs = sp.reverse(s);
    if (s == r || s == rr || h[r] == 0 || h[rr] == 0) continue;
    --h[r], --h[rr], ++h[s], ++h[rs];
    if (!ok(h)) ++h[r], ++h[rr], --h[s], --h[rs];
  }
}

}  // namespace detail

// cm_m3: balanced start, then flip k_i votes of rev[123], rev[231], rev[312]
// onto the cyclic rankings with random k_i <= floor(sqrt(n)/2), kept when the
// cycle margins land in range. Others: local search from an IC draw toward
// the target margins. Both finish with a WMG-neutral shuffle.
inline Histogram generate_root_profile(const RootPredicate& p, int n, std::uint64_t seed,
                                       const std::vector<int>& reserve = {}) {
  if (n < 16) throw MembershipError("n=" + std::to_string(n) + " is too small for a template root");
  const auto& sp = space(p.m);
  std::vector<int> res = reserve.empty() ? std::vector<int>(sp.size(), 0) : reserve;
  if (p.kind != "cm_m3") {
    // a reserve above the band ceiling can never be met; aim for the ceiling
    const int ceiling = static_cast<int>(n / static_cast<double>(sp.size()) + p.band * std::sqrt(double(n))) - 1;
    for (auto& r : res) r = std::min(r, ceiling);
  }
  for (int attempt = 0; attempt < 16; ++attempt) {
    Stream st = Stream::derive(seed, 0x67656e, attempt);
    std::vector<int> h;
    if (p.kind == "cm_m3") {
      if (p.m != 3) throw ArgumentError("cm_m3 needs m=3");
      const int q = n / 6, rem = n % 6;
      h.assign(6, q);
      // remainder: whole reverse pairs, plus one odd vote on a random type
      for (int i = 0; i < rem / 2; ++i) {
        int r = st.below(6);
        ++h[r], ++h[sp.reverse(r)];
      }
      if (rem % 2) ++h[st.below(6)];
      const int kmax = static_cast<int>(ceil_sqrt(n) / 2);
      const int cyc[3] = {sp.index({1, 2, 3}), sp.index({2, 3, 1}), sp.index({3, 1, 2})};
      bool placed = false;
      for (int tries = 0; tries < 2000 && !placed; ++tries) {
        std::vector<int> t = h;
        for (int c : cyc) {
          int k = st.below(kmax + 1);
          k = std::min(k, t[sp.reverse(c)]);
          t[sp.reverse(c)] -= k;
          t[c] += k;
        }
        // zero cycle margins pass the predicate but leave leaves without a
        // strict Condorcet winner, so the generator asks for at least 1
        const Wmg g = weighted_majority_graph(Histogram(3, t));
        const bool strict = g.margin(1, 2) > 0 && g.margin(2, 3) > 0 && g.margin(3, 1) > 0;
        if (strict && check_root_membership(p, Histogram(3, t), n, 1)) {
          h = t;
          placed = true;
        }
      }
      if (!placed) continue;
    } else {
      detail::RootSearch search(p, n, seed ^ (0x9e37ULL * (attempt + 1)), res);
      auto got = search.run();
      if (!got) continue;
      h = got->counts();
    }
    const std::vector<int> start = h;
    auto keeps = [&](const std::vector<int>& t) {
      for (int r = 0; r < sp.size(); ++r)
        if (t[r] < std::min(res[r], start[r])) return false;
      return check_root_membership(p, Histogram(p.m, t), n, 1);
    };
    detail::neutral_shuffle(h, sp, st, 4 * n, keeps);
    Histogram out(p.m, h);
    if (check_root_membership(p, out, n, 1)) return out;
  }
  throw MembershipError("no root satisfying " + p.kind + " found for n=" + std::to_string(n));
}

// ---- instantiation ----

inline Template instantiate(const Template& t, int n, int B) {
  if (t.instantiated()) throw ArgumentError("template is already instantiated");
  if (n < 1) throw ArgumentError("n must be positive");
  if (B < 1 || static_cast<long long>(B) * B > n) throw ArgumentError("instantiate needs 1 <= B <= sqrt(n)");
  Template out = t;
  out.n = n;
  out.B = B;
  out.scale = static_cast<int>(ceil_sqrt(n));
  const int q = (out.scale + B - 1) / B;
  const int last = out.scale - B * (q - 1);
  for (auto& nd : out.nodes) {
    std::vector<Op> ops;
    for (const auto& op : nd.ops)
      for (int u = 0; u < op.count; ++u)
        for (int i = 0; i < q; ++i) ops.push_back({op.kind, i + 1 < q ? B : last, op.from, op.to});
    nd.ops = std::move(ops);
  }
  return out;
}

// ---- walking ----

struct WalkStep {
  std::string node;
  std::optional<Op> op;  // absent for the entry step of a node
  Histogram h;
  int winner = 0;
};

struct WalkResult {
  ViolationWitness witness;
  std::vector<WalkStep> path;
  Axiom axiom = Axiom::cc;
};

namespace detail {

struct Walker {
  const Template& t;
  const Rule& rule;
  const RankingSpace& sp;
  WalkResult res;

  int winner(const Histogram& h) const { return apply_rule(rule, h); }

  bool finish(ViolationWitness w) {
    std::string why = verify_witness(w);
    if (!why.empty()) throw WalkError("extracted witness failed verification: " + why);
    res.axiom = w.axiom;
    res.witness = std::move(w);
    return true;
  }

  bool check_cc(const Histogram& h, int w) {
    auto cw = condorcet_winner(h);
    if (cw && *cw != w) return finish({Axiom::cc, rule, t.B, h, {}, h, w, w, cw});
    return false;
  }

  static CoalitionAction one_move(ActionKind k, const Ranking& from, std::optional<Ranking> to, int count) {
    return CoalitionAction{k, {Move{from, std::move(to), count}}};
  }

  // stopping rule for one operation taking (h1, w1) to (h2, w2)
  bool trigger(const Op& op, const Histogram& h1, int w1, const Histogram& h2, int w2) {
    if (w1 == w2) return false;
    const Ranking &f = op.from, &to = op.to;
    const int k = op.count;
    switch (t.mode) {
      case WalkMode::par: {
        if (!f.prefers(w2, w1)) return false;
        // both P1 minus k x from and P2 minus k x to equal this Q
        Histogram q = h1;
        q.add(f, -k);
        const int wq = winner(q);
        if (f.prefers(wq, w1)) return finish({Axiom::par, rule, t.B, h1, one_move(ActionKind::abstain, f, {}, k), q, w1, wq, {}});
        return finish({Axiom::par, rule, t.B, h2, one_move(ActionKind::abstain, to, {}, k), q, w2, wq, {}});
      }
      case WalkMode::hm:
        if (f.prefers(w2, w1))
          return finish({Axiom::hm, rule, t.B, h1, one_move(ActionKind::flip, f, to, k), h2, w1, w2, {}});
        if (to.prefers(w1, w2) && to.reversed() == f)
          return finish({Axiom::hm, rule, t.B, h2, one_move(ActionKind::flip, to, f, k), h1, w2, w1, {}});
        return false;
      case WalkMode::mm:
        if (raises(f, to, w1))
          return finish({Axiom::mm, rule, t.B, h1, one_move(ActionKind::change, f, to, k), h2, w1, w2, {}});
        if (raises(to, f, w2))
          return finish({Axiom::mm, rule, t.B, h2, one_move(ActionKind::change, to, f, k), h1, w2, w1, {}});
        return false;
      case WalkMode::sp:
        if (f.prefers(w2, w1))
          return finish({Axiom::sp, rule, t.B, h1, one_move(ActionKind::change, f, to, k), h2, w1, w2, {}});
        if (to.prefers(w1, w2))
          return finish({Axiom::sp, rule, t.B, h2, one_move(ActionKind::change, to, f, k), h1, w2, w1, {}});
        return false;
    }
    return false;
  }
};

}  // namespace detail

inline WalkResult walk(const Template& t, const Rule& rule, const Histogram& root, int B) {
  if (!t.instantiated()) throw ArgumentError("walk needs an instantiated template");
  if (B != t.B) throw ArgumentError("walk B differs from the instantiated B");
  if (!rule.anonymous()) throw ArgumentError(name(rule) + " is not anonymous");
  if (root.m() != t.m) throw DimensionError("root histogram has the wrong m");
  if (!check_root_membership(t.predicate, root, t.n, B))
    throw MembershipError("root histogram fails the " + t.predicate.kind + " predicate");
  detail::Walker wk{t, rule, space(t.m), {}};
  Histogram h = root;
  int w = wk.winner(h);
  long long moved = 0;
  const long long cap = static_cast<long long>(t.budget) * t.scale;
  int at = 0;
  wk.res.path.push_back({t.nodes[0].id, std::nullopt, h, w});
  if (wk.check_cc(h, w)) return wk.res;
  while (true) {
    const auto& nd = t.nodes[at];
    if (nd.leaf()) {
      auto cw = condorcet_winner(h);
      if (!cw || *cw != *nd.condorcet)
        throw WalkError("leaf " + nd.id + " expected condorcet winner " + std::to_string(*nd.condorcet));
      if (wk.check_cc(h, w)) return wk.res;
      throw WalkError("leaf " + nd.id + " reached without a violation");
    }
    const Condition* pick = nullptr;
    for (const auto& c : nd.on)
      if (std::find(c.winners.begin(), c.winners.end(), w) != c.winners.end()) pick = &c;
    if (!pick || pick->target.empty())
      throw WalkError("winner " + std::to_string(w) + " at node " + nd.id + " has no branch");
    at = t.index(pick->target);
    for (const auto& op : t.nodes[at].ops) {
      if (h.count(op.from) < op.count)
        throw WalkError("not enough " + to_string(op.from) + " votes on the edge into " + t.nodes[at].id);
      Histogram h2 = h;
      h2.add(op.from, -op.count);
      h2.add(op.to, op.count);
      moved += op.count;
      if (moved > cap) throw WalkError("walk exceeded the path budget");
      int w2 = wk.winner(h2);
      wk.res.path.push_back({t.nodes[at].id, op, h2, w2});
      if (wk.trigger(op, h, w, h2, w2)) return wk.res;
      if (wk.check_cc(h2, w2)) return wk.res;
      h = std::move(h2);
      w = w2;
    }
  }
}

inline void write_walk(std::ostream& os, const Template& t, const WalkResult& r) {
  os << "walk template " << t.id << " n " << t.n << " B " << t.B << " scale " << t.scale << '\n';
  os << "axiom " << axiom_name(r.axiom) << '\n';
  os << "steps " << r.path.size() << '\n';
  const Histogram* prev = nullptr;
  for (size_t i = 0; i < r.path.size(); ++i) {
    const auto& s = r.path[i];
    os << "step " << i << " node " << s.node << " winner " << s.winner;
    if (s.op) {
      os << " op " << (s.op->kind == OpKind::flip ? "flip " : "change ") << s.op->count << ' ' << to_string(s.op->from);
      if (s.op->kind == OpKind::change) os << ' ' << to_string(s.op->to);
    }
    if (prev) {
      os << " delta";
      for (int q = 0; q < s.h.size(); ++q)
        if (s.h[q] != (*prev)[q]) os << ' ' << to_string(space(t.m).ranking(q)) << (s.h[q] > (*prev)[q] ? "+" : "") << s.h[q] - (*prev)[q];
    }
    os << '\n';
    prev = &s.h;
  }
  write_witness(os, r.witness);
}

}  // namespace axlab

#include "builtin_templates.hpp"
