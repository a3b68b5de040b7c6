#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace axlab {

// Exact histogram-indexed code paths keep m! count vectors around.
inline constexpr int kMaxM = 8;

inline long long factorial(int k) {
  long long f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

struct Ranking {
  std::vector<int> order;  // most-preferred first, alternatives 1..m

  Ranking() = default;
  explicit Ranking(std::vector<int> o) : order(std::move(o)) {
    const int m = static_cast<int>(order.size());
    if (m < 1 || m > kMaxM) throw DimensionError("ranking length must be in 1.." + std::to_string(kMaxM));
    std::vector<bool> seen(m + 1, false);
    for (int a : order) {
      if (a < 1 || a > m || seen[a]) throw ArgumentError("ranking is not a permutation of 1..m");
      seen[a] = true;
    }
  }
  Ranking(std::initializer_list<int> o) : Ranking(std::vector<int>(o)) {}

  int m() const { return static_cast<int>(order.size()); }
  int top() const { return order.front(); }
  int position(int a) const {
    for (int i = 0; i < m(); ++i)
      if (order[i] == a) return i;
    throw ArgumentError("alternative " + std::to_string(a) + " out of range");
  }
  bool prefers(int a, int b) const { return position(a) < position(b); }
  Ranking reversed() const { return Ranking(std::vector<int>(order.rbegin(), order.rend())); }

  friend bool operator==(const Ranking&, const Ranking&) = default;
  friend auto operator<=>(const Ranking&, const Ranking&) = default;
};

// Tables for all m! rankings in lexicographic order. One shared instance per m.
class RankingSpace {
 public:
  explicit RankingSpace(int m) : m_(m) {
    if (m < 1 || m > kMaxM) throw DimensionError("m must be in 1.." + std::to_string(kMaxM));
    std::vector<int> o(m);
    std::iota(o.begin(), o.end(), 1);
    do {
      rankings_.emplace_back(o);
    } while (std::next_permutation(o.begin(), o.end()));
    size_ = static_cast<int>(rankings_.size());
    pos_.resize(static_cast<size_t>(size_) * (m + 1));
    for (int r = 0; r < size_; ++r)
      for (int i = 0; i < m; ++i) pos_[r * (m + 1) + rankings_[r].order[i]] = i;
    for (int a = 1; a <= m; ++a)
      for (int b = a + 1; b <= m; ++b) pairs_.push_back({a, b});
    const int P = pair_count();
    sign_.resize(static_cast<size_t>(size_) * P);
    for (int r = 0; r < size_; ++r)
      for (int p = 0; p < P; ++p) sign_[r * P + p] = prefers(r, pairs_[p][0], pairs_[p][1]) ? 1 : -1;
    rev_.resize(size_);
    for (int r = 0; r < size_; ++r) rev_[r] = index(rankings_[r].reversed());
  }

  int m() const { return m_; }
  int size() const { return size_; }
  const Ranking& ranking(int idx) const { return rankings_[idx]; }
  int reverse(int idx) const { return rev_[idx]; }
  int pos(int idx, int a) const { return pos_[idx * (m_ + 1) + a]; }
  bool prefers(int idx, int a, int b) const { return pos(idx, a) < pos(idx, b); }
  int top(int idx) const { return rankings_[idx].order.front(); }

  int pair_count() const { return m_ * (m_ - 1) / 2; }
  const std::array<int, 2>& pair(int p) const { return pairs_[p]; }
  int pair_index(int a, int b) const {  // requires a < b
    return (a - 1) * (2 * m_ - a) / 2 + (b - a - 1);
  }
  // +1 when ranking idx puts the smaller alternative of pair p first
  int sign(int idx, int p) const { return sign_[idx * pair_count() + p]; }

  // Lehmer code in lexicographic order
  int index(const Ranking& r) const {
    if (r.m() != m_) throw DimensionError("ranking has m=" + std::to_string(r.m()) + ", expected " + std::to_string(m_));
    int idx = 0;
    unsigned used = 0;
    for (int i = 0; i < m_; ++i) {
      int a = r.order[i];
      int smaller = 0;
      for (int b = 1; b < a; ++b)
        if (!(used >> b & 1u)) ++smaller;
      used |= 1u << a;
      idx += smaller * static_cast<int>(factorial(m_ - 1 - i));
    }
    return idx;
  }

 private:
  int m_;
  int size_ = 0;
  std::vector<Ranking> rankings_;
  std::vector<int> pos_;
  std::vector<std::array<int, 2>> pairs_;
  std::vector<signed char> sign_;
  std::vector<int> rev_;
};

inline const RankingSpace& space(int m) {
  if (m < 1 || m > kMaxM) throw DimensionError("m must be in 1.." + std::to_string(kMaxM));
  static std::array<std::once_flag, kMaxM + 1> flags;
  static std::array<std::unique_ptr<RankingSpace>, kMaxM + 1> spaces;
  std::call_once(flags[m], [m] { spaces[m] = std::make_unique<RankingSpace>(m); });
  return *spaces[m];
}

class Histogram {
 public:
  Histogram() = default;
  explicit Histogram(int m) : m_(m), counts_(space(m).size(), 0) {}
  Histogram(int m, std::vector<int> counts) : m_(m), counts_(std::move(counts)) {
    if (static_cast<int>(counts_.size()) != space(m).size())
      throw DimensionError("histogram needs " + std::to_string(space(m).size()) + " entries");
    for (int c : counts_) {
      if (c < 0) throw ArgumentError("histogram entries must be nonnegative");
      n_ += c;
    }
  }

  int m() const { return m_; }
  int n() const { return n_; }
  int size() const { return static_cast<int>(counts_.size()); }
  int operator[](int idx) const { return counts_[idx]; }
  int count(const Ranking& r) const { return counts_[space(m_).index(r)]; }
  const std::vector<int>& counts() const { return counts_; }

  void add(int idx, int k) {
    if (counts_[idx] + k < 0) throw ArgumentError("histogram entry would become negative");
    counts_[idx] += k;
    n_ += k;
  }
  void add(const Ranking& r, int k) { add(space(m_).index(r), k); }

  friend bool operator==(const Histogram& a, const Histogram& b) {
    return a.m_ == b.m_ && a.counts_ == b.counts_;
  }

 private:
  int m_ = 0;
  int n_ = 0;
  std::vector<int> counts_;
};

struct Profile {
  int m = 0;
  std::vector<Ranking> votes;
  int n() const { return static_cast<int>(votes.size()); }
};

inline Histogram histogram_of(const Profile& p) {
  if (p.votes.empty()) throw ArgumentError("profile must contain at least one vote");
  Histogram h(p.m);
  const auto& sp = space(p.m);
  for (const auto& v : p.votes) h.add(sp.index(v), 1);
  return h;
}

// Voters laid out in lexicographic ranking order.
inline Profile profile_of(const Histogram& h) {
  Profile p{h.m(), {}};
  const auto& sp = space(h.m());
  for (int r = 0; r < h.size(); ++r)
    for (int k = 0; k < h[r]; ++k) p.votes.push_back(sp.ranking(r));
  return p;
}

class Wmg {
 public:
  explicit Wmg(int m) : m_(m), mg_(static_cast<size_t>(m + 1) * (m + 1), 0) {}
  int m() const { return m_; }
  int margin(int a, int b) const { return mg_[a * (m_ + 1) + b]; }
  void set(int a, int b, int v) {
    mg_[a * (m_ + 1) + b] = v;
    mg_[b * (m_ + 1) + a] = -v;
  }
  friend bool operator==(const Wmg&, const Wmg&) = default;

 private:
  int m_;
  std::vector<int> mg_;
};

inline Wmg weighted_majority_graph(const Histogram& h) {
  const auto& sp = space(h.m());
  const int P = sp.pair_count();
  std::vector<int> acc(P, 0);
  for (int r = 0; r < h.size(); ++r) {
    const int c = h[r];
    if (c == 0) continue;
    for (int p = 0; p < P; ++p) acc[p] += c * sp.sign(r, p);
  }
  Wmg g(h.m());
  for (int p = 0; p < P; ++p) g.set(sp.pair(p)[0], sp.pair(p)[1], acc[p]);
  return g;
}

inline std::optional<int> condorcet_winner(const Wmg& g) {
  for (int a = 1; a <= g.m(); ++a) {
    bool beats_all = true;
    for (int b = 1; b <= g.m() && beats_all; ++b)
      if (b != a && g.margin(a, b) <= 0) beats_all = false;
    if (beats_all) return a;
  }
  return std::nullopt;
}

inline std::optional<int> condorcet_winner(const Histogram& h) {
  return condorcet_winner(weighted_majority_graph(h));
}

inline int kendall_tau(const Ranking& r, const Ranking& w) {
  if (r.m() != w.m()) throw DimensionError("kendall_tau: rankings over different m");
  const int m = r.m();
  std::vector<int> pw(m + 1);
  for (int i = 0; i < m; ++i) pw[w.order[i]] = i;
  int d = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (pw[r.order[i]] > pw[r.order[j]]) ++d;
  return d;
}

// a's beaten-set in r1 is contained in its beaten-set in r2
inline bool raises(const Ranking& r1, const Ranking& r2, int a) {
  if (r1.m() != r2.m()) throw DimensionError("raises: rankings over different m");
  if (a < 1 || a > r1.m()) throw ArgumentError("raises: alternative " + std::to_string(a) + " out of range");
  const int p1 = r1.position(a), p2 = r2.position(a);
  for (int i = p1 + 1; i < r1.m(); ++i)
    if (r2.position(r1.order[i]) < p2) return false;
  return true;
}

inline bool raises(const RankingSpace& sp, int r1, int r2, int a) {
  for (int b = 1; b <= sp.m(); ++b)
    if (b != a && sp.prefers(r1, a, b) && !sp.prefers(r2, a, b)) return false;
  return true;
}

// ---- text formats ----

inline std::string to_string(const Ranking& r) {
  std::string s;
  for (int i = 0; i < r.m(); ++i) {
    if (i) s += '>';
    s += std::to_string(r.order[i]);
  }
  return s;
}

namespace detail {
inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}
inline std::string_view strip_comment(std::string_view s) {
  auto h = s.find('#');
  return trim(h == std::string_view::npos ? s : s.substr(0, h));
}
inline bool parse_int(std::string_view s, long long& out) {
  s = trim(s);
  if (s.empty()) return false;
  bool neg = false;
  if (s.front() == '-' || s.front() == '+') {
    neg = s.front() == '-';
    s.remove_prefix(1);
    if (s.empty()) return false;
  }
  long long v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
    if (v > (1LL << 53)) return false;
  }
  out = neg ? -v : v;
  return true;
}
}  // namespace detail

inline Ranking parse_ranking(std::string_view text, int line = 0) {
  std::vector<int> order;
  text = detail::trim(text);
  size_t start = 0;
  while (true) {
    size_t gt = text.find('>', start);
    auto tok = text.substr(start, gt == std::string_view::npos ? std::string_view::npos : gt - start);
    long long v;
    if (!detail::parse_int(tok, v)) throw ParseError(line, "bad ranking '" + std::string(text) + "'");
    order.push_back(static_cast<int>(v));
    if (gt == std::string_view::npos) break;
    start = gt + 1;
  }
  try {
    return Ranking(std::move(order));
  } catch (const Error& e) {
    throw ParseError(line, std::string(e.what()) + " in '" + std::string(text) + "'");
  }
}

// Accepts both "count: 1>2>3" histogram lines and bare "1>2>3" vote lines.
inline Histogram read_histogram(std::istream& in) {
  std::string raw;
  int line = 0, m = 0;
  std::vector<std::pair<Ranking, long long>> entries;
  while (std::getline(in, raw)) {
    ++line;
    auto s = detail::strip_comment(raw);
    if (s.empty()) continue;
    long long c = 1;
    std::string_view rk = s;
    if (auto colon = s.find(':'); colon != std::string_view::npos) {
      if (!detail::parse_int(s.substr(0, colon), c) || c < 0) throw ParseError(line, "bad count");
      rk = s.substr(colon + 1);
    }
    Ranking r = parse_ranking(rk, line);
    if (m == 0) m = r.m();
    if (r.m() != m) throw ParseError(line, "ranking length differs from m=" + std::to_string(m));
    entries.emplace_back(std::move(r), c);
  }
  if (m == 0) throw ParseError(line, "no votes");
  Histogram h(m);
  for (auto& [r, c] : entries) h.add(r, static_cast<int>(c));
  if (h.n() < 1) throw ParseError(line, "histogram has n=0");
  return h;
}

inline Histogram parse_histogram(const std::string& text) {
  std::istringstream in(text);
  return read_histogram(in);
}

inline Profile read_profile(std::istream& in) {
  std::string raw;
  int line = 0;
  Profile p;
  while (std::getline(in, raw)) {
    ++line;
    auto s = detail::strip_comment(raw);
    if (s.empty()) continue;
    Ranking r = parse_ranking(s, line);
    if (p.m == 0) p.m = r.m();
    if (r.m() != p.m) throw ParseError(line, "ranking length differs from m=" + std::to_string(p.m));
    p.votes.push_back(std::move(r));
  }
  if (p.votes.empty()) throw ParseError(line, "no votes");
  return p;
}

inline void write_histogram(std::ostream& out, const Histogram& h) {
  const auto& sp = space(h.m());
  for (int r = 0; r < h.size(); ++r)
    if (h[r] > 0) out << h[r] << ": " << to_string(sp.ranking(r)) << '\n';
}

inline std::string to_string(const Histogram& h) {
  std::ostringstream os;
  write_histogram(os, h);
  return os.str();
}

inline void write_profile(std::ostream& out, const Profile& p) {
  for (const auto& v : p.votes) out << to_string(v) << '\n';
}

}  // namespace axlab
