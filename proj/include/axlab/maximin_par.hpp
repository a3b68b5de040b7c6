#pragma once

// Exact smallest abstaining coalition for maximin.
//
// Removing a coalition with type counts s shifts every margin by
// d(x,y) = sum_R s_R v_R(x,y). Target c wins afterwards iff for each x != c
// some y_x has M'(c,z) >= M'(x,y_x) + [x < c] for all z != c. Fixing c and the
// y_x turns this into a small integer program over the types that rank c
// above the current winner; coefficients are in {-1,0,1}.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "axioms.hpp"

namespace axlab {

namespace detail {

class MaximinPar {
 public:
  MaximinPar(const Histogram& h, int kmax)
      : sp_(space(h.m())), m_(h.m()), h_(h), g_(weighted_majority_graph(h)), kmax_(kmax) {
    a_ = maximin_winner(g_);
    best_k_ = kmax_ + 1;
  }

  std::optional<CoalitionAction> solve() {
    if (kmax_ < 1 || m_ < 2) return std::nullopt;
    for (int c = 1; c <= m_; ++c)
      if (c != a_) solve_target(c);
    if (best_k_ > kmax_) return std::nullopt;
    CoalitionAction act{ActionKind::abstain, {}};
    for (int r = 0; r < h_.size(); ++r)
      if (best_s_[r] > 0) act.moves.push_back({sp_.ranking(r), std::nullopt, best_s_[r]});
    return act;
  }

 private:
  struct Var {
    std::vector<int> types;  // ranking indices sharing one coefficient column
    int cap = 0;
    std::vector<signed char> col;
    int plus = 0;
  };

  int sgn(int r, int x, int y) const { return sp_.prefers(r, x, y) ? 1 : -1; }

  void solve_target(int c) {
    types_.clear();
    for (int r = 0; r < h_.size(); ++r)
      if (h_[r] > 0 && sp_.prefers(r, c, a_)) types_.push_back(r);
    if (types_.empty()) return;
    c_ = c;
    others_.clear();
    for (int x = 1; x <= m_; ++x)
      if (x != c) others_.push_back(x);
    // candidate y_x per x, pruned by single-row feasibility
    cand_.assign(others_.size(), {});
    for (size_t xi = 0; xi < others_.size(); ++xi) {
      int x = others_[xi];
      for (int y = 1; y <= m_; ++y) {
        if (y == x) continue;
        bool ok = true;
        for (int z : others_) {
          int need = row_need(x, y, z);
          if (need <= 0) continue;
          if (need > best_k_ - 1) { ok = false; break; }
          bool any_plus = false;
          for (int r : types_)
            if (sgn(r, x, y) == 1 && sgn(r, c, z) == -1) { any_plus = true; break; }
          if (!any_plus) { ok = false; break; }
        }
        if (ok) cand_[xi].push_back(y);
      }
      if (cand_[xi].empty()) return;
    }
    ys_.assign(others_.size(), 0);
    choose_y(0);
  }

  int row_need(int x, int y, int z) const {
    // margins share n's parity, so the difference is even
    return (x < c_ ? 1 : 0) + (g_.margin(x, y) - g_.margin(c_, z)) / 2;
  }

  void choose_y(size_t xi) {
    if (xi == others_.size()) {
      solve_ilp();
      return;
    }
    for (int y : cand_[xi]) {
      ys_[xi] = y;
      choose_y(xi + 1);
    }
  }

  void solve_ilp() {
    const int mo = static_cast<int>(others_.size());
    const int rows = mo * mo;
    need_.assign(rows, 0);
    int maxneed = 0;
    for (int xi = 0; xi < mo; ++xi)
      for (int zi = 0; zi < mo; ++zi) {
        int nd = row_need(others_[xi], ys_[xi], others_[zi]);
        need_[xi * mo + zi] = nd;
        maxneed = std::max(maxneed, nd);
      }
    if (maxneed > best_k_ - 1) return;

    // columns, merged when identical
    vars_.clear();
    for (int r : types_) {
      std::vector<signed char> col(rows);
      for (int xi = 0; xi < mo; ++xi)
        for (int zi = 0; zi < mo; ++zi)
          col[xi * mo + zi] =
              static_cast<signed char>((sgn(r, others_[xi], ys_[xi]) - sgn(r, c_, others_[zi])) / 2);
      bool merged = false;
      for (auto& v : vars_)
        if (v.col == col) {
          v.types.push_back(r);
          v.cap += h_[r];
          merged = true;
          break;
        }
      if (!merged) vars_.push_back({{r}, h_[r], std::move(col), 0});
    }
    // a column dominated by one with room for a whole coalition never helps
    std::vector<Var> kept;
    for (size_t i = 0; i < vars_.size(); ++i) {
      bool dominated = false;
      for (size_t j = 0; j < vars_.size() && !dominated; ++j) {
        if (i == j || vars_[j].cap < best_k_ - 1) continue;
        bool ge = true, strict = false;
        for (int q = 0; q < rows && ge; ++q) {
          if (vars_[j].col[q] < vars_[i].col[q]) ge = false;
          if (vars_[j].col[q] > vars_[i].col[q]) strict = true;
        }
        if (ge && (strict || j < i)) dominated = true;
      }
      if (!dominated) kept.push_back(vars_[i]);
    }
    vars_.swap(kept);
    for (auto& v : vars_)
      for (auto e : v.col) v.plus += e > 0;
    std::stable_sort(vars_.begin(), vars_.end(), [](const Var& p, const Var& q) { return p.plus > q.plus; });
    const int V = static_cast<int>(vars_.size());
    plus_suffix_.assign(V + 1, 0);
    for (int i = V - 1; i >= 0; --i) {
      plus_suffix_[i] = plus_suffix_[i + 1];
      for (int q = 0; q < rows; ++q)
        if (vars_[i].col[q] > 0) plus_suffix_[i] |= std::uint64_t{1} << q;
    }
    lhs_.assign(rows, 0);
    cur_.assign(V, 0);
    rows_ = rows;
    dfs(0, 0);
  }

  void dfs(int i, int k) {
    int maxdef = 0;
    std::uint64_t short_rows = 0;
    for (int q = 0; q < rows_; ++q) {
      int d = need_[q] - lhs_[q];
      if (d > 0) {
        short_rows |= std::uint64_t{1} << q;
        maxdef = std::max(maxdef, d);
      }
    }
    if (maxdef == 0) {
      if (k >= 1 && k < best_k_) record(k);
      return;
    }
    if (k + maxdef >= best_k_) return;
    const int V = static_cast<int>(vars_.size());
    if (i == V || (short_rows & ~plus_suffix_[i])) return;
    const Var& v = vars_[i];
    const int top = std::min(v.cap, best_k_ - 1 - k);
    for (int q = 0; q < rows_; ++q) lhs_[q] += top * v.col[q];
    for (int s = top; s >= 0; --s) {
      cur_[i] = s;
      dfs(i + 1, k + s);
      for (int q = 0; q < rows_; ++q) lhs_[q] -= v.col[q];
    }
    for (int q = 0; q < rows_; ++q) lhs_[q] += v.col[q];  // undo the extra step below zero
    cur_[i] = 0;
  }

  void record(int k) {
    best_k_ = k;
    best_s_.assign(h_.size(), 0);
    for (size_t i = 0; i < vars_.size(); ++i) {
      int left = cur_[i];
      for (int r : vars_[i].types) {  // fill merged types in index order
        int take = std::min(left, h_[r]);
        best_s_[r] += take;
        left -= take;
      }
    }
  }

  const RankingSpace& sp_;
  int m_;
  const Histogram& h_;
  Wmg g_;
  int kmax_;
  int a_ = 1;
  int c_ = 0;
  int best_k_;
  std::vector<int> best_s_;
  std::vector<int> types_, others_, ys_;
  std::vector<std::vector<int>> cand_;
  std::vector<int> need_, lhs_, cur_;
  std::vector<Var> vars_;
  std::vector<std::uint64_t> plus_suffix_;
  int rows_ = 0;
};

}  // namespace detail

// Smallest abstention (size <= min(B, n-1)) that hands maximin to an
// alternative every abstainer strictly prefers; nullopt when none exists.
inline std::optional<CoalitionAction> maximin_par_coalition(const Histogram& h, int B) {
  detail::MaximinPar solver(h, std::min(B, h.n() - 1));
  return solver.solve();
}

}  // namespace axlab
