#pragma once

// Monte-Carlo violation rates, the exact small-n IC rate, and power-law fits.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <tuple>
#include <algorithm>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "axioms.hpp"
#include "models.hpp"

namespace axlab {

struct RatePoint {
  int m = 0;
  int n = 0;
  int B = 0;
  std::string rule, combo, model;
  long long trials = 0;
  long long violations = 0;
  double rate = 0, ci_lo = 0, ci_hi = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const RatePoint&, const RatePoint&) = default;
};

// 95% Wilson score interval
inline std::pair<double, double> wilson(long long k, long long trials, double z = 1.959963984540054) {
  if (trials <= 0) throw ArgumentError("trials must be positive");
  const double t = static_cast<double>(trials), p = k / t, z2 = z * z;
  const double mid = (p + z2 / (2 * t)) / (1 + z2 / t);
  const double half = z * std::sqrt(p * (1 - p) / t + z2 / (4 * t * t)) / (1 + z2 / t);
  return {std::max(0.0, std::min(p, mid - half)), std::min(1.0, std::max(p, mid + half))};
}

inline RatePoint make_point(int m, int n, int B, const std::string& rule, const std::string& combo,
                            const std::string& model, long long trials, long long violations, std::uint64_t seed) {
  RatePoint p{m, n, B, rule, combo, model, trials, violations, 0, 0, 0, seed};
  p.rate = static_cast<double>(violations) / static_cast<double>(trials);
  std::tie(p.ci_lo, p.ci_hi) = wilson(violations, trials);
  return p;
}

inline int default_threads() {
  if (const char* env = std::getenv("AXLAB_THREADS")) {
    long long v;
    if (detail::parse_int(env, v) && v >= 1 && v <= 1024) return static_cast<int>(v);
    throw ArgumentError("AXLAB_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct EstimateConfig {
  Rule rule;
  Combo combo;
  int m = 3;
  int n = 1;
  std::vector<int> Bs{1};
  ModelSpec model;
  long long trials = 1000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: AXLAB_THREADS, then hardware concurrency
  CheckOptions check;
  bool memo = true;
};

namespace detail {

// histogram packed into 64 bits when it fits, for the per-worker memo
inline bool pack(const Histogram& h, int bits, std::uint64_t& key) {
  if (bits * h.size() > 64) return false;
  key = 0;
  for (int r = 0; r < h.size(); ++r) key = (key << bits) | static_cast<std::uint64_t>(h[r]);
  return true;
}

inline int bit_width(int n) {
  int b = 1;
  while ((1LL << b) <= n) ++b;
  return b;
}

}  // namespace detail

// Every trial draws one profile and checks it at each B in the list, so the
// counts across B come from the same profiles.
inline std::vector<RatePoint> estimate_rates(const EstimateConfig& cfg) {
  if (cfg.trials < 1) throw ArgumentError("trials must be at least 1");
  if (cfg.Bs.empty()) throw ArgumentError("at least one B is needed");
  if (!cfg.rule.anonymous()) throw ArgumentError(name(cfg.rule) + " is not anonymous");
  const int m = model_m(cfg.model, cfg.m);
  const DistributionVector vec = build_vector(cfg.model, m, cfg.n);
  for (int B : cfg.Bs)
    if (B < 1) throw ArgumentError("B must be positive");
  // the budget guard depends on the histogram; fail early on one draw
  {
    CheckOptions probe = cfg.check;
    Histogram h = sample_histogram(vec, cfg.seed, 0);
    if (!probe.sampled && cfg.combo.group) check_group(*cfg.combo.group, cfg.rule, h, *std::max_element(cfg.Bs.begin(), cfg.Bs.end()), probe);
  }
  const int T = static_cast<int>(std::max<long long>(1, std::min<long long>(cfg.threads > 0 ? cfg.threads : default_threads(), cfg.trials)));
  const size_t nb = cfg.Bs.size();
  std::vector<std::vector<long long>> counts(T, std::vector<long long>(nb, 0));
  std::exception_ptr failure;
  std::mutex fail_mu;
  const int bits = detail::bit_width(cfg.n);

  auto work = [&](int tid) {
    try {
      // memo value: bit i set when the profile violates at Bs[i]
      std::unordered_map<std::uint64_t, std::uint32_t> memo;
      for (long long t = tid; t < cfg.trials; t += T) {
        Histogram h = sample_histogram(vec, cfg.seed, static_cast<std::uint64_t>(t));
        std::uint64_t key = 0;
        const bool packed = cfg.memo && !cfg.check.sampled && detail::pack(h, bits, key);
        std::uint32_t mask = 0;
        auto it = packed ? memo.find(key) : memo.end();
        if (it != memo.end()) {
          mask = it->second;
        } else {
          const bool cc_bad = cfg.combo.cc && !check_cc(cfg.rule, h).sat;
          for (size_t i = 0; i < nb; ++i) {
            bool bad = cc_bad;
            if (!bad && cfg.combo.group) {
              CheckOptions o = cfg.check;
              o.seed = Stream::mix(cfg.seed ^ Stream::mix(static_cast<std::uint64_t>(t)));
              bad = !check_group(*cfg.combo.group, cfg.rule, h, cfg.Bs[i], o).sat;
            }
            if (bad) mask |= std::uint32_t{1} << i;
          }
          if (packed && memo.size() < (1u << 22)) memo.emplace(key, mask);
        }
        for (size_t i = 0; i < nb; ++i) counts[tid][i] += (mask >> i) & 1u;
      }
    } catch (...) {
      std::lock_guard<std::mutex> lk(fail_mu);
      if (!failure) failure = std::current_exception();
    }
  };
  if (nb > 32) throw ArgumentError("at most 32 values of B per run");
  if (T == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < T; ++i) pool.emplace_back(work, i);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<RatePoint> out;
  for (size_t i = 0; i < nb; ++i) {
    long long v = 0;
    for (int tid = 0; tid < T; ++tid) v += counts[tid][i];
    out.push_back(make_point(m, cfg.n, cfg.Bs[i], name(cfg.rule), cfg.combo.label, to_string(cfg.model), cfg.trials, v,
                             cfg.seed));
  }
  return out;
}

inline RatePoint estimate_rate(const Rule& rule, const Combo& combo, int m, int n, int B, const ModelSpec& model,
                               long long trials, std::uint64_t seed, int threads = 0) {
  EstimateConfig cfg;
  cfg.rule = rule;
  cfg.combo = combo;
  cfg.m = m;
  cfg.n = n;
  cfg.Bs = {B};
  cfg.model = model;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.threads = threads;
  return estimate_rates(cfg).front();
}

// ---- exact rate under IC ----

inline double histogram_count(int n, int types) {
  // C(n + types - 1, types - 1)
  double c = 1;
  for (int i = 1; i < types; ++i) c = c * (n + i) / i;
  return c;
}

struct ExactResult {
  double rate = 0;
  long long histograms = 0;
};

inline ExactResult exact_ic_rate(const Rule& rule, const Combo& combo, int m, int n, int B, double budget = 2e7,
                                 const CheckOptions& opt = {}) {
  if (m != 3 && m != 4) throw ArgumentError("exact rates are enumerated for m=3 or m=4");
  if (n < 1) throw ArgumentError("n must be positive");
  if (B < 1) throw ArgumentError("B must be positive");
  if (!rule.anonymous()) throw ArgumentError(name(rule) + " is not anonymous");
  const int types = static_cast<int>(factorial(m));
  const double total = histogram_count(n, types);
  if (total > budget)
    throw BudgetError("enumeration needs " + std::to_string(static_cast<long long>(total)) + " histograms, above " +
                      std::to_string(static_cast<long long>(budget)));
  std::vector<long double> lf(n + 1, 0);
  for (int i = 1; i <= n; ++i) lf[i] = lf[i - 1] + std::log(static_cast<long double>(i));
  const long double base = lf[n] - n * std::log(static_cast<long double>(types));
  std::vector<int> c(types, 0);
  long double sum = 0, comp = 0;  // Kahan
  long long seen = 0;
  CheckOptions o = opt;
  o.sampled = false;
  std::function<void(int, int, long double)> rec = [&](int i, int left, long double lw) {
    if (i == types - 1) {
      c[i] = left;
      lw -= lf[left];
      ++seen;
      Histogram h(m, c);
      if (!check_combo(combo, rule, h, B, o, false).sat) {
        long double y = std::exp(base + lw) - comp;
        long double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
      }
      return;
    }
    for (int k = 0; k <= left; ++k) {
      c[i] = k;
      rec(i + 1, left - k, lw - lf[k]);
    }
    c[i] = 0;
  };
  rec(0, n, 0);
  return {static_cast<double>(sum), seen};
}

// ---- power-law fit ----

struct FitResult {
  double slope = 0, intercept = 0, residual = 0;
};

inline FitResult fit_powerlaw(const std::vector<double>& x, const std::vector<double>& rate) {
  if (x.size() != rate.size()) throw ArgumentError("x and rate differ in length");
  if (x.size() < 3) throw ArgumentError("a fit needs at least 3 points");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(rate[i] > 0)) throw DomainError("rate at x=" + std::to_string(x[i]) + " is zero, no log-log fit");
    if (!(x[i] > 0)) throw ArgumentError("x values must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(rate[i]));
  }
  const double k = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < lx.size(); ++i) mx += lx[i] / k, my += ly[i] / k;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0) throw ArgumentError("x values must not all be equal");
  FitResult f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    double e = ly[i] - (f.intercept + f.slope * lx[i]);
    rss += e * e;
  }
  f.residual = std::sqrt(rss);
  return f;
}

inline FitResult fit_powerlaw(const std::vector<RatePoint>& pts, const std::string& axis) {
  if (axis != "n" && axis != "B") throw ArgumentError("axis must be n or B");
  std::vector<double> x, y;
  for (const auto& p : pts) {
    x.push_back(axis == "n" ? p.n : p.B);
    y.push_back(p.rate);
  }
  return fit_powerlaw(x, y);
}

// ---- CSV ----

inline const char* kCsvHeader = "n,B,rule,combo,model,trials,violations,rate,ci_lo,ci_hi,seed";

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline std::vector<std::string> csv_split(const std::string& line, int line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
      else if (c == '"') quoted = false;
      else cur += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quote");
  out.push_back(cur);
  return out;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const std::vector<RatePoint>& pts) {
  os << kCsvHeader << '\n';
  for (const auto& p : pts) {
    os << p.n << ',' << p.B << ',' << detail::csv_field(p.rule) << ',' << detail::csv_field(p.combo) << ','
       << detail::csv_field(p.model) << ',' << p.trials << ',' << p.violations << ',' << std::setprecision(10)
       << p.rate << ',' << p.ci_lo << ',' << p.ci_hi << ',' << p.seed << '\n';
  }
}

inline std::vector<RatePoint> read_csv(std::istream& in) {
  std::string line;
  int no = 0;
  std::vector<RatePoint> out;
  bool header = false;
  while (std::getline(in, line)) {
    ++no;
    if (detail::trim(line).empty()) continue;
    if (!header) {
      if (detail::trim(line) != kCsvHeader) throw ParseError(no, "expected header " + std::string(kCsvHeader));
      header = true;
      continue;
    }
    auto f = detail::csv_split(line, no);
    if (f.size() != 11) throw ParseError(no, "expected 11 fields, got " + std::to_string(f.size()));
    long long n, B, trials, viol;
    if (!detail::parse_int(f[0], n) || !detail::parse_int(f[1], B) || !detail::parse_int(f[5], trials) ||
        !detail::parse_int(f[6], viol))
      throw ParseError(no, "bad integer field");
    RatePoint p;
    p.n = static_cast<int>(n);
    p.B = static_cast<int>(B);
    p.rule = f[2];
    p.combo = f[3];
    p.model = f[4];
    p.trials = trials;
    p.violations = viol;
    try {
      size_t used = 0;
      p.rate = std::stod(f[7], &used);
      p.ci_lo = std::stod(f[8]);
      p.ci_hi = std::stod(f[9]);
      p.seed = std::stoull(f[10]);
    } catch (const std::exception&) {
      throw ParseError(no, "bad numeric field");
    }
    if (p.trials < 1 || p.violations < 0 || p.violations > p.trials) throw ParseError(no, "inconsistent counts");
    out.push_back(p);
  }
  if (!header) throw ParseError(no, "empty CSV");
  return out;
}

// two columns, x and rate, for plotting
inline void write_gnuplot(std::ostream& os, const std::vector<RatePoint>& pts, const std::string& axis,
                          const FitResult& fit) {
  os << "# " << axis << " rate  (fit: log rate = " << std::setprecision(6) << fit.intercept << " + " << fit.slope
     << " log " << axis << ")\n";
  for (const auto& p : pts) os << (axis == "n" ? p.n : p.B) << ' ' << std::setprecision(10) << p.rate << '\n';
}

}  // namespace axlab
