#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "core.hpp"

namespace axlab {

// ---- random streams ----

// SplitMix64. Streams are keyed by (seed, trial, voter) so any partition of
// the work draws the same numbers.
class Stream {
 public:
  explicit Stream(std::uint64_t state) : s_(state) {}
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static Stream derive(std::uint64_t seed, std::uint64_t trial, std::uint64_t voter) {
    return Stream(mix(mix(mix(seed) ^ trial) ^ voter));
  }
  std::uint64_t next() {
    s_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::uint64_t below(std::uint64_t k) { return k ? next() % k : 0; }  // modulo bias is negligible for small k

 private:
  std::uint64_t s_;
};

// ---- distributions over rankings ----

struct RankingDistribution {
  int m = 0;
  std::string family;  // "uniform", "mallows", "pl"
  std::vector<double> params;  // phi, or theta_1..theta_m
  Ranking center;              // mallows only
  std::vector<double> pmf;
  std::vector<double> cdf;

  double operator()(const Ranking& r) const { return pmf[space(m).index(r)]; }
  double min_probability() const { return *std::min_element(pmf.begin(), pmf.end()); }

  // inverse CDF over the lexicographic ranking order
  int draw(double u) const {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<int>(it - cdf.begin());
  }
};

namespace detail {
inline void finish(RankingDistribution& d) {
  double total = 0;
  for (double p : d.pmf) total += p;
  for (double& p : d.pmf) p /= total;
  d.cdf.resize(d.pmf.size());
  double acc = 0;
  for (size_t i = 0; i < d.pmf.size(); ++i) d.cdf[i] = acc += d.pmf[i];
}
}  // namespace detail

inline RankingDistribution uniform_pmf(int m) {
  RankingDistribution d;
  d.m = m;
  d.family = "uniform";
  d.pmf.assign(space(m).size(), 1.0);
  detail::finish(d);
  return d;
}

inline RankingDistribution mallows_pmf(const Ranking& w, double phi) {
  if (!(phi > 0) || phi > 1) throw ParameterError("mallows needs 0 < phi <= 1");
  const auto& sp = space(w.m());
  RankingDistribution d;
  d.m = w.m();
  d.family = "mallows";
  d.params = {phi};
  d.center = w;
  d.pmf.resize(sp.size());
  for (int r = 0; r < sp.size(); ++r) d.pmf[r] = std::pow(phi, kendall_tau(sp.ranking(r), w));
  detail::finish(d);
  return d;
}

// exact Assumption-1 floor of a Mallows family: phi^{m(m-1)/2} / Z
inline double mallows_floor(int m, double phi) {
  double z = 1;
  for (int i = 2; i <= m; ++i) {
    double s = 0;
    for (int k = 0; k < i; ++k) s += std::pow(phi, k);
    z *= s;
  }
  return std::pow(phi, m * (m - 1) / 2) / z;
}

inline RankingDistribution plackett_luce_pmf(const std::vector<double>& theta) {
  const int m = static_cast<int>(theta.size());
  double sum = 0;
  for (double t : theta) {
    if (!(t > 0)) throw ParameterError("plackett-luce weights must be positive");
    sum += t;
  }
  if (std::abs(sum - 1) > 1e-12) throw ParameterError("plackett-luce weights must sum to 1");
  const auto& sp = space(m);
  RankingDistribution d;
  d.m = m;
  d.family = "pl";
  d.params = theta;
  d.pmf.resize(sp.size());
  for (int r = 0; r < sp.size(); ++r) {
    const auto& o = sp.ranking(r).order;
    double p = 1, rest = 1;
    for (int i = 0; i + 1 < m; ++i) {
      p *= theta[o[i] - 1] / rest;
      rest -= theta[o[i] - 1];
    }
    d.pmf[r] = p;
  }
  // the product formula is already normalized; keep it as computed
  d.cdf.resize(d.pmf.size());
  double acc = 0;
  for (size_t i = 0; i < d.pmf.size(); ++i) d.cdf[i] = acc += d.pmf[i];
  return d;
}

// ---- per-voter vectors ----

struct DistributionVector {
  std::vector<RankingDistribution> pool;
  std::vector<int> entry;  // voter j draws from pool[entry[j]]

  int n() const { return static_cast<int>(entry.size()); }
  int m() const { return pool.empty() ? 0 : pool.front().m; }
  const RankingDistribution& operator[](int j) const { return pool[entry[j]]; }

  static DistributionVector iid(RankingDistribution d, int n) {
    DistributionVector v;
    v.pool.push_back(std::move(d));
    v.entry.assign(n, 0);
    return v;
  }

  // max-norm gap between the summed pmfs and (n/m!) * 1
  double deviation() const {
    const int size = space(m()).size();
    std::vector<double> sum(size, 0.0);
    std::vector<long long> uses(pool.size(), 0);
    for (int e : entry) ++uses[e];
    for (size_t k = 0; k < pool.size(); ++k)
      for (int r = 0; r < size; ++r) sum[r] += static_cast<double>(uses[k]) * pool[k].pmf[r];
    double dev = 0;
    for (double s : sum) dev = std::max(dev, std::abs(s - static_cast<double>(n()) / size));
    return dev;
  }
};

struct ModelSpec {
  std::string family = "ic";  // ic | mallows | pl
  bool adversarial = false;
  double phi = 1;
  std::vector<double> theta;
  std::optional<Ranking> center;
};

inline constexpr double kDefaultFloor = 0.1;

inline std::string to_string(const ModelSpec& s) {
  std::string out = s.adversarial ? "adversarial:" : "";
  if (s.family == "ic") return out + "ic";
  if (s.family == "mallows") {
    std::ostringstream os;
    os << "mallows:phi=" << s.phi;
    if (s.center) os << ",center=" << to_string(*s.center);
    return out + os.str();
  }
  std::ostringstream os;
  os << "pl:theta=";
  for (size_t i = 0; i < s.theta.size(); ++i) os << (i ? "," : "") << s.theta[i];
  return out + os.str();
}

inline ModelSpec parse_model(const std::string& text, double floor = kDefaultFloor) {
  ModelSpec s;
  std::string t = text;
  if (t.rfind("adversarial:", 0) == 0) {
    s.adversarial = true;
    t = t.substr(12);
    if (t.rfind("adversarial:", 0) == 0) throw ParameterError("nested adversarial model");
  }
  auto bad = [&](const std::string& why) { return ParameterError("model '" + text + "': " + why); };
  auto num = [&](const std::string& v) {
    try {
      size_t used = 0;
      double x = std::stod(v, &used);
      if (used != v.size()) throw bad("bad number '" + v + "'");
      return x;
    } catch (const std::logic_error&) {
      throw bad("bad number '" + v + "'");
    }
  };
  if (t == "ic") return s;
  if (t.rfind("mallows:", 0) == 0) {
    s.family = "mallows";
    bool have_phi = false;
    std::string rest = t.substr(8);
    size_t pos = 0;
    while (pos <= rest.size()) {
      size_t comma = rest.find(',', pos);
      std::string kv = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw bad("expected key=value");
      std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
      if (k == "phi") {
        s.phi = num(v);
        have_phi = true;
      } else if (k == "center") {
        try { s.center = parse_ranking(v); } catch (const Error&) { throw bad("bad center"); }
      } else {
        throw bad("unknown key '" + k + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!have_phi) throw bad("missing phi");
    if (!(s.phi > 0) || s.phi > 1) throw bad("phi must be in (0,1]");
    if (s.phi < floor) throw bad("phi below the dispersion floor");
    return s;
  }
  if (t.rfind("pl:theta=", 0) == 0) {
    s.family = "pl";
    std::string rest = t.substr(9);
    size_t pos = 0;
    while (true) {
      size_t comma = rest.find(',', pos);
      s.theta.push_back(num(rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    double sum = 0;
    for (double x : s.theta) {
      if (!(x > 0)) throw bad("theta entries must be positive");
      if (x < floor) throw bad("theta entry below the floor");
      sum += x;
    }
    if (std::abs(sum - 1) > 1e-12) throw bad("theta must sum to 1");
    return s;
  }
  throw bad("unknown family");
}

inline int model_m(const ModelSpec& s, int m) {
  if (s.family == "pl") {
    if (m != 0 && m != static_cast<int>(s.theta.size())) throw ArgumentError("theta length differs from m");
    return static_cast<int>(s.theta.size());
  }
  if (s.center) {
    if (m != 0 && m != s.center->m()) throw ArgumentError("center ranking length differs from m");
    return s.center->m();
  }
  if (m < 1) throw ArgumentError("m must be given for this model");
  return m;
}

inline Ranking identity_ranking(int m) {
  std::vector<int> o(m);
  std::iota(o.begin(), o.end(), 1);
  return Ranking(o);
}

inline RankingDistribution base_distribution(const ModelSpec& s, int m) {
  m = model_m(s, m);
  if (s.family == "ic") return uniform_pmf(m);
  if (s.family == "mallows") return mallows_pmf(s.center ? *s.center : identity_ranking(m), s.phi);
  return plackett_luce_pmf(s.theta);
}

// Voter j gets the base model relabeled by the (j mod m!)-th permutation, so
// every full block of m! voters sums to exactly 1 on each ranking.
inline DistributionVector build_adversarial_vector(const ModelSpec& family, int m, int n) {
  if (n < 1) throw ArgumentError("n must be positive");
  m = model_m(family, m);
  const auto& sp = space(m);
  DistributionVector v;
  if (family.family == "ic") {
    v = DistributionVector::iid(uniform_pmf(m), n);
    return v;
  }
  const int blocks = std::min(n, sp.size());
  for (int k = 0; k < blocks; ++k) {
    const auto& sigma = sp.ranking(k).order;  // relabeling a -> sigma[a-1]
    if (family.family == "mallows") {
      Ranking w = family.center ? *family.center : identity_ranking(m);
      for (auto& a : w.order) a = sigma[a - 1];
      v.pool.push_back(mallows_pmf(w, family.phi));
    } else if (family.family == "pl") {
      std::vector<double> th(m);
      for (int a = 1; a <= m; ++a) th[sigma[a - 1] - 1] = family.theta[a - 1];
      v.pool.push_back(plackett_luce_pmf(th));
    } else {
      throw ParameterError("family '" + family.family + "' cannot be symmetrized");
    }
  }
  v.entry.resize(n);
  for (int j = 0; j < n; ++j) v.entry[j] = j % sp.size();
  return v;
}

inline DistributionVector build_vector(const ModelSpec& s, int m, int n) {
  if (s.adversarial) return build_adversarial_vector(s, m, n);
  return DistributionVector::iid(base_distribution(s, m), n);
}

inline int draw_vote(const DistributionVector& v, std::uint64_t seed, std::uint64_t trial, int j) {
  Stream st = Stream::derive(seed, trial, static_cast<std::uint64_t>(j));
  return v[j].draw(st.uniform());
}

inline Profile sample_profile(const DistributionVector& v, std::uint64_t seed, std::uint64_t trial = 0) {
  const auto& sp = space(v.m());
  Profile p{v.m(), {}};
  p.votes.reserve(v.n());
  for (int j = 0; j < v.n(); ++j) p.votes.push_back(sp.ranking(draw_vote(v, seed, trial, j)));
  return p;
}

// same draws as sample_profile, without materializing voters
inline Histogram sample_histogram(const DistributionVector& v, std::uint64_t seed, std::uint64_t trial = 0) {
  std::vector<int> counts(space(v.m()).size(), 0);
  for (int j = 0; j < v.n(); ++j) ++counts[draw_vote(v, seed, trial, j)];
  return Histogram(v.m(), std::move(counts));
}

}  // namespace axlab
