#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "axlab/models.hpp"

using namespace axlab;
using Catch::Matchers::WithinAbs;

TEST_CASE("mallows pmf") {
  Ranking w{1, 2, 3};
  auto uni = mallows_pmf(w, 1.0);
  for (double p : uni.pmf) CHECK_THAT(p, WithinAbs(1.0 / 6, 1e-15));
  auto d = mallows_pmf(w, 0.5);
  double z = 0;
  for (int r = 0; r < 6; ++r) z += std::pow(0.5, kendall_tau(space(3).ranking(r), w));
  CHECK_THAT(d(w), WithinAbs(1.0 / z, 1e-15));
  CHECK_THAT(d.min_probability(), WithinAbs(mallows_floor(3, 0.5), 1e-15));
  CHECK_THROWS_AS(mallows_pmf(w, 0.0), ParameterError);
  CHECK_THROWS_AS(mallows_pmf(w, 1.5), ParameterError);
}

TEST_CASE("mallows is invariant under relabeling") {
  const auto& sp = space(4);
  Ranking w{2, 4, 1, 3};
  auto base = mallows_pmf(w, 0.3);
  for (int s = 0; s < sp.size(); s += 5) {
    const auto& sigma = sp.ranking(s).order;
    auto relabel = [&](Ranking r) {
      for (auto& a : r.order) a = sigma[a - 1];
      return r;
    };
    auto moved = mallows_pmf(relabel(w), 0.3);
    for (int r = 0; r < sp.size(); ++r) CHECK_THAT(moved(relabel(sp.ranking(r))), WithinAbs(base.pmf[r], 1e-15));
  }
}

TEST_CASE("plackett-luce pmf") {
  auto d = plackett_luce_pmf({0.5, 0.3, 0.2});
  CHECK_THAT(d(Ranking{1, 2, 3}), WithinAbs(0.3, 1e-15));
  double s = 0;
  for (double p : d.pmf) s += p;
  CHECK_THAT(s, WithinAbs(1.0, 1e-12));
  auto u = plackett_luce_pmf({0.25, 0.25, 0.25, 0.25});
  for (double p : u.pmf) CHECK_THAT(p, WithinAbs(1.0 / 24, 1e-15));
  CHECK_THROWS_AS(plackett_luce_pmf({0.5, 0.5, 0.0}), ParameterError);
  CHECK_THROWS_AS(plackett_luce_pmf({0.5, 0.6, 0.1}), ParameterError);
}

TEST_CASE("model strings") {
  CHECK(parse_model("ic").family == "ic");
  auto m = parse_model("mallows:phi=0.5,center=3>1>2");
  CHECK(m.phi == 0.5);
  CHECK(m.center == Ranking{3, 1, 2});
  CHECK(to_string(m) == "mallows:phi=0.5,center=3>1>2");
  auto a = parse_model("adversarial:mallows:phi=0.5");
  CHECK(a.adversarial);
  CHECK(to_string(parse_model("pl:theta=0.5,0.3,0.2")) == "pl:theta=0.5,0.3,0.2");
  CHECK_THROWS_AS(parse_model("mallows:phi=0.05"), ParameterError);
  CHECK_THROWS_AS(parse_model("mallows:phi=2"), ParameterError);
  CHECK_THROWS_AS(parse_model("pl:theta=0.5,0.6"), ParameterError);
  CHECK_THROWS_AS(parse_model("adversarial:adversarial:ic"), ParameterError);
  CHECK_THROWS_AS(parse_model("urn"), ParameterError);
}

TEST_CASE("sampling is keyed by seed, trial and voter") {
  auto v = build_vector(parse_model("ic"), 4, 50);
  CHECK(sample_histogram(v, 7, 3) == sample_histogram(v, 7, 3));
  CHECK_FALSE(sample_histogram(v, 7, 3) == sample_histogram(v, 7, 4));
  CHECK(histogram_of(sample_profile(v, 7, 3)) == sample_histogram(v, 7, 3));
}

TEST_CASE("uniform draws stay within 4 sigma") {
  auto v = build_vector(parse_model("ic"), 3, 1000);
  std::vector<long long> c(6, 0);
  for (int t = 0; t < 1000; ++t) {
    auto h = sample_histogram(v, 99, t);
    for (int r = 0; r < 6; ++r) c[r] += h[r];
  }
  const double N = 1e6, p = 1.0 / 6, sd = std::sqrt(N * p * (1 - p));
  for (int r = 0; r < 6; ++r) CHECK(std::abs(c[r] - N * p) <= 4 * sd);
}

TEST_CASE("adversarial vectors") {
  auto ic = build_adversarial_vector(parse_model("ic"), 3, 12);
  CHECK(ic.deviation() == 0);
  auto mal = parse_model("mallows:phi=0.5");
  auto v12 = build_adversarial_vector(mal, 3, 12);
  CHECK(v12.deviation() < 1e-12);
  auto v13 = build_adversarial_vector(mal, 3, 13);
  // the leftover voter is one pmf away from uniform
  const auto& left = v13[12];
  double gap = 0;
  for (double p : left.pmf) gap = std::max(gap, std::abs(p - 1.0 / 6));
  CHECK_THAT(v13.deviation(), WithinAbs(gap, 1e-12));
  CHECK(v13.deviation() < 1);
  auto pl = build_adversarial_vector(parse_model("pl:theta=0.4,0.3,0.2,0.1"), 4, 1000);
  CHECK(pl.deviation() <= 24);
  for (const auto& d : pl.pool) CHECK(d.min_probability() > 0);
}
