#include "catch_amalgamated.hpp"

#include <cmath>
#include <sstream>

#include "axlab/lab.hpp"

using namespace axlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("wilson interval") {
  auto [lo, hi] = wilson(0, 100);
  CHECK(lo == 0);
  CHECK_THAT(hi, WithinAbs(0.0369935, 1e-6));
  auto [lo2, hi2] = wilson(50, 100);
  CHECK_THAT(lo2, WithinAbs(0.4038315, 1e-6));
  CHECK_THAT(hi2, WithinAbs(0.5961685, 1e-6));
  CHECK_THROWS_AS(wilson(1, 0), ArgumentError);
}

TEST_CASE("power-law fit recovers exact exponents") {
  std::vector<double> x{64, 256, 1024, 4096}, y, z;
  for (double v : x) {
    y.push_back(3.0 * std::pow(v, -0.5));
    z.push_back(0.01 * v);
  }
  auto f = fit_powerlaw(x, y);
  CHECK_THAT(f.slope, WithinAbs(-0.5, 1e-9));
  CHECK_THAT(f.intercept, WithinAbs(std::log(3.0), 1e-9));
  CHECK_THAT(f.residual, WithinAbs(0, 1e-9));
  CHECK_THAT(fit_powerlaw(x, z).slope, WithinAbs(1.0, 1e-9));
  CHECK_THROWS_AS(fit_powerlaw({1, 2}, {1, 2}), ArgumentError);
  CHECK_THROWS_AS(fit_powerlaw({1, 2, 3}, {1, 0, 2}), DomainError);
  CHECK_THROWS_AS(fit_powerlaw({2, 2, 2}, {1, 2, 3}), ArgumentError);
}

TEST_CASE("exact rates under IC") {
  Rule c1 = parse_rule("constant_1");
  // one voter: the condorcet winner is the top choice, wrong unless it is 1
  CHECK_THAT(exact_ic_rate(c1, parse_combo("cp"), 3, 1, 1).rate, WithinAbs(2.0 / 3, 1e-15));
  // two voters: a condorcet winner needs both tops equal
  CHECK_THAT(exact_ic_rate(c1, parse_combo("cp"), 3, 2, 1).rate, WithinAbs(2.0 / 9, 1e-15));
  CHECK(exact_ic_rate(parse_rule("maximin"), parse_combo("cc"), 3, 9, 1).rate == 0);
  auto r = exact_ic_rate(parse_rule("borda"), parse_combo("cc"), 3, 5, 1);
  CHECK(r.histograms == 252);
  CHECK(r.rate > 0);
  CHECK_THROWS_AS(exact_ic_rate(c1, parse_combo("cp"), 5, 3, 1), ArgumentError);
  CHECK_THROWS_AS(exact_ic_rate(c1, parse_combo("cp"), 4, 400, 1, 1e6), BudgetError);
}

TEST_CASE("exact and sampled rates agree") {
  Rule r = parse_rule("plurality");
  Combo c = parse_combo("cp");
  double exact = exact_ic_rate(r, c, 3, 7, 2).rate;
  auto p = estimate_rate(r, c, 3, 7, 2, parse_model("ic"), 20000, 4, 1);
  CHECK(p.ci_lo - 0.01 <= exact);
  CHECK(exact <= p.ci_hi + 0.01);
}

TEST_CASE("estimates are deterministic across thread counts") {
  EstimateConfig cfg;
  cfg.rule = parse_rule("borda");
  cfg.combo = parse_combo("cs");
  cfg.m = 3;
  cfg.n = 15;
  cfg.Bs = {1, 2, 3};
  cfg.trials = 600;
  cfg.seed = 12;
  cfg.threads = 1;
  auto a = estimate_rates(cfg);
  cfg.threads = 3;
  auto b = estimate_rates(cfg);
  cfg.memo = false;
  auto c = estimate_rates(cfg);
  CHECK(a == b);
  CHECK(a == c);
  REQUIRE(a.size() == 3);
  // same histograms at every B, and violations only grow with B
  CHECK(a[0].violations <= a[1].violations);
  CHECK(a[1].violations <= a[2].violations);
  CHECK(a[0].model == "ic");
}

TEST_CASE("csv round-trip") {
  std::vector<RatePoint> pts{make_point(3, 64, 1, "borda", "cp", "ic", 1000, 9, 1),
                             make_point(3, 256, 1, "borda", "cp", "mallows:phi=0.5,center=1>2>3", 1000, 4, 1)};
  std::ostringstream os;
  write_csv(os, pts);
  CHECK(os.str().rfind(kCsvHeader, 0) == 0);
  std::istringstream is(os.str());
  auto back = read_csv(is);
  REQUIRE(back.size() == 2);
  CHECK(back[1].model == pts[1].model);
  CHECK(back[0].violations == 9);
  CHECK_THAT(back[0].ci_hi, WithinRel(pts[0].ci_hi, 1e-9));
  std::istringstream broken(std::string(kCsvHeader) + "\n64,1,borda\n");
  CHECK_THROWS_AS(read_csv(broken), ParseError);
}
