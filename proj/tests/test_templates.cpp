#include "catch_amalgamated.hpp"

#include <cmath>

#include "axlab/templates.hpp"

using namespace axlab;

namespace {

const char* kTiny = R"(template tiny
m 3
mode mm
budget 1
predicate cm_m3

[node root]
on {1} goto b1
on {2,3} fail

[edge b1]
change 1 2>3>1 3>2>1

[leaf b1]
condorcet 3
)";

Histogram uniform_hist(int m, int per) { return Histogram(m, std::vector<int>(factorial(m), per)); }

}  // namespace

TEST_CASE("builtins load, validate and round-trip") {
  for (const auto& nm : builtin_template_names()) {
    INFO(nm);
    Template t = builtin_template(nm);
    CHECK(parse_template(save_template(t)) == t);
    CHECK(template_reserves(t).size() == static_cast<size_t>(factorial(t.m)));
  }
  for (int m = 5; m <= 8; ++m) CHECK(general_m_template(m).m == m);
  CHECK(builtin_template("ch_m4").mode == WalkMode::hm);
  CHECK(builtin_template("cs_m3").mode == WalkMode::sp);
  CHECK_THROWS_AS(builtin_template("cp_m5"), NameError);
  CHECK_THROWS_AS(builtin_template("general_m4"), NameError);
}

TEST_CASE("cm_m3 edges") {
  Template t = builtin_template("cm_m3");
  auto op = [&](const char* id) { return t.nodes[t.index(id)].ops.at(0); };
  CHECK(op("b1").from == Ranking{2, 3, 1});
  CHECK(op("b1").to == Ranking{3, 2, 1});
  CHECK(op("b2").from == Ranking{3, 1, 2});
  CHECK(op("b2").to == Ranking{1, 3, 2});
  CHECK(op("b3").from == Ranking{1, 2, 3});
  CHECK(op("b3").to == Ranking{2, 1, 3});
  for (const char* id : {"b1", "b2", "b3"}) CHECK(op(id).kind == OpKind::change);
}

TEST_CASE("template validation") {
  CHECK_NOTHROW(parse_template(kTiny));
  SECTION("coverage hole") {
    std::string s = kTiny;
    s.replace(s.find("on {2,3} fail"), 13, "on {2} fail");
    try {
      parse_template(s);
      FAIL("expected a template error");
    } catch (const TemplateError& e) {
      CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
  }
  SECTION("dangling goto") {
    std::string s = kTiny;
    s.replace(s.find("goto b1"), 7, "goto zz");
    CHECK_THROWS_AS(parse_template(s), TemplateError);
  }
  SECTION("path budget") {
    std::string s = kTiny;
    s.replace(s.find("change 1"), 8, "change 2");
    CHECK_THROWS_AS(parse_template(s), TemplateError);
  }
  SECTION("parse errors carry the line") {
    std::string s = kTiny;
    s.replace(s.find("condorcet 3"), 11, "condorcet x");
    try {
      parse_template(s);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line == 15);
    }
    CHECK_THROWS_AS(parse_template("template a\nm 3\nmode zz\n"), ParseError);
    CHECK_THROWS_AS(parse_template("template a\nm 3\n"), ParseError);
  }
}

TEST_CASE("root membership") {
  Histogram u3 = uniform_hist(3, 100);
  CHECK(check_root_membership(builtin_template("cm_m3").predicate, u3, 600, 1));
  Histogram u4 = uniform_hist(4, 100);
  CHECK_FALSE(check_root_membership(builtin_template("cp_m4").predicate, u4, 2400, 1));
  CHECK_THROWS_AS(check_root_membership(builtin_template("cm_m3").predicate, u3, 601, 1), ArgumentError);
  CHECK_THROWS_AS(check_root_membership(builtin_template("cm_m3").predicate, u3, 600, 25), ArgumentError);
  // one margin just past sqrt(n)
  Histogram h = u3;
  h.add(Ranking{1, 2, 3}, 13);
  h.add(Ranking{3, 2, 1}, -13);
  CHECK(weighted_majority_graph(h).margin(1, 2) == 26);
  CHECK_FALSE(check_root_membership(builtin_template("cm_m3").predicate, h, 600, 1));
}

TEST_CASE("generated roots satisfy their predicate") {
  for (const char* nm : {"cm_m3", "cp_m4", "general_m"}) {
    INFO(nm);
    Template t = builtin_template(nm);
    const int n = 2500;
    auto res = template_reserves(t);
    for (auto& x : res) x *= 50;
    Histogram a = generate_root_profile(t.predicate, n, 17, res);
    CHECK(a.n() == n);
    CHECK(check_root_membership(t.predicate, a, n, 1));
    CHECK(generate_root_profile(t.predicate, n, 17, res) == a);
  }
  Histogram c = generate_root_profile(builtin_template("cm_m3").predicate, 3600, 5);
  auto g = weighted_majority_graph(c);
  for (auto [a, b] : {std::pair{1, 2}, std::pair{2, 3}, std::pair{3, 1}}) {
    CHECK(g.margin(a, b) > 0);
    CHECK(g.margin(a, b) <= 60);
  }
  CHECK_THROWS_AS(generate_root_profile(builtin_template("cm_m3").predicate, 9, 1), MembershipError);
}

TEST_CASE("instantiate splits units into coalitions of at most B") {
  Template t = parse_template(kTiny);
  auto sizes = [](const Template& ti) {
    std::vector<int> s;
    for (const auto& op : ti.nodes[ti.index("b1")].ops) s.push_back(op.count);
    return s;
  };
  CHECK(sizes(instantiate(t, 400, 4)) == std::vector<int>{4, 4, 4, 4, 4});
  CHECK(sizes(instantiate(t, 401, 4)) == std::vector<int>{4, 4, 4, 4, 4, 1});
  CHECK(sizes(instantiate(t, 400, 20)) == std::vector<int>{20});
  CHECK_THROWS_AS(instantiate(t, 400, 21), ArgumentError);
  CHECK_THROWS_AS(instantiate(instantiate(t, 400, 4), 400, 4), ArgumentError);
  Template ti = instantiate(t, 401, 4);
  CHECK(ti.scale == 21);
  CHECK(parse_template(save_template(ti)) == ti);
}

TEST_CASE("walks end in a verified violation") {
  Template t = builtin_template("cm_m3");
  const int n = 900;
  Histogram root = generate_root_profile(t.predicate, n, 3);
  SECTION("constant rule breaks condorcet consistency at the leaf") {
    // constant_1 sends the walk down b1, where 3 becomes the condorcet winner
    auto r = walk(instantiate(t, n, 1), parse_rule("constant_1"), root, 1);
    CHECK(r.axiom == Axiom::cc);
    CHECK(r.witness.condorcet == 3);
    CHECK(verify_witness(r.witness).empty());
  }
  SECTION("maximin") {
    for (int B : {1, 5, 30}) {
      Template ti = instantiate(t, n, B);
      auto r = walk(ti, parse_rule("maximin"), root, B);
      CHECK(verify_witness(r.witness).empty());
      CHECK((r.axiom == Axiom::mm || r.axiom == Axiom::cc));
      // every step conserves voters and moves at most B of them
      long long moved = 0;
      for (size_t i = 1; i < r.path.size(); ++i) {
        CHECK(r.path[i].h.n() == n);
        REQUIRE(r.path[i].op);
        CHECK(r.path[i].op->count <= B);
        moved += r.path[i].op->count;
      }
      CHECK(moved <= static_cast<long long>(t.budget) * ti.scale);
    }
  }
  SECTION("argument checks") {
    Template ti = instantiate(t, n, 2);
    CHECK_THROWS_AS(walk(t, parse_rule("borda"), root, 2), ArgumentError);
    CHECK_THROWS_AS(walk(ti, parse_rule("borda"), root, 3), ArgumentError);
    CHECK_THROWS_AS(walk(ti, parse_rule("dictator_1"), root, 2), ArgumentError);
    Histogram bad = root;
    bad.add(Ranking{1, 2, 3}, 200);
    bad.add(Ranking{3, 2, 1}, -std::min(200, bad.count(Ranking{3, 2, 1})));
    if (bad.n() == n) CHECK_THROWS_AS(walk(ti, parse_rule("borda"), bad, 2), MembershipError);
  }
}

TEST_CASE("cp_m4 walks at n=2500 verify for the shipped rules") {
  Template t = builtin_template("cp_m4");
  const int n = 2500;
  auto res = template_reserves(t);
  for (auto& x : res) x *= 50;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Histogram root = generate_root_profile(t.predicate, n, seed, res);
    for (const char* r : {"plurality", "borda", "copeland", "maximin"}) {
      INFO(r << " seed " << seed);
      auto wr = walk(instantiate(t, n, 5), parse_rule(r), root, 5);
      CHECK(verify_witness(wr.witness).empty());
      CHECK((wr.axiom == Axiom::par || wr.axiom == Axiom::cc));
    }
  }
}
