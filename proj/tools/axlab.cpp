// axlab command-line front end.
//
// exit codes: 0 ok, 1 domain errors (budget, membership, bad files), 2 usage.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "axlab/axlab.hpp"

using namespace axlab;

namespace {

struct Out {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Out(const std::string& path) {
    if (path.empty() || path == "-") return;
    file.open(path);
    if (!file) throw ArgumentError("cannot write " + path);
    os = &file;
  }
  std::ostream& operator*() { return *os; }
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read " + path);
  return in;
}

std::vector<int> parse_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    long long v;
    if (!detail::parse_int(item, v) || v < 1 || v > 1000000000) throw ArgumentError("bad B list '" + s + "'");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw ArgumentError("empty B list");
  return out;
}

Template resolve_template(const std::string& which) {
  if (std::filesystem::exists(which)) {
    auto in = open_in(which);
    return load_template(in);
  }
  return builtin_template(which);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"axlab: axiom violations of voting rules, exactly and by sampling"};
  app.set_config("--config", "", "key=value file with option defaults");
  app.require_subcommand(1, 1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default AXLAB_THREADS, then all cores)")
      ->check(CLI::PositiveNumber);

  // shared option storage
  std::string rule, combo, axiom, in, out, mode = "exact", model = "ic", tname, axis = "n", gnuplot, Blist = "1";
  int m = 0, n = 0, B = 1;
  long long trials = 10000, samples = 20000;
  std::uint64_t seed = 1;
  double budget = 1e8, hist_budget = 2e7, floor = kDefaultFloor;
  bool profile_out = false;
  std::uint64_t trial = 0;

  auto* check = app.add_subcommand("check", "check one histogram against an axiom or combo");
  check->add_option("--rule", rule)->required();
  check->add_option("--combo", combo, "cp, ch, cm, cs, or a single axiom");
  check->add_option("--axiom", axiom, "cc, par, hm, mm or sp");
  check->add_option("--B", B)->check(CLI::PositiveNumber);
  check->add_option("--in", in, "histogram file")->required();
  check->add_option("--mode", mode)->check(CLI::IsMember({"exact", "sampled"}));
  check->add_option("--samples", samples)->check(CLI::PositiveNumber);
  check->add_option("--budget", budget);
  check->add_option("--seed", seed);
  check->add_option("--out", out, "witness file for the first violation");

  auto* verify = app.add_subcommand("verify-witness", "re-check a witness file");
  verify->add_option("--in", in)->required();

  auto* estimate = app.add_subcommand("estimate", "Monte-Carlo violation rates");
  estimate->add_option("--rule", rule)->required();
  estimate->add_option("--combo", combo)->required();
  estimate->add_option("--m", m)->check(CLI::Range(2, kMaxM));
  estimate->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  estimate->add_option("--B", Blist, "comma-separated list");
  estimate->add_option("--model", model);
  estimate->add_option("--floor", floor, "minimum probability for adversarial vectors");
  estimate->add_option("--trials", trials)->check(CLI::PositiveNumber);
  estimate->add_option("--seed", seed);
  estimate->add_option("--mode", mode)->check(CLI::IsMember({"exact", "sampled"}));
  estimate->add_option("--samples", samples)->check(CLI::PositiveNumber);
  estimate->add_option("--budget", budget);
  estimate->add_option("--out", out);

  auto* exact = app.add_subcommand("exact", "exact violation probability under IC by enumeration");
  exact->add_option("--rule", rule)->required();
  exact->add_option("--combo", combo)->required();
  exact->add_option("--m", m)->required()->check(CLI::Range(3, 4));
  exact->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  exact->add_option("--B", B)->check(CLI::PositiveNumber);
  exact->add_option("--budget", hist_budget, "histograms to enumerate at most");

  auto* tmpl = app.add_subcommand("template", "violation templates");
  tmpl->require_subcommand(1, 1);
  auto* trun = tmpl->add_subcommand("run", "walk a template from a generated or given root");
  trun->add_option("--template", tname, "builtin name or file")->required();
  trun->add_option("--rule", rule)->required();
  trun->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  trun->add_option("--B", B)->check(CLI::PositiveNumber);
  trun->add_option("--seed", seed);
  trun->add_option("--root", in, "root histogram file instead of a generated one");
  trun->add_option("--out", out, "witness file");
  auto* tval = tmpl->add_subcommand("validate", "parse and validate a template");
  tval->add_option("--in", in, "template file or builtin name")->required();

  auto* root = app.add_subcommand("root", "template roots");
  root->require_subcommand(1, 1);
  auto* rgen = root->add_subcommand("gen", "generate a root histogram satisfying a template's predicate");
  rgen->add_option("--template", tname)->required();
  rgen->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  rgen->add_option("--seed", seed);
  rgen->add_option("--out", out);

  auto* fit = app.add_subcommand("fit", "log-log least squares on a rates CSV");
  fit->add_option("--in", in)->required();
  fit->add_option("--axis", axis)->check(CLI::IsMember({"n", "B"}));
  fit->add_option("--gnuplot", gnuplot, "two-column data file");

  auto* sample = app.add_subcommand("sample", "draw one profile from a model");
  sample->add_option("--model", model);
  sample->add_option("--floor", floor);
  sample->add_option("--m", m)->check(CLI::Range(2, kMaxM));
  sample->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed);
  sample->add_option("--trial", trial);
  sample->add_flag("--profile", profile_out, "one vote per line instead of counts");
  sample->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    CheckOptions opt;
    opt.sampled = mode == "sampled";
    opt.samples = samples;
    opt.seed = seed;
    opt.budget = budget;

    if (*check) {
      if (combo.empty() == axiom.empty()) throw ArgumentError("give exactly one of --combo and --axiom");
      Rule r = parse_rule(rule);
      auto f = open_in(in);
      Histogram h = read_histogram(f);
      if (r.kind == RuleKind::dictator) throw ArgumentError("check works on histograms; dictator is not anonymous");
      Combo c = parse_combo(combo.empty() ? axiom : combo);
      ComboResult res = check_combo(c, r, h, B, opt);
      std::cout << "rule " << name(r) << " combo " << c.label << " n " << h.n() << " B " << B << '\n';
      if (res.sat) {
        std::cout << (res.exhaustive ? "satisfied\n" : "no violation found (sampled, not exhaustive)\n");
      } else {
        for (const auto& w : res.witnesses)
          std::cout << "violated " << axiom_name(w.axiom) << ": winner " << w.winner_before << " -> " << w.winner_after
                    << '\n';
        if (!out.empty()) {
          Out o(out);
          write_witness(*o, res.witnesses.front());
        }
      }
      return 0;
    }
    if (*verify) {
      auto f = open_in(in);
      WitnessFile wf = read_witness(f);
      if (!wf.digest_ok) {
        std::cout << "rejected: digest mismatch\n";
        return 1;
      }
      std::string why = verify_witness(wf.witness);
      if (!why.empty()) {
        std::cout << "rejected: " << why << '\n';
        return 1;
      }
      std::cout << "ok " << axiom_name(wf.witness.axiom) << ' ' << name(wf.witness.rule) << '\n';
      return 0;
    }
    if (*estimate) {
      EstimateConfig cfg;
      cfg.rule = parse_rule(rule);
      cfg.combo = parse_combo(combo);
      cfg.model = parse_model(model, floor);
      cfg.m = model_m(cfg.model, m);
      cfg.n = n;
      cfg.Bs = parse_list(Blist);
      cfg.trials = trials;
      cfg.seed = seed;
      cfg.threads = threads;
      cfg.check = opt;
      auto pts = estimate_rates(cfg);
      Out o(out);
      write_csv(*o, pts);
      return 0;
    }
    if (*exact) {
      auto res = exact_ic_rate(parse_rule(rule), parse_combo(combo), m, n, B, hist_budget);
      std::cout << std::setprecision(17) << res.rate << '\n';
      return 0;
    }
    if (*trun) {
      Template t = resolve_template(tname);
      Rule r = parse_rule(rule);
      Histogram h(t.m);
      if (!in.empty()) {
        auto f = open_in(in);
        h = read_histogram(f);
      } else {
        auto res = template_reserves(t);
        for (auto& x : res) x *= static_cast<int>(ceil_sqrt(n));
        h = generate_root_profile(t.predicate, n, seed, res);
      }
      Template ti = instantiate(t, n, B);
      WalkResult wr = walk(ti, r, h, B);
      write_walk(std::cout, ti, wr);
      if (!out.empty()) {
        Out o(out);
        write_witness(*o, wr.witness);
      }
      return 0;
    }
    if (*tval) {
      Template t = resolve_template(in);
      int leaves = 0;
      for (const auto& nd : t.nodes) leaves += nd.leaf();
      std::cout << "ok " << t.id << ": m " << t.m << ", mode " << mode_name(t.mode) << ", " << t.nodes.size()
                << " nodes, " << leaves << " leaves, budget " << t.budget << '\n';
      return 0;
    }
    if (*rgen) {
      Template t = resolve_template(tname);
      auto res = template_reserves(t);
      for (auto& x : res) x *= static_cast<int>(ceil_sqrt(n));
      Histogram h = generate_root_profile(t.predicate, n, seed, res);
      Out o(out);
      write_histogram(*o, h);
      return 0;
    }
    if (*fit) {
      auto f = open_in(in);
      auto pts = read_csv(f);
      FitResult fr = fit_powerlaw(pts, axis);
      std::cout << std::setprecision(10) << "slope " << fr.slope << "\nintercept " << fr.intercept << "\nresidual "
                << fr.residual << '\n';
      if (!gnuplot.empty()) {
        Out o(gnuplot);
        write_gnuplot(*o, pts, axis, fr);
      }
      return 0;
    }
    if (*sample) {
      ModelSpec s = parse_model(model, floor);
      int mm = model_m(s, m);
      DistributionVector v = build_vector(s, mm, n);
      Out o(out);
      if (profile_out)
        write_profile(*o, sample_profile(v, seed, trial));
      else
        write_histogram(*o, sample_histogram(v, seed, trial));
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
