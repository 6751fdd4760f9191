#include "cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "report.hpp"
#include "subsumlab/errors.hpp"
#include "subsumlab/literals.hpp"
#include "subsumlab/search.hpp"
#include "subsumlab/sequence.hpp"
#include "subsumlab/setpartition.hpp"
#include "subsumlab/verifiers.hpp"

namespace subsum::cli {

namespace {

using report::json;

struct Outcome {
  json result = json::object();
  bool verified = true;
  std::vector<std::string> violations;
  bool negative = false;  // a "no" answer rather than a violation

  void violate(std::string what) {
    verified = false;
    violations.push_back(std::move(what));
  }
  void check(json& list, const CheckReport& r) {
    list.push_back(report::check_json(r));
    for (const std::string& f : r.failures) violate(r.name + ": " + f);
  }
};

std::string str(const json& in, const char* key) { return in.at(key).get<std::string>(); }
std::int64_t num(const json& in, const char* key) { return in.at(key).get<std::int64_t>(); }
bool present(const json& in, const char* key) { return in.contains(key) && !in.at(key).is_null(); }
std::int64_t len(const Sequence& s) { return static_cast<std::int64_t>(s.length()); }

Outcome do_group(const GroupSpec& g, const json& in) {
  Outcome o;
  const std::string action = str(in, "action");
  if (action == "info") {
    const GroupParams p = group_params(g);
    o.result["order"] = g.order();
    o.result["exponent"] = p.exponent;
    o.result["d_star"] = p.d_star;
    o.result["rank"] = g.rank();
    o.result["factors"] = g.factors();
    o.result["cyclic"] = g.is_cyclic();
  } else if (action == "subgroups") {
    json list = json::array();
    for (const Subgroup& h : enumerate_subgroups(g)) {
      list.push_back({{"elements", h.carrier().to_string()},
                      {"order", h.size()},
                      {"index", h.index_in_group()},
                      {"quotient", cached_quotient(g, h)->quotient_spec.to_string()}});
    }
    o.result["count"] = list.size();
    o.result["subgroups"] = list;
  } else {
    throw ParseError("group action must be 'info' or 'subgroups'");
  }
  return o;
}

Outcome do_sumset(const GroupSpec& g, const json& in) {
  Outcome o;
  std::vector<Subset> sets;
  json shown = json::array();
  for (const auto& t : in.at("sets")) {
    sets.push_back(parse_subset(g, t.get<std::string>()));
    if (sets.back().empty()) throw PreconditionError("sumset: empty set");
    shown.push_back(sets.back().to_string());
  }
  if (sets.empty()) throw ParseError("sumset needs at least one -a SET");
  o.result["sets"] = shown;
  json checks = json::array();
  if (present(in, "n")) {
    if (sets.size() != 1) throw PreconditionError("sumset: -n applies to a single set");
    const std::int64_t n = num(in, "n");
    if (n < 0) throw PreconditionError("sumset: n must be >= 0");
    const Subset& a = sets.front();
    const Subset na = iterated_sumset(a, n);
    o.result["n"] = n;
    o.result["sumset"] = na.to_string();
    o.result["size"] = na.size();
    o.result["stabilizer"] = stabilizer(na).carrier().to_string();
    o.result["affine_span"] = affine_span(a).carrier().to_string();
    if (n >= 1 && n <= 64) o.check(checks, check_kneser(std::vector<Subset>(static_cast<std::size_t>(n), a)));
    if (n >= 3) o.check(checks, check_cor1(a, n));
    if (n >= 1) o.check(checks, check_cor2(a, n));
    json templates = json::array();
    if (n >= 1)
      for (const StructureMatch& m : classify_small_sumset(a, n))
        templates.push_back({{"label", m.label}, {"witnesses", m.witnesses}});
    o.result["templates"] = templates;
  } else {
    const Subset sum = sumset(std::span<const Subset>(sets));
    o.result["sumset"] = sum.to_string();
    o.result["size"] = sum.size();
    o.result["stabilizer"] = stabilizer(sum).carrier().to_string();
    o.check(checks, check_kneser(sets));
    if (sets.size() == 2) o.check(checks, check_pigeonhole(sets[0], sets[1]));
  }
  o.result["checks"] = checks;
  return o;
}

Outcome do_subsums(const GroupSpec& g, const json& in) {
  Outcome o;
  const Sequence s = parse_sequence(g, str(in, "S"));
  const std::int64_t n = num(in, "n");
  const Subset sigma = nterm_subsums(s, n);
  o.result["n"] = n;
  o.result["length"] = s.length();
  o.result["height"] = s.height();
  o.result["sigma_n"] = sigma.to_string();
  o.result["size"] = sigma.size();
  o.result["stabilizer"] = stabilizer(sigma).carrier().to_string();
  json checks = json::array();
  if (n >= 1) {
    const SubsumProfile p = subsum_profile(s, n, len(s), sigma);
    o.result["profile"] = {{"H", p.H.carrier().to_string()},
                           {"quotient", p.quotient->quotient_spec.to_string()},
                           {"X", p.X.to_string()},
                           {"Z", p.Z.to_string()},
                           {"N", p.N},
                           {"e", p.e},
                           {"rho", p.rho},
                           {"bound_blocks", p.bound_blocks},
                           {"bound_minsum", p.bound_minsum},
                           {"bound_kneser_form", p.bound_kneser_form}};
    if (s.height() <= n) {
      o.check(checks, check_subsum_kneser(s, n, sigma));
      const Sequence star = build_s_star(s, p, n);
      o.result["s_star"] = star.to_string();
      o.result["s_star_length"] = star.length();
      json id = {{"name", "s_star"}, {"length_is_len_plus_rho", len(star) == len(s) + p.rho},
                 {"divides", s.divides(star)}, {"same_subsums", nterm_subsums(star, n) == sigma}};
      for (const char* k : {"length_is_len_plus_rho", "divides", "same_subsums"})
        if (!id[k].get<bool>()) o.violate(std::string("s_star: ") + k + " fails");
      checks.push_back(id);
    }
  }
  if (present(in, "sprime")) o.check(checks, check_lemma_extra(s, parse_sequence(g, str(in, "sprime")), n));
  o.result["checks"] = checks;
  return o;
}

SolveOptions solve_options(const json& in) {
  SolveOptions opts;
  if (present(in, "seed")) opts.seed = in.at("seed").get<std::uint64_t>();
  return opts;
}

Sequence sprime_of(const GroupSpec& g, const json& in, const Sequence& s) {
  return present(in, "sprime") ? parse_sequence(g, str(in, "sprime")) : s;
}

PipelineMode mode_of(const json& in) {
  const std::string m = in.value("mode", std::string("standard"));
  if (m == "standard") return PipelineMode::Standard;
  if (m == "fullgroup") return PipelineMode::FullGroup;
  throw ParseError("mode must be 'standard' or 'fullgroup'");
}

Outcome do_partition(const GroupSpec& g, const json& in) {
  Outcome o;
  const Sequence s = parse_sequence(g, str(in, "S"));
  const Sequence sp = sprime_of(g, in, s);
  const std::int64_t n = num(in, "n");
  const Certificate c = partition_solve(s, sp, n, solve_options(in));
  o.result["certificate"] = report::certificate_json(c);
  o.result["sum_size"] = c.partition.sum().size();
  for (const std::string& v : partition_verify(c, s, sp, n).violations) o.violate(v);
  if (present(in, "lemma31")) {
    const std::int64_t k = num(in, "lemma31");
    const Lemma31Result r = lemma31_complete(s, sp, n, k);
    const Sequence rest = r.T.removed_from(s);
    const json post = {{"lengths_add_up", len(r.T) + len(r.T_prime) == len(sp)},
                       {"T_prime_height", r.T_prime.height() <= n - k && n - k <= len(r.T_prime)},
                       {"T_height", r.T.height() <= k && k <= len(r.T)},
                       {"T_length", len(r.T) <= len(sp) - (n - k)},
                       {"T_prime_divides_rest", r.T_prime.divides(rest)}};
    for (const auto& [name, ok] : post.items())
      if (!ok.get<bool>()) o.violate("lemma31: " + name + " fails");
    o.result["lemma31"] = {{"k", k},
                           {"T", r.T.to_string()},
                           {"T_prime", r.T_prime.to_string()},
                           {"T_length", r.T.length()},
                           {"T_prime_length", r.T_prime.length()},
                           {"postconditions", post}};
  }
  return o;
}

Outcome do_maincert(const GroupSpec& g, const json& in) {
  Outcome o;
  const Sequence s = parse_sequence(g, str(in, "S"));
  const Sequence sp = sprime_of(g, in, s);
  const std::int64_t n = num(in, "n");
  const PipelineMode mode = mode_of(in);
  Certificate c;
  try {
    c = main_pipeline(g, s, sp, n, mode, solve_options(in));
  } catch (const HypothesesUnmet& e) {
    o.result["hypotheses_met"] = false;
    o.result["reason"] = e.what();
    o.verified = false;
    o.negative = true;
    return o;
  }
  o.result["hypotheses_met"] = true;
  o.result["certificate"] = report::certificate_json(c);
  o.result["sum_size"] = c.partition.sum().size();
  for (const std::string& v : main_verify(c, g, s, sp, n, mode).violations) o.violate(v);
  return o;
}

ExampleKind kind_of(std::string k) {
  std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::toupper(c); });
  if (k == "A") return ExampleKind::A;
  if (k == "B") return ExampleKind::B;
  if (k == "C") return ExampleKind::C;
  throw ParseError("example kind must be A, B or C");
}

Outcome do_example(const GroupSpec& g, const json& in) {
  Outcome o;
  ExampleParams p;
  p.G = g;
  p.H = subgroup_generated(parse_subset(g, str(in, "H")));
  if (present(in, "K")) {
    Subset gens = parse_subset(g, str(in, "K"));
    p.H.carrier().for_each([&](Elem x) { gens.insert(x); });
    p.K = subgroup_generated(gens);
  }
  if (present(in, "gen")) p.g = parse_element(g, str(in, "gen"));
  const ExampleInstance ex = gen_example(kind_of(str(in, "kind")), p);
  o.result = report::example_json(ex);
  if (ex.length != ex.formula_length) o.violate("length differs from the closed form");
  if (ex.subsum_size != ex.formula_subsum_size) o.violate("|Sigma_n(S)| differs from the closed form");
  if (!(ex.stabilizer == ex.H)) o.violate("stabilizer of Sigma_n(S) is not H");
  if (!ex.ii_b_fails) o.violate("clause (ii)(b) holds");
  json checks = json::array();
  o.check(checks, check_lemma_extra(ex.S, ex.S, ex.n));
  o.result["checks"] = checks;
  return o;
}

Outcome do_audit(const GroupSpec&, const json& in) {
  Outcome o;
  AuditConfig c;
  c.max_group_order = num(in, "max_order");
  c.exhaustive_max_order = num(in, "exhaustive_order");
  c.exhaustive_len_cap = num(in, "len_cap");
  c.random_samples = num(in, "random");
  c.random_len_cap = num(in, "random_len_cap");
  c.seed = in.at("seed").get<std::uint64_t>();
  c.jobs = static_cast<int>(num(in, "jobs"));
  c.checkers = in.at("checkers").get<std::vector<std::string>>();
  const AuditReport r = run_audit(c);
  o.result = report::audit_aggregate_json(r);
  for (const AuditFailure& f : r.failures)
    o.violate(f.checker + " on instance " + std::to_string(f.instance) + ": " + f.message);
  if (r.total_failures > static_cast<std::int64_t>(r.failures.size()))
    o.violate(std::to_string(r.total_failures - static_cast<std::int64_t>(r.failures.size())) +
              " further failures not listed");
  return o;
}

Outcome do_hunt(const GroupSpec& g, const json& in) {
  Outcome o;
  HuntOptions opts;
  opts.canonicalize = in.at("canonical").get<bool>();
  opts.budget = in.at("budget").get<std::uint64_t>();
  o.result = report::hunt_json(hunt_unique_expression(g, num(in, "n"), opts));
  return o;
}

Outcome do_davenport(const GroupSpec& g, const json& in) {
  Outcome o;
  const DavenportResult d = davenport_bruteforce(g, static_cast<std::size_t>(num(in, "cap")));
  const GroupParams p = group_params(g);
  o.result = {{"D", d.value},
              {"d_star", p.d_star},
              {"lower", p.d_star + 1},
              {"upper", g.order()},
              {"within_classical_bounds", d.within_classical_bounds}};
  if (!d.within_classical_bounds) o.violate("D(G) outside [d*(G)+1, |G|]");
  return o;
}

Outcome compute(const std::string& verb, const GroupSpec& g, const json& in) {
  if (verb == "group") return do_group(g, in);
  if (verb == "sumset") return do_sumset(g, in);
  if (verb == "subsums") return do_subsums(g, in);
  if (verb == "partition") return do_partition(g, in);
  if (verb == "maincert") return do_maincert(g, in);
  if (verb == "example") return do_example(g, in);
  if (verb == "audit") return do_audit(g, in);
  if (verb == "hunt") return do_hunt(g, in);
  if (verb == "davenport") return do_davenport(g, in);
  throw ParseError("report command '" + verb + "' cannot be verified");
}

// Certificates are re-checked as stored; every other report is recomputed
// from its inputs.
Outcome do_verify(const json& rep) {
  if (rep.value("schema", std::string()) != report::kSchema)
    throw ParseError(std::string("report schema is not ") + report::kSchema);
  const std::string command = str(rep, "command");
  const json& in = rep.at("inputs");
  const GroupSpec g = command == "audit" ? GroupSpec{} : parse_group(str(rep, "group"));
  Outcome o;
  const json& result = rep.at("result");
  if ((command == "partition" || command == "maincert") && result.contains("certificate")) {
    const Certificate c = report::certificate_from_json(g, result.at("certificate"));
    const Sequence s = parse_sequence(g, str(in, "S"));
    const Sequence sp = sprime_of(g, in, s);
    const std::int64_t n = num(in, "n");
    const Verdict v = command == "partition" ? partition_verify(c, s, sp, n) : main_verify(c, g, s, sp, n, mode_of(in));
    for (const std::string& x : v.violations) o.violate(x);
    o.result["method"] = "certificate";
  } else {
    Outcome again = compute(command, g, in);
    o.verified = again.verified;
    o.violations = again.violations;
    o.negative = again.negative;
    o.result["method"] = "recompute";
    o.result["result_matches"] = again.result == result;
  }
  const bool original = rep.at("verified").get<bool>();
  o.result["command"] = command;
  o.result["original_verified"] = original;
  o.result["reverified"] = o.verified;
  o.result["agrees"] = original == o.verified;
  return o;
}

std::string write_dump(const InternalError& e, const std::vector<std::string>& args) {
  const auto stamp = std::chrono::system_clock::now().time_since_epoch().count();
  const std::filesystem::path path = std::filesystem::temp_directory_path() /
                                     ("subsum-lab-repro-" + std::to_string(::getpid()) + "-" + std::to_string(stamp) + ".txt");
  std::ofstream f(path);
  f << "command: subsum-lab";
  for (const std::string& a : args) f << " '" << a << "'";
  f << "\nerror: " << e.what() << "\n" << e.instance_dump() << "\n";
  return f ? path.string() : std::string("(dump could not be written)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact sumset and subsequence-sum computations in finite abelian groups", "subsum-lab"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string format = "text";
  std::string out_path;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--out", out_path, "Write the report to FILE instead of standard output");

  std::string group_text, seq_text, sprime_text, mode = "standard", action, spec_pos, file, kind, h_text, k_text,
      gen_text, checkers_text;
  std::vector<std::string> sets;
  std::int64_t n = 0, lemma31_k = 0, max_order = 8, exh_order = 0, len_cap = 0, random = 0, random_len = 12,
               cap = static_cast<std::int64_t>(kDefaultDavenportCap);
  std::uint64_t seed = 0, budget = HuntOptions{}.budget;
  int jobs = 1;
  bool no_canon = false;
  std::map<std::string, CLI::Option*> opt;

  auto add_group = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("-g,--group", group_text, "Group literal, e.g. 2x4");
    if (required) o->required();
  };
  auto add_pair = [&](CLI::App* sub) {
    add_group(sub, true);
    sub->add_option("-s,--seq", seq_text, "Sequence literal, e.g. 0^2;4^2;1")->required();
    opt[sub->get_name() + ".sprime"] = sub->add_option("--sprime", sprime_text, "Subsequence S' of S (default S)");
    sub->add_option("-n", n, "Number of parts or summands")->required();
    opt[sub->get_name() + ".seed"] = sub->add_option("--seed", seed, "Search seed");
  };

  auto* group = app.add_subcommand("group", "Group invariants or its subgroup lattice");
  group->add_option("action", action, "info | subgroups")->required()->check(CLI::IsMember({"info", "subgroups"}));
  group->add_option("spec", spec_pos, "Group literal");
  add_group(group, false);

  auto* sumset_cmd = app.add_subcommand("sumset", "A1+...+Ak, or nA with -n, with the Kneser-type checks");
  add_group(sumset_cmd, true);
  sumset_cmd->add_option("-a", sets, "Subset literal (repeatable)")->required()->allow_extra_args(false);
  opt["sumset.n"] = sumset_cmd->add_option("-n", n, "Fold count for a single set");

  auto* subsums = app.add_subcommand("subsums", "n-term subsequence sums with the subsum Kneser profile");
  add_group(subsums, true);
  subsums->add_option("-s,--seq", seq_text, "Sequence literal")->required();
  subsums->add_option("-n", n, "Subsequence length")->required();
  opt["subsums.sprime"] = subsums->add_option("--sprime", sprime_text, "S' for the lemma_extra check");

  auto* partition = app.add_subcommand("partition", "Partition Theorem certificate");
  add_pair(partition);
  opt["partition.lemma31"] = partition->add_option("--lemma31", lemma31_k, "Also run lemma31_complete with this k");

  auto* maincert = app.add_subcommand("maincert", "Certificate for the strengthened partition theorem");
  add_pair(maincert);
  maincert->add_option("--mode", mode, "standard | fullgroup")->check(CLI::IsMember({"standard", "fullgroup"}));

  auto* verify = app.add_subcommand("verify", "Re-check a JSON report");
  verify->add_option("file", file, "Report written with --format json")->required();

  auto* example = app.add_subcommand("example", "Extremal example A, B or C");
  example->add_option("kind", kind, "A | B | C")->required();
  add_group(example, true);
  example->add_option("--H", h_text, "Generators of H")->required();
  opt["example.K"] = example->add_option("--K", k_text, "Generators of K over H (B and C)");
  opt["example.gen"] = example->add_option("--gen", gen_text, "Representative of the cyclic generator");

  auto* audit = app.add_subcommand("audit", "Run the checkers over a corpus of sequences");
  audit->add_option("--max-order", max_order, "Largest group order");
  audit->add_option("--exhaustive-order", exh_order, "Largest group order in the exhaustive stream (0: max-order)");
  audit->add_option("--len-cap", len_cap, "Longest exhaustive sequence");
  audit->add_option("--random", random, "Number of random instances");
  audit->add_option("--random-len-cap", random_len, "Longest random sequence");
  audit->add_option("--seed", seed, "Random stream seed");
  audit->add_option("--jobs", jobs, "Worker threads");
  audit->add_option("--checkers", checkers_text, "Comma-separated checker ids (default all)");

  auto* hunt = app.add_subcommand("hunt", "Search for aperiodic sums of 2-sets without a unique expression");
  add_group(hunt, true);
  hunt->add_option("-n", n, "Number of summands")->required();
  hunt->add_flag("--no-canon", no_canon, "Enumerate every ordered tuple");
  hunt->add_option("--budget", budget, "Tuple budget");

  auto* davenport = app.add_subcommand("davenport", "Davenport constant by exhaustive search");
  add_group(davenport, true);
  davenport->add_option("--cap", cap, "Largest group order searched");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  auto given = [&](const std::string& key) { return opt.count(key) && opt.at(key)->count() > 0; };
  try {
    GroupSpec g;
    std::string group_label;
    auto load_group = [&](const std::string& text) {
      bool normalized = false;
      g = parse_group(text, &normalized);
      if (normalized) err << "note: group " << text << " normalized to invariant factors " << g.to_string() << "\n";
      group_label = g.to_string();
    };
    json inputs = json::object();
    if (verb == "group") {
      if (spec_pos.empty() && group_text.empty()) throw ParseError("group needs a group literal");
      load_group(spec_pos.empty() ? group_text : spec_pos);
      inputs["action"] = action;
    } else if (verb == "sumset") {
      load_group(group_text);
      inputs["sets"] = sets;
      inputs["n"] = given("sumset.n") ? json(n) : json(nullptr);
    } else if (verb == "subsums" || verb == "partition" || verb == "maincert") {
      load_group(group_text);
      inputs["S"] = parse_sequence(g, seq_text).to_string();
      inputs["n"] = n;
      if (given(verb + ".sprime")) inputs["sprime"] = parse_sequence(g, sprime_text).to_string();
      if (given(verb + ".seed")) inputs["seed"] = seed;
      if (verb == "partition" && given("partition.lemma31")) inputs["lemma31"] = lemma31_k;
      if (verb == "maincert") inputs["mode"] = mode;
    } else if (verb == "example") {
      load_group(group_text);
      inputs["kind"] = kind;
      inputs["H"] = h_text;
      if (given("example.K")) inputs["K"] = k_text;
      if (given("example.gen")) inputs["gen"] = gen_text;
    } else if (verb == "audit") {
      std::vector<std::string> checkers;
      std::stringstream list(checkers_text);
      for (std::string c; std::getline(list, c, ',');)
        if (!c.empty()) checkers.push_back(c);
      if (checkers.empty()) checkers = audit_checker_ids();
      inputs = {{"max_order", max_order}, {"exhaustive_order", exh_order}, {"len_cap", len_cap},
                {"random", random},       {"random_len_cap", random_len},  {"seed", seed},
                {"jobs", jobs},           {"checkers", checkers}};
    } else if (verb == "hunt") {
      load_group(group_text);
      inputs = {{"n", n}, {"canonical", !no_canon}, {"budget", budget}};
    } else if (verb == "davenport") {
      load_group(group_text);
      inputs["cap"] = cap;
    }

    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    if (verb == "verify") {
      std::ifstream f(file);
      if (!f) throw ParseError("cannot read " + file);
      const json rep = json::parse(f);
      group_label = rep.value("group", std::string());
      inputs["file"] = file;
      o = do_verify(rep);
    } else {
      o = compute(verb, g, inputs);
    }
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    const json env = report::envelope(verb, group_label, inputs, o.result, o.verified, o.violations, ms);
    const std::string text = format == "json" ? env.dump(2) + "\n" : report::render_text(env);
    if (out_path.empty()) {
      out << text;
    } else {
      std::ofstream f(out_path);
      if (!(f << text)) throw ParseError("cannot write " + out_path);
    }
    return o.verified && !o.negative ? kOk : kNo;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << "\nreproduction dump: " << write_dump(e, args) << "\n";
    return kInternal;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
  } catch (const json::exception& e) {
    err << "error: malformed report: " << e.what() << "\n";
  }
  return kUsage;
}

}  // namespace subsum::cli
