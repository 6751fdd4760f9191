#include "subsumlab/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "subsumlab/errors.hpp"
#include "subsumlab/setpartition.hpp"
#include "subsumlab/verifiers.hpp"

namespace subsum {

namespace {

std::int64_t isize(std::size_t v) { return static_cast<std::int64_t>(v); }

}  // namespace

std::vector<GroupSpec> groups_up_to(std::int64_t max_order) {
  std::vector<std::vector<std::int64_t>> chains{{1}};
  std::vector<std::int64_t> cur;
  std::function<void(std::int64_t, std::int64_t)> rec = [&](std::int64_t step, std::int64_t prod) {
    for (std::int64_t m = step; prod * m <= max_order; m += step) {
      if (m < 2) continue;
      cur.push_back(m);
      chains.push_back(cur);
      rec(m, prod * m);
      cur.pop_back();
    }
  };
  if (max_order >= 2) rec(1, 1);
  std::vector<GroupSpec> out;
  for (const auto& c : chains) out.push_back(GroupSpec::make(std::span<const std::int64_t>(c)));
  std::sort(out.begin(), out.end(), [](const GroupSpec& a, const GroupSpec& b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.factors() < b.factors();
  });
  return out;
}

// ---------------------------------------------------------------------------
// Examples

std::string to_string(ExampleKind k) {
  switch (k) {
    case ExampleKind::A: return "A";
    case ExampleKind::B: return "B";
    case ExampleKind::C: return "C";
  }
  return "?";
}

bool clause_ii_b_fails(const Sequence& s, std::int64_t n) {
  const GroupSpec& g = s.group();
  const Subset sigma = nterm_subsums(s, n);
  const Subgroup h = stabilizer(sigma);
  if (h.is_trivial() || h.is_whole()) return true;
  const auto q = cached_quotient(g, h);
  const std::int64_t hs = isize(h.size());
  const std::int64_t len = isize(s.length());
  std::vector<std::int64_t> in_coset(q->coset_count(), 0);
  for (Elem x = 0; x < g.order(); ++x) in_coset[q->coset_of[x]] += s.multiplicity(x);
  for (std::int64_t inside : in_coset) {
    const std::int64_t e_h = len - inside;
    const bool ok = e_h <= isize(q->coset_count()) - 2 && (e_h + 1) * hs <= len - n &&
                    isize(sigma.size()) >= (e_h + 1) * hs;
    if (ok) return false;
  }
  return true;
}

namespace {

// Image order of x in G/H.
std::int64_t image_order(const QuotientStructure& q, Elem x) { return q.quotient_spec.order_of(q.project(x)); }

Elem pick_generator(const ExampleKind kind, const QuotientStructure& q, const std::optional<Subgroup>& k) {
  const GroupSpec& g = q.parent;
  const std::int64_t target = q.quotient_spec.exponent();
  for (Elem x = 0; x < g.order(); ++x) {
    if (image_order(q, x) != target) continue;
    if (kind == ExampleKind::A) return x;
    // <x + H> meets K/H trivially
    bool clean = true;
    for (std::int64_t j = 1; j < target && clean; ++j)
      if (k->contains(g.mul(j, x))) clean = false;
    if (clean) return x;
  }
  throw PreconditionError("no suitable generator of the cyclic summand");
}

}  // namespace

ExampleInstance gen_example(ExampleKind kind, const ExampleParams& p) {
  const GroupSpec& g = p.G;
  const Subgroup& h = p.H;
  if (!(h.group() == g)) throw PreconditionError("gen_example: H is not a subgroup of G");
  const auto q = cached_quotient(g, h);
  const GroupSpec& gh = q->quotient_spec;
  const std::int64_t order_gh = gh.order();
  const std::int64_t exp_gh = gh.exponent();
  ExampleInstance ex;
  ex.kind = kind;
  ex.G = g;
  ex.H = h;

  // With H trivial the strict bound |Sigma_n(S)| < |S|-n+1 degenerates to equality in A and B.
  if (kind != ExampleKind::C && h.is_trivial()) throw PreconditionError("examples A and B need H nontrivial");
  if (kind == ExampleKind::A) {
    if (!gh.is_cyclic() || order_gh < 4) throw PreconditionError("example A needs G/H cyclic of order >= 4");
    ex.n = order_gh - 2;
  } else {
    if (!p.K) throw PreconditionError("examples B and C need K");
    const Subgroup& k = *p.K;
    if (!(k.group() == g) || !h.is_subgroup_of(k)) throw PreconditionError("need H <= K <= G");
    if (gh.is_cyclic()) throw PreconditionError("G/H must be non-cyclic");
    const std::int64_t k_over_h = isize(k.size() / h.size());
    // G/H = K/H + C_exp(G/H) forces |G/K| = exp(G/H).
    if (isize(g.order() / k.size()) != exp_gh) throw PreconditionError("|G/K| must equal exp(G/H)");
    if (kind == ExampleKind::B) {
      if (exp_gh < 3) throw PreconditionError("example B needs exp(G/H) >= 3");
      ex.n = exp_gh - 1;
    } else {
      if (exp_gh < 2 || isize(h.size()) < exp_gh) throw PreconditionError("example C needs |H| >= exp(G/H) >= 2");
      if (k_over_h < 3) throw PreconditionError("example C needs |K/H| >= 3");
      ex.n = exp_gh;
    }
    ex.K = k;
  }

  ex.g = p.g ? *p.g : pick_generator(kind, *q, p.K);
  if (ex.g >= g.order()) throw PreconditionError("generator out of range");
  if (image_order(*q, ex.g) != exp_gh) throw PreconditionError("g + H must have order exp(G/H)");
  if (kind != ExampleKind::A) {
    for (std::int64_t j = 1; j < exp_gh; ++j)
      if (ex.K->contains(g.mul(j, ex.g))) throw PreconditionError("<g + H> must meet K/H trivially");
  }

  // Z = phi_H^{-1}(X)
  Subset z(g);
  const Subset gh_coset = h.carrier().translated(ex.g);
  switch (kind) {
    case ExampleKind::A: z = h.carrier() | gh_coset; break;
    case ExampleKind::B: z = ex.K->carrier() | gh_coset; break;
    case ExampleKind::C: z = (ex.K->carrier() - h.carrier()) | gh_coset; break;
  }
  ex.Z = z;
  Sequence s(g);
  z.for_each([&](Elem x) { s.add(x, static_cast<std::uint32_t>(ex.n)); });
  ex.S = s;

  const std::int64_t G = g.order(), H = isize(h.size());
  const std::int64_t K = ex.K ? isize(ex.K->size()) : 0;
  switch (kind) {
    case ExampleKind::A:
      ex.formula_length = 2 * G - 4 * H;
      ex.formula_subsum_size = G - H;
      break;
    case ExampleKind::B:
      ex.formula_length = (G / K - 1) * (H + K);
      ex.formula_subsum_size = G - K + H;
      break;
    case ExampleKind::C:
      ex.formula_length = G;
      ex.formula_subsum_size = G - H;
      break;
  }

  const Subset sigma = nterm_subsums(s, ex.n);
  ex.length = isize(s.length());
  ex.subsum_size = isize(sigma.size());
  ex.stabilizer = stabilizer(sigma);
  ex.ii_b_fails = clause_ii_b_fails(s, ex.n);

  const std::string dump = "example " + to_string(kind) + " G=" + g.to_string() + " H=" + h.carrier().to_string() +
                           " S=" + s.to_string() + " n=" + std::to_string(ex.n);
  auto require = [&](bool cond, const std::string& what) {
    if (!cond) throw InternalError("gen_example: " + what, dump);
  };
  require(ex.length == ex.formula_length, "|S| differs from the closed form");
  require(ex.subsum_size == ex.formula_subsum_size, "|Sigma_n(S)| differs from the closed form");
  require(ex.stabilizer == h, "H(Sigma_n(S)) != H");
  require(ex.ii_b_fails, "clause (ii)(b) holds");
  require(ex.subsum_size < ex.length - ex.n + 1, "|Sigma_n(S)| >= |S| - n + 1");
  return ex;
}

// ---------------------------------------------------------------------------
// Audit

const std::vector<std::string>& audit_checker_ids() {
  static const std::vector<std::string> ids{"subsum_kneser", "s_star",  "kneser",   "pigeonhole",
                                            "lemma_extra",   "lemma31", "cor1",     "cor2",
                                            "pipeline",      "fullgroup"};
  return ids;
}

void CheckerTally::merge(const CheckerTally& o) {
  checks += o.checks;
  holds += o.holds;
  violated += o.violated;
  not_triggered += o.not_triggered;
  inapplicable += o.inapplicable;
  hypotheses_unmet += o.hypotheses_unmet;
  internal_errors += o.internal_errors;
  for (const auto& [k, v] : o.labels) labels[k] += v;
}

namespace {

struct Instance {
  std::uint64_t id;
  Sequence s;
};

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string set_literal(const Subset& s) { return s.to_string(); }

struct WorkerState {
  std::map<std::string, CheckerTally> tallies;
  std::vector<AuditFailure> failures;
  std::int64_t total_failures = 0;

  void add_failure(AuditFailure f) {
    ++total_failures;
    failures.push_back(std::move(f));
    if (failures.size() > 4 * AuditReport::kMaxFailures) {
      std::sort(failures.begin(), failures.end());
      failures.resize(AuditReport::kMaxFailures);
    }
  }
};

// Sequence prefix in ascending element order with every multiplicity capped.
Sequence capped_prefix(const Sequence& s, std::uint32_t cap, std::size_t max_len) {
  Sequence out(s.group());
  std::size_t len = 0;
  const auto mult = s.multiplicities();
  for (Elem x = 0; x < mult.size() && len < max_len; ++x) {
    const auto take = static_cast<std::uint32_t>(std::min<std::size_t>({mult[x], cap, max_len - len}));
    if (take) out.add(x, take);
    len += take;
  }
  return out;
}

// S' choices for pipeline checks: the longest admissible one and a middle one.
std::vector<Sequence> sprime_variants(const Sequence& s, std::int64_t n) {
  const Sequence full = capped_prefix(s, static_cast<std::uint32_t>(n), SIZE_MAX);
  const std::int64_t len = isize(full.length());
  if (len < n) return {};
  std::vector<Sequence> out{full};
  const std::int64_t mid = std::max(n, (len + n) / 2);
  if (mid < len) out.push_back(capped_prefix(s, static_cast<std::uint32_t>(n), static_cast<std::size_t>(mid)));
  return out;
}

class Runner {
 public:
  Runner(const std::set<std::string>& selected, WorkerState& st) : sel_(selected), st_(st) {}

  void run(const Instance& inst) {
    const Sequence& s = inst.s;
    const GroupSpec& g = s.group();
    const std::int64_t len = isize(s.length());
    const std::int64_t h = s.height();
    const std::string gs = g.to_string();
    const std::string ss = s.to_string();
    std::vector<Subset> table;
    if (on("subsum_kneser") || on("s_star")) table = subsum_table(s, s.length());

    for (std::int64_t n = std::max<std::int64_t>(h, 1); n <= len; ++n) {
      const std::string base = " -g " + gs + " -s " + quoted(ss) + " -n " + std::to_string(n);
      if (on("subsum_kneser")) {
        guard(inst, "subsum_kneser", "subsum-lab subsums" + base,
              [&] { record("subsum_kneser", check_subsum_kneser(s, n, table[n]), inst, "subsum-lab subsums" + base); });
      }
      if (on("s_star")) {
        guard(inst, "s_star", "subsum-lab subsums" + base, [&] {
          auto& t = tally("s_star");
          ++t.checks;
          const SubsumProfile p = subsum_profile(s, n, len, table[n]);
          const Sequence star = build_s_star(s, p, n);
          std::string bad;
          if (isize(star.length()) != len + p.rho) bad = "|S*| != |S| + rho";
          else if (!s.divides(star)) bad = "S does not divide S*";
          else if (!(nterm_subsums(star, n) == table[n])) bad = "Sigma_n(S*) != Sigma_n(S)";
          if (bad.empty()) ++t.holds;
          else fail(t, inst, "s_star", bad, "subsum-lab subsums" + base);
        });
      }
      if (on("kneser")) {
        const std::string replay_parts = [&] {
          std::string r = "subsum-lab sumset -g " + gs;
          const SetPartition sp = make_setpartition(s, n);
          for (const Subset& part : sp.parts()) r += " -a " + quoted(set_literal(part));
          return r;
        }();
        guard(inst, "kneser", replay_parts, [&] {
          const SetPartition sp = make_setpartition(s, n);
          record("kneser", check_kneser(sp.parts()), inst, replay_parts);
        });
      }
    }

    for (std::int64_t n = 1; n <= len; ++n) {
      const Sequence sp = capped_prefix(s, static_cast<std::uint32_t>(n), SIZE_MAX);
      if (isize(sp.length()) < n) continue;
      const std::string base = " -g " + gs + " -s " + quoted(ss) + " --sprime " + quoted(sp.to_string()) +
                               " -n " + std::to_string(n);
      if (on("lemma_extra")) {
        guard(inst, "lemma_extra", "subsum-lab subsums" + base, [&] {
          const CheckReport r = check_lemma_extra(s, sp, n);
          if (r.status == CheckStatus::Holds) ++tally("lemma_extra").labels[r.detail];
          record("lemma_extra", r, inst, "subsum-lab subsums" + base);
        });
      }
      if (on("lemma31")) run_lemma31(inst, s, sp, n);
      if (on("pipeline") || on("fullgroup")) {
        for (const Sequence& v : sprime_variants(s, n)) {
          const std::string vb = " -g " + gs + " -s " + quoted(ss) + " --sprime " + quoted(v.to_string()) +
                                 " -n " + std::to_string(n);
          if (on("pipeline")) run_pipeline(inst, s, v, n, PipelineMode::Standard, "subsum-lab maincert" + vb);
          if (on("fullgroup") && isize(v.length()) >= n + isize(g.order()) - 1)
            run_pipeline(inst, s, v, n, PipelineMode::FullGroup, "subsum-lab maincert" + vb + " --mode fullgroup");
        }
      }
    }

    if (on("pigeonhole") && len >= 1) {
      const std::vector<Elem> terms = s.terms();
      Subset a(g), b(g);
      for (std::size_t i = 0; i < terms.size(); ++i) (i % 2 ? b : a).insert(terms[i]);
      const Subset supp = s.support();
      std::vector<std::pair<Subset, Subset>> pairs{{supp, supp}};
      if (!b.empty()) pairs.emplace_back(a, b);
      for (const auto& [x, y] : pairs) {
        const std::string replay =
            "subsum-lab sumset -g " + gs + " -a " + quoted(set_literal(x)) + " -a " + quoted(set_literal(y));
        guard(inst, "pigeonhole", replay, [&] { record("pigeonhole", check_pigeonhole(x, y), inst, replay); });
      }
    }

    if ((on("cor1") || on("cor2")) && len >= 1 && h == 1) {
      // Sequences without repeats enumerate each subset exactly once.
      const Subset a = s.support();
      const std::int64_t e = g.exponent();
      for (std::int64_t n = e - 1; n <= e + 1; ++n) {
        const std::string replay =
            "subsum-lab sumset -g " + gs + " -a " + quoted(set_literal(a)) + " -n " + std::to_string(n);
        if (on("cor1") && n >= 3)
          guard(inst, "cor1", replay, [&] {
            const CheckReport r = check_cor1(a, n);
            if (r.witnesses.count("case")) ++tally("cor1").labels[r.witnesses.at("case")];
            record("cor1", r, inst, replay);
          });
        if (on("cor2") && n >= 1)
          guard(inst, "cor2", replay, [&] {
            const CheckReport r = check_cor2(a, n);
            if (r.witnesses.count("case")) ++tally("cor2").labels[r.witnesses.at("case")];
            record("cor2", r, inst, replay);
          });
      }
    }
  }

 private:
  bool on(const std::string& id) const { return sel_.count(id) > 0; }
  CheckerTally& tally(const std::string& id) { return st_.tallies[id]; }

  void fail(CheckerTally& t, const Instance& inst, const std::string& id, const std::string& msg,
            const std::string& replay) {
    ++t.violated;
    st_.add_failure({inst.id, id, msg, replay});
  }

  void record(const std::string& id, const CheckReport& r, const Instance& inst, const std::string& replay) {
    auto& t = tally(id);
    ++t.checks;
    switch (r.status) {
      case CheckStatus::Holds: ++t.holds; break;
      case CheckStatus::NotTriggered: ++t.not_triggered; break;
      case CheckStatus::Inapplicable: ++t.inapplicable; break;
      case CheckStatus::Violated: fail(t, inst, id, r.failures.front(), replay); break;
    }
  }

  template <class F>
  void guard(const Instance& inst, const std::string& id, const std::string& replay, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      auto& t = tally(id);
      ++t.checks;
      ++t.internal_errors;
      st_.add_failure({inst.id, id, std::string("exception: ") + e.what(), replay});
    }
  }

  void run_lemma31(const Instance& inst, const Sequence& s, const Sequence& capped, std::int64_t n) {
    // The completion depends on S' only through |S'|, so every admissible
    // length stands in for all S' of that length.
    const GroupSpec& g = s.group();
    for (std::int64_t lp = n; lp <= isize(capped.length()); ++lp) {
      const Sequence sp = capped_prefix(capped, UINT32_MAX, static_cast<std::size_t>(lp));
      for (std::int64_t k = 1; k <= n; ++k) {
        const std::string replay = "subsum-lab partition -g " + g.to_string() + " -s " + quoted(s.to_string()) +
                                   " --sprime " + quoted(sp.to_string()) + " -n " + std::to_string(n) +
                                   " --lemma31 " + std::to_string(k);
        guard(inst, "lemma31", replay, [&] {
          auto& t = tally("lemma31");
          ++t.checks;
          const Lemma31Result r = lemma31_complete(s, sp, n, k);
          const std::int64_t tl = isize(r.T.length()), tpl = isize(r.T_prime.length());
          std::int64_t best = 0;
          for (auto m : s.multiplicities()) best += std::min<std::int64_t>(m, k);
          best = std::min(best, lp - (n - k));
          std::string bad;
          if (!r.T.divides(s)) bad = "T does not divide S";
          else if (r.T.height() > k || tl < k || tl > lp - (n - k)) bad = "T violates h(T) <= k <= |T| <= |S'|-(n-k)";
          else if (tl != best) bad = "T is not of maximal length";
          else if (!r.T_prime.divides(r.T.removed_from(s))) bad = "T' does not divide T^-1 S";
          else if (tl + tpl != lp) bad = "|T| + |T'| != |S'|";
          else if (r.T_prime.height() > n - k || tpl < n - k) bad = "T' violates h(T') <= n-k <= |T'|";
          if (bad.empty()) ++t.holds;
          else fail(t, inst, "lemma31", bad, replay);
        });
      }
    }
  }

  void run_pipeline(const Instance& inst, const Sequence& s, const Sequence& sp, std::int64_t n, PipelineMode mode,
                    const std::string& replay) {
    const std::string id = mode == PipelineMode::FullGroup ? "fullgroup" : "pipeline";
    auto& t = tally(id);
    ++t.checks;
    try {
      const Certificate cert = main_pipeline(s.group(), s, sp, n, mode);
      const Verdict v = main_verify(cert, s.group(), s, sp, n, mode);
      if (!v.ok) {
        fail(t, inst, id, "main_verify: " + v.violations.front(), replay);
      } else if (!cert.step_violations.empty()) {
        fail(t, inst, id, "step assertion: " + cert.step_violations.front(), replay);
      } else {
        ++t.holds;
        if (cert.case_tag == CaseTag::I) {
          ++t.labels["case I"];
        } else {
          ++t.labels["case II"];
          ++t.labels[*cert.K == *cert.H ? "case II, K = H" : "case II, K < H"];
        }
      }
    } catch (const HypothesesUnmet&) {
      ++t.hypotheses_unmet;
    } catch (const std::exception& e) {
      ++t.internal_errors;
      st_.add_failure({inst.id, id, std::string("exception: ") + e.what(), replay});
    }
  }

  const std::set<std::string>& sel_;
  WorkerState& st_;
};

// Every sequence of length 1..len_cap over each group, in a fixed order.
class ExhaustiveStream {
 public:
  ExhaustiveStream(std::vector<GroupSpec> groups, std::int64_t len_cap)
      : groups_(std::move(groups)), len_cap_(len_cap) {}

  // Calls f for each instance until f returns false or the stream ends.
  void for_each(const std::function<void(Sequence)>& f) const {
    for (const GroupSpec& g : groups_) {
      for (std::int64_t len = 1; len <= len_cap_; ++len) {
        Sequence s(g);
        emit(g, 0, len, s, f);
      }
    }
  }

 private:
  static void emit(const GroupSpec& g, Elem x, std::int64_t left, Sequence& s,
                   const std::function<void(Sequence)>& f) {
    if (x + 1 == g.order()) {
      if (left) s.add(x, static_cast<std::uint32_t>(left));
      f(s);
      if (left) s.remove(x, static_cast<std::uint32_t>(left));
      return;
    }
    for (std::int64_t c = left; c >= 0; --c) {
      if (c) s.add(x, static_cast<std::uint32_t>(c));
      emit(g, x + 1, left - c, s, f);
      if (c) s.remove(x, static_cast<std::uint32_t>(c));
    }
  }

  std::vector<GroupSpec> groups_;
  std::int64_t len_cap_;
};

std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

// Instance i of the random stream: its own generator seeded from (seed, i).
Sequence random_instance(const std::vector<GroupSpec>& groups, std::uint64_t seed, std::uint64_t i,
                         std::int64_t len_cap) {
  std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
  std::mt19937_64 rng(sq);
  const GroupSpec& g = groups[below(rng, groups.size())];
  const std::uint64_t max_support = std::min<std::uint64_t>(g.order(), static_cast<std::uint64_t>(len_cap));
  const std::uint64_t support = 1 + below(rng, max_support);
  std::vector<Elem> elems(g.order());
  for (Elem x = 0; x < g.order(); ++x) elems[x] = x;
  for (std::uint64_t j = 0; j < support; ++j) std::swap(elems[j], elems[j + below(rng, g.order() - j)]);
  Sequence s(g);
  std::uint64_t spare = static_cast<std::uint64_t>(len_cap) - support;
  for (std::uint64_t j = 0; j < support; ++j) {
    const std::uint64_t extra = below(rng, spare + 1);
    spare -= extra;
    s.add(elems[j], static_cast<std::uint32_t>(1 + extra));
  }
  return s;
}

}  // namespace

AuditReport run_audit(const AuditConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.max_group_order < 1) throw PreconditionError("run_audit: max_group_order must be >= 1");
  if (cfg.max_group_order > kAuditMaxOrder)
    throw CapExceeded("run_audit: max_group_order " + std::to_string(cfg.max_group_order) + " exceeds " +
                      std::to_string(kAuditMaxOrder));
  const std::int64_t exh_order = cfg.exhaustive_max_order ? cfg.exhaustive_max_order : cfg.max_group_order;
  if (exh_order > cfg.max_group_order || exh_order < 1)
    throw PreconditionError("run_audit: exhaustive_max_order must lie in [1, max_group_order]");
  if (cfg.exhaustive_len_cap < 0 || cfg.random_samples < 0 || cfg.random_len_cap < 1 || cfg.jobs < 1)
    throw PreconditionError("run_audit: negative cap, or random_len_cap/jobs below 1");
  if (cfg.exhaustive_len_cap > 16 || cfg.random_len_cap > 64)
    throw CapExceeded("run_audit: length caps are limited to 16 (exhaustive) and 64 (random)");
  std::set<std::string> selected;
  for (const std::string& c : cfg.checkers) {
    const auto& ids = audit_checker_ids();
    if (std::find(ids.begin(), ids.end(), c) == ids.end())
      throw PreconditionError("run_audit: unknown checker '" + c + "'");
    selected.insert(c);
  }

  AuditReport rep;
  rep.config = cfg;
  for (const std::string& c : selected) rep.tallies[c];

  const int jobs = cfg.jobs;
  std::vector<WorkerState> states(static_cast<std::size_t>(jobs));
  std::vector<Instance> chunk;
  constexpr std::size_t kChunk = 2048;

  auto flush = [&] {
    std::atomic<std::size_t> next{0};
    auto work = [&](WorkerState& st) {
      Runner runner(selected, st);
      for (std::size_t i = next++; i < chunk.size(); i = next++) runner.run(chunk[i]);
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(work, std::ref(states[static_cast<std::size_t>(j)]));
    work(states[0]);
    for (auto& th : pool) th.join();
    chunk.clear();
  };

  std::uint64_t id = 0;
  if (cfg.exhaustive_len_cap > 0) {
    std::vector<GroupSpec> groups = groups_up_to(exh_order);
    ExhaustiveStream(groups, cfg.exhaustive_len_cap).for_each([&](Sequence s) {
      chunk.push_back({id++, std::move(s)});
      if (chunk.size() == kChunk) flush();
    });
  }
  rep.exhaustive_instances = static_cast<std::int64_t>(id);
  if (cfg.random_samples > 0) {
    const std::vector<GroupSpec> groups = groups_up_to(cfg.max_group_order);
    for (std::int64_t i = 0; i < cfg.random_samples; ++i) {
      chunk.push_back({id++, random_instance(groups, cfg.seed, static_cast<std::uint64_t>(i), cfg.random_len_cap)});
      if (chunk.size() == kChunk) flush();
    }
  }
  if (!chunk.empty()) flush();
  rep.instances = static_cast<std::int64_t>(id);

  for (WorkerState& st : states) {
    for (const auto& [k, t] : st.tallies) rep.tallies[k].merge(t);
    rep.total_failures += st.total_failures;
    rep.failures.insert(rep.failures.end(), st.failures.begin(), st.failures.end());
  }
  std::sort(rep.failures.begin(), rep.failures.end());
  if (rep.failures.size() > AuditReport::kMaxFailures) rep.failures.resize(AuditReport::kMaxFailures);
  rep.timing_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Hunt

namespace {

struct HuntState {
  const GroupSpec& g;
  const HuntOptions& opts;
  HuntReport& rep;
  bool out_of_budget = false;

  void examine(const std::vector<Subset>& parts) {
    if (rep.tuples >= opts.budget) {
      out_of_budget = true;
      return;
    }
    ++rep.tuples;
    const Subset sum = sumset(parts);
    if (!stabilizer(sum).is_trivial()) return;
    ++rep.aperiodic;
    const auto counts = representation_counts(parts);
    std::uint64_t least = UINT64_MAX;
    sum.for_each([&](Elem x) { least = std::min(least, counts[x]); });
    ++rep.min_count_histogram[least];
    if (least >= 2) {
      ++rep.hits;
      if (rep.hit_examples.size() < opts.max_reported_hits) rep.hit_examples.push_back(parts);
    }
  }
};

std::vector<std::int64_t> units_mod(std::int64_t m) {
  std::vector<std::int64_t> out;
  for (std::int64_t u = 1; u < m; ++u)
    if (std::gcd(u, m) == 1) out.push_back(u);
  return out;
}

}  // namespace

HuntReport hunt_unique_expression(const GroupSpec& g, std::int64_t n, const HuntOptions& opts) {
  if (n < 1) throw PreconditionError("hunt_unique_expression: n must be >= 1");
  HuntReport rep;
  rep.G = g;
  rep.n = n;
  rep.canonical = opts.canonicalize;
  HuntState st{g, opts, rep};
  if (g.order() < 2) {
    rep.exhaustive = true;
    return rep;
  }
  std::vector<Subset> parts;

  if (!opts.canonicalize) {
    // Every ordered n-tuple of 2-element subsets.
    std::vector<Subset> pairs;
    for (Elem a = 0; a < g.order(); ++a)
      for (Elem b = a + 1; b < g.order(); ++b) pairs.push_back(Subset::of(g, {a, b}));
    std::function<void()> rec = [&] {
      if (st.out_of_budget) return;
      if (isize(parts.size()) == n) {
        st.examine(parts);
        return;
      }
      for (const Subset& p : pairs) {
        parts.push_back(p);
        rec();
        parts.pop_back();
        if (st.out_of_budget) return;
      }
    };
    rec();
    rep.exhaustive = !st.out_of_budget;
    return rep;
  }

  // Each summand translated to {0, d} with d the smaller of d, -d; summands
  // sorted. For cyclic groups, keep only tuples that are least under every
  // unit multiplier.
  std::vector<Elem> ds;
  for (Elem d = 1; d < g.order(); ++d)
    if (d <= g.neg(d)) ds.push_back(d);
  const std::vector<std::int64_t> units = g.is_cyclic() ? units_mod(g.order()) : std::vector<std::int64_t>{};
  auto canon = [&](Elem d) { return std::min(d, g.neg(d)); };
  std::vector<Elem> chosen;
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    if (st.out_of_budget) return;
    if (isize(chosen.size()) == n) {
      for (std::int64_t u : units) {
        std::vector<Elem> img;
        for (Elem d : chosen) img.push_back(canon(g.mul(u, d)));
        std::sort(img.begin(), img.end());
        if (img < chosen) return;
      }
      parts.clear();
      for (Elem d : chosen) parts.push_back(Subset::of(g, {0, d}));
      st.examine(parts);
      return;
    }
    for (std::size_t i = from; i < ds.size(); ++i) {
      chosen.push_back(ds[i]);
      rec(i);
      chosen.pop_back();
      if (st.out_of_budget) return;
    }
  };
  rec(0);
  rep.exhaustive = !st.out_of_budget;
  return rep;
}

}  // namespace subsum
