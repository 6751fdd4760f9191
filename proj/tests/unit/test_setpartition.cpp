#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "subsumlab/errors.hpp"
#include "subsumlab/setpartition.hpp"

using namespace subsum;

namespace {

Sequence seq(const GroupSpec& g, std::initializer_list<std::pair<Elem, std::uint32_t>> terms) {
  Sequence s(g);
  for (auto [x, c] : terms) s.add(x, c);
  return s;
}

Sequence example_a() {
  return seq(GroupSpec::make({8}), {{0, 2}, {4, 2}, {1, 2}, {5, 2}});
}

bool has_violation(const Verdict& v, const std::string& prefix) {
  return std::any_of(v.violations.begin(), v.violations.end(),
                     [&](const std::string& s) { return s.rfind(prefix, 0) == 0; });
}

// Every sub-multiset of `s` of length at least `min_len` with height <= cap.
std::vector<Sequence> sub_multisets(const Sequence& s, std::size_t min_len, std::uint32_t cap) {
  std::vector<Sequence> out;
  const auto terms = s.support().elements();
  Sequence cur(s.group());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == terms.size()) {
      if (cur.length() >= min_len) out.push_back(cur);
      return;
    }
    const std::uint32_t top = std::min(cap, s.multiplicity(terms[i]));
    for (std::uint32_t c = 0; c <= top; ++c) {
      rec(i + 1);
      cur.add(terms[i]);
    }
    cur.remove(terms[i], top + 1);
  };
  rec(0);
  return out;
}

}  // namespace

TEST_CASE("make_setpartition") {
  auto c4 = GroupSpec::make({4});
  auto p = make_setpartition(Sequence::repeated(c4, 0, 3), 3);
  CHECK(p.n() == 3);
  for (const auto& part : p.parts()) CHECK(part == Subset::of(c4, {0}));

  auto q = make_setpartition(seq(c4, {{0, 2}, {1, 2}}), 2);
  REQUIRE(q.n() == 2);
  CHECK(q.parts()[0] == Subset::of(c4, {0, 1}));
  CHECK(q.parts()[1] == Subset::of(c4, {0, 1}));
  CHECK(q.underlying_sequence() == seq(c4, {{0, 2}, {1, 2}}));

  CHECK_THROWS_AS(make_setpartition(Sequence::repeated(c4, 0, 3), 2), PreconditionError);
  CHECK_THROWS_AS(make_setpartition(Sequence::repeated(c4, 0, 1), 2), PreconditionError);

  std::mt19937_64 rng(5);
  auto g = GroupSpec::make({2, 4});
  for (int trial = 0; trial < 200; ++trial) {
    Sequence s(g);
    const int len = 1 + static_cast<int>(rng() % 14);
    for (int i = 0; i < len; ++i) s.add(static_cast<Elem>(rng() % g.order()));
    for (std::int64_t n = s.height(); n <= static_cast<std::int64_t>(s.length()); ++n) {
      auto sp = make_setpartition(s, n);
      CHECK(sp.underlying_sequence() == s);
      CHECK(static_cast<std::int64_t>(sp.n()) == n);
    }
  }
}

TEST_CASE("lemma31_complete examples") {
  auto c4 = GroupSpec::make({4});
  auto s = seq(c4, {{0, 2}, {1, 2}});
  auto r = lemma31_complete(s, s, 2, 1);
  CHECK(r.T == seq(c4, {{0, 1}, {1, 1}}));
  CHECK(r.T_prime == seq(c4, {{0, 1}, {1, 1}}));

  auto r2 = lemma31_complete(Sequence::repeated(c4, 0, 3), Sequence::repeated(c4, 0, 2), 2, 1);
  CHECK(r2.T == Sequence::repeated(c4, 0, 1));
  CHECK(r2.T_prime == Sequence::repeated(c4, 0, 1));

  auto r3 = lemma31_complete(s, s, 2, 2);
  CHECK(r3.T_prime.empty());
  CHECK(r3.T.length() == s.length());

  CHECK_THROWS_AS(lemma31_complete(s, s, 2, 3), PreconditionError);
  CHECK_THROWS_AS(lemma31_complete(s, Sequence::repeated(c4, 2, 1), 1, 1), PreconditionError);
}

TEST_CASE("lemma31_complete postconditions on small instances") {
  std::size_t checked = 0;
  for (std::int64_t m : {3, 4, 6}) {
    auto g = GroupSpec::make({m});
    std::mt19937_64 rng(static_cast<std::uint64_t>(m));
    for (int trial = 0; trial < 40; ++trial) {
      Sequence s(g);
      const int len = 1 + static_cast<int>(rng() % 7);
      for (int i = 0; i < len; ++i) s.add(static_cast<Elem>(rng() % g.order()));
      for (std::int64_t n = 1; n <= len; ++n)
        for (const Sequence& sp : sub_multisets(s, static_cast<std::size_t>(n), static_cast<std::uint32_t>(n)))
          for (std::int64_t k = 1; k <= n; ++k) {
            const auto r = lemma31_complete(s, sp, n, k);
            REQUIRE(r.T.divides(s));
            REQUIRE(r.T_prime.divides(r.T.removed_from(s)));
            CHECK(r.T.length() + r.T_prime.length() == sp.length());
            CHECK(r.T.height() <= k);
            CHECK(static_cast<std::int64_t>(r.T.length()) >= k);
            CHECK(r.T_prime.height() <= n - k);
            CHECK(static_cast<std::int64_t>(r.T_prime.length()) >= n - k);
            ++checked;
          }
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("partition_solve examples") {
  auto c5 = GroupSpec::make({5});
  auto zeros = Sequence::repeated(c5, 0, 4);
  auto c0 = partition_solve(zeros, zeros, 4);
  CHECK(c0.case_tag == CaseTag::I);
  CHECK(c0.partition.sum().size() == 1);
  CHECK(c0.verified);

  auto s = example_a();
  auto ca = partition_solve(s, s, 2);
  CHECK(ca.case_tag == CaseTag::II);
  REQUIRE(ca.H);
  CHECK(ca.H->carrier() == Subset::of(s.group(), {0, 4}));
  CHECK(ca.bounds.at("kneser_bound") == 6);
  CHECK(ca.bounds.at("subsum_size") == 6);
  CHECK(subsum_profile(s, 2, 8).bound_blocks == 6);
  CHECK(partition_verify(ca, s, s, 2).ok);

  auto c7 = GroupSpec::make({7});
  auto s7 = Sequence::from_terms(c7, {0, 1, 2, 3});
  auto cb = partition_solve(s7, s7, 2);
  CHECK(cb.case_tag == CaseTag::I);
  CHECK(cb.partition.sum().size() >= 3);

  CHECK_THROWS_AS(partition_solve(s, Sequence::repeated(s.group(), 2, 1), 1), PreconditionError);
  CHECK_THROWS_AS(partition_solve(s, s, 1), PreconditionError);
}

TEST_CASE("partition_verify flags mutated certificates") {
  auto s = example_a();
  auto cert = partition_solve(s, s, 2);
  CHECK(partition_verify(cert, s, s, 2).violations.empty());

  auto c8 = GroupSpec::make({8});
  auto t = seq(c8, {{0, 4}, {1, 1}, {4, 5}, {5, 1}});
  auto ct = partition_solve(t, t, 5);
  REQUIRE(ct.case_tag == CaseTag::II);
  REQUIRE(partition_verify(ct, t, t, 5).ok);
  // Move one outside term next to the other so a part holds two of them.
  auto& parts = ct.partition.parts();
  const Subset z = Subset::of(c8, {0, 4});
  std::size_t from = parts.size(), to = parts.size();
  Elem moved = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Subset out = parts[i] - z;
    if (out.empty()) continue;
    if (from == parts.size()) {
      from = i;
      moved = out.min();
    } else {
      to = i;
    }
  }
  REQUIRE(to < parts.size());
  parts[from].erase(moved);
  if (parts[from].empty()) parts[from].insert(4);
  parts[to].insert(moved);
  auto v = partition_verify(ct, t, t, 5);
  CHECK_FALSE(v.ok);
  CHECK(has_violation(v, "case 2: part"));

  Certificate wrong = cert;
  wrong.case_tag = CaseTag::I;
  CHECK(has_violation(partition_verify(wrong, s, s, 2), "case 1"));
}

TEST_CASE("partition_solve agrees with exhaustive search") {
  std::mt19937_64 rng(11);
  std::size_t compared = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::int64_t m = 2 + static_cast<std::int64_t>(rng() % 11);
    auto g = trial % 4 == 3 ? GroupSpec::make({2, 4}) : GroupSpec::make({m});
    Sequence s(g);
    const int len = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < len; ++i) s.add(static_cast<Elem>(rng() % g.order()));
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(len));
    Sequence sp(g);
    for (Elem x : s.support().elements()) sp.add(x, std::min<std::uint32_t>(s.multiplicity(x), n));
    if (static_cast<std::int64_t>(sp.length()) < n) continue;
    const auto fast = partition_solve(s, sp, n);
    CHECK(partition_verify(fast, s, sp, n).ok);
    const auto slow = partition_exhaustive(s, sp, n);
    REQUIRE(slow);
    CHECK(slow->verified);
    CHECK(slow->case_tag == fast.case_tag);
    ++compared;
  }
  CHECK(compared > 300);
}

TEST_CASE("hypothesis_check examples") {
  auto c8 = GroupSpec::make({8});
  CHECK(hypothesis_check(c8, Subgroup::whole(c8), 1).item_satisfied == HypothesisItem::FullH);
  CHECK(hypothesis_check(c8, Subgroup::trivial(c8), 1).item_satisfied == HypothesisItem::TrivialH);
  const Subgroup h(Subset::of(c8, {0, 4}));
  auto r5 = hypothesis_check(c8, h, 5);
  CHECK(r5.item_satisfied == HypothesisItem::Item1);
  CHECK(r5.quotient.factors() == std::vector<std::uint32_t>{4});
  auto r2 = hypothesis_check(c8, h, 2);
  CHECK(r2.item_satisfied == HypothesisItem::None);
  CHECK_FALSE(r2.satisfied());
  // n = 3 = exp(G/H) - 1 with G/H cyclic
  CHECK(hypothesis_check(c8, h, 3).item_satisfied == HypothesisItem::Item4);

  auto g = GroupSpec::make({2, 4});
  const Subgroup h2(Subset::of(g, {0, 1}));  // C2 x 0, quotient C4
  CHECK(hypothesis_check(g, h2, 3).item_satisfied == HypothesisItem::Item4);
  auto v = GroupSpec::make({2, 2, 4});
  const Subgroup h3(Subset::of(v, {0, 1}));  // quotient C2 x C4
  auto r3 = hypothesis_check(v, h3, 4);
  CHECK(std::find(r3.items_holding.begin(), r3.items_holding.end(), HypothesisItem::Item3) !=
        r3.items_holding.end());
  CHECK(std::find(r3.items_holding.begin(), r3.items_holding.end(), HypothesisItem::Item2) !=
        r3.items_holding.end());
  CHECK(to_string(HypothesisItem::Item2) == "item2");
  CHECK(to_string(GlobalItem::G3) == "g3");
}

TEST_CASE("global sufficient conditions imply an item") {
  for (auto factors : std::vector<std::vector<std::int64_t>>{
           {2}, {4}, {6}, {8}, {9}, {12}, {16}, {2, 2}, {2, 4}, {3, 3}, {2, 6}, {4, 4}, {2, 8}, {2, 2, 2}, {2, 2, 4}}) {
    auto g = GroupSpec::make(factors);
    for (const Subgroup& h : enumerate_subgroups(g))
      for (std::int64_t n = 1; n <= 20; ++n) {
        auto r = hypothesis_check(g, h, n);
        CHECK_MESSAGE(r.globals_consistent, g.to_string() << " H=" << h.carrier().to_string() << " n=" << n);
      }
  }
}

TEST_CASE("main_pipeline examples") {
  auto c4 = GroupSpec::make({4});
  auto s = seq(c4, {{0, 6}, {2, 6}});
  auto sp = seq(c4, {{0, 5}, {2, 5}});
  auto cert = main_pipeline(c4, s, sp, 5);
  REQUIRE(cert.case_tag == CaseTag::II);
  const Subgroup h(Subset::of(c4, {0, 2}));
  CHECK(*cert.H == h);
  CHECK(*cert.K == h);
  CHECK(*cert.alpha == 0);
  CHECK(cert.e_H == 0);
  CHECK(cert.e_K == 0);
  CHECK(cert.partition.partial_sum(0, 5) == h.carrier());
  CHECK(nterm_subsums(s, 5).size() == 2);
  CHECK(cert.bounds.at("bound_H") == 2);
  CHECK(cert.verified);
  CHECK(main_verify(cert, c4, s, sp, 5).ok);
  CHECK(cert.step_violations.empty());

  Certificate bad = cert;
  bad.alpha = 1;
  auto v = main_verify(bad, c4, s, sp, 5);
  CHECK_FALSE(v.ok);
  CHECK(has_violation(v, "(ii)(d)"));

  auto c5 = GroupSpec::make({5});
  auto z = Sequence::repeated(c5, 3, 4);
  auto triv = main_pipeline(c5, z, z, 4);
  CHECK(triv.case_tag == CaseTag::I);
  CHECK(main_verify(triv, c5, z, z, 4).ok);

  auto full = seq(c4, {{0, 5}, {1, 5}, {2, 5}, {3, 5}});
  auto fc = main_pipeline(c4, full, full, 5, PipelineMode::FullGroup);
  CHECK(fc.case_tag == CaseTag::I);
  CHECK(nterm_subsums(full, 5) == Subset::full(c4));
  CHECK(main_verify(fc, c4, full, full, 5, PipelineMode::FullGroup).ok);

  auto fg = main_pipeline(c4, s, sp, 5, PipelineMode::FullGroup);
  CHECK(fg.case_tag == CaseTag::II);
  CHECK(main_verify(fg, c4, s, sp, 5, PipelineMode::FullGroup).ok);
  auto short_sp = seq(c4, {{0, 2}, {2, 2}});
  CHECK_THROWS_AS(main_pipeline(c4, short_sp, short_sp, 2, PipelineMode::FullGroup), HypothesesUnmet);
  auto ea = example_a();
  CHECK_THROWS_AS(main_pipeline(ea.group(), ea, ea, 2), HypothesesUnmet);
}

TEST_CASE("main_pipeline on coset-concentrated instances") {
  std::mt19937_64 rng(23);
  std::size_t case_two = 0, forced = 0;
  const std::vector<std::vector<std::int64_t>> groups = {{4}, {6}, {8}, {9}, {12}, {16}, {2, 4}, {3, 3}, {4, 4}, {2, 2, 2}};
  for (int trial = 0; trial < 300; ++trial) {
    auto g = GroupSpec::make(groups[rng() % groups.size()]);
    std::vector<Subgroup> cand;
    for (const Subgroup& h : enumerate_subgroups(g))
      if (!h.is_trivial() && !h.is_whole()) cand.push_back(h);
    const Subgroup& h = cand[rng() % cand.size()];
    const Elem alpha = static_cast<Elem>(rng() % g.order());
    const auto n = static_cast<std::int64_t>(2 + rng() % 9);
    Sequence s(g);
    auto hel = h.carrier().elements();
    std::shuffle(hel.begin(), hel.end(), rng);
    const std::size_t fill = 1 + rng() % hel.size();
    for (std::size_t i = 0; i < fill; ++i)
      s.add(g.add(alpha, hel[i]), static_cast<std::uint32_t>(1 + rng() % static_cast<std::uint64_t>(n + 2)));
    for (std::uint64_t i = 0, outs = rng() % static_cast<std::uint64_t>(n); i < outs; ++i)
      s.add(static_cast<Elem>(rng() % g.order()));
    Sequence sp(g);
    for (Elem x : s.support().elements()) sp.add(x, std::min<std::uint32_t>(s.multiplicity(x), n));
    if (static_cast<std::int64_t>(sp.length()) < n) continue;
    for (bool early : {true, false}) {
      SolveOptions opts;
      opts.early_exit = early;
      try {
        auto cert = main_pipeline(g, s, sp, n, PipelineMode::Standard, opts);
        CHECK(main_verify(cert, g, s, sp, n).ok);
        if (early) CHECK(cert.step_violations.empty());
        if (cert.case_tag == CaseTag::II) {
          ++case_two;
          CHECK(cert.K->is_subgroup_of(*cert.H));
          CHECK(cert.k == n - cert.e_K);
          CHECK(cert.k >= 1);
          forced += !early;
        }
      } catch (const HypothesesUnmet&) {
      }
    }
  }
  CHECK(case_two > 20);
  CHECK(forced > 10);
}
