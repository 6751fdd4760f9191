#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "subsumlab/errors.hpp"
#include "subsumlab/sequence.hpp"

using namespace subsum;

namespace {

oracle::Group oracle_of(const GroupSpec& g) {
  oracle::Group o;
  for (auto f : g.factors()) o.m.push_back(static_cast<int>(f));
  return o;
}

oracle::Set to_set(const Subset& s) {
  oracle::Set out;
  s.for_each([&](Elem x) { out.insert(static_cast<int>(x)); });
  return out;
}

oracle::Multiset to_multiset(const Sequence& s) {
  oracle::Multiset m;
  const auto mult = s.multiplicities();
  for (Elem x = 0; x < mult.size(); ++x)
    if (mult[x]) m[static_cast<int>(x)] = static_cast<int>(mult[x]);
  return m;
}

Sequence seq(const GroupSpec& g, std::initializer_list<std::pair<Elem, std::uint32_t>> terms) {
  Sequence s(g);
  for (auto [x, c] : terms) s.add(x, c);
  return s;
}

}  // namespace

TEST_CASE("sequence statistics") {
  auto c3 = GroupSpec::make({3});
  auto st = seq_stats(Sequence(c3));
  CHECK(st.sigma == 0);
  CHECK(st.height == 0);
  CHECK(st.support.empty());
  auto s = Sequence::from_terms(c3, {1, 1, 1});
  auto st2 = seq_stats(s);
  CHECK(st2.sigma == 0);
  CHECK(st2.height == 3);
  CHECK(st2.support == Subset::of(c3, {1}));
  auto c7 = GroupSpec::make({7});
  auto r = Sequence::repeated(c7, 3, 4);
  CHECK(r.sum() == c7.mul(4, 3));
  CHECK(r.height() == 4);
}

TEST_CASE("subsequence relation and removal") {
  auto c5 = GroupSpec::make({5});
  auto s = seq(c5, {{1, 2}, {2, 1}});
  auto t = seq(c5, {{1, 1}});
  CHECK(t.divides(s));
  CHECK_FALSE(s.divides(t));
  auto rest = t.removed_from(s);
  CHECK(rest == seq(c5, {{1, 1}, {2, 1}}));
  CHECK(rest.length() == 2);
  CHECK_THROWS_AS(s.removed_from(t), PreconditionError);
  CHECK(s.to_string() == "1^2;2");
}

TEST_CASE("n-term subsums examples") {
  auto c8 = GroupSpec::make({8});
  CHECK(nterm_subsums(Sequence::repeated(c8, 0, 5), 3) == Subset::of(c8, {0}));
  auto ex_a = seq(c8, {{0, 2}, {4, 2}, {1, 2}, {5, 2}});
  auto s2 = nterm_subsums(ex_a, 2);
  CHECK(s2 == Subset::of(c8, {0, 1, 2, 4, 5, 6}));
  CHECK(stabilizer(s2).carrier() == Subset::of(c8, {0, 4}));
  auto c5 = GroupSpec::make({5});
  CHECK(nterm_subsums(seq(c5, {{1, 2}, {2, 1}}), 2) == Subset::of(c5, {2, 3}));
  CHECK(nterm_subsums(ex_a, 0) == Subset::of(c8, {0}));
  CHECK_THROWS_AS(nterm_subsums(ex_a, 9), PreconditionError);
  CHECK_THROWS_AS(nterm_subsums(ex_a, -1), PreconditionError);
}

TEST_CASE("all subsums examples") {
  auto c8 = GroupSpec::make({8});
  CHECK(all_subsums(Sequence::repeated(c8, 0, 3)) == Subset::of(c8, {0}));
  auto c4 = GroupSpec::make({4});
  CHECK(all_subsums(Sequence::from_terms(c4, {1, 2})) == Subset::of(c4, {1, 2, 3}));
  auto c2 = GroupSpec::make({2});
  CHECK(all_subsums(Sequence::repeated(c2, 1, 2)) == Subset::full(c2));
  CHECK_THROWS_AS(all_subsums(Sequence(c2)), PreconditionError);
}

TEST_CASE("n-term subsums match brute force and complement symmetry") {
  std::mt19937_64 rng(17);
  for (std::int64_t m : {5, 6, 8, 9, 12}) {
    auto g = GroupSpec::make({m});
    auto o = oracle_of(g);
    for (int trial = 0; trial < 60; ++trial) {
      Sequence s(g);
      const int len = 1 + static_cast<int>(rng() % 10);
      for (int i = 0; i < len; ++i) s.add(static_cast<Elem>(rng() % g.order()));
      const auto table = subsum_table(s, s.length());
      for (std::size_t n = 0; n <= s.length(); ++n) {
        REQUIRE(to_set(table[n]) == oracle::nterm_subsums(o, to_multiset(s), static_cast<int>(n)));
        // Sigma_n(S) = sigma(S) - Sigma_{|S|-n}(S)
        Subset mirrored = table[s.length() - n].negated().translated(s.sum());
        CHECK(mirrored == table[n]);
      }
    }
  }
}

TEST_CASE("push forward") {
  auto c8 = GroupSpec::make({8});
  auto q = quotient_decompose(c8, Subgroup::trivial(c8));
  auto s = seq(c8, {{1, 2}, {6, 1}});
  CHECK(push_forward(s, q).multiplicities().size() == 8);
  CHECK(push_forward(s, q).length() == 3);
  auto q4 = quotient_decompose(c8, Subgroup(Subset::of(c8, {0, 4})));
  auto img = push_forward(seq(c8, {{0, 2}, {4, 2}}), q4);
  CHECK(img.length() == 4);
  CHECK(img.height() == 4);
  CHECK(img.multiplicity(q4.project(0)) == 4);
  auto c4 = GroupSpec::make({4});
  auto q2 = quotient_decompose(c4, Subgroup(Subset::of(c4, {0, 2})));
  auto img2 = push_forward(Sequence::from_terms(c4, {1, 2, 3}), q2);
  CHECK(img2.multiplicity(q2.project(1)) == 2);
  CHECK(img2.multiplicity(q2.project(0)) == 1);
  CHECK_THROWS_AS(push_forward(Sequence(c4), q4), PreconditionError);
}

TEST_CASE("subsum profile examples") {
  auto c8 = GroupSpec::make({8});
  auto ex_a = seq(c8, {{0, 2}, {4, 2}, {1, 2}, {5, 2}});
  auto p = subsum_profile(ex_a, 2, 8);
  CHECK(p.H.carrier() == Subset::of(c8, {0, 4}));
  CHECK(p.N == 2);
  CHECK(p.e == 0);
  CHECK(p.rho == 0);
  CHECK(p.bound_blocks == 6);
  CHECK(p.bound_minsum == 6);
  CHECK(p.bound_kneser_form == 6);

  auto c5 = GroupSpec::make({5});
  auto p0 = subsum_profile(Sequence::repeated(c5, 0, 3), 3, 3);
  CHECK(p0.H.is_trivial());
  CHECK(p0.X.size() == 1);
  CHECK(p0.e == 0);
  CHECK(p0.rho == 0);

  auto c4 = GroupSpec::make({4});
  auto p2 = subsum_profile(seq(c4, {{0, 5}, {2, 5}}), 5, 10);
  CHECK(p2.H.carrier() == Subset::of(c4, {0, 2}));
  CHECK(p2.N == 1);
  CHECK(p2.X.size() == 1);
  CHECK(p2.e == 0);
  CHECK(p2.rho == 0);
  CHECK_THROWS_AS(subsum_profile(seq(c4, {{0, 5}}), 6, 5), PreconditionError);
}

TEST_CASE("S* construction") {
  auto c8 = GroupSpec::make({8});
  auto ex_a = seq(c8, {{0, 2}, {4, 2}, {1, 2}, {5, 2}});
  auto p = subsum_profile(ex_a, 2, 8);
  CHECK(build_s_star(ex_a, p, 2) == ex_a);

  auto c4 = GroupSpec::make({4});
  auto s = seq(c4, {{0, 3}, {2, 5}});
  auto ps = subsum_profile(s, 5, static_cast<std::int64_t>(s.length()));
  auto star = build_s_star(s, ps, 5);
  CHECK(star.multiplicity(0) == 5);
  CHECK(s.divides(star));
  CHECK(static_cast<std::int64_t>(star.length()) == static_cast<std::int64_t>(s.length()) + ps.rho);
  auto o = oracle_of(c4);
  CHECK(to_set(nterm_subsums(star, 5)) == oracle::nterm_subsums(o, to_multiset(s), 5));
  CHECK_THROWS_AS(build_s_star(s, subsum_profile(s, 5, 4), 5), PreconditionError);
  CHECK_THROWS_AS(build_s_star(s, ps, 4), PreconditionError);
}

TEST_CASE("Davenport constant by exhaustive search") {
  CHECK(davenport_bruteforce(GroupSpec::make({1})).value == 1);
  CHECK(davenport_bruteforce(GroupSpec::make({3})).value == 3);
  auto v4 = davenport_bruteforce(GroupSpec::make({2, 2}));
  CHECK(v4.value == 3);
  CHECK(v4.within_classical_bounds);
  for (std::int64_t m = 1; m <= 8; ++m) {
    auto g = GroupSpec::make({m});
    CHECK(davenport_bruteforce(g).value == static_cast<std::uint32_t>(oracle::davenport(oracle_of(g))));
  }
  CHECK(davenport_bruteforce(GroupSpec::make({2, 4})).value == 5);
  CHECK_THROWS_AS(davenport_bruteforce(GroupSpec::make({17})), CapExceeded);
}
