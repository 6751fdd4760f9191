#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "subsumlab/errors.hpp"
#include "subsumlab/group.hpp"

using namespace subsum;

namespace {

Subset to_subset(const GroupSpec& g, const oracle::Set& s) {
  Subset out(g);
  for (int x : s) out.insert(static_cast<Elem>(x));
  return out;
}

oracle::Set to_set(const Subset& s) {
  oracle::Set out;
  s.for_each([&](Elem x) { out.insert(static_cast<int>(x)); });
  return out;
}

oracle::Group oracle_of(const GroupSpec& g) {
  oracle::Group o;
  for (auto f : g.factors()) o.m.push_back(static_cast<int>(f));
  return o;
}

std::vector<GroupSpec> small_groups(Elem max_order) {
  std::vector<GroupSpec> out;
  for (std::int64_t m = 1; m <= max_order; ++m) out.push_back(GroupSpec::make({m}));
  for (std::int64_t a = 2; a <= max_order; ++a)
    for (std::int64_t b = a; a * b <= max_order; b += a) out.push_back(GroupSpec::make({a, b}));
  for (std::int64_t a = 2; a * a * a <= max_order; ++a)
    for (std::int64_t b = a; a * b * b <= max_order; b += a)
      for (std::int64_t c = b; a * b * c <= max_order; c += b) out.push_back(GroupSpec::make({a, b, c}));
  return out;
}

}  // namespace

TEST_CASE("make_group normalizes factor lists") {
  auto t = GroupSpec::make({1});
  CHECK(t.order() == 1);
  auto c8 = GroupSpec::make({8});
  CHECK(c8.order() == 8);
  CHECK(c8.exponent() == 8);
  bool normalized = false;
  auto g = GroupSpec::make(std::vector<std::int64_t>{4, 2}, &normalized);
  CHECK(normalized);
  CHECK(g.factors() == std::vector<std::uint32_t>{2, 4});
  CHECK(g.order() == 8);
  CHECK(GroupSpec::make({2, 3}).factors() == std::vector<std::uint32_t>{6});
  CHECK(GroupSpec::make({2, 3, 3}).factors() == std::vector<std::uint32_t>{3, 6});
  CHECK(GroupSpec::make({1, 1, 5}).factors() == std::vector<std::uint32_t>{5});
  CHECK_THROWS_AS(GroupSpec::make({0}), PreconditionError);
  CHECK_THROWS_AS(GroupSpec::make({-3}), PreconditionError);
  CHECK_THROWS_AS(GroupSpec::make(std::vector<std::int64_t>{}), PreconditionError);
}

TEST_CASE("element index and coordinates are a bijection") {
  for (const auto& g : small_groups(24)) {
    for (Elem a = 0; a < g.order(); ++a) {
      auto c = g.coords(a);
      std::vector<std::int64_t> c64(c.begin(), c.end());
      CHECK(g.index_of(c64) == a);
    }
  }
}

TEST_CASE("addition matches the coordinatewise oracle") {
  for (const auto& g : small_groups(16)) {
    auto o = oracle_of(g);
    for (Elem a = 0; a < g.order(); ++a)
      for (Elem b = 0; b < g.order(); ++b)
        REQUIRE(g.add(a, b) == static_cast<Elem>(o.index(o.add(o.tuple(a), o.tuple(b)))));
    for (Elem a = 0; a < g.order(); ++a) {
      CHECK(g.add(a, g.neg(a)) == 0);
      CHECK(g.order_of(a) == static_cast<std::uint32_t>(o.order_of(o.tuple(a))));
      CHECK(g.mul(-1, a) == g.neg(a));
    }
  }
  // Large group without an addition table.
  auto big = GroupSpec::make({2, 1024});
  CHECK(big.add(big.index_of(std::vector<std::int64_t>{1, 1000}), big.index_of(std::vector<std::int64_t>{1, 30})) ==
        big.index_of(std::vector<std::int64_t>{0, 6}));
}

TEST_CASE("sumset examples") {
  auto c5 = GroupSpec::make({5});
  CHECK(sumset(Subset::of(c5, {0}), Subset::of(c5, {3})) == Subset::of(c5, {3}));
  auto c4 = GroupSpec::make({4});
  CHECK(sumset(Subset::of(c4, {0, 1}), Subset::of(c4, {0, 1})) == Subset::of(c4, {0, 1, 2}));
  auto c6 = GroupSpec::make({6});
  CHECK(sumset(Subset::of(c6, {0, 3}), Subset::of(c6, {0, 3})) == Subset::of(c6, {0, 3}));
  CHECK_THROWS_AS(sumset(Subset(c4), Subset::of(c4, {1})), PreconditionError);
  CHECK_THROWS_AS(sumset(Subset::of(c4, {1}), Subset::of(c6, {1})), PreconditionError);
}

TEST_CASE("iterated sumset examples") {
  auto c5 = GroupSpec::make({5});
  CHECK(iterated_sumset(Subset::of(c5, {2, 4}), 0) == Subset::of(c5, {0}));
  CHECK(iterated_sumset(Subset::of(c5, {0, 1}), 3) == Subset::of(c5, {0, 1, 2, 3}));
  auto c4 = GroupSpec::make({4});
  CHECK(iterated_sumset(Subset::of(c4, {0, 1}), 5) == Subset::full(c4));
  CHECK_THROWS_AS(iterated_sumset(Subset::of(c4, {0}), -1), PreconditionError);
}

TEST_CASE("sumset commutes, associates, and iterates like chained sums") {
  std::mt19937_64 rng(7);
  for (const auto& g : small_groups(16)) {
    auto o = oracle_of(g);
    for (int trial = 0; trial < 40; ++trial) {
      Subset a(g), b(g), c(g);
      for (Elem x = 0; x < g.order(); ++x) {
        if (rng() % 3 == 0) a.insert(x);
        if (rng() % 3 == 0) b.insert(x);
        if (rng() % 3 == 0) c.insert(x);
      }
      if (a.empty()) a.insert(0);
      if (b.empty()) b.insert(1 % g.order());
      if (c.empty()) c.insert(0);
      CHECK(sumset(a, b) == sumset(b, a));
      CHECK(sumset(sumset(a, b), c) == sumset(a, sumset(b, c)));
      CHECK(to_set(sumset(a, b)) == oracle::sumset(o, to_set(a), to_set(b)));
      for (int n = 0; n <= 6; ++n) REQUIRE(to_set(iterated_sumset(a, n)) == oracle::iterated(o, to_set(a), n));
    }
  }
}

TEST_CASE("representation counts") {
  auto c3 = GroupSpec::make({3});
  std::vector<Subset> zeros{Subset::of(c3, {0}), Subset::of(c3, {0})};
  CHECK(representation_count(zeros, 0) == 1);
  std::vector<Subset> full{Subset::full(c3), Subset::full(c3)};
  for (Elem x = 0; x < 3; ++x) CHECK(representation_count(full, x) == 3);
  auto c4 = GroupSpec::make({4});
  std::vector<Subset> ab{Subset::of(c4, {0, 1}), Subset::of(c4, {0, 1})};
  CHECK(representation_count(ab, 1) == 2);

  std::mt19937_64 rng(11);
  for (const auto& g : small_groups(12)) {
    auto o = oracle_of(g);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Subset> parts;
      std::vector<oracle::Set> oparts;
      const int count = 1 + static_cast<int>(rng() % 3);
      for (int i = 0; i < count; ++i) {
        Subset p(g);
        for (Elem x = 0; x < g.order(); ++x)
          if (rng() % 2) p.insert(x);
        if (p.empty()) p.insert(0);
        parts.push_back(p);
        oparts.push_back(to_set(p));
      }
      const auto counts = representation_counts(parts);
      const Subset sum = sumset(parts);
      for (Elem x = 0; x < g.order(); ++x) {
        CHECK(counts[x] == static_cast<std::uint64_t>(oracle::count_reps(o, oparts, static_cast<int>(x))));
        CHECK(sum.contains(x) == (counts[x] >= 1));
      }
    }
  }
}

TEST_CASE("stabilizer examples and properties") {
  auto c6 = GroupSpec::make({6});
  CHECK(stabilizer(Subset::of(c6, {0})).is_trivial());
  CHECK(stabilizer(Subset::full(c6)).is_whole());
  CHECK(stabilizer(Subset::of(c6, {0, 2, 4})).carrier() == Subset::of(c6, {0, 2, 4}));
  CHECK_THROWS_AS(stabilizer(Subset(c6)), PreconditionError);

  std::mt19937_64 rng(3);
  for (const auto& g : small_groups(16)) {
    auto o = oracle_of(g);
    for (int trial = 0; trial < 30; ++trial) {
      Subset a(g);
      for (Elem x = 0; x < g.order(); ++x)
        if (rng() % 2) a.insert(x);
      if (a.empty()) a.insert(0);
      const Subgroup h = stabilizer(a);
      CHECK(is_subgroup(h.carrier()));
      CHECK(is_periodic_under(a, h));
      CHECK(to_set(h.carrier()) == oracle::stabilizer(o, to_set(a)));
      for (Elem x = 0; x < g.order(); ++x) CHECK(stabilizer(a.translated(x)) == h);
    }
  }
}

TEST_CASE("affine span and generated subgroup") {
  auto c6 = GroupSpec::make({6});
  CHECK(affine_span(Subset::of(c6, {4})).is_trivial());
  CHECK(affine_span(Subset::of(c6, {0, 1})).is_whole());
  auto c8 = GroupSpec::make({8});
  CHECK(affine_span(Subset::of(c8, {1, 3})).carrier() == Subset::of(c8, {0, 2, 4, 6}));
  CHECK(subgroup_generated(Subset(c8)).is_trivial());
  CHECK(subgroup_generated(Subset::of(c8, {2})).carrier() == Subset::of(c8, {0, 2, 4, 6}));
  auto v4 = GroupSpec::make({2, 2});
  CHECK(subgroup_generated(Subset::of(v4, {1, 2})).is_whole());

  std::mt19937_64 rng(5);
  for (const auto& g : small_groups(16)) {
    auto o = oracle_of(g);
    for (int trial = 0; trial < 20; ++trial) {
      Subset a(g);
      for (Elem x = 0; x < g.order(); ++x)
        if (rng() % 4 == 0) a.insert(x);
      if (a.empty()) a.insert(static_cast<Elem>(rng() % g.order()));
      const Subgroup span = affine_span(a);
      const Elem a0 = a.min();
      oracle::Set diffs;
      a.for_each([&](Elem x) { diffs.insert(static_cast<int>(g.sub(x, a0))); });
      CHECK(to_set(span.carrier()) == oracle::closure(o, diffs));
      a.for_each([&](Elem x) { CHECK(span.contains(g.sub(x, a0))); });
      // A lies in exactly one coset of its span.
      int cosets_met = 0;
      for (Elem t = 0; t < g.order(); ++t) {
        Subset coset = span.carrier().translated(t);
        if (coset.min() == t && a.intersects(coset)) ++cosets_met;
      }
      CHECK(cosets_met == 1);
    }
  }
}

TEST_CASE("quotient decomposition") {
  auto c4 = GroupSpec::make({4});
  auto q = quotient_decompose(c4, Subgroup(Subset::of(c4, {0, 2})));
  CHECK(q.quotient_spec.factors() == std::vector<std::uint32_t>{2});
  auto g = GroupSpec::make({2, 4});
  const Elem h1 = g.index_of(std::vector<std::int64_t>{0, 2});
  auto q2 = quotient_decompose(g, Subgroup(Subset::of(g, {0, h1})));
  CHECK(q2.quotient_spec.factors() == std::vector<std::uint32_t>{2, 2});
  auto q3 = quotient_decompose(g, Subgroup::trivial(g));
  CHECK(q3.quotient_spec == g);
  CHECK_THROWS_AS(Subgroup(Subset::of(c4, {0, 1})), PreconditionError);

  for (const auto& gg : small_groups(24)) {
    for (const auto& h : enumerate_subgroups(gg)) {
      auto qs = quotient_decompose(gg, h);
      CHECK(qs.quotient_spec.order() * h.size() == gg.order());
      for (Elem a = 0; a < gg.order(); ++a) {
        for (Elem b = 0; b < gg.order(); ++b)
          REQUIRE(qs.project(gg.add(a, b)) == qs.quotient_spec.add(qs.project(a), qs.project(b)));
        h.carrier().for_each([&](Elem x) { CHECK(qs.coset_of[gg.add(a, x)] == qs.coset_of[a]); });
      }
      CHECK(quotient_spec_within(Subgroup::whole(gg), h) == qs.quotient_spec);
    }
  }
}

TEST_CASE("subgroup enumeration") {
  CHECK(enumerate_subgroups(GroupSpec::make({1})).size() == 1);
  auto c4 = GroupSpec::make({4});
  auto subs = enumerate_subgroups(c4);
  REQUIRE(subs.size() == 3);
  CHECK(subs[0].carrier() == Subset::of(c4, {0}));
  CHECK(subs[1].carrier() == Subset::of(c4, {0, 2}));
  CHECK(subs[2].is_whole());
  CHECK(enumerate_subgroups(GroupSpec::make({2, 2})).size() == 5);
  CHECK_THROWS_AS(enumerate_subgroups(GroupSpec::make({64}), 32), CapExceeded);

  for (const auto& g : small_groups(12)) {
    auto o = oracle_of(g);
    auto mine = enumerate_subgroups(g);
    auto ref = oracle::all_subgroups(o);
    REQUIRE(mine.size() == ref.size());
    std::set<oracle::Set> refset(ref.begin(), ref.end());
    for (std::size_t i = 0; i < mine.size(); ++i) {
      CHECK(refset.count(to_set(mine[i].carrier())) == 1);
      if (i > 0) CHECK(mine[i - 1].size() <= mine[i].size());
    }
  }
}

TEST_CASE("group parameters") {
  CHECK(group_params(GroupSpec::make({1})).d_star == 0);
  CHECK(group_params(GroupSpec::make({1})).exponent == 1);
  CHECK(group_params(GroupSpec::make({7})).d_star == 6);
  CHECK(group_params(GroupSpec::make({2, 4})).d_star == 4);
  CHECK(group_params(GroupSpec::make({2, 4})).exponent == 4);
}

TEST_CASE("subset printing") {
  auto g = GroupSpec::make({2, 4});
  CHECK(g.to_string() == "2x4");
  CHECK(GroupSpec::make({1}).to_string() == "1");
  CHECK(Subset::of(g, {0, 3}).to_string() == "{(0,0),(1,1)}");
  CHECK(Subset::of(GroupSpec::make({8}), {0, 4}).to_string() == "{0,4}");
}
