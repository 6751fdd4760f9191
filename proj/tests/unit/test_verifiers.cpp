#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "subsumlab/errors.hpp"
#include "subsumlab/verifiers.hpp"

using namespace subsum;

namespace {

Elem el(const GroupSpec& g, std::initializer_list<std::int64_t> c) {
  return g.index_of(std::vector<std::int64_t>(c));
}

std::vector<GroupSpec> groups_up_to(Elem max_order) {
  std::vector<GroupSpec> out;
  for (std::int64_t m = 1; m <= max_order; ++m) out.push_back(GroupSpec::make({m}));
  for (std::int64_t a = 2; a <= max_order; ++a)
    for (std::int64_t b = a; a * b <= max_order; b += a) out.push_back(GroupSpec::make({a, b}));
  for (std::int64_t a = 2; a * a * a <= max_order; ++a)
    for (std::int64_t b = a; a * b * b <= max_order; b += a)
      for (std::int64_t c = b; a * b * c <= max_order; c += b) out.push_back(GroupSpec::make({a, b, c}));
  return out;
}

Subset from_mask(const GroupSpec& g, std::uint64_t mask) {
  Subset s(g);
  for (Elem x = 0; x < g.order(); ++x)
    if (mask >> x & 1U) s.insert(x);
  return s;
}

}  // namespace

TEST_CASE("check_kneser examples") {
  auto c5 = GroupSpec::make({5});
  std::vector<Subset> one{Subset::of(c5, {1, 3})};
  auto r1 = check_kneser(one);
  CHECK(r1.holds());
  CHECK(r1.lhs == 2);
  CHECK(r1.rhs == 2);

  auto c6 = GroupSpec::make({6});
  std::vector<Subset> p{Subset::of(c6, {0, 3}), Subset::of(c6, {0, 3})};
  auto r2 = check_kneser(p);
  CHECK(r2.holds());
  CHECK(r2.rhs == 2);
  CHECK(r2.lhs == 2);
  CHECK(r2.witnesses.at("H") == "{0,3}");

  std::vector<Subset> q{Subset::of(c5, {0, 1}), Subset::of(c5, {0, 1})};
  auto r3 = check_kneser(q);
  CHECK(r3.rhs == 3);
  CHECK(r3.lhs == 3);

  std::vector<Subset> bad{Subset::of(c5, {0}), Subset(c5)};
  CHECK_THROWS_AS(check_kneser(bad), PreconditionError);
  CHECK_THROWS_AS(check_kneser(std::vector<Subset>{}), PreconditionError);
}

TEST_CASE("check_kneser on random parts") {
  std::mt19937_64 rng(21);
  for (const auto& g : groups_up_to(16)) {
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<Subset> parts;
      const int count = 1 + static_cast<int>(rng() % 4);
      for (int i = 0; i < count; ++i) {
        Subset s(g);
        for (Elem x = 0; x < g.order(); ++x)
          if (rng() % 4 == 0) s.insert(x);
        if (s.empty()) s.insert(static_cast<Elem>(rng() % g.order()));
        parts.push_back(s);
      }
      auto r = check_kneser(parts);
      REQUIRE(r.holds());
    }
  }
}

TEST_CASE("check_subsum_kneser examples") {
  auto c5 = GroupSpec::make({5});
  auto r0 = check_subsum_kneser(Sequence::repeated(c5, 0, 3), 3);
  CHECK(r0.holds());
  CHECK(r0.lhs == 1);
  CHECK(r0.rhs == 1);

  auto c8 = GroupSpec::make({8});
  auto ex_a = Sequence::from_terms(c8, {0, 0, 4, 4, 1, 1, 5, 5});
  auto r = check_subsum_kneser(ex_a, 2);
  CHECK(r.holds());
  CHECK(r.lhs == 6);
  CHECK(r.rhs == 6);
  CHECK_THROWS_AS(check_subsum_kneser(ex_a, 1), PreconditionError);
  CHECK_THROWS_AS(check_subsum_kneser(ex_a, 9), PreconditionError);

  auto c12 = GroupSpec::make({12});
  std::mt19937_64 rng(99);
  auto o = oracle::Group{{12}};
  for (int trial = 0; trial < 300; ++trial) {
    Sequence s(c12);
    const int len = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < len; ++i) s.add(static_cast<Elem>(rng() % 12));
    for (std::int64_t n = s.height(); n <= len; ++n) {
      auto rep = check_subsum_kneser(s, n);
      REQUIRE(rep.holds());
      oracle::Multiset m;
      for (Elem x = 0; x < 12; ++x)
        if (s.multiplicity(x)) m[static_cast<int>(x)] = static_cast<int>(s.multiplicity(x));
      CHECK(rep.lhs == static_cast<std::int64_t>(oracle::nterm_subsums(o, m, static_cast<int>(n)).size()));
    }
  }
}

TEST_CASE("check_pigeonhole examples") {
  auto c3 = GroupSpec::make({3});
  auto r = check_pigeonhole(Subset::of(c3, {0, 1}), Subset::of(c3, {0, 1}));
  CHECK(r.holds());
  CHECK(r.status == CheckStatus::Holds);
  CHECK(r.rhs == 1);
  CHECK(r.lhs >= 1);

  auto c7 = GroupSpec::make({7});
  auto full = check_pigeonhole(Subset::full(c7), Subset::full(c7));
  CHECK(full.lhs == 7);
  CHECK(full.rhs == 7);

  auto c6 = GroupSpec::make({6});
  auto cos = check_pigeonhole(Subset::of(c6, {0, 3}), Subset::of(c6, {0, 3}));
  CHECK(cos.holds());
  CHECK(cos.status == CheckStatus::Holds);
  CHECK(cos.witnesses.at("H") == "{0,3}");

  auto small = check_pigeonhole(Subset::of(c7, {0, 1}), Subset::of(c7, {0, 2}));
  CHECK(small.status == CheckStatus::NotTriggered);
  CHECK_THROWS_AS(check_pigeonhole(Subset::of(c6, {0}), Subset::of(c7, {0})), PreconditionError);

  std::mt19937_64 rng(5);
  for (const auto& g : groups_up_to(12)) {
    for (int trial = 0; trial < 40; ++trial) {
      Subset a(g), b(g);
      for (Elem x = 0; x < g.order(); ++x) {
        if (rng() % 3) a.insert(x);
        if (rng() % 3) b.insert(x);
      }
      REQUIRE(check_pigeonhole(a, b).holds());
    }
  }
}

TEST_CASE("check_cor1 examples") {
  auto c4 = GroupSpec::make({4});
  auto r = check_cor1(Subset::of(c4, {0, 1}), 5);
  CHECK(r.holds());
  CHECK(r.lhs == 4);
  CHECK(r.rhs == 4);

  auto g33 = GroupSpec::make({3, 3});
  Subset a(g33);
  a.insert(el(g33, {1, 0}));
  a.insert(el(g33, {2, 0}));
  a.insert(el(g33, {0, 1}));
  auto r2 = check_cor1(a, 3);
  CHECK(r2.holds());
  CHECK(r2.lhs == 8);
  CHECK(r2.rhs == 9);
  CHECK(r2.witnesses.at("case") == "1(b)");
  CHECK(r2.witnesses.at("K") == "{(0,0)}");

  auto g24 = GroupSpec::make({2, 4});
  Subset b(g24);
  b.insert(el(g24, {0, 0}));
  b.insert(el(g24, {1, 0}));
  b.insert(el(g24, {0, 1}));
  auto r3 = check_cor1(b, 3);
  CHECK(r3.holds());
  CHECK(r3.lhs == 7);
  bool saw_2b = false;
  for (const auto& m : classify_small_sumset(b, 3))
    if (m.label == "2(b)") {
      saw_2b = true;
      CHECK(m.witnesses.at("H0") == "{(0,0),(1,0)}");
      CHECK(m.witnesses.at("r") == "1");
    }
  CHECK(saw_2b);
  // |G| - |H0| + |K|
  CHECK(r3.lhs == 8 - 2 + 1);

  CHECK(check_cor1(Subset::of(c4, {0, 2}), 3).status == CheckStatus::Inapplicable);
  CHECK_THROWS_AS(check_cor1(Subset::of(c4, {0, 1}), 2), PreconditionError);
}

TEST_CASE("check_cor2 examples") {
  auto c4 = GroupSpec::make({4});
  auto r = check_cor2(Subset::of(c4, {0, 1, 2}), 4);
  CHECK(r.holds());
  CHECK(r.lhs == 4);

  auto g24 = GroupSpec::make({2, 4});
  Subset b(g24);
  b.insert(el(g24, {0, 0}));
  b.insert(el(g24, {1, 0}));
  b.insert(el(g24, {0, 1}));
  auto r2 = check_cor2(b, 3);
  CHECK(r2.holds());
  CHECK(r2.lhs == 7);
  CHECK(r2.witnesses.at("case") == "2(b)");

  for (std::int64_t n = 2; n <= 5; ++n) CHECK(check_cor2(Subset::full(g24), n).lhs == 8);
  CHECK(check_cor2(Subset::full(g24), 1).status == CheckStatus::Inapplicable);
  CHECK(check_cor2(Subset::of(c4, {0, 1}), 2).status == CheckStatus::Inapplicable);
}

TEST_CASE("structure sweep over small groups has no fall-through") {
  std::size_t classified = 0, bound_cases = 0;
  for (const auto& g : groups_up_to(9)) {
    const std::int64_t e = g.exponent();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << g.order()); ++mask) {
      const Subset a = from_mask(g, mask);
      if (!affine_span(a).is_whole()) continue;
      for (std::int64_t n = e - 1; n <= e + 1; ++n) {
        if (n >= 3) {
          auto r = check_cor1(a, n);
          INFO(g.to_string(), " A=", a.to_string(), " n=", n);
          REQUIRE(r.holds());
          if (r.witnesses.count("case")) ++classified;
          else ++bound_cases;
        }
        if (n >= 1 && n * static_cast<std::int64_t>(a.size()) > static_cast<std::int64_t>(g.order())) {
          auto r = check_cor2(a, n);
          INFO(g.to_string(), " A=", a.to_string(), " n=", n);
          REQUIRE(r.holds());
        }
      }
    }
  }
  CHECK(classified > 0);
  CHECK(bound_cases > classified);
}

TEST_CASE("check_lemma_extra examples") {
  auto c8 = GroupSpec::make({8});
  auto ex_a = Sequence::from_terms(c8, {0, 0, 4, 4, 1, 1, 5, 5});
  auto r = check_lemma_extra(ex_a, ex_a, 2);
  CHECK(r.holds());
  CHECK(r.status == CheckStatus::Holds);
  CHECK(r.lhs == 6);
  CHECK(r.rhs == 7);
  CHECK(r.witnesses.at("span_Z") == Subset::full(c8).to_string());

  auto c4 = GroupSpec::make({4});
  Sequence s(c4);
  s.add(0, 5);
  s.add(2, 5);
  auto r2 = check_lemma_extra(s, s, 5);
  CHECK(r2.holds());
  CHECK(r2.lhs == 2);
  CHECK(r2.witnesses.at("span_Z") == "{0,2}");
  CHECK(r2.witnesses.at("H") == "{0,2}");

  auto c5 = GroupSpec::make({5});
  auto t = Sequence::from_terms(c5, {0, 1, 2, 3});
  CHECK(check_lemma_extra(t, t, 2).status == CheckStatus::NotTriggered);
  CHECK_THROWS_AS(check_lemma_extra(t, Sequence::repeated(c5, 4, 1), 1), PreconditionError);
  CHECK_THROWS_AS(check_lemma_extra(t, t, 5), PreconditionError);
}
