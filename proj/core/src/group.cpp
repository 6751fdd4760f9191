#include "subsumlab/group.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "subsumlab/errors.hpp"

namespace subsum {

namespace {

constexpr Elem kMaxOrder = 1U << 24;

std::vector<std::uint32_t> invariant_chain(std::span<const std::int64_t> factors) {
  // prime -> exponents of that prime across all factors
  std::map<std::uint64_t, std::vector<int>> by_prime;
  for (std::int64_t m : factors) {
    auto v = static_cast<std::uint64_t>(m);
    for (std::uint64_t p = 2; p * p <= v; ++p) {
      int e = 0;
      while (v % p == 0) {
        v /= p;
        ++e;
      }
      if (e) by_prime[p].push_back(e);
    }
    if (v > 1) by_prime[v].push_back(1);
  }
  std::size_t len = 0;
  for (auto& [p, exps] : by_prime) {
    std::sort(exps.rbegin(), exps.rend());
    len = std::max(len, exps.size());
  }
  // chain[len-1] is the largest factor: product of the top prime power of
  // every prime, and so on downwards.
  std::vector<std::uint32_t> chain(len, 1);
  for (auto& [p, exps] : by_prime) {
    for (std::size_t i = 0; i < exps.size(); ++i) {
      std::uint64_t pk = 1;
      for (int j = 0; j < exps[i]; ++j) pk *= p;
      chain[len - 1 - i] = static_cast<std::uint32_t>(chain[len - 1 - i] * pk);
    }
  }
  if (chain.empty()) chain.push_back(1);
  return chain;
}

}  // namespace

GroupSpec::GroupSpec() : GroupSpec(from_chain({1})) {}

GroupSpec GroupSpec::make(std::span<const std::int64_t> factors, bool* normalized) {
  if (factors.empty()) throw PreconditionError("group needs at least one factor");
  long double prod = 1;
  for (std::int64_t m : factors) {
    if (m < 1) throw PreconditionError("group factor must be >= 1, got " + std::to_string(m));
    prod *= static_cast<long double>(m);
  }
  if (prod > kMaxOrder) throw CapExceeded("group order exceeds " + std::to_string(kMaxOrder));

  auto chain = invariant_chain(factors);
  if (normalized) {
    std::vector<std::uint32_t> given;
    for (std::int64_t m : factors)
      if (m != 1) given.push_back(static_cast<std::uint32_t>(m));
    if (given.empty()) given.push_back(1);
    *normalized = given != chain;
  }
  return from_chain(std::move(chain));
}

GroupSpec GroupSpec::from_chain(std::vector<std::uint32_t> chain) {
  auto impl = std::make_shared<Impl>();
  impl->factors = std::move(chain);
  impl->strides.resize(impl->factors.size());
  Elem stride = 1;
  for (std::size_t i = 0; i < impl->factors.size(); ++i) {
    impl->strides[i] = stride;
    stride *= impl->factors[i];
  }
  impl->order = stride;

  GroupSpec probe{std::shared_ptr<const Impl>(impl)};
  const Elem order = impl->order;
  if (order <= kTableLimit) {
    impl->add_table.resize(std::size_t(order) * order);
    for (Elem a = 0; a < order; ++a)
      for (Elem b = 0; b < order; ++b) impl->add_table[std::size_t(a) * order + b] = probe.add_slow(a, b);
  }
  impl->neg_table.resize(order);
  for (Elem a = 0; a < order; ++a) {
    Elem r = 0;
    Elem rest = a;
    for (std::size_t i = 0; i < impl->factors.size(); ++i) {
      const std::uint32_t m = impl->factors[i];
      const std::uint32_t c = rest % m;
      rest /= m;
      r += ((m - c) % m) * impl->strides[i];
    }
    impl->neg_table[a] = r;
  }
  return probe;
}

Elem GroupSpec::add_slow(Elem a, Elem b) const {
  Elem r = 0;
  for (std::size_t i = 0; i < impl_->factors.size(); ++i) {
    const std::uint32_t m = impl_->factors[i];
    const std::uint32_t c = (a % m + b % m) % m;
    a /= m;
    b /= m;
    r += c * impl_->strides[i];
  }
  return r;
}

Elem GroupSpec::mul(std::int64_t k, Elem a) const {
  Elem r = 0;
  for (std::size_t i = 0; i < impl_->factors.size(); ++i) {
    const std::int64_t m = impl_->factors[i];
    const std::int64_t c = a % m;
    a /= static_cast<Elem>(m);
    std::int64_t v = ((k % m) * c) % m;
    if (v < 0) v += m;
    r += static_cast<Elem>(v) * impl_->strides[i];
  }
  return r;
}

std::uint32_t GroupSpec::order_of(Elem a) const {
  std::uint64_t l = 1;
  for (std::size_t i = 0; i < impl_->factors.size(); ++i) {
    const std::uint32_t m = impl_->factors[i];
    const std::uint32_t c = a % m;
    a /= m;
    const std::uint64_t o = m / std::gcd(m, c);
    l = std::lcm(l, o);
  }
  return static_cast<std::uint32_t>(l);
}

std::vector<std::uint32_t> GroupSpec::coords(Elem a) const {
  std::vector<std::uint32_t> out(rank());
  for (std::size_t i = 0; i < rank(); ++i) {
    out[i] = a % impl_->factors[i];
    a /= impl_->factors[i];
  }
  return out;
}

Elem GroupSpec::index_of(std::span<const std::int64_t> c) const {
  if (c.size() != rank())
    throw PreconditionError("element has " + std::to_string(c.size()) + " coordinates, group rank is " +
                            std::to_string(rank()));
  Elem r = 0;
  for (std::size_t i = 0; i < rank(); ++i) {
    const std::int64_t m = impl_->factors[i];
    std::int64_t v = c[i] % m;
    if (v < 0) v += m;
    r += static_cast<Elem>(v) * impl_->strides[i];
  }
  return r;
}

std::string GroupSpec::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < rank(); ++i) {
    if (i) s += 'x';
    s += std::to_string(impl_->factors[i]);
  }
  return s;
}

std::string GroupSpec::elem_to_string(Elem a) const {
  if (rank() == 1) return std::to_string(a);
  std::string s = "(";
  auto c = coords(a);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(c[i]);
  }
  return s + ")";
}

// ---------------------------------------------------------------------------
// Subset

Subset::Subset(GroupSpec g) : group_(std::move(g)), words_((group_.order() + 63) / 64, 0) {}

Subset Subset::singleton(const GroupSpec& g, Elem e) {
  Subset s(g);
  s.insert(e);
  return s;
}

Subset Subset::full(const GroupSpec& g) {
  Subset s(g);
  for (Elem e = 0; e < g.order(); ++e) s.insert(e);
  return s;
}

Subset Subset::of(const GroupSpec& g, std::span<const Elem> elems) {
  Subset s(g);
  for (Elem e : elems) {
    if (e >= g.order()) throw PreconditionError("element index out of range");
    s.insert(e);
  }
  return s;
}

std::size_t Subset::size() const {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += std::popcount(w);
  return n;
}

bool Subset::empty() const {
  return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

Elem Subset::min() const {
  for (std::size_t w = 0; w < words_.size(); ++w)
    if (words_[w]) return static_cast<Elem>(w * 64 + std::countr_zero(words_[w]));
  throw PreconditionError("min of empty subset");
}

std::vector<Elem> Subset::elements() const {
  std::vector<Elem> out;
  for_each([&](Elem e) { out.push_back(e); });
  return out;
}

void Subset::translate_into(Elem g, std::vector<std::uint64_t>& out) const {
  const Elem order = group_.order();
  if (group_.is_cyclic() && order <= 64) {
    const std::uint64_t mask = order == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << order) - 1;
    const std::uint64_t w = words_[0];
    const std::uint64_t rot = g == 0 ? w : ((w << g) | (w >> (order - g))) & mask;
    out[0] |= rot;
    return;
  }
  auto row = group_.translate_row(g);
  if (!row.empty()) {
    for_each([&](Elem e) {
      const Elem t = row[e];
      out[t >> 6] |= std::uint64_t{1} << (t & 63);
    });
  } else {
    for_each([&](Elem e) {
      const Elem t = group_.add(e, g);
      out[t >> 6] |= std::uint64_t{1} << (t & 63);
    });
  }
}

Subset Subset::translated(Elem g) const {
  Subset out(group_);
  translate_into(g, out.words_);
  return out;
}

Subset Subset::negated() const {
  Subset out(group_);
  for_each([&](Elem e) { out.insert(group_.neg(e)); });
  return out;
}

Subset& Subset::operator|=(const Subset& o) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
  return *this;
}

Subset& Subset::operator&=(const Subset& o) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
  return *this;
}

Subset& Subset::operator-=(const Subset& o) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
  return *this;
}

bool Subset::is_subset_of(const Subset& o) const {
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & ~o.words_[i]) return false;
  return true;
}

bool Subset::intersects(const Subset& o) const {
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & o.words_[i]) return true;
  return false;
}

std::size_t Subset::hash() const {
  std::size_t h = 0x9e3779b97f4a7c15ULL ^ group_.order();
  for (std::uint64_t w : words_) h = (h ^ std::hash<std::uint64_t>{}(w)) * 0x100000001b3ULL;
  return h;
}

bool lex_less(const Subset& a, const Subset& b) { return a.elements() < b.elements(); }

std::string Subset::to_string() const {
  std::string s = "{";
  bool first = true;
  for_each([&](Elem e) {
    if (!first) s += ',';
    first = false;
    s += group_.elem_to_string(e);
  });
  return s + "}";
}

// ---------------------------------------------------------------------------
// Sumsets

Subset sumset(const Subset& a, const Subset& b) {
  if (!(a.group() == b.group())) throw PreconditionError("sumset of subsets from different groups");
  if (a.empty() || b.empty()) throw PreconditionError("sumset needs nonempty operands");
  const Subset& small = a.size() <= b.size() ? a : b;
  const Subset& large = a.size() <= b.size() ? b : a;
  Subset out(a.group());
  small.for_each([&](Elem g) { large.translate_into(g, out.words_); });
  return out;
}

Subset sumset(std::span<const Subset> parts) {
  if (parts.empty()) throw PreconditionError("sumset of an empty list");
  Subset acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = sumset(acc, parts[i]);
  return acc;
}

Subset iterated_sumset(const Subset& a, std::int64_t n) {
  if (n < 0) throw PreconditionError("iterated sumset needs n >= 0");
  if (n == 0) return Subset::singleton(a.group(), 0);
  if (a.empty()) throw PreconditionError("iterated sumset of empty set");
  // Once kA is a full coset of the affine span it is a fixpoint up to
  // translation by a0, so the rest is a single translate.
  const Elem a0 = a.min();
  const Subgroup span = affine_span(a);
  Subset acc = a;
  for (std::int64_t k = 1; k < n; ++k) {
    if (acc.size() == span.size()) {
      return span.carrier().translated(a.group().mul(n, a0));
    }
    acc = sumset(acc, a);
  }
  return acc;
}

std::vector<std::uint64_t> representation_counts(std::span<const Subset> summands) {
  if (summands.empty()) throw PreconditionError("representation count needs summands");
  const GroupSpec& g = summands[0].group();
  std::vector<std::uint64_t> cur(g.order(), 0), next(g.order());
  cur[0] = 1;
  for (const Subset& s : summands) {
    if (!(s.group() == g)) throw PreconditionError("summands from different groups");
    std::fill(next.begin(), next.end(), 0);
    for (Elem x = 0; x < g.order(); ++x) {
      if (!cur[x]) continue;
      s.for_each([&](Elem a) {
        std::uint64_t& slot = next[g.add(x, a)];
        slot = slot > UINT64_MAX - cur[x] ? UINT64_MAX : slot + cur[x];
      });
    }
    std::swap(cur, next);
  }
  return cur;
}

std::uint64_t representation_count(std::span<const Subset> summands, Elem x) {
  return representation_counts(summands).at(x);
}

// ---------------------------------------------------------------------------
// Subgroups

bool is_subgroup(const Subset& s) {
  if (!s.contains(0)) return false;
  bool ok = true;
  s.for_each([&](Elem h) {
    if (ok && !(s.translated(h) == s)) ok = false;
  });
  return ok;
}

bool is_periodic_under(const Subset& s, const Subgroup& h) {
  bool ok = true;
  h.carrier().for_each([&](Elem x) {
    if (ok && x != 0 && !(s.translated(x) == s)) ok = false;
  });
  return ok;
}

Subgroup::Subgroup(Subset carrier) : carrier_(std::move(carrier)) {
  if (!is_subgroup(carrier_)) throw PreconditionError("subset " + carrier_.to_string() + " is not a subgroup");
}

Subgroup Subgroup::trusted(Subset carrier) { return Subgroup(std::move(carrier), TrustedTag{}); }

Subgroup Subgroup::trivial(const GroupSpec& g) { return trusted(Subset::singleton(g, 0)); }

Subgroup Subgroup::whole(const GroupSpec& g) { return trusted(Subset::full(g)); }

Subgroup stabilizer(const Subset& a) {
  if (a.empty()) throw PreconditionError("stabilizer of empty set");
  const GroupSpec& g = a.group();
  Subset h(g);
  const Elem a0 = a.min();
  // Any period x satisfies a0 + x in A.
  a.for_each([&](Elem b) {
    const Elem x = g.sub(b, a0);
    if (x == 0 || a.translated(x) == a) h.insert(x);
  });
  return Subgroup::trusted(std::move(h));
}

namespace {

// Smallest subgroup containing h and x, given that h is a subgroup.
Subset extend_by(const Subset& h, Elem x) {
  if (h.contains(x)) return h;
  const GroupSpec& g = h.group();
  Subset out = h;
  Elem m = x;
  while (!h.contains(m)) {
    out |= h.translated(m);
    m = g.add(m, x);
  }
  return out;
}

}  // namespace

Subgroup subgroup_generated(const Subset& s) {
  Subset h = Subset::singleton(s.group(), 0);
  s.for_each([&](Elem x) { h = extend_by(h, x); });
  return Subgroup::trusted(std::move(h));
}

Subgroup affine_span(const Subset& a) {
  if (a.empty()) throw PreconditionError("affine span of empty set");
  const Elem a0 = a.min();
  return subgroup_generated(a.translated(a.group().neg(a0)));
}

Subgroup subgroup_join(const Subgroup& a, const Subgroup& b) {
  Subset h = a.carrier();
  b.carrier().for_each([&](Elem x) { h = extend_by(h, x); });
  return Subgroup::trusted(std::move(h));
}

Subgroup cyclic_subgroup(const GroupSpec& g, Elem x) {
  return Subgroup::trusted(extend_by(Subset::singleton(g, 0), x));
}

// ---------------------------------------------------------------------------
// Decomposition

AbstractDecomposition decompose_abstract(Elem count, Elem zero,
                                         const std::function<Elem(Elem, Elem)>& add) {
  auto order_mod = [&](Elem y, const std::vector<char>& in_l) {
    std::uint32_t t = 1;
    Elem m = y;
    while (!in_l[m]) {
      m = add(m, y);
      ++t;
    }
    return t;
  };

  std::vector<char> in_l(count, 0);
  in_l[zero] = 1;
  std::vector<Elem> members{zero};
  std::vector<Elem> gens;
  std::vector<std::uint32_t> orders;
  std::vector<char> only_zero(count, 0);
  only_zero[zero] = 1;

  while (members.size() < count) {
    // Element of maximal order in the quotient by the span so far.
    Elem best = zero;
    std::uint32_t best_ord = 0;
    for (Elem y = 0; y < count; ++y) {
      if (in_l[y]) continue;
      const std::uint32_t o = order_mod(y, in_l);
      if (o > best_ord) {
        best_ord = o;
        best = y;
      }
    }
    // Lift with the same order in the whole group; it meets the span trivially.
    Elem lift = zero;
    bool found = false;
    for (Elem l : members) {
      const Elem cand = add(best, l);
      if (order_mod(cand, only_zero) == best_ord) {
        lift = cand;
        found = true;
        break;
      }
    }
    if (!found) throw std::logic_error("decompose_abstract: no lift of maximal order");
    gens.push_back(lift);
    orders.push_back(best_ord);
    std::vector<Elem> grown;
    grown.reserve(members.size() * best_ord);
    Elem mult = zero;
    for (std::uint32_t j = 0; j < best_ord; ++j) {
      for (Elem l : members) grown.push_back(add(l, mult));
      mult = add(mult, lift);
    }
    for (Elem e : grown) in_l[e] = 1;
    members = std::move(grown);
  }

  // gens[0] has the largest order and becomes the last coordinate.
  std::vector<std::int64_t> chain(orders.rbegin(), orders.rend());
  if (chain.empty()) chain.push_back(1);
  GroupSpec spec = GroupSpec::make(chain);
  if (spec.order() != count) throw std::logic_error("decompose_abstract: order mismatch");
  if (!gens.empty() && !std::equal(chain.begin(), chain.end(), spec.factors().begin(), spec.factors().end()))
    throw std::logic_error("decompose_abstract: extracted orders do not form a divisor chain");

  AbstractDecomposition out{spec, std::vector<Elem>(count, 0)};
  std::vector<char> filled(count, 0);
  const std::size_t r = gens.size();
  std::vector<std::int64_t> coeff(r, 0);
  for (Elem idx = 0; idx < spec.order(); ++idx) {
    // coordinates of idx in spec, little-endian; coordinate i pairs with gens[r-1-i]
    auto c = spec.coords(idx);
    Elem e = zero;
    for (std::size_t i = 0; i < c.size() && r > 0; ++i) {
      const Elem gen = gens[r - 1 - i];
      for (std::uint32_t t = 0; t < c[i]; ++t) e = add(e, gen);
    }
    if (filled[e]) throw std::logic_error("decompose_abstract: basis is not independent");
    filled[e] = 1;
    out.to_spec[e] = idx;
  }
  return out;
}

QuotientStructure quotient_decompose(const GroupSpec& g, const Subgroup& h) {
  if (!(h.group() == g)) throw PreconditionError("subgroup belongs to a different group");
  QuotientStructure q{g, h, std::vector<Elem>(g.order(), UINT32_MAX), {}, GroupSpec(), {}};
  for (Elem x = 0; x < g.order(); ++x) {
    if (q.coset_of[x] != UINT32_MAX) continue;
    const Elem id = static_cast<Elem>(q.representatives.size());
    q.representatives.push_back(x);
    h.carrier().for_each([&](Elem y) { q.coset_of[g.add(x, y)] = id; });
  }
  const Elem count = q.coset_count();
  if (std::size_t(count) * h.size() != g.order()) throw PreconditionError("not a subgroup: cosets do not tile");
  auto add = [&](Elem a, Elem b) { return q.coset_of[g.add(q.representatives[a], q.representatives[b])]; };
  auto dec = decompose_abstract(count, q.coset_of[0], add);
  q.quotient_spec = dec.spec;
  q.iso = std::move(dec.to_spec);

  if (g.order() <= kDefaultGroupCap) {
    for (Elem a = 0; a < count; ++a)
      for (Elem b = 0; b < count; ++b)
        if (q.iso[add(a, b)] != q.quotient_spec.add(q.iso[a], q.iso[b]))
          throw std::logic_error("quotient_decompose: iso is not a homomorphism");
  }
  return q;
}

GroupSpec quotient_spec_within(const Subgroup& ambient, const Subgroup& h) {
  const GroupSpec& g = ambient.group();
  if (!h.is_subgroup_of(ambient)) throw PreconditionError("quotient_spec_within: h is not inside ambient");
  std::vector<Elem> coset_of(g.order(), UINT32_MAX);
  std::vector<Elem> reps;
  ambient.carrier().for_each([&](Elem x) {
    if (coset_of[x] != UINT32_MAX) return;
    const Elem id = static_cast<Elem>(reps.size());
    reps.push_back(x);
    h.carrier().for_each([&](Elem y) { coset_of[g.add(x, y)] = id; });
  });
  auto add = [&](Elem a, Elem b) { return coset_of[g.add(reps[a], reps[b])]; };
  return decompose_abstract(static_cast<Elem>(reps.size()), coset_of[0], add).spec;
}

GroupSpec subgroup_spec(const Subgroup& s) {
  return quotient_spec_within(s, Subgroup::trivial(s.group()));
}

std::vector<Subgroup> enumerate_subgroups(const GroupSpec& g, std::size_t cap) {
  if (g.order() > cap)
    throw CapExceeded("enumerate_subgroups: |G| = " + std::to_string(g.order()) + " exceeds cap " +
                      std::to_string(cap));
  struct Hash {
    std::size_t operator()(const Subset& s) const { return s.hash(); }
  };
  std::unordered_set<Subset, Hash> seen;
  std::vector<Subset> frontier{Subset::singleton(g, 0)};
  seen.insert(frontier[0]);
  std::vector<Subset> all = frontier;
  while (!frontier.empty()) {
    std::vector<Subset> next;
    for (const Subset& h : frontier) {
      for (Elem x = 0; x < g.order(); ++x) {
        if (h.contains(x)) continue;
        Subset bigger = extend_by(h, x);
        if (seen.insert(bigger).second) {
          all.push_back(bigger);
          next.push_back(std::move(bigger));
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(all.begin(), all.end(), [](const Subset& a, const Subset& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return lex_less(a, b);
  });
  std::vector<Subgroup> out;
  out.reserve(all.size());
  for (auto& s : all) out.push_back(Subgroup::trusted(std::move(s)));
  return out;
}

GroupParams group_params(const GroupSpec& g) {
  std::int64_t d = 0;
  for (std::uint32_t m : g.factors()) d += m - 1;
  return {d, g.exponent()};
}

}  // namespace subsum
