#pragma once

// Finite abelian groups C_{m1} x ... x C_{mr} (m1 | ... | mr) and dense subset
// algebra over them. Elements are addressed by a mixed-radix little-endian
// index: index = c1 + m1 * (c2 + m2 * (c3 + ...)).

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace subsum {

using Elem = std::uint32_t;

inline constexpr std::size_t kDefaultGroupCap = 4096;

class GroupSpec {
 public:
  // Trivial group.
  GroupSpec();

  // Builds the group from any list of cyclic factors (each >= 1). Lists that
  // are not an invariant-factor chain are normalized through their elementary
  // divisors, so [4,2] and [2,4] give the same group and [2,3] gives C6.
  // `normalized` (if given) reports whether the stored chain differs from the
  // input list after dropping 1s.
  static GroupSpec make(std::span<const std::int64_t> factors,
                        bool* normalized = nullptr);
  static GroupSpec make(std::initializer_list<std::int64_t> factors) {
    return make(std::span<const std::int64_t>(factors.begin(), factors.size()));
  }

  const std::vector<std::uint32_t>& factors() const { return impl_->factors; }
  std::size_t rank() const { return impl_->factors.size(); }
  Elem order() const { return impl_->order; }
  std::uint32_t exponent() const { return impl_->factors.back(); }
  bool is_cyclic() const { return impl_->factors.size() == 1; }

  Elem zero() const { return 0; }
  Elem add(Elem a, Elem b) const {
    if (!impl_->add_table.empty()) return impl_->add_table[a * impl_->order + b];
    return add_slow(a, b);
  }
  Elem neg(Elem a) const { return impl_->neg_table[a]; }
  Elem sub(Elem a, Elem b) const { return add(a, neg(b)); }
  // k * a for any integer k (negative allowed).
  Elem mul(std::int64_t k, Elem a) const;
  std::uint32_t order_of(Elem a) const;

  std::vector<std::uint32_t> coords(Elem a) const;
  Elem index_of(std::span<const std::int64_t> coords) const;

  // "2x4x8"; the trivial group prints as "1".
  std::string to_string() const;
  // "3" for rank 1, "(1,0,2)" otherwise.
  std::string elem_to_string(Elem a) const;

  friend bool operator==(const GroupSpec& a, const GroupSpec& b) {
    return a.impl_ == b.impl_ || a.impl_->factors == b.impl_->factors;
  }

  // Translation lookup used by the subset kernels; empty for large groups.
  std::span<const Elem> translate_row(Elem g) const {
    if (impl_->add_table.empty()) return {};
    return {impl_->add_table.data() + std::size_t(g) * impl_->order, impl_->order};
  }

 private:
  struct Impl {
    std::vector<std::uint32_t> factors;
    std::vector<std::uint32_t> strides;
    Elem order = 1;
    std::vector<Elem> add_table;  // order^2 entries when order <= kTableLimit
    std::vector<Elem> neg_table;
  };
  static constexpr Elem kTableLimit = 1024;

  explicit GroupSpec(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  static GroupSpec from_chain(std::vector<std::uint32_t> chain);
  Elem add_slow(Elem a, Elem b) const;

  std::shared_ptr<const Impl> impl_;
};

// Dense membership vector over a group.
class Subset {
 public:
  explicit Subset(GroupSpec g);
  static Subset singleton(const GroupSpec& g, Elem e);
  static Subset full(const GroupSpec& g);
  static Subset of(const GroupSpec& g, std::span<const Elem> elems);
  static Subset of(const GroupSpec& g, std::initializer_list<Elem> elems) {
    return of(g, std::span<const Elem>(elems.begin(), elems.size()));
  }

  const GroupSpec& group() const { return group_; }

  bool contains(Elem e) const { return (words_[e >> 6] >> (e & 63)) & 1U; }
  void insert(Elem e) { words_[e >> 6] |= std::uint64_t{1} << (e & 63); }
  void erase(Elem e) { words_[e >> 6] &= ~(std::uint64_t{1} << (e & 63)); }
  std::size_t size() const;
  bool empty() const;
  Elem min() const;  // requires nonempty
  std::vector<Elem> elements() const;

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        f(static_cast<Elem>(w * 64 + std::countr_zero(bits)));
        bits &= bits - 1;
      }
    }
  }

  Subset translated(Elem g) const;
  // this |= src + g
  void or_translated(const Subset& src, Elem g) { src.translate_into(g, words_); }
  Subset negated() const;
  Subset& operator|=(const Subset& o);
  Subset& operator&=(const Subset& o);
  Subset& operator-=(const Subset& o);  // set difference
  friend Subset operator|(Subset a, const Subset& b) { return a |= b; }
  friend Subset operator&(Subset a, const Subset& b) { return a &= b; }
  friend Subset operator-(Subset a, const Subset& b) { return a -= b; }

  bool is_subset_of(const Subset& o) const;
  bool intersects(const Subset& o) const;
  std::span<const std::uint64_t> words() const { return words_; }
  std::size_t hash() const;

  friend bool operator==(const Subset& a, const Subset& b) {
    return a.words_ == b.words_ && a.group_ == b.group_;
  }
  // Lexicographic order on sorted member lists; used for canonical sorting.
  friend bool lex_less(const Subset& a, const Subset& b);

  std::string to_string() const;  // "{0,1,(1,2)}"

 private:
  void translate_into(Elem g, std::vector<std::uint64_t>& out) const;
  friend Subset sumset(const Subset& a, const Subset& b);

  GroupSpec group_;
  std::vector<std::uint64_t> words_;
};

// A subset known to be a subgroup. The checked constructor performs a full
// closure scan; library code that produces subgroups by closure uses trusted().
class Subgroup {
 public:
  explicit Subgroup(Subset carrier);
  static Subgroup trusted(Subset carrier);
  static Subgroup trivial(const GroupSpec& g);
  static Subgroup whole(const GroupSpec& g);

  const Subset& carrier() const { return carrier_; }
  const GroupSpec& group() const { return carrier_.group(); }
  std::size_t size() const { return carrier_.size(); }
  std::size_t index_in_group() const { return group().order() / carrier_.size(); }
  bool contains(Elem e) const { return carrier_.contains(e); }
  bool is_trivial() const { return size() == 1; }
  bool is_whole() const { return size() == group().order(); }
  bool is_subgroup_of(const Subgroup& o) const { return carrier_.is_subset_of(o.carrier_); }

  friend bool operator==(const Subgroup& a, const Subgroup& b) {
    return a.carrier_ == b.carrier_;
  }

 private:
  struct TrustedTag {};
  Subgroup(Subset carrier, TrustedTag) : carrier_(std::move(carrier)) {}
  Subset carrier_;
};

bool is_subgroup(const Subset& s);
// True when s is a union of cosets of h.
bool is_periodic_under(const Subset& s, const Subgroup& h);

Subset sumset(const Subset& a, const Subset& b);
Subset sumset(std::span<const Subset> parts);
Subset iterated_sumset(const Subset& a, std::int64_t n);

// Number of tuples (a1..an) in A1 x ... x An summing to each x; saturates at
// UINT64_MAX.
std::vector<std::uint64_t> representation_counts(std::span<const Subset> summands);
std::uint64_t representation_count(std::span<const Subset> summands, Elem x);

Subgroup stabilizer(const Subset& a);
Subgroup affine_span(const Subset& a);
Subgroup subgroup_generated(const Subset& s);
// Subgroup generated by two subgroups.
Subgroup subgroup_join(const Subgroup& a, const Subgroup& b);
// Cyclic subgroup <g>.
Subgroup cyclic_subgroup(const GroupSpec& g, Elem x);

// Invariant-factor decomposition of an abstract finite abelian group given by
// its addition on dense indices [0, count). Returns the factors and a map
// abstract index -> index in the GroupSpec built from those factors.
struct AbstractDecomposition {
  GroupSpec spec;
  std::vector<Elem> to_spec;
};
AbstractDecomposition decompose_abstract(Elem count, Elem zero,
                                         const std::function<Elem(Elem, Elem)>& add);

struct QuotientStructure {
  GroupSpec parent;
  Subgroup subgroup;
  std::vector<Elem> coset_of;         // element -> coset id
  std::vector<Elem> representatives;  // coset id -> least element of the coset
  GroupSpec quotient_spec;
  std::vector<Elem> iso;              // coset id -> quotient_spec element

  Elem project(Elem g) const { return iso[coset_of[g]]; }
  Elem coset_count() const { return static_cast<Elem>(representatives.size()); }
};

QuotientStructure quotient_decompose(const GroupSpec& g, const Subgroup& h);

// Invariant factors of ambient/h for subgroups h <= ambient of a common group.
GroupSpec quotient_spec_within(const Subgroup& ambient, const Subgroup& h);
// Invariant factors of a subgroup viewed as a group.
GroupSpec subgroup_spec(const Subgroup& s);

std::vector<Subgroup> enumerate_subgroups(const GroupSpec& g,
                                          std::size_t cap = kDefaultGroupCap);

struct GroupParams {
  std::int64_t d_star;
  std::int64_t exponent;
};
GroupParams group_params(const GroupSpec& g);

}  // namespace subsum
