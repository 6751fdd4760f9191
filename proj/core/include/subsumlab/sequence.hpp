#pragma once

// Sequences over a finite abelian group, stored as multiplicity vectors, and
// their n-term subsequence sums.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subsumlab/group.hpp"

namespace subsum {

class Sequence {
 public:
  explicit Sequence(GroupSpec g);
  static Sequence from_terms(const GroupSpec& g, std::span<const Elem> terms);
  static Sequence from_terms(const GroupSpec& g, std::initializer_list<Elem> terms) {
    return from_terms(g, std::span<const Elem>(terms.begin(), terms.size()));
  }
  // g^[s]
  static Sequence repeated(const GroupSpec& g, Elem x, std::uint32_t s);

  const GroupSpec& group() const { return group_; }
  std::uint32_t multiplicity(Elem x) const { return mult_[x]; }
  std::span<const std::uint32_t> multiplicities() const { return mult_; }
  std::size_t length() const { return length_; }
  bool empty() const { return length_ == 0; }

  void add(Elem x, std::uint32_t count = 1);
  void remove(Elem x, std::uint32_t count = 1);  // requires enough copies

  std::uint32_t height() const;
  Elem sum() const;
  Subset support() const;
  // Terms in ascending element order, with repetition.
  std::vector<Elem> terms() const;

  // this | other
  bool divides(const Sequence& other) const;
  // this^[-1] . other; requires this | other.
  Sequence removed_from(const Sequence& other) const;
  Sequence concat(const Sequence& other) const;
  Sequence translated(Elem g) const;
  // Subsequence of terms lying in `s`.
  Sequence restricted_to(const Subset& s) const;

  friend bool operator==(const Sequence& a, const Sequence& b) {
    return a.group_ == b.group_ && a.mult_ == b.mult_;
  }

  std::string to_string() const;  // "0^2;4^2;1^2;5^2" in ascending order

 private:
  GroupSpec group_;
  std::vector<std::uint32_t> mult_;
  std::size_t length_ = 0;
};

struct SeqStats {
  Elem sigma;
  std::uint32_t height;
  Subset support;
};
SeqStats seq_stats(const Sequence& s);

// Rows Sigma_0(S) .. Sigma_max_n(S) of the bounded-knapsack DP. Row 0 is {0}.
std::vector<Subset> subsum_table(const Sequence& s, std::size_t max_n);
Subset nterm_subsums(const Sequence& s, std::int64_t n);
Subset all_subsums(const Sequence& s);

// phi_H(S) expressed over the quotient spec.
Sequence push_forward(const Sequence& s, const QuotientStructure& q);

struct SubsumProfile {
  Subgroup H;
  std::shared_ptr<const QuotientStructure> quotient;
  Subset X;  // over quotient->quotient_spec
  Subset Z;  // phi_H^{-1}(X) over the parent group
  std::int64_t N = 0;
  std::int64_t e = 0;
  std::int64_t rho = 0;
  std::int64_t n = 0;
  std::int64_t ref_len = 0;
  std::int64_t subsum_size = 0;  // |Sigma_n(S)|
  // ((N-1)n + e + 1)|H| and (sum_x min{n, v_x(phi_H(S))} - n + 1)|H|
  std::int64_t bound_blocks = 0;
  std::int64_t bound_minsum = 0;
  // ref_len - (n-1)|H| + e(|H|-1) + rho, rho also taken against ref_len
  std::int64_t bound_kneser_form = 0;
};

// H = H(Sigma_n(S)); X, N, e, rho as in the subsum version of Kneser's
// theorem; rho is taken relative to ref_len (|S| or |S'|, caller's choice).
SubsumProfile subsum_profile(const Sequence& s, std::int64_t n, std::int64_t ref_len);
// Same, reusing an already computed Sigma_n(S).
SubsumProfile subsum_profile(const Sequence& s, std::int64_t n, std::int64_t ref_len,
                             const Subset& sigma_n);

// S*: every term of phi_H^{-1}(X) raised to multiplicity exactly n.
Sequence build_s_star(const Sequence& s, const SubsumProfile& profile, std::int64_t n);

struct DavenportResult {
  std::uint32_t value;
  // d*(G) + 1 <= D(G) <= |G|; false signals a search bug at this scale.
  bool within_classical_bounds;
};
inline constexpr std::size_t kDefaultDavenportCap = 16;
DavenportResult davenport_bruteforce(const GroupSpec& g, std::size_t cap = kDefaultDavenportCap);

// Memoized quotient_decompose for the calling thread.
std::shared_ptr<const QuotientStructure> cached_quotient(const GroupSpec& g, const Subgroup& h);

}  // namespace subsum
