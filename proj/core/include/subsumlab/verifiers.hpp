#pragma once

// Instance-level checkers for Kneser-type bounds, the pigeonhole bound, the
// structure of small n-fold sumsets, and the Z-span dichotomy.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "subsumlab/group.hpp"
#include "subsumlab/sequence.hpp"

namespace subsum {

enum class CheckStatus {
  Holds,
  Violated,
  Inapplicable,  // preconditions of the statement are not met
  NotTriggered,  // statement applies but asserts nothing for this instance
};

struct CheckReport {
  std::string name;
  CheckStatus status = CheckStatus::Holds;
  std::int64_t lhs = 0;
  std::int64_t rhs = 0;
  std::map<std::string, std::string> witnesses;
  std::vector<std::string> failures;
  std::string detail;

  // Every sub-check passed (also true when nothing was asserted).
  bool holds() const { return failures.empty(); }

  void fail(std::string what) {
    status = CheckStatus::Violated;
    failures.push_back(std::move(what));
  }
  // Records a sub-check; returns cond.
  bool expect(bool cond, const std::string& what) {
    if (!cond) fail(what);
    return cond;
  }
};

std::string to_string(CheckStatus s);

CheckReport check_kneser(std::span<const Subset> parts);
CheckReport check_subsum_kneser(const Sequence& s, std::int64_t n);
// Same, reusing Sigma_n(S).
CheckReport check_subsum_kneser(const Sequence& s, std::int64_t n, const Subset& sigma_n);
CheckReport check_pigeonhole(const Subset& a, const Subset& b);
CheckReport check_cor1(const Subset& a, std::int64_t n);
CheckReport check_cor2(const Subset& a, std::int64_t n);
CheckReport check_lemma_extra(const Sequence& s, const Sequence& s_prime, std::int64_t n);

// One instantiated structure template for |nA| < min{|G|, n|A|}.
struct StructureMatch {
  std::string label;  // "1(a)", "1(b)", "2(a)", "2(b)"
  std::map<std::string, std::string> witnesses;
};

struct StructureOptions {
  // Case 2 reads "G isomorphic to H x C_exp(G)". With this off the classifier
  // also demands an internal complement <g> of H.
  bool case2_abstract_iso = true;
};

// All templates (with their side conditions) that A matches for this n. The
// search stops at the first match of each label.
std::vector<StructureMatch> classify_small_sumset(const Subset& a, std::int64_t n,
                                                  const StructureOptions& opts = {});

}  // namespace subsum
