#pragma once

// Extremal example generators, the corpus audit driver, and the search for
// aperiodic sums of 2-element sets without a unique-expression element.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "subsumlab/group.hpp"
#include "subsumlab/sequence.hpp"

namespace subsum {

// Every group of order <= max_order, one per invariant-factor chain, sorted by
// (order, factors).
std::vector<GroupSpec> groups_up_to(std::int64_t max_order);

enum class ExampleKind { A, B, C };
std::string to_string(ExampleKind k);

struct ExampleParams {
  GroupSpec G;
  Subgroup H = Subgroup::trivial(GroupSpec{});
  std::optional<Subgroup> K;  // B and C
  std::optional<Elem> g;      // representative of the cyclic generator; chosen if absent
};

struct ExampleInstance {
  ExampleKind kind = ExampleKind::A;
  GroupSpec G;
  Subgroup H = Subgroup::trivial(GroupSpec{});
  std::optional<Subgroup> K;
  Elem g = 0;
  std::int64_t n = 0;
  Sequence S{GroupSpec{}};
  Subset Z{GroupSpec{}};
  // Recomputed by brute force at generation time.
  std::int64_t length = 0;
  std::int64_t subsum_size = 0;
  Subgroup stabilizer = Subgroup::trivial(GroupSpec{});
  bool ii_b_fails = false;
  // The closed forms the construction promises.
  std::int64_t formula_length = 0;
  std::int64_t formula_subsum_size = 0;
};

// Builds S = prod_{z in Z} z^[n] and asserts the promised identities (throws
// InternalError on a mismatch, PreconditionError on unmet side conditions).
// A and B also need H nontrivial.
ExampleInstance gen_example(ExampleKind kind, const ExampleParams& params);

// True when no alpha gives e_H <= min{|G/H|-2, (|S'|-n)/|H|-1} together with
// |Sigma_n(S)| >= (e_H+1)|H|, taking S' = S (the most permissive choice).
bool clause_ii_b_fails(const Sequence& s, std::int64_t n);

struct AuditConfig {
  std::int64_t max_group_order = 8;
  // Exhaustive stream: every sequence of length 1..exhaustive_len_cap over
  // every group of order <= exhaustive_max_order (0 means max_group_order).
  std::int64_t exhaustive_len_cap = 0;
  std::int64_t exhaustive_max_order = 0;
  std::int64_t random_samples = 0;
  std::int64_t random_len_cap = 12;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::vector<std::string> checkers;
};

// Checker ids accepted by run_audit.
const std::vector<std::string>& audit_checker_ids();

struct CheckerTally {
  std::int64_t checks = 0;
  std::int64_t holds = 0;
  std::int64_t violated = 0;
  std::int64_t not_triggered = 0;
  std::int64_t inapplicable = 0;
  std::int64_t hypotheses_unmet = 0;
  std::int64_t internal_errors = 0;
  std::map<std::string, std::int64_t> labels;  // e.g. case tags, matched templates

  void merge(const CheckerTally& o);
};

struct AuditFailure {
  std::uint64_t instance = 0;
  std::string checker;
  std::string message;
  std::string replay;  // command line reproducing the failing check

  friend bool operator<(const AuditFailure& a, const AuditFailure& b) {
    return std::tie(a.instance, a.checker, a.replay, a.message) <
           std::tie(b.instance, b.checker, b.replay, b.message);
  }
};

struct AuditReport {
  AuditConfig config;
  std::int64_t instances = 0;
  std::int64_t exhaustive_instances = 0;
  std::map<std::string, CheckerTally> tallies;
  std::vector<AuditFailure> failures;  // sorted; capped at kMaxFailures
  std::int64_t total_failures = 0;
  std::int64_t timing_ms = 0;  // not part of the aggregate

  static constexpr std::size_t kMaxFailures = 200;
  bool ok() const { return total_failures == 0; }
};

// Throws CapExceeded when max_group_order exceeds kAuditMaxOrder and
// PreconditionError for unknown checkers or nonsensical caps.
inline constexpr std::int64_t kAuditMaxOrder = 64;
AuditReport run_audit(const AuditConfig& cfg);

struct HuntOptions {
  bool canonicalize = true;
  std::uint64_t budget = 50'000'000;  // tuples examined before giving up
  std::size_t max_reported_hits = 16;
};

struct HuntReport {
  GroupSpec G;
  std::int64_t n = 0;
  bool canonical = true;
  bool exhaustive = false;
  std::uint64_t tuples = 0;
  std::uint64_t aperiodic = 0;
  std::uint64_t hits = 0;
  std::vector<std::vector<Subset>> hit_examples;
  // Number of aperiodic tuples by least representation count over the sum.
  std::map<std::uint64_t, std::uint64_t> min_count_histogram;
};

HuntReport hunt_unique_expression(const GroupSpec& g, std::int64_t n, const HuntOptions& opts = {});

}  // namespace subsum
