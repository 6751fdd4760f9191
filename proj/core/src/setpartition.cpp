#include "subsumlab/setpartition.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "subsumlab/errors.hpp"

namespace subsum {

SetPartition::SetPartition(GroupSpec g, std::vector<Subset> parts)
    : group_(std::move(g)), parts_(std::move(parts)) {
  for (const Subset& p : parts_) {
    if (!(p.group() == group_)) throw PreconditionError("setpartition part over a different group");
    if (p.empty()) throw PreconditionError("setpartition parts must be nonempty");
  }
}

Sequence SetPartition::underlying_sequence() const {
  Sequence s(group_);
  for (const Subset& p : parts_) p.for_each([&](Elem x) { s.add(x); });
  return s;
}

Subset SetPartition::sum() const { return sumset(parts_); }

Subset SetPartition::partial_sum(std::size_t first, std::size_t last) const {
  if (first >= last || last > parts_.size()) throw PreconditionError("partial_sum: bad index range");
  return sumset(std::span<const Subset>(parts_).subspan(first, last - first));
}

SetPartition SetPartition::translated(Elem g) const {
  std::vector<Subset> out;
  out.reserve(parts_.size());
  for (const Subset& p : parts_) out.push_back(p.translated(g));
  return SetPartition(group_, std::move(out));
}

SetPartition make_setpartition(const Sequence& s, std::int64_t n) {
  if (n < 1) throw PreconditionError("make_setpartition needs n >= 1");
  if (s.height() > n)
    throw PreconditionError("make_setpartition: h(S) = " + std::to_string(s.height()) + " exceeds n = " +
                            std::to_string(n));
  if (static_cast<std::size_t>(n) > s.length())
    throw PreconditionError("make_setpartition: n = " + std::to_string(n) + " exceeds |S| = " +
                            std::to_string(s.length()));
  std::vector<Subset> parts(static_cast<std::size_t>(n), Subset(s.group()));
  std::size_t j = 0;
  // Copies of one element are consecutive and at most n, so they land in distinct parts.
  for (Elem x : s.terms()) parts[j++ % parts.size()].insert(x);
  return SetPartition(s.group(), std::move(parts));
}

namespace {

void check_subsequence_pre(const Sequence& s, const Sequence& s_prime, std::int64_t n, const char* who) {
  if (!s_prime.divides(s)) throw PreconditionError(std::string(who) + ": S' is not a subsequence of S");
  if (n < 1) throw PreconditionError(std::string(who) + ": n must be >= 1");
  if (s_prime.height() > n)
    throw PreconditionError(std::string(who) + ": h(S') = " + std::to_string(s_prime.height()) +
                            " exceeds n = " + std::to_string(n));
  if (static_cast<std::size_t>(n) > s_prime.length())
    throw PreconditionError(std::string(who) + ": n = " + std::to_string(n) + " exceeds |S'| = " +
                            std::to_string(s_prime.length()));
}

// Ascending greedy subsequence with every multiplicity capped at `cap`.
Sequence greedy_capped(const Sequence& s, std::uint32_t cap, std::size_t max_len) {
  Sequence out(s.group());
  std::size_t len = 0;
  const auto mult = s.multiplicities();
  for (Elem x = 0; x < mult.size() && len < max_len; ++x) {
    const auto take = static_cast<std::uint32_t>(
        std::min<std::size_t>({mult[x], cap, max_len - len}));
    if (take) out.add(x, take);
    len += take;
  }
  return out;
}

Sequence first_terms(const Sequence& s, std::size_t len) { return greedy_capped(s, UINT32_MAX, len); }

}  // namespace

Sequence lemma31_extend(const Sequence& s, std::size_t s_prime_len, std::int64_t n, std::int64_t k,
                        const Sequence& t) {
  if (k < 1 || k > n) throw PreconditionError("completion needs 1 <= k <= n");
  if (!t.divides(s)) throw PreconditionError("completion: T is not a subsequence of S");
  const auto rest_parts = static_cast<std::size_t>(n - k);
  if (t.height() > k || t.length() < static_cast<std::size_t>(k) || s_prime_len < rest_parts ||
      t.length() > s_prime_len - rest_parts)
    throw PreconditionError("completion needs h(T) <= k <= |T| <= |S'| - (n - k)");
  const Sequence rest = t.removed_from(s);
  const std::size_t need = s_prime_len - t.length();
  if (t.length() == s_prime_len - rest_parts) return first_terms(rest, need);
  const Sequence r = greedy_capped(rest, static_cast<std::uint32_t>(rest_parts), SIZE_MAX);
  if (r.length() < need)
    throw InternalError("completion: maximal R has length " + std::to_string(r.length()) + " < " +
                            std::to_string(need) + " (T not of maximal length?)",
                        "S=" + s.to_string() + " T=" + t.to_string() + " n=" + std::to_string(n) +
                            " k=" + std::to_string(k));
  return first_terms(r, need);
}

Lemma31Result lemma31_complete(const Sequence& s, const Sequence& s_prime, std::int64_t n, std::int64_t k) {
  check_subsequence_pre(s, s_prime, n, "lemma31_complete");
  if (k < 1 || k > n) throw PreconditionError("lemma31_complete needs 1 <= k <= n");
  const std::size_t cap = s_prime.length() - static_cast<std::size_t>(n - k);
  Sequence t = greedy_capped(s, static_cast<std::uint32_t>(k), cap);
  if (t.length() < static_cast<std::size_t>(k))
    throw InternalError("lemma31_complete: greedy T shorter than k", "S=" + s.to_string());
  Sequence tp = lemma31_extend(s, s_prime.length(), n, k, t);
  return {std::move(t), std::move(tp)};
}

// ---------------------------------------------------------------------------
// Partition Theorem

namespace {

std::int64_t isize(std::size_t v) { return static_cast<std::int64_t>(v); }

// Conclusion-2 conditions for `parts` against (S, |S'|, n); appends to `v`.
void check_case_two(const std::vector<Subset>& parts, const Sequence& s, const Sequence& used,
                    std::int64_t n, const Subset& sigma_n, const Subset& total, const SubsumProfile& prof,
                    Verdict& v) {
  const QuotientStructure& q = *prof.quotient;
  if (!(total == sigma_n)) v.fail("case 2: sum of parts differs from Sigma_n(S)");
  const Sequence unused = used.removed_from(s);
  if (!unused.support().is_subset_of(prof.Z))
    v.fail("case 2: an unused term lies outside the preimage of X");
  std::int64_t kneser_lhs = 0;
  const auto hs = isize(prof.H.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    Subset image(q.quotient_spec);
    std::size_t outside = 0;
    parts[i].for_each([&](Elem x) {
      image.insert(q.project(x));
      if (!prof.Z.contains(x)) ++outside;
    });
    if (!prof.X.is_subset_of(image))
      v.fail("case 2: part " + std::to_string(i + 1) + " misses a coset of the preimage of X");
    if (outside > 1)
      v.fail("case 2: part " + std::to_string(i + 1) + " has " + std::to_string(outside) +
             " elements outside the preimage of X");
    kneser_lhs += isize(image.size()) * hs;
  }
  kneser_lhs -= (n - 1) * hs;
  if (prof.rho < 0) v.fail("case 2: rho = " + std::to_string(prof.rho) + " < 0");
  if (kneser_lhs != prof.bound_kneser_form)
    v.fail("case 2: sum |A_i+H| - (n-1)|H| = " + std::to_string(kneser_lhs) + " differs from " +
           std::to_string(prof.bound_kneser_form));
  if (isize(total.size()) < kneser_lhs)
    v.fail("case 2: |sum A_i| = " + std::to_string(total.size()) + " < " + std::to_string(kneser_lhs));
}

struct PartitionSearch {
  const Sequence& s;
  std::size_t len;  // |S'|
  std::size_t n;
  const Subset& sigma_n;
  const SubsumProfile& prof;
  bool structured = false;

  std::vector<Subset> parts;
  std::vector<std::uint32_t> avail;  // copies of each element not yet used

  const GroupSpec& group() const { return s.group(); }

  bool part_ok(const Subset& p) const {
    if (p.empty()) return false;
    if (!structured) return true;
    const QuotientStructure& q = *prof.quotient;
    Subset cover(q.quotient_spec);
    std::size_t outside = 0;
    p.for_each([&](Elem x) {
      if (prof.Z.contains(x))
        cover.insert(q.project(x));
      else
        ++outside;
    });
    return outside <= 1 && prof.X.is_subset_of(cover);
  }

  void set_parts(std::vector<Subset> ps) {
    parts = std::move(ps);
    avail.assign(s.multiplicities().begin(), s.multiplicities().end());
    for (const Subset& p : parts) p.for_each([&](Elem x) { --avail[x]; });
  }

  Sequence used() const {
    Sequence u(group());
    for (const Subset& p : parts) p.for_each([&](Elem x) { u.add(x); });
    return u;
  }

  bool try_pair(std::size_t i, std::size_t j, const Subset& rest, std::size_t cur) {
    Subset& a = parts[i];
    Subset& b = parts[j];
    auto better = [&](const Subset& na, const Subset& nb) {
      if (!part_ok(na) || !part_ok(nb)) return false;
      return sumset(sumset(rest, na), nb).size() > cur;
    };
    const auto ea = a.elements();
    const auto eb = b.elements();
    for (Elem x : ea) {  // transfer a -> b
      if (a.size() < 2 || b.contains(x)) continue;
      Subset na = a, nb = b;
      na.erase(x);
      nb.insert(x);
      if (better(na, nb)) {
        a = std::move(na);
        b = std::move(nb);
        return true;
      }
    }
    for (Elem y : eb) {  // transfer b -> a
      if (b.size() < 2 || a.contains(y)) continue;
      Subset na = a, nb = b;
      nb.erase(y);
      na.insert(y);
      if (better(na, nb)) {
        a = std::move(na);
        b = std::move(nb);
        return true;
      }
    }
    for (Elem x : ea) {  // swap
      if (b.contains(x)) continue;
      for (Elem y : eb) {
        if (a.contains(y)) continue;
        Subset na = a, nb = b;
        na.erase(x);
        na.insert(y);
        nb.erase(y);
        nb.insert(x);
        if (better(na, nb)) {
          a = std::move(na);
          b = std::move(nb);
          return true;
        }
      }
    }
    return false;
  }

  bool try_exchange(std::size_t i, const Subset& rest, std::size_t cur) {
    Subset& a = parts[i];
    for (Elem x : a.elements()) {
      if (structured && !prof.Z.contains(x)) continue;  // terms outside Z stay in use
      for (Elem y = 0; y < avail.size(); ++y) {
        if (!avail[y] || a.contains(y)) continue;
        Subset na = a;
        na.erase(x);
        na.insert(y);
        if (!part_ok(na)) continue;
        if (sumset(rest, na).size() > cur) {
          a = std::move(na);
          ++avail[x];
          --avail[y];
          return true;
        }
      }
    }
    return false;
  }

  // First-improvement ascent on |A_1 + ... + A_n|; stops at `goal`.
  Subset climb(std::size_t goal) {
    const GroupSpec& g = group();
    const Subset zero = Subset::singleton(g, 0);
    const std::size_t m = parts.size();
    for (;;) {
      std::vector<Subset> pre(m + 1, zero), suf(m + 1, zero);
      for (std::size_t i = 0; i < m; ++i) pre[i + 1] = sumset(pre[i], parts[i]);
      for (std::size_t i = m; i-- > 0;) suf[i] = sumset(parts[i], suf[i + 1]);
      const Subset total = pre[m];
      const std::size_t cur = total.size();
      if (cur >= goal) return total;
      bool moved = false;
      for (std::size_t i = 0; i < m && !moved; ++i) {
        Subset mid = zero;
        for (std::size_t j = i + 1; j < m && !moved; ++j) {
          if (j > i + 1) mid = sumset(mid, parts[j - 1]);
          moved = try_pair(i, j, sumset(sumset(pre[i], mid), suf[j + 1]), cur);
        }
      }
      for (std::size_t i = 0; i < m && !moved; ++i) moved = try_exchange(i, sumset(pre[i], suf[i + 1]), cur);
      if (!moved) return total;
    }
  }

  std::vector<Subset> deal(const std::vector<Elem>& seq) const {
    std::vector<Subset> ps(n, Subset(group()));
    for (std::size_t j = 0; j < seq.size(); ++j) ps[j % n].insert(seq[j]);
    return ps;
  }

  void random_start(std::mt19937_64& rng) {
    std::vector<Elem> pool;
    const auto mult = s.multiplicities();
    for (Elem x = 0; x < mult.size(); ++x)
      pool.insert(pool.end(), std::min<std::size_t>(mult[x], n), x);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(len);
    std::vector<Elem> order(mult.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::uint32_t> take(mult.size(), 0);
    for (Elem x : pool) ++take[x];
    std::vector<Elem> seq;
    for (Elem x : order) seq.insert(seq.end(), take[x], x);
    set_parts(deal(seq));
  }

  // All terms outside Z in distinct parts, each part meeting every X-coset.
  bool structured_start(std::mt19937_64* rng) {
    const QuotientStructure& q = *prof.quotient;
    const auto mult = s.multiplicities();
    std::vector<Elem> outside;
    for (Elem x = 0; x < mult.size(); ++x)
      if (mult[x] && !prof.Z.contains(x)) outside.insert(outside.end(), mult[x], x);
    const auto cover = static_cast<std::size_t>(prof.N);
    if (outside.size() > n || len < outside.size()) return false;
    const std::size_t z_slots = len - outside.size();
    if (z_slots < n * cover || z_slots > n * prof.Z.size()) return false;
    if (cover == 0 && outside.size() != n) return false;

    std::vector<Elem> cosets = prof.X.elements();
    if (rng) std::shuffle(cosets.begin(), cosets.end(), *rng);
    std::vector<std::vector<Elem>> members(cosets.size());
    for (std::size_t c = 0; c < cosets.size(); ++c) {
      prof.Z.for_each([&](Elem x) {
        if (q.project(x) == cosets[c]) members[c].push_back(x);
      });
      if (rng) std::shuffle(members[c].begin(), members[c].end(), *rng);
    }
    std::vector<std::uint32_t> take(mult.size(), 0);
    auto cap = [&](Elem x) { return std::min<std::uint32_t>(mult[x], static_cast<std::uint32_t>(n)); };
    // Level filling: one more copy of each element per round, so parts see
    // as many distinct elements as possible.
    auto fill = [&](const std::vector<Elem>& pool, std::size_t want) {
      bool progress = true;
      while (want && progress) {
        progress = false;
        for (Elem x : pool) {
          if (!want) break;
          if (take[x] < cap(x)) {
            ++take[x];
            --want;
            progress = true;
          }
        }
      }
      return want == 0;
    };
    for (const auto& pool : members)
      if (!fill(pool, n)) return false;
    std::vector<Elem> all;
    for (const auto& pool : members) all.insert(all.end(), pool.begin(), pool.end());
    if (!fill(all, z_slots - n * cover)) return false;

    std::vector<Elem> seq;
    for (const auto& pool : members)
      for (Elem x : pool) seq.insert(seq.end(), take[x], x);
    std::vector<Subset> ps = deal(seq);
    std::vector<std::size_t> slots(n);
    std::iota(slots.begin(), slots.end(), 0);
    if (rng) std::shuffle(slots.begin(), slots.end(), *rng);
    for (std::size_t i = 0; i < outside.size(); ++i) ps[slots[n - 1 - i]].insert(outside[i]);
    for (const Subset& p : ps)
      if (!part_ok(p)) return false;
    set_parts(std::move(ps));
    return true;
  }
};

// Canonical enumeration of setpartitions up to reordering of parts: each
// element is offered to a prefix of every block of currently identical parts.
struct ExhaustiveSearch {
  const Sequence& s;
  std::size_t len;
  std::size_t n;
  const Subset& sigma_n;
  const SubsumProfile& prof;
  std::size_t goal1;
  std::size_t budget;

  std::vector<Elem> elems;
  std::vector<std::uint32_t> caps;
  std::vector<std::size_t> cap_suffix;
  std::vector<Subset> parts;
  std::size_t nodes = 0;
  bool exhausted_budget = false;
  std::optional<std::vector<Subset>> case_one;
  std::optional<std::vector<Subset>> case_two;

  bool done() const { return case_one.has_value() || exhausted_budget; }

  void leaf() {
    for (const Subset& p : parts)
      if (p.empty()) return;
    const Subset total = sumset(parts);
    if (total.size() >= goal1) {
      case_one = parts;
      return;
    }
    if (case_two || !(total == sigma_n)) return;
    Sequence used(s.group());
    for (const Subset& p : parts) p.for_each([&](Elem x) { used.add(x); });
    Verdict v;
    check_case_two(parts, s, used, static_cast<std::int64_t>(n), sigma_n, total, prof, v);
    if (v.ok) case_two = parts;
  }

  void element(std::size_t idx, std::size_t used, const std::vector<std::size_t>& blocks) {
    if (done()) return;
    if (++nodes > budget) {
      exhausted_budget = true;
      return;
    }
    if (used == len) {
      leaf();
      return;
    }
    if (idx == elems.size() || used + cap_suffix[idx] < len) return;
    std::size_t empty = 0;
    for (const Subset& p : parts) empty += p.empty();
    if (empty > len - used) return;
    std::vector<std::size_t> next;
    choose(idx, used, blocks, 0, std::min<std::size_t>(caps[idx], len - used), next);
  }

  // blocks: boundaries b0=0 < b1 < ... < bm = n of runs of identical parts.
  void choose(std::size_t idx, std::size_t used, const std::vector<std::size_t>& blocks, std::size_t b,
              std::size_t left, std::vector<std::size_t>& next) {
    if (done()) return;
    if (b + 1 == blocks.size()) {
      next.push_back(n);
      element(idx + 1, used, next);
      next.pop_back();
      return;
    }
    const std::size_t lo = blocks[b], hi = blocks[b + 1];
    const Elem x = elems[idx];
    const std::size_t width = hi - lo;
    const std::size_t mark = next.size();
    // Take the larger counts first: fuller parts reach large sums sooner.
    for (std::size_t j = std::min(width, left) + 1; j-- > 0;) {
      for (std::size_t t = 0; t < j; ++t) parts[lo + t].insert(x);
      next.push_back(lo);
      if (j > 0 && j < width) next.push_back(lo + j);
      choose(idx, used + j, blocks, b + 1, left - j, next);
      next.resize(mark);
      for (std::size_t t = 0; t < j; ++t) parts[lo + t].erase(x);
      if (done()) return;
    }
  }

  void run() {
    const auto mult = s.multiplicities();
    for (Elem x = 0; x < mult.size(); ++x)
      if (mult[x]) {
        elems.push_back(x);
        caps.push_back(std::min<std::uint32_t>(mult[x], static_cast<std::uint32_t>(n)));
      }
    cap_suffix.assign(elems.size() + 1, 0);
    for (std::size_t i = elems.size(); i-- > 0;) cap_suffix[i] = cap_suffix[i + 1] + caps[i];
    parts.assign(n, Subset(s.group()));
    element(0, 0, {0, n});
  }
};

}  // namespace

Verdict partition_verify(const Certificate& cert, const Sequence& s, const Sequence& s_prime, std::int64_t n) {
  Verdict v;
  if (!s_prime.divides(s) || s_prime.height() > n || n < 1 || static_cast<std::size_t>(n) > s_prime.length()) {
    v.fail("precondition: need S' | S and h(S') <= n <= |S'|");
    return v;
  }
  const auto& parts = cert.partition.parts();
  if (parts.size() != static_cast<std::size_t>(n)) {
    v.fail("setpartition: has " + std::to_string(parts.size()) + " parts, expected " + std::to_string(n));
    return v;
  }
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (parts[i].empty() || !(parts[i].group() == s.group())) {
      v.fail("setpartition: part " + std::to_string(i + 1) + " is empty or over another group");
      return v;
    }
  const Sequence used = cert.partition.underlying_sequence();
  if (!used.divides(s)) {
    v.fail("setpartition: S(A) does not divide S");
    return v;
  }
  if (used.length() != s_prime.length())
    v.fail("setpartition: |S(A)| = " + std::to_string(used.length()) + " differs from |S'| = " +
           std::to_string(s_prime.length()));
  const Subset sigma_n = nterm_subsums(s, n);
  const Subset total = cert.partition.sum();
  if (!total.is_subset_of(sigma_n)) v.fail("sum of parts is not contained in Sigma_n(S)");
  if (cert.case_tag == CaseTag::I) {
    const auto target = isize(s_prime.length()) - n + 1;
    if (isize(total.size()) < target)
      v.fail("case 1: |sum A_i| = " + std::to_string(total.size()) + " < |S'| - n + 1 = " +
             std::to_string(target));
    return v;
  }
  const SubsumProfile prof = subsum_profile(s, n, isize(s_prime.length()), sigma_n);
  if (!cert.H || !(*cert.H == prof.H)) v.fail("case 2: H differs from the stabilizer of Sigma_n(S)");
  check_case_two(parts, s, used, n, sigma_n, total, prof, v);
  return v;
}

std::optional<Certificate> partition_exhaustive(const Sequence& s, const Sequence& s_prime, std::int64_t n,
                                                std::size_t max_len) {
  check_subsequence_pre(s, s_prime, n, "partition_exhaustive");
  if (s_prime.length() > max_len) return std::nullopt;
  const Subset sigma_n = nterm_subsums(s, n);
  const SubsumProfile prof = subsum_profile(s, n, isize(s_prime.length()), sigma_n);
  const std::size_t len = s_prime.length();
  ExhaustiveSearch ex{s, len, static_cast<std::size_t>(n), sigma_n, prof,
                      static_cast<std::size_t>(isize(len) - n + 1), 20'000'000};
  ex.run();
  Certificate cert;
  cert.kind = CertKind::Partition;
  cert.H = prof.H;
  if (ex.case_one) {
    cert.case_tag = CaseTag::I;
    cert.partition = SetPartition(s.group(), *ex.case_one);
  } else if (ex.case_two) {
    cert.case_tag = CaseTag::II;
    cert.partition = SetPartition(s.group(), *ex.case_two);
  } else {
    return std::nullopt;
  }
  cert.verified = partition_verify(cert, s, s_prime, n).ok;
  return cert;
}

Certificate partition_solve(const Sequence& s, const Sequence& s_prime, std::int64_t n, const SolveOptions& opts) {
  check_subsequence_pre(s, s_prime, n, "partition_solve");
  const std::size_t len = s_prime.length();
  const Subset sigma_n = nterm_subsums(s, n);
  const SubsumProfile prof = subsum_profile(s, n, isize(len), sigma_n);
  const auto goal1 = static_cast<std::size_t>(isize(len) - n + 1);
  const bool case_one_possible = sigma_n.size() >= goal1;

  PartitionSearch st{s, len, static_cast<std::size_t>(n), sigma_n, prof};
  auto finish = [&](std::vector<Subset> parts, CaseTag tag) {
    Certificate cert;
    cert.kind = CertKind::Partition;
    cert.case_tag = tag;
    cert.partition = SetPartition(s.group(), std::move(parts));
    cert.H = prof.H;
    cert.bounds["subsum_size"] = isize(sigma_n.size());
    cert.bounds["case1_target"] = isize(goal1);
    cert.bounds["sum_size"] = isize(cert.partition.sum().size());
    if (tag == CaseTag::II) {
      cert.bounds["N"] = prof.N;
      cert.bounds["e"] = prof.e;
      cert.bounds["rho"] = prof.rho;
      cert.bounds["kneser_bound"] = prof.bound_kneser_form;
    }
    const Verdict v = partition_verify(cert, s, s_prime, n);
    if (!v.ok)
      throw InternalError("partition_solve produced an invalid certificate: " + v.violations.front(),
                          "S=" + s.to_string() + " S'=" + s_prime.to_string() + " n=" + std::to_string(n));
    cert.verified = true;
    return cert;
  };
  auto accept = [&](const Subset& total) -> std::optional<CaseTag> {
    if (total.size() >= goal1) return CaseTag::I;
    if (!(total == sigma_n)) return std::nullopt;
    if (st.structured) return CaseTag::II;
    Verdict v;
    check_case_two(st.parts, s, st.used(), n, sigma_n, total, prof, v);
    return v.ok ? std::optional<CaseTag>(CaseTag::II) : std::nullopt;
  };
  const std::size_t goal2 = sigma_n.size();

  if (case_one_possible) {
    st.set_parts(make_setpartition(s_prime, n).parts());
    if (auto tag = accept(st.climb(goal1))) return finish(st.parts, *tag);
  }
  st.structured = true;
  if (st.structured_start(nullptr))
    if (auto tag = accept(st.climb(std::min(goal1, goal2)))) return finish(st.parts, *tag);

  std::mt19937_64 rng(opts.seed);
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    if (case_one_possible) {
      st.structured = false;
      st.random_start(rng);
      if (auto tag = accept(st.climb(goal1))) return finish(st.parts, *tag);
    }
    st.structured = true;
    if (st.structured_start(&rng))
      if (auto tag = accept(st.climb(std::min(goal1, goal2)))) return finish(st.parts, *tag);
  }
  if (len <= opts.exhaustive_threshold) {
    if (auto cert = partition_exhaustive(s, s_prime, n, opts.exhaustive_threshold))
      return finish(cert->partition.parts(), cert->case_tag);
  }
  throw InternalError("partition_solve found no certificate",
                      "group=" + s.group().to_string() + " S=" + s.to_string() + " S'=" + s_prime.to_string() +
                          " n=" + std::to_string(n));
}

// ---------------------------------------------------------------------------
// Hypotheses

std::string to_string(HypothesisItem item) {
  switch (item) {
    case HypothesisItem::TrivialH: return "trivial-H";
    case HypothesisItem::FullH: return "full-H";
    case HypothesisItem::Item1: return "item1";
    case HypothesisItem::Item2: return "item2";
    case HypothesisItem::Item3: return "item3";
    case HypothesisItem::Item4: return "item4";
    case HypothesisItem::None: return "none";
  }
  return "none";
}

std::string to_string(GlobalItem item) {
  switch (item) {
    case GlobalItem::G1: return "g1";
    case GlobalItem::G2: return "g2";
    case GlobalItem::G3: return "g3";
    case GlobalItem::G4: return "g4";
    case GlobalItem::None: return "none";
  }
  return "none";
}

namespace {

bool is_prime(std::int64_t v) {
  if (v < 2) return false;
  for (std::int64_t d = 2; d * d <= v; ++d)
    if (v % d == 0) return false;
  return true;
}

std::int64_t smallest_prime_divisor(std::int64_t v) {
  for (std::int64_t d = 2; d * d <= v; ++d)
    if (v % d == 0) return d;
  return v;
}

}  // namespace

HypothesisReport hypothesis_check(const GroupSpec& g, const Subgroup& h, std::int64_t n) {
  return hypothesis_check(Subgroup::whole(g), h, n);
}

HypothesisReport hypothesis_check(const Subgroup& ambient, const Subgroup& h, std::int64_t n) {
  if (!h.is_subgroup_of(ambient)) throw PreconditionError("hypothesis_check: H is not a subgroup of the ambient group");
  HypothesisReport r{h, quotient_spec_within(ambient, h)};
  const GroupSpec& q = r.quotient;
  const std::int64_t e = q.exponent();
  const bool proper_nontrivial = !h.is_trivial() && h.size() != ambient.size();
  if (h.is_trivial()) {
    r.item_satisfied = r.full_group_item = HypothesisItem::TrivialH;
  } else if (h.size() == ambient.size()) {
    r.item_satisfied = r.full_group_item = HypothesisItem::FullH;
  } else {
    const bool two_by_exp = q.factors() == std::vector<std::uint32_t>{2, static_cast<std::uint32_t>(e)};
    if (n >= e + 1) r.items_holding.push_back(HypothesisItem::Item1);
    if (n >= e && e > isize(h.size())) r.items_holding.push_back(HypothesisItem::Item2);
    if (n >= e && two_by_exp) r.items_holding.push_back(HypothesisItem::Item3);
    if (n >= e - 1 && q.is_cyclic()) r.items_holding.push_back(HypothesisItem::Item4);
    if (!r.items_holding.empty()) r.item_satisfied = r.items_holding.front();

    if (n >= e)
      r.full_group_item = HypothesisItem::Item1;
    else if (n >= e - 1 && (q.is_cyclic() || is_prime(e)))
      r.full_group_item = HypothesisItem::Item2;
    else if (n >= 1 && (e <= 3 || q.factors() == std::vector<std::uint32_t>{4}))
      r.full_group_item = HypothesisItem::Item3;
  }

  const GroupSpec u = subgroup_spec(ambient);
  const std::int64_t ex = u.exponent();
  const std::int64_t order = u.order();
  const std::int64_t co = order / ex;
  // Smallest divisor >= 3 of |G|/exp(G); none (only when |G|/exp(G) <= 2)
  // makes the size condition vacuous.
  std::int64_t p3 = 0;
  for (std::int64_t d = 3; d <= co; ++d)
    if (co % d == 0) {
      p3 = d;
      break;
    }
  const bool cyclic_bound = u.is_cyclic() && order > 1 && n >= order / smallest_prime_divisor(order) - 1;
  if (n >= ex + 1)
    r.global_item = GlobalItem::G1;
  else if (n >= ex && (p3 == 0 || order < ex * ex * p3))
    r.global_item = GlobalItem::G2;
  else if (n >= ex - 1 && u.rank() == 2 && is_prime(u.factors()[0]))
    r.global_item = GlobalItem::G3;
  else if (cyclic_bound)
    r.global_item = GlobalItem::G4;

  if (n >= ex)
    r.full_group_global_item = GlobalItem::G1;
  else if (n >= ex - 1 && (is_prime(ex) || is_prime(co)))
    r.full_group_global_item = GlobalItem::G2;
  else if (cyclic_bound)
    r.full_group_global_item = GlobalItem::G3;
  else if (n >= 1 && (ex <= 3 || order < 10))
    r.full_group_global_item = GlobalItem::G4;

  if (proper_nontrivial) {
    if (r.global_item != GlobalItem::None && !r.satisfied()) r.globals_consistent = false;
    if (r.full_group_global_item != GlobalItem::None && !r.full_group_satisfied()) r.globals_consistent = false;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Strengthened partition theorem pipeline

namespace {

Elem translate_elem(const GroupSpec& g, Elem x, Elem t) { return g.add(x, t); }

struct PipelineContext {
  const SolveOptions& opts;
  std::string dump;
  std::vector<std::string> steps;
};

Certificate case_one(SetPartition p) {
  Certificate c;
  c.kind = CertKind::Main;
  c.case_tag = CaseTag::I;
  c.partition = std::move(p);
  return c;
}

Certificate case_two(SetPartition p, const Subgroup& h, const Subgroup& k, Elem alpha, std::int64_t e_h,
                     std::int64_t e_k, std::int64_t n) {
  Certificate c;
  c.kind = CertKind::Main;
  c.case_tag = CaseTag::II;
  c.partition = std::move(p);
  c.H = h;
  c.K = k;
  c.alpha = alpha;
  c.e_H = e_h;
  c.e_K = e_k;
  c.k = n - e_k;
  return c;
}

Certificate shifted(Certificate c, Elem t) {
  const GroupSpec& g = c.partition.group();
  c.partition = c.partition.translated(t);
  if (c.alpha) c.alpha = translate_elem(g, *c.alpha, t);
  return c;
}

std::int64_t count_outside(const Sequence& s, const Subgroup& sub, Elem alpha) {
  const GroupSpec& g = s.group();
  std::int64_t out = 0;
  const auto mult = s.multiplicities();
  for (Elem x = 0; x < mult.size(); ++x)
    if (mult[x] && !sub.contains(g.sub(x, alpha))) out += mult[x];
  return out;
}

Verdict verify_within(const Subgroup& ambient, const Certificate& cert, const Sequence& s, const Sequence& s_prime,
                      std::int64_t n, PipelineMode mode, std::map<std::string, std::int64_t>* bounds) {
  Verdict v;
  const GroupSpec& g = s.group();
  if (!s_prime.divides(s) || n < 1 || s_prime.height() > n || static_cast<std::size_t>(n) > s_prime.length()) {
    v.fail("precondition: need S' | S and h(S') <= n <= |S'|");
    return v;
  }
  const auto& parts = cert.partition.parts();
  if (parts.size() != static_cast<std::size_t>(n)) {
    v.fail("setpartition: has " + std::to_string(parts.size()) + " parts, expected " + std::to_string(n));
    return v;
  }
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (parts[i].empty() || !(parts[i].group() == g)) {
      v.fail("setpartition: part " + std::to_string(i + 1) + " is empty or over another group");
      return v;
    }
  const Sequence used = cert.partition.underlying_sequence();
  if (!used.divides(s)) {
    v.fail("setpartition: S(A) does not divide S");
    return v;
  }
  if (used.length() != s_prime.length())
    v.fail("setpartition: |S(A)| = " + std::to_string(used.length()) + " differs from |S'| = " +
           std::to_string(s_prime.length()));

  const Subset sigma_n = nterm_subsums(s, n);
  const Subset total = cert.partition.sum();
  const auto sub_size = isize(sigma_n.size());
  const auto amb = isize(ambient.size());
  const auto len = isize(s_prime.length());
  std::map<std::string, std::int64_t> b;
  b["subsum_size"] = sub_size;
  b["sum_size"] = isize(total.size());

  if (cert.case_tag == CaseTag::I) {
    const std::int64_t target = std::min(amb, len - n + 1);
    b["case1_target"] = target;
    if (!total.is_subset_of(sigma_n)) v.fail("(i): sum of parts is not contained in Sigma_n(S)");
    if (isize(total.size()) < target)
      v.fail("(i): |sum A_i| = " + std::to_string(total.size()) + " < min{|G|, |S'|-n+1} = " +
             std::to_string(target));
    if (mode == PipelineMode::FullGroup && !(total == ambient.carrier() && sigma_n == ambient.carrier()))
      v.fail("(i): full-group mode requires Sigma_n(S) = sum A_i = G");
    if (bounds) *bounds = std::move(b);
    return v;
  }

  if (!cert.H || !cert.K || !cert.alpha) {
    v.fail("(ii): certificate lacks H, K or alpha");
    return v;
  }
  const Subgroup& h = *cert.H;
  const Subgroup& k = *cert.K;
  const Elem alpha = *cert.alpha;
  const Subgroup stab = stabilizer(sigma_n);
  if (!(h == stab)) v.fail("(ii): H differs from the stabilizer of Sigma_n(S)");
  if (h.is_trivial() || !h.is_subgroup_of(ambient) || h.size() == ambient.size())
    v.fail("(ii): H must be a proper nontrivial subgroup");
  if (k.is_trivial() || !k.is_subgroup_of(h)) v.fail("(ii): K must be a nontrivial subgroup of H");

  // (a)
  if (!(total == sigma_n)) v.fail("(ii)(a): Sigma_n(S) differs from sum A_i");
  const Sequence unused = used.divides(s) ? used.removed_from(s) : Sequence(g);
  bool unused_ok = true;
  unused.support().for_each([&](Elem x) { unused_ok = unused_ok && k.contains(g.sub(x, alpha)); });
  if (!unused_ok) v.fail("(ii)(a): an unused term lies outside alpha+K");

  // (b)
  const std::int64_t e_h = count_outside(s, h, alpha);
  const std::int64_t e_k = count_outside(s, k, alpha);
  if (e_h != cert.e_H)
    v.fail("(ii)(b): e_H recounts to " + std::to_string(e_h) + ", certificate says " + std::to_string(cert.e_H));
  if (e_k != cert.e_K)
    v.fail("(ii)(b): e_K recounts to " + std::to_string(e_k) + ", certificate says " + std::to_string(cert.e_K));
  auto check_b = [&](const char* name, std::int64_t e, const Subgroup& sub) {
    const auto sz = isize(sub.size());
    const std::int64_t lower = (e + 1) * sz;
    b[std::string("bound_") + name] = lower;
    if (sub_size < lower)
      v.fail(std::string("(ii)(b): |Sigma_n(S)| = ") + std::to_string(sub_size) + " < (e_" + name + "+1)|" + name +
             "| = " + std::to_string(lower));
    if (e > amb / sz - 2)
      v.fail(std::string("(ii)(b): e_") + name + " = " + std::to_string(e) + " > |G/" + name + "| - 2");
    if (lower > len - n)
      v.fail(std::string("(ii)(b): (e_") + name + "+1)|" + name + "| = " + std::to_string(lower) +
             " > |S'| - n = " + std::to_string(len - n));
  };
  check_b("H", e_h, h);
  check_b("K", e_k, k);

  // (c) and (d) use the claimed e_K for the part-index convention.
  const std::int64_t inside = n - cert.e_K;
  if (inside < 1 || inside > n) {
    v.fail("(ii)(c): n - e_K = " + std::to_string(inside) + " is out of range");
    if (bounds) *bounds = std::move(b);
    return v;
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::size_t in = 0, out = 0;
    parts[i].for_each([&](Elem x) { k.contains(g.sub(x, alpha)) ? ++in : ++out; });
    const std::string idx = std::to_string(i + 1);
    if (in == 0) v.fail("(ii)(c): part " + idx + " misses alpha+K");
    if (isize(i) < inside && out != 0) v.fail("(ii)(c): part " + idx + " is not inside alpha+K");
    if (isize(i) >= inside && out != 1)
      v.fail("(ii)(c): part " + idx + " has " + std::to_string(out) + " elements outside alpha+K, expected 1");
  }

  // (d)
  const Subset head = cert.partition.partial_sum(0, static_cast<std::size_t>(inside));
  const Subset coset = k.carrier().translated(g.mul(inside, alpha));
  if (!(head == coset)) v.fail("(ii)(d): sum of the first n-e_K parts is not (n-e_K)alpha+K");
  b["k"] = inside;
  b["e_H"] = e_h;
  b["e_K"] = e_k;
  if (bounds) *bounds = std::move(b);
  return v;
}

[[noreturn]] void pipeline_failure(const PipelineContext& ctx, const std::string& what) {
  throw InternalError("main_pipeline: " + what, ctx.dump);
}

Certificate checked(Certificate c, const Subgroup& ambient, const Sequence& s, const Sequence& sp, std::int64_t n,
                    const PipelineContext& ctx) {
  const Verdict v = verify_within(ambient, c, s, sp, n, PipelineMode::Standard, nullptr);
  if (!v.ok) pipeline_failure(ctx, "intermediate certificate failed: " + v.violations.front());
  return c;
}

Certificate solve_within(const Subgroup& ambient, const Sequence& s, const Sequence& sp, std::int64_t n,
                         PipelineContext& ctx, const Certificate* presolved) {
  const GroupSpec& g = s.group();
  const Subset supp = s.support();
  const Subgroup span = affine_span(supp);
  const std::int64_t len = isize(sp.length());

  if (span.is_trivial()) return checked(case_one(make_setpartition(sp, n)), ambient, s, sp, n, ctx);

  if (!(span == ambient)) {
    // Work inside the affine span, with a term of S moved to 0.
    const Elem s0 = supp.min();
    Certificate inner = solve_within(span, s.translated(g.neg(s0)), sp.translated(g.neg(s0)), n, ctx, nullptr);
    Certificate out = shifted(std::move(inner), s0);
    if (out.case_tag == CaseTag::I &&
        isize(out.partition.sum().size()) < std::min(isize(ambient.size()), len - n + 1))
      out = case_two(std::move(out.partition), span, span, s0, 0, 0, n);
    return checked(std::move(out), ambient, s, sp, n, ctx);
  }

  const Certificate base = presolved ? *presolved : partition_solve(s, sp, n, ctx.opts);
  if (isize(base.partition.sum().size()) >= std::min(isize(ambient.size()), len - n + 1))
    return checked(case_one(base.partition), ambient, s, sp, n, ctx);
  if (base.case_tag != CaseTag::II) pipeline_failure(ctx, "partition certificate is neither (i) nor conclusion 2");

  const Subset sigma_n = nterm_subsums(s, n);
  const SubsumProfile prof = subsum_profile(s, n, len, sigma_n);
  const Subgroup& h = prof.H;
  if (h.is_trivial() || h.size() == ambient.size())
    pipeline_failure(ctx, "conclusion 2 with trivial or full stabilizer, yet (i) fails");
  if (prof.N != 1) pipeline_failure(ctx, "step A: |X| = " + std::to_string(prof.N) + ", expected 1");

  const Elem alpha = (prof.Z & supp).min();
  std::vector<Subset> inside, outside;
  for (const Subset& p : base.partition.parts()) (p.is_subset_of(prof.Z) ? inside : outside).push_back(p);
  const std::int64_t k = isize(inside.size());
  const std::int64_t e_h = isize(outside.size());
  if (e_h != prof.e) pipeline_failure(ctx, "e_H from the parts differs from the profile count");
  if (k < 2) ctx.steps.push_back("k = n - e_H = " + std::to_string(k) + " < 2");
  std::vector<Subset> ordered = inside;
  ordered.insert(ordered.end(), outside.begin(), outside.end());
  const SetPartition a(g, ordered);

  if (ctx.opts.early_exit && k >= 1 && a.partial_sum(0, static_cast<std::size_t>(k)) == h.carrier().translated(g.mul(k, alpha)))
    return checked(case_two(a, h, h, alpha, e_h, e_h, n), ambient, s, sp, n, ctx);
  if (e_h < 2) ctx.steps.push_back("step C: e_H = " + std::to_string(e_h) + " < 2");

  // Coordinates with alpha + beta moved to 0, beta the least term of S in alpha+H.
  const Subset& hc = h.carrier();
  const Sequence w_h0 = s.translated(g.neg(alpha)).restricted_to(hc);
  const Elem beta = w_h0.support().min();
  const Elem t = g.add(alpha, beta);
  const Elem back = g.neg(t);
  const Sequence w_h = s.translated(back).restricted_to(hc);
  const SetPartition a2 = a.translated(back);
  const Sequence sp_h = a2.underlying_sequence().restricted_to(hc);
  std::vector<Elem> z;
  for (std::size_t i = static_cast<std::size_t>(k); i < a2.n(); ++i) z.push_back((a2.parts()[i] - hc).min());

  const Sequence tseq = lemma31_complete(w_h, sp_h, n, k).T;
  const Subgroup gp = subgroup_generated(w_h.support());

  // Extends a k-setpartition B over G' to n parts by the completion and the z_i.
  auto assemble = [&](const SetPartition& bpart, const Subgroup& kk, Elem alpha_p, std::int64_t e_pk) {
    const Sequence r = bpart.underlying_sequence();
    const Sequence tp = lemma31_extend(w_h, sp_h.length(), n, k, r);
    const SetPartition bp = make_setpartition(tp, n - k);
    std::vector<Subset> cparts = bpart.parts();
    for (std::size_t i = 0; i < bp.n(); ++i) {
      Subset c = bp.parts()[i];
      c.insert(z[i]);
      cparts.push_back(std::move(c));
    }
    const SetPartition cset = SetPartition(g, std::move(cparts)).translated(t);
    return checked(case_two(cset, h, kk, g.add(t, alpha_p), e_h, e_h + e_pk, n), ambient, s, sp, n, ctx);
  };

  SetPartition ap = make_setpartition(tseq, k);
  std::stable_sort(ap.parts().begin(), ap.parts().end(),
                   [](const Subset& x, const Subset& y) { return x.size() > y.size(); });
  if (k >= 2 && ap.parts()[0].size() + ap.parts()[1].size() >= h.size() + 1) {
    if (gp == h && ap.sum() == gp.carrier()) return assemble(ap, gp, 0, 0);
    ctx.steps.push_back("pigeonhole: two largest parts exceed |H| but do not span G' = H");
  }
  if (!(5 <= k && k <= n - 2))
    ctx.steps.push_back("step C: k = " + std::to_string(k) + " outside [5, n-2] with n = " + std::to_string(n));

  const Certificate d = partition_solve(w_h, tseq, k, ctx.opts);
  const Subset dsum = d.partition.sum();
  if (isize(dsum.size()) >= std::min(isize(gp.size()), isize(tseq.length()) - k + 1)) {
    if (dsum == gp.carrier()) return assemble(d.partition, gp, 0, 0);
    ctx.steps.push_back("step D: large sum of parts that is not G'");
  }

  const Subgroup hp = stabilizer(nterm_subsums(w_h, k));
  if (!(isize(h.size() / hp.size()) + 2 < k))
    ctx.steps.push_back("step E: k = " + std::to_string(k) + " <= |H/H'| + 2 = " +
                        std::to_string(h.size() / hp.size() + 2));
  const Certificate rec = solve_within(gp, w_h, tseq, k, ctx, &d);
  if (rec.case_tag == CaseTag::I) {
    if (rec.partition.sum() == gp.carrier()) return assemble(rec.partition, gp, 0, 0);
    pipeline_failure(ctx, "recursive call returned (i) without reaching G'");
  }
  return assemble(rec.partition, *rec.K, *rec.alpha, rec.e_K);
}

}  // namespace

Verdict main_verify(const Certificate& cert, const GroupSpec& g, const Sequence& s, const Sequence& s_prime,
                    std::int64_t n, PipelineMode mode) {
  if (!(s.group() == g)) {
    Verdict v;
    v.fail("sequence is over a different group");
    return v;
  }
  return verify_within(Subgroup::whole(g), cert, s, s_prime, n, mode, nullptr);
}

Certificate main_pipeline(const GroupSpec& g, const Sequence& s, const Sequence& s_prime, std::int64_t n,
                          PipelineMode mode, const SolveOptions& opts) {
  if (!(s.group() == g) || !(s_prime.group() == g)) throw PreconditionError("main_pipeline: group mismatch");
  check_subsequence_pre(s, s_prime, n, "main_pipeline");
  const Subset sigma_n = nterm_subsums(s, n);
  const Subgroup h = stabilizer(sigma_n);
  const HypothesisReport rep = hypothesis_check(g, h, n);
  if (mode == PipelineMode::FullGroup) {
    if (isize(s_prime.length()) < n + isize(g.order()) - 1)
      throw HypothesesUnmet("hypotheses unmet: full-group mode needs |S'| >= n + |G| - 1");
    if (!rep.full_group_satisfied())
      throw HypothesesUnmet("hypotheses unmet: no full-group item holds for G/H = " + rep.quotient.to_string() +
                            ", n = " + std::to_string(n));
  } else if (!rep.satisfied()) {
    throw HypothesesUnmet("hypotheses unmet: no item holds for G/H = " + rep.quotient.to_string() +
                          ", n = " + std::to_string(n));
  }
  PipelineContext ctx{opts,
                      "group=" + g.to_string() + " S=" + s.to_string() + " S'=" + s_prime.to_string() +
                          " n=" + std::to_string(n) +
                          " mode=" + (mode == PipelineMode::FullGroup ? "fullgroup" : "standard"),
                      {}};
  Certificate cert = solve_within(Subgroup::whole(g), s, s_prime, n, ctx, nullptr);
  if (!cert.H) cert.H = h;
  cert.step_violations = std::move(ctx.steps);
  const Verdict v = verify_within(Subgroup::whole(g), cert, s, s_prime, n, mode, &cert.bounds);
  if (!v.ok) throw InternalError("main_pipeline: certificate failed verification: " + v.violations.front(), ctx.dump);
  cert.verified = true;
  return cert;
}

}  // namespace subsum
