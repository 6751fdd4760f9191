#include "subsumlab/sequence.hpp"

#include <algorithm>
#include <unordered_map>

#include "subsumlab/errors.hpp"

namespace subsum {

Sequence::Sequence(GroupSpec g) : group_(std::move(g)), mult_(group_.order(), 0) {}

Sequence Sequence::from_terms(const GroupSpec& g, std::span<const Elem> terms) {
  Sequence s(g);
  for (Elem t : terms) {
    if (t >= g.order()) throw PreconditionError("sequence term out of range");
    s.add(t);
  }
  return s;
}

Sequence Sequence::repeated(const GroupSpec& g, Elem x, std::uint32_t count) {
  Sequence s(g);
  s.add(x, count);
  return s;
}

void Sequence::add(Elem x, std::uint32_t count) {
  mult_.at(x) += count;
  length_ += count;
}

void Sequence::remove(Elem x, std::uint32_t count) {
  if (mult_.at(x) < count) throw PreconditionError("removing more copies than present");
  mult_[x] -= count;
  length_ -= count;
}

std::uint32_t Sequence::height() const {
  return mult_.empty() ? 0 : *std::max_element(mult_.begin(), mult_.end());
}

Elem Sequence::sum() const {
  Elem acc = 0;
  for (Elem x = 0; x < mult_.size(); ++x)
    if (mult_[x]) acc = group_.add(acc, group_.mul(mult_[x], x));
  return acc;
}

Subset Sequence::support() const {
  Subset s(group_);
  for (Elem x = 0; x < mult_.size(); ++x)
    if (mult_[x]) s.insert(x);
  return s;
}

std::vector<Elem> Sequence::terms() const {
  std::vector<Elem> out;
  out.reserve(length_);
  for (Elem x = 0; x < mult_.size(); ++x) out.insert(out.end(), mult_[x], x);
  return out;
}

bool Sequence::divides(const Sequence& other) const {
  if (!(group_ == other.group_)) return false;
  for (std::size_t i = 0; i < mult_.size(); ++i)
    if (mult_[i] > other.mult_[i]) return false;
  return true;
}

Sequence Sequence::removed_from(const Sequence& other) const {
  if (!divides(other)) throw PreconditionError("removal requires a subsequence");
  Sequence out = other;
  for (std::size_t i = 0; i < mult_.size(); ++i) out.mult_[i] -= mult_[i];
  out.length_ -= length_;
  return out;
}

Sequence Sequence::concat(const Sequence& other) const {
  if (!(group_ == other.group_)) throw PreconditionError("concatenating sequences over different groups");
  Sequence out = *this;
  for (std::size_t i = 0; i < mult_.size(); ++i) out.mult_[i] += other.mult_[i];
  out.length_ += other.length_;
  return out;
}

Sequence Sequence::translated(Elem g) const {
  Sequence out(group_);
  for (Elem x = 0; x < mult_.size(); ++x)
    if (mult_[x]) out.add(group_.add(x, g), mult_[x]);
  return out;
}

Sequence Sequence::restricted_to(const Subset& s) const {
  Sequence out(group_);
  for (Elem x = 0; x < mult_.size(); ++x)
    if (mult_[x] && s.contains(x)) out.add(x, mult_[x]);
  return out;
}

std::string Sequence::to_string() const {
  std::string out;
  for (Elem x = 0; x < mult_.size(); ++x) {
    if (!mult_[x]) continue;
    if (!out.empty()) out += ';';
    out += group_.elem_to_string(x);
    if (mult_[x] != 1) out += "^" + std::to_string(mult_[x]);
  }
  return out;
}

SeqStats seq_stats(const Sequence& s) { return {s.sum(), s.height(), s.support()}; }

std::vector<Subset> subsum_table(const Sequence& s, std::size_t max_n) {
  const GroupSpec& g = s.group();
  std::vector<Subset> rows(max_n + 1, Subset(g));
  rows[0].insert(0);
  std::size_t processed = 0;
  const auto mult = s.multiplicities();
  for (Elem x = 0; x < mult.size(); ++x) {
    const std::uint32_t m = mult[x];
    if (!m) continue;
    processed += m;
    const std::size_t top = std::min(max_n, processed);
    // Descending c so rows[c - j] still holds the value before this element.
    for (std::size_t c = top; c >= 1; --c) {
      const std::size_t jmax = std::min<std::size_t>(m, c);
      Elem shift = 0;
      for (std::size_t j = 1; j <= jmax; ++j) {
        shift = g.add(shift, x);
        const Subset& src = rows[c - j];
        if (!src.empty()) rows[c].or_translated(src, shift);
      }
    }
  }
  return rows;
}

Subset nterm_subsums(const Sequence& s, std::int64_t n) {
  if (n < 0 || static_cast<std::size_t>(n) > s.length())
    throw PreconditionError("n-term subsums need 0 <= n <= |S| (n = " + std::to_string(n) +
                            ", |S| = " + std::to_string(s.length()) + ")");
  return std::move(subsum_table(s, static_cast<std::size_t>(n)).back());
}

Subset all_subsums(const Sequence& s) {
  if (s.empty()) throw PreconditionError("subsums of the empty sequence");
  auto rows = subsum_table(s, s.length());
  Subset out(s.group());
  for (std::size_t i = 1; i < rows.size(); ++i) out |= rows[i];
  return out;
}

Sequence push_forward(const Sequence& s, const QuotientStructure& q) {
  if (!(s.group() == q.parent)) throw PreconditionError("push_forward: sequence over a different group");
  Sequence out(q.quotient_spec);
  const auto mult = s.multiplicities();
  for (Elem x = 0; x < mult.size(); ++x)
    if (mult[x]) out.add(q.project(x), mult[x]);
  return out;
}

std::shared_ptr<const QuotientStructure> cached_quotient(const GroupSpec& g, const Subgroup& h) {
  thread_local std::unordered_map<std::string, std::shared_ptr<const QuotientStructure>> cache;
  std::string key = g.to_string();
  key += '|';
  for (std::uint64_t w : h.carrier().words()) key.append(reinterpret_cast<const char*>(&w), sizeof w);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  if (cache.size() > 4096) cache.clear();
  auto q = std::make_shared<const QuotientStructure>(quotient_decompose(g, h));
  cache.emplace(std::move(key), q);
  return q;
}

SubsumProfile subsum_profile(const Sequence& s, std::int64_t n, std::int64_t ref_len) {
  if (n < 1 || static_cast<std::size_t>(n) > s.length())
    throw PreconditionError("subsum_profile needs 1 <= n <= |S|");
  return subsum_profile(s, n, ref_len, nterm_subsums(s, n));
}

SubsumProfile subsum_profile(const Sequence& s, std::int64_t n, std::int64_t ref_len,
                             const Subset& sigma_n) {
  if (n < 1 || static_cast<std::size_t>(n) > s.length())
    throw PreconditionError("subsum_profile needs 1 <= n <= |S|");
  const GroupSpec& g = s.group();
  Subgroup h = stabilizer(sigma_n);
  auto q = cached_quotient(g, h);
  const Sequence image = push_forward(s, *q);

  SubsumProfile p{h, q, Subset(q->quotient_spec), Subset(g)};
  p.n = n;
  p.ref_len = ref_len;
  p.subsum_size = static_cast<std::int64_t>(sigma_n.size());
  std::int64_t min_sum = 0;
  const auto qm = image.multiplicities();
  for (Elem x = 0; x < qm.size(); ++x) {
    min_sum += std::min<std::int64_t>(n, qm[x]);
    if (qm[x] >= static_cast<std::uint32_t>(n)) p.X.insert(x);
  }
  p.N = static_cast<std::int64_t>(p.X.size());
  for (Elem x = 0; x < g.order(); ++x)
    if (p.X.contains(q->project(x))) p.Z.insert(x);
  const auto mult = s.multiplicities();
  for (Elem x = 0; x < mult.size(); ++x)
    if (mult[x] && !p.Z.contains(x)) p.e += mult[x];
  const auto hs = static_cast<std::int64_t>(h.size());
  p.rho = p.N * hs * n + p.e - ref_len;
  p.bound_blocks = ((p.N - 1) * n + p.e + 1) * hs;
  p.bound_minsum = (min_sum - n + 1) * hs;
  p.bound_kneser_form = ref_len - (n - 1) * hs + p.e * (hs - 1) + p.rho;
  return p;
}

Sequence build_s_star(const Sequence& s, const SubsumProfile& profile, std::int64_t n) {
  if (profile.n != n || !(profile.Z.group() == s.group()))
    throw PreconditionError("build_s_star: profile was computed for a different (S, n)");
  if (profile.ref_len != static_cast<std::int64_t>(s.length()))
    throw PreconditionError("build_s_star: profile must use ref_len = |S|");
  if (s.height() > n) throw PreconditionError("build_s_star needs h(S) <= n");
  Sequence out = s;
  profile.Z.for_each([&](Elem x) {
    const std::uint32_t have = s.multiplicity(x);
    out.add(x, static_cast<std::uint32_t>(n) - have);
  });
  return out;
}

namespace {

struct DavenportSearch {
  const GroupSpec& g;
  std::uint32_t best = 0;

  // sums = Sigma(current), current is zero-sum free, terms >= `from`.
  void extend(const Subset& sums, Elem from, std::uint32_t len) {
    best = std::max(best, len);
    for (Elem x = std::max<Elem>(from, 1); x < g.order(); ++x) {
      if (sums.contains(g.neg(x))) continue;
      Subset next = sums;
      next.or_translated(sums, x);
      next.insert(x);
      extend(next, x, len + 1);
    }
  }
};

}  // namespace

DavenportResult davenport_bruteforce(const GroupSpec& g, std::size_t cap) {
  if (g.order() > cap)
    throw CapExceeded("davenport_bruteforce: |G| = " + std::to_string(g.order()) + " exceeds cap " +
                      std::to_string(cap));
  DavenportSearch search{g};
  search.extend(Subset(g), 1, 0);
  const std::uint32_t d = search.best + 1;
  const auto dstar = group_params(g).d_star;
  return {d, static_cast<std::int64_t>(d) >= dstar + 1 && d <= g.order()};
}

}  // namespace subsum
