#include "subsumlab/verifiers.hpp"

#include <algorithm>
#include <functional>
#include <optional>

#include "subsumlab/errors.hpp"

namespace subsum {

namespace {

std::int64_t isize(const Subset& s) { return static_cast<std::int64_t>(s.size()); }

std::int64_t smallest_prime(std::int64_t m) {
  for (std::int64_t p = 2; p * p <= m; ++p)
    if (m % p == 0) return p;
  return m;
}

bool is_prime(std::int64_t m) { return m >= 2 && smallest_prime(m) == m; }

// Some z with b + z == t.
std::optional<Elem> translate_onto(const Subset& b, const Subset& t) {
  if (b.size() != t.size() || b.empty()) return std::nullopt;
  const GroupSpec& g = b.group();
  const Elem b0 = b.min();
  std::optional<Elem> found;
  t.for_each([&](Elem t0) {
    if (found) return;
    const Elem z = g.sub(t0, b0);
    if (b.translated(z) == t) found = z;
  });
  return found;
}

bool proper_subgroup(const Subgroup& k, const Subgroup& h) {
  return k.is_subgroup_of(h) && k.size() < h.size();
}

// H and <x> intersect trivially and together have |G| elements.
bool is_cyclic_complement(const Subgroup& h, Elem x) {
  const GroupSpec& g = h.group();
  const Subgroup c = cyclic_subgroup(g, x);
  return (h.carrier() & c.carrier()).size() == 1 && h.size() * c.size() == g.order();
}

struct Ctx {
  const Subset& a;
  std::int64_t n;
  GroupSpec g;
  std::int64_t order;
  std::int64_t exp;
  Subset na;
  Subgroup k;
  Subset a_k;  // A + K
  std::vector<Subgroup> subs;
  std::vector<Elem> top_order;  // elements of order exp(G)
};

Ctx make_ctx(const Subset& a, std::int64_t n) {
  const GroupSpec& g = a.group();
  Subset na = iterated_sumset(a, n);
  Subgroup k = stabilizer(na);
  Subset a_k = sumset(a, k.carrier());
  Ctx c{a, n, g, g.order(), g.exponent(), std::move(na), std::move(k), std::move(a_k), enumerate_subgroups(g), {}};
  for (Elem x = 0; x < g.order(); ++x)
    if (g.order_of(x) == g.exponent()) c.top_order.push_back(x);
  return c;
}

void match_case1(const Ctx& c, std::vector<StructureMatch>& out) {
  const std::int64_t a_size = isize(c.a);
  const std::int64_t ks = static_cast<std::int64_t>(c.k.size());
  const std::int64_t na = isize(c.na);
  if (!(a_size * c.n <= c.order && c.order - ks == na && na >= isize(c.a_k) * c.n - ks)) return;
  bool have_a = false, have_b = false;
  for (const Subgroup& h : c.subs) {
    if (!proper_subgroup(c.k, h) || static_cast<std::int64_t>(h.size()) * c.exp != c.order) continue;
    const std::int64_t idx = static_cast<std::int64_t>(h.size()) / ks;
    bool h_mod_k_elementary = idx == 4;
    if (h_mod_k_elementary)
      h.carrier().for_each([&](Elem x) {
        if (!c.k.contains(c.g.add(x, x))) h_mod_k_elementary = false;
      });
    for (Elem x : c.top_order) {
      if (!is_cyclic_complement(h, x)) continue;
      if (!have_b && idx >= 3) {
        Subset t = (h.carrier() - c.k.carrier()) | c.k.carrier().translated(x);
        if (auto z = translate_onto(c.a_k, t)) {
          out.push_back({"1(b)",
                         {{"H", h.carrier().to_string()},
                          {"K", c.k.carrier().to_string()},
                          {"g", c.g.elem_to_string(x)},
                          {"z", c.g.elem_to_string(*z)}}});
          have_b = true;
        }
      }
      if (!have_a && h_mod_k_elementary) {
        for (const Subgroup& h1 : c.subs) {
          if (have_a) break;
          if (!c.k.is_subgroup_of(h1) || !h1.is_subgroup_of(h) || h1.size() != 2 * c.k.size()) continue;
          for (const Subgroup& h2 : c.subs) {
            if (!c.k.is_subgroup_of(h2) || !h2.is_subgroup_of(h) || h2.size() != 2 * c.k.size() || h2 == h1)
              continue;
            Subset t = h1.carrier() | h2.carrier().translated(x);
            if (auto z = translate_onto(c.a_k, t)) {
              out.push_back({"1(a)",
                             {{"H", h.carrier().to_string()},
                              {"H1", h1.carrier().to_string()},
                              {"H2", h2.carrier().to_string()},
                              {"K", c.k.carrier().to_string()},
                              {"g", c.g.elem_to_string(x)},
                              {"z", c.g.elem_to_string(*z)}}});
              have_a = true;
              break;
            }
          }
        }
      }
      if (have_a && have_b) return;
    }
  }
}

// G isomorphic to H x C_exp(G), abstractly or with an internal cyclic
// complement.
bool splits_off_top_cyclic(const Ctx& c, const Subgroup& h, const StructureOptions& opts) {
  if (static_cast<std::int64_t>(h.size()) * c.exp != c.order) return false;
  if (opts.case2_abstract_iso) {
    std::vector<std::int64_t> f;
    for (auto m : subgroup_spec(h).factors()) f.push_back(m);
    f.push_back(c.exp);
    return GroupSpec::make(f) == c.g;
  }
  return std::any_of(c.top_order.begin(), c.top_order.end(), [&](Elem x) { return is_cyclic_complement(h, x); });
}

std::int64_t cosets_met(const Subset& a, const Subgroup& h) {
  const auto q = cached_quotient(a.group(), h);
  Subset met(q->quotient_spec);
  a.for_each([&](Elem x) { met.insert(q->project(x)); });
  return isize(met);
}

void match_case2a(const Ctx& c, const StructureOptions& opts, std::vector<StructureMatch>& out) {
  const std::int64_t a_size = isize(c.a);
  if (a_size * c.n > c.order) return;
  for (const Subgroup& h : c.subs) {
    if (!proper_subgroup(c.k, h) || !splits_off_top_cyclic(c, h, opts) || cosets_met(c.a, h) != 2) continue;
    for (Elem z = 0; z < c.g.order(); ++z) {
      const Subset shifted_ak = c.a_k.translated(z);
      if (!h.carrier().is_subset_of(shifted_ak)) continue;
      const Subset a0 = c.a.translated(z) - h.carrier();
      if (a0.empty()) continue;
      const Subset a0k = sumset(a0, c.k.carrier());
      if (isize(c.na) != c.order - static_cast<std::int64_t>(h.size()) + isize(iterated_sumset(a0k, c.n)))
        continue;
      out.push_back({"2(a)",
                     {{"H", h.carrier().to_string()},
                      {"K", c.k.carrier().to_string()},
                      {"A0", a0.to_string()},
                      {"z", c.g.elem_to_string(z)}}});
      return;
    }
  }
}

// G = H0 + <x1> + ... + <xr>, K < H0, the union template and its sizes.
std::optional<StructureMatch> match_case2b(const Ctx& c) {
  const std::int64_t ks = static_cast<std::int64_t>(c.k.size());
  for (const Subgroup& h0 : c.subs) {
    if (!proper_subgroup(c.k, h0)) continue;
    const std::int64_t h0s = static_cast<std::int64_t>(h0.size());
    if (isize(c.na) != c.order - h0s + ks) continue;
    std::int64_t q = c.order / h0s, r = 0, er = 1;
    while (er < q) {
      er *= c.exp;
      ++r;
    }
    if (er != q || r < 1 || c.exp < 2) continue;
    // h0 nontrivial here since K < H0 is proper
    const std::int64_t p = smallest_prime(subgroup_spec(h0).exponent());
    const std::int64_t mid = c.order - h0s + (c.exp - 1) * ks;
    if (isize(c.a) * c.n > mid) continue;
    if (mid * p * er > (p * er + c.exp - p - 1) * c.order) continue;

    std::vector<Elem> xs;
    std::optional<StructureMatch> found;
    std::function<void(const Subgroup&)> rec = [&](const Subgroup& acc) {
      if (found) return;
      if (static_cast<std::int64_t>(xs.size()) == r) {
        // T_j = K + H0 + ... + H_{j-1} + (x_{j+1} + ... + x_r)
        Subset t(c.g);
        Subgroup prefix = Subgroup::trivial(c.g);
        for (std::int64_t j = 0; j <= r; ++j) {
          Elem suffix = 0;
          for (std::int64_t i = j + 1; i <= r; ++i) suffix = c.g.add(suffix, xs[i - 1]);
          const Subgroup base = subgroup_join(c.k, prefix);
          t |= base.carrier().translated(suffix);
          prefix = subgroup_join(prefix, j == 0 ? h0 : cyclic_subgroup(c.g, xs[j - 1]));
        }
        if (auto z = translate_onto(c.a_k, t)) {
          StructureMatch m{"2(b)",
                           {{"H0", h0.carrier().to_string()},
                            {"K", c.k.carrier().to_string()},
                            {"r", std::to_string(r)},
                            {"z", c.g.elem_to_string(*z)}}};
          std::string xl;
          for (Elem x : xs) xl += (xl.empty() ? "" : ";") + c.g.elem_to_string(x);
          m.witnesses["x"] = xl;
          found = std::move(m);
        }
        return;
      }
      for (Elem x : c.top_order) {
        const Subgroup next = subgroup_join(acc, cyclic_subgroup(c.g, x));
        if (static_cast<std::int64_t>(next.size()) != static_cast<std::int64_t>(acc.size()) * c.exp) continue;
        xs.push_back(x);
        rec(next);
        xs.pop_back();
        if (found) return;
      }
    };
    rec(h0);
    if (found) return found;
  }
  return std::nullopt;
}

std::string show(const Subgroup& h) { return h.carrier().to_string(); }

}  // namespace

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Holds: return "holds";
    case CheckStatus::Violated: return "violated";
    case CheckStatus::Inapplicable: return "inapplicable";
    case CheckStatus::NotTriggered: return "not-triggered";
  }
  return "?";
}

std::vector<StructureMatch> classify_small_sumset(const Subset& a, std::int64_t n, const StructureOptions& opts) {
  if (a.empty()) throw PreconditionError("classify_small_sumset: A is empty");
  const Ctx c = make_ctx(a, n);
  std::vector<StructureMatch> out;
  if (n == c.exp) match_case1(c, out);
  if (n == c.exp - 1) {
    match_case2a(c, opts, out);
    // The case 2 header holds for H = H0 + H1 + ... + H_{r-1} automatically.
    if (auto m = match_case2b(c)) out.push_back(std::move(*m));
  }
  return out;
}

CheckReport check_kneser(std::span<const Subset> parts) {
  if (parts.empty()) throw PreconditionError("check_kneser: no parts");
  for (const Subset& p : parts) {
    if (p.empty()) throw PreconditionError("check_kneser: empty part");
    if (!(p.group() == parts.front().group())) throw PreconditionError("check_kneser: parts over different groups");
  }
  CheckReport r;
  r.name = "kneser";
  const Subset sum = sumset(parts);
  const Subgroup h = stabilizer(sum);
  const std::int64_t n = static_cast<std::int64_t>(parts.size());
  const std::int64_t hs = static_cast<std::int64_t>(h.size());
  std::int64_t padded = 0, plain = 0, rho = 0;
  for (const Subset& p : parts) {
    const std::int64_t ph = isize(sumset(p, h.carrier()));
    padded += ph;
    plain += isize(p);
    rho += ph - isize(p);
  }
  r.lhs = isize(sum);
  r.rhs = padded - (n - 1) * hs;
  r.witnesses["H"] = show(h);
  r.witnesses["rho"] = std::to_string(rho);
  r.expect(r.rhs == plain - (n - 1) * hs + rho, "two forms of the bound differ");
  r.expect(r.lhs >= r.rhs, "|sum| below the bound");
  r.detail = "|A_1+...+A_n| = " + std::to_string(r.lhs) + " >= " + std::to_string(r.rhs);
  return r;
}

CheckReport check_subsum_kneser(const Sequence& s, std::int64_t n) {
  if (n < 1 || n > static_cast<std::int64_t>(s.length()))
    throw PreconditionError("check_subsum_kneser: need 1 <= n <= |S|");
  return check_subsum_kneser(s, n, nterm_subsums(s, n));
}

CheckReport check_subsum_kneser(const Sequence& s, std::int64_t n, const Subset& sigma_n) {
  const std::int64_t len = static_cast<std::int64_t>(s.length());
  if (n < 1 || n > len || static_cast<std::int64_t>(s.height()) > n)
    throw PreconditionError("check_subsum_kneser: need h(S) <= n <= |S|, n >= 1");
  CheckReport r;
  r.name = "subsum_kneser";
  const GroupSpec& g = s.group();
  const Subgroup h = stabilizer(sigma_n);
  const std::int64_t hs = static_cast<std::int64_t>(h.size());
  // Recount X, e and rho from the coset multiplicities of phi_H(S).
  const auto q = cached_quotient(g, h);
  std::vector<std::int64_t> per_coset(q->coset_count(), 0);
  const auto& mult = s.multiplicities();
  for (Elem x = 0; x < g.order(); ++x) per_coset[q->coset_of[x]] += mult[x];
  std::int64_t big = 0, inside = 0, minsum = 0;
  for (std::int64_t v : per_coset) {
    minsum += std::min(v, n);
    if (v >= n) {
      ++big;
      inside += v;
    }
  }
  const std::int64_t e = len - inside;
  const std::int64_t rho = big * hs * n + e - len;
  r.lhs = isize(sigma_n);
  r.rhs = (len - n + 1) - (n - e - 1) * (hs - 1) + rho;
  const std::int64_t kneser_form = len - (n - 1) * hs + e * (hs - 1) + rho;
  const std::int64_t blocks = ((big - 1) * n + e + 1) * hs;
  const std::int64_t via_min = (minsum - n + 1) * hs;
  r.witnesses["H"] = show(h);
  r.witnesses["N"] = std::to_string(big);
  r.witnesses["e"] = std::to_string(e);
  r.witnesses["rho"] = std::to_string(rho);
  r.expect(rho >= 0, "rho negative");
  r.expect(r.rhs == kneser_form, "the two displayed forms of the bound differ");
  r.expect(r.rhs == blocks && r.rhs == via_min, "bound differs from ((N-1)n+e+1)|H|");
  r.expect(r.lhs >= r.rhs, "|Sigma_n(S)| below the bound");
  const SubsumProfile p = subsum_profile(s, n, len, sigma_n);
  r.expect(p.N == big && p.e == e && p.rho == rho && p.H == h, "profile disagrees with the recount");
  r.detail = "|Sigma_n(S)| = " + std::to_string(r.lhs) + " >= " + std::to_string(r.rhs);
  return r;
}

CheckReport check_pigeonhole(const Subset& a, const Subset& b) {
  if (!(a.group() == b.group())) throw PreconditionError("check_pigeonhole: sets over different groups");
  CheckReport r;
  r.name = "pigeonhole";
  r.status = CheckStatus::NotTriggered;
  if (a.empty() || b.empty()) {
    r.detail = "empty set";
    return r;
  }
  const GroupSpec& g = a.group();
  const std::int64_t total = isize(a) + isize(b);
  const std::int64_t excess = total - static_cast<std::int64_t>(g.order());
  const Subset sum = sumset(a, b);
  if (excess >= 1) {
    r.status = CheckStatus::Holds;
    const Subset pair[2] = {a, b};
    const auto counts = representation_counts(pair);
    const std::uint64_t least = *std::min_element(counts.begin(), counts.end());
    r.lhs = static_cast<std::int64_t>(least);
    r.rhs = excess;
    r.expect(sum == Subset::full(g), "A+B != G");
    r.expect(r.lhs >= r.rhs, "some x has fewer than r representations");
  }
  const Subgroup h = subgroup_join(affine_span(a), affine_span(b));
  r.witnesses["H"] = show(h);
  if (total >= static_cast<std::int64_t>(h.size()) + 1) {
    if (r.status == CheckStatus::NotTriggered) {
      r.status = CheckStatus::Holds;
      r.lhs = isize(sum);
      r.rhs = static_cast<std::int64_t>(h.size());
    }
    r.expect(sum == h.carrier().translated(g.add(a.min(), b.min())), "A+B is not an H-coset");
  }
  if (r.status == CheckStatus::NotTriggered) r.detail = "|A|+|B| too small";
  return r;
}

CheckReport check_cor1(const Subset& a, std::int64_t n) {
  if (a.empty()) throw PreconditionError("check_cor1: A is empty");
  if (n < 3) throw PreconditionError("check_cor1: need n >= 3");
  CheckReport r;
  r.name = "cor1";
  if (!affine_span(a).is_whole()) {
    r.status = CheckStatus::Inapplicable;
    r.detail = "affine span of A is not G";
    return r;
  }
  const GroupSpec& g = a.group();
  const std::int64_t exp = g.exponent();
  const Subset na = iterated_sumset(a, n);
  r.lhs = isize(na);
  r.rhs = std::min<std::int64_t>(g.order(), n * isize(a));
  if (r.lhs >= r.rhs) {
    r.detail = "min bound holds";
    return r;
  }
  if (n >= exp + 1) {
    r.fail("|nA| < min{|G|, n|A|} with n >= exp(G)+1");
    return r;
  }
  if (n < exp - 1) {
    r.status = CheckStatus::NotTriggered;
    r.detail = "n < exp(G)-1";
    return r;
  }
  const auto matches = classify_small_sumset(a, n);
  if (matches.empty()) {
    r.fail("no structure template matches");
    return r;
  }
  r.witnesses = matches.front().witnesses;
  r.witnesses["case"] = matches.front().label;
  r.detail = "matches case " + matches.front().label;
  return r;
}

CheckReport check_cor2(const Subset& a, std::int64_t n) {
  if (a.empty()) throw PreconditionError("check_cor2: A is empty");
  if (n < 1) throw PreconditionError("check_cor2: need n >= 1");
  CheckReport r;
  r.name = "cor2";
  const GroupSpec& g = a.group();
  const std::int64_t order = g.order();
  if (!affine_span(a).is_whole() || n * isize(a) <= order) {
    r.status = CheckStatus::Inapplicable;
    r.detail = "needs full affine span and n|A| > |G|";
    return r;
  }
  const std::int64_t exp = g.exponent();
  const Subset na = iterated_sumset(a, n);
  r.lhs = isize(na);
  r.rhs = order;
  if (n >= exp) {
    r.expect(r.lhs == order, "nA != G with n >= exp(G)");
    return r;
  }
  if (r.lhs == order) return r;
  if (n < exp - 1) {
    r.status = CheckStatus::NotTriggered;
    r.detail = "n < exp(G)-1";
    return r;
  }
  r.expect(!is_prime(exp), "exp(G) is prime");
  r.expect(!g.is_cyclic(), "G is cyclic");
  const Ctx c = make_ctx(a, n);
  if (auto m = match_case2b(c)) {
    r.witnesses = m->witnesses;
    r.witnesses["case"] = m->label;
    r.detail = "matches the union template";
  } else {
    r.fail("no union template matches");
  }
  return r;
}

CheckReport check_lemma_extra(const Sequence& s, const Sequence& s_prime, std::int64_t n) {
  if (!s_prime.divides(s)) throw PreconditionError("check_lemma_extra: S' does not divide S");
  const std::int64_t lp = static_cast<std::int64_t>(s_prime.length());
  if (n < 1 || static_cast<std::int64_t>(s_prime.height()) > n || n > lp)
    throw PreconditionError("check_lemma_extra: need h(S') <= n <= |S'|");
  CheckReport r;
  r.name = "lemma_extra";
  const Subset sigma = nterm_subsums(s, n);
  r.lhs = isize(sigma);
  r.rhs = lp - n + 1;
  if (r.lhs >= r.rhs) {
    r.status = CheckStatus::NotTriggered;
    r.detail = "hypothesis not triggered";
    return r;
  }
  const SubsumProfile p = subsum_profile(s, n, static_cast<std::int64_t>(s.length()), sigma);
  r.witnesses["H"] = show(p.H);
  if (!r.expect(!p.Z.empty(), "Z is empty")) return r;
  const Subgroup span_z = affine_span(p.Z);
  const Subgroup span_s = affine_span(seq_stats(s).support);
  r.witnesses["span_Z"] = show(span_z);
  r.witnesses["span_supp"] = show(span_s);
  r.expect(span_z == p.H || span_z == span_s, "affine span of Z is neither H nor that of supp(S)");
  r.detail = span_z == p.H ? "span of Z equals H" : "span of Z equals span of supp(S)";
  return r;
}

}  // namespace subsum
