#include "subsumlab/literals.hpp"

#include <cctype>
#include <charconv>
#include <vector>

#include "subsumlab/errors.hpp"

namespace subsum {

namespace {

std::string strip(std::string_view text) {
  std::string out;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

std::int64_t parse_int(std::string_view t, std::string_view what) {
  std::int64_t v = 0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && t.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last)
    throw ParseError("bad integer '" + std::string(t) + "' in " + std::string(what));
  return v;
}

std::vector<std::string_view> split_top(std::string_view t, char sep) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == '(') ++depth;
    if (t[i] == ')') --depth;
    if (depth < 0) throw ParseError("unbalanced parentheses in '" + std::string(t) + "'");
    if (t[i] == sep && depth == 0) {
      out.push_back(t.substr(start, i - start));
      start = i + 1;
    }
  }
  if (depth != 0) throw ParseError("unbalanced parentheses in '" + std::string(t) + "'");
  out.push_back(t.substr(start));
  return out;
}

Elem element_of(const GroupSpec& g, std::string_view t) {
  std::vector<std::int64_t> coords;
  if (!t.empty() && t.front() == '(') {
    if (t.back() != ')') throw ParseError("element '" + std::string(t) + "' lacks ')'");
    for (std::string_view c : split_top(t.substr(1, t.size() - 2), ',')) coords.push_back(parse_int(c, "element"));
  } else {
    coords.push_back(parse_int(t, "element"));
  }
  const auto& f = g.factors();
  // The trivial group stores the chain [1]; rank-1 input is accepted there too.
  if (coords.size() != f.size())
    throw ParseError("element '" + std::string(t) + "' has " + std::to_string(coords.size()) +
                     " coordinates, group " + g.to_string() + " has rank " + std::to_string(f.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto m = static_cast<std::int64_t>(f[i]);
    coords[i] = ((coords[i] % m) + m) % m;
  }
  return g.index_of(coords);
}

}  // namespace

GroupSpec parse_group(std::string_view text, bool* normalized) {
  const std::string t = strip(text);
  if (t.empty()) throw ParseError("empty group literal");
  std::vector<std::int64_t> factors;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= t.size(); ++i) {
    if (i == t.size() || t[i] == 'x' || t[i] == 'X') {
      const std::string_view part(t.data() + start, i - start);
      if (part.empty() || part.front() == '-' || part.front() == '+')
        throw ParseError("bad group literal '" + t + "'");
      factors.push_back(parse_int(part, "group"));
      start = i + 1;
    }
  }
  return GroupSpec::make(factors, normalized);
}

Elem parse_element(const GroupSpec& g, std::string_view text) { return element_of(g, strip(text)); }

Sequence parse_sequence(const GroupSpec& g, std::string_view text) {
  const std::string t = strip(text);
  Sequence s(g);
  if (t.empty()) return s;
  for (std::string_view term : split_top(t, ';')) {
    if (term.empty()) throw ParseError("empty term in sequence '" + t + "'");
    std::uint32_t count = 1;
    const std::size_t caret = term.rfind('^');
    if (caret != std::string_view::npos && term.find(')', caret) == std::string_view::npos) {
      const std::int64_t c = parse_int(term.substr(caret + 1), "multiplicity");
      if (c < 1 || c > 1'000'000) throw ParseError("multiplicity out of range in '" + std::string(term) + "'");
      count = static_cast<std::uint32_t>(c);
      term = term.substr(0, caret);
    }
    s.add(element_of(g, term), count);
  }
  return s;
}

Subset parse_subset(const GroupSpec& g, std::string_view text) {
  std::string t = strip(text);
  if (!t.empty() && t.front() == '{') {
    if (t.back() != '}') throw ParseError("subset '" + t + "' lacks '}'");
    t = t.substr(1, t.size() - 2);
  }
  Subset out(g);
  if (t.empty()) return out;
  for (std::string_view e : split_top(t, ',')) out.insert(element_of(g, e));
  return out;
}

}  // namespace subsum
