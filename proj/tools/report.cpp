#include "report.hpp"

#include <sstream>

#include "subsumlab/errors.hpp"
#include "subsumlab/literals.hpp"

namespace subsum::report {

json subset_json(const Subset& s) {
  json out = json::array();
  s.for_each([&](Elem x) { out.push_back(s.group().elem_to_string(x)); });
  return out;
}

json check_json(const CheckReport& r) {
  json j;
  j["name"] = r.name;
  j["status"] = to_string(r.status);
  j["holds"] = r.holds();
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["witnesses"] = r.witnesses;
  j["failures"] = r.failures;
  j["detail"] = r.detail;
  return j;
}

json certificate_json(const Certificate& c) {
  const GroupSpec& g = c.partition.group();
  json j;
  j["kind"] = c.kind == CertKind::Partition ? "partition" : "main";
  j["case"] = c.case_tag == CaseTag::I ? "i" : "ii";
  json parts = json::array();
  for (const Subset& p : c.partition.parts()) parts.push_back(subset_json(p));
  j["parts"] = parts;
  j["H"] = c.H ? json(c.H->carrier().to_string()) : json(nullptr);
  j["K"] = c.K ? json(c.K->carrier().to_string()) : json(nullptr);
  j["alpha"] = c.alpha ? json(g.elem_to_string(*c.alpha)) : json(nullptr);
  j["e_H"] = c.e_H;
  j["e_K"] = c.e_K;
  j["k"] = c.k;
  j["bounds"] = c.bounds;
  j["step_violations"] = c.step_violations;
  j["verified"] = c.verified;
  if (c.K && c.H) j["K_equals_H"] = *c.K == *c.H;
  return j;
}

Certificate certificate_from_json(const GroupSpec& g, const json& j) {
  try {
    Certificate c;
    c.kind = j.at("kind").get<std::string>() == "partition" ? CertKind::Partition : CertKind::Main;
    const std::string tag = j.at("case").get<std::string>();
    if (tag != "i" && tag != "ii") throw ParseError("certificate case must be \"i\" or \"ii\"");
    c.case_tag = tag == "i" ? CaseTag::I : CaseTag::II;
    std::vector<Subset> parts;
    for (const auto& p : j.at("parts")) {
      Subset s(g);
      for (const auto& e : p) s.insert(parse_element(g, e.get<std::string>()));
      parts.push_back(std::move(s));
    }
    c.partition = SetPartition(g, std::move(parts));
    auto subgroup = [&](const char* key) -> std::optional<Subgroup> {
      if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
      const Subset s = parse_subset(g, j.at(key).get<std::string>());
      if (!is_subgroup(s)) throw ParseError(std::string(key) + " is not a subgroup");
      return Subgroup(s);
    };
    c.H = subgroup("H");
    c.K = subgroup("K");
    if (j.contains("alpha") && !j.at("alpha").is_null()) c.alpha = parse_element(g, j.at("alpha").get<std::string>());
    c.e_H = j.value("e_H", std::int64_t{0});
    c.e_K = j.value("e_K", std::int64_t{0});
    c.k = j.value("k", std::int64_t{0});
    c.bounds = j.value("bounds", std::map<std::string, std::int64_t>{});
    c.step_violations = j.value("step_violations", std::vector<std::string>{});
    c.verified = j.value("verified", false);
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed certificate: ") + e.what());
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("malformed certificate: ") + e.what());
  }
}

json example_json(const ExampleInstance& ex) {
  const GroupSpec& g = ex.G;
  json j;
  j["kind"] = to_string(ex.kind);
  j["H"] = ex.H.carrier().to_string();
  j["K"] = ex.K ? json(ex.K->carrier().to_string()) : json(nullptr);
  j["g"] = g.elem_to_string(ex.g);
  j["n"] = ex.n;
  j["S"] = ex.S.to_string();
  j["Z"] = ex.Z.to_string();
  j["length"] = ex.length;
  j["subsum_size"] = ex.subsum_size;
  j["stabilizer"] = ex.stabilizer.carrier().to_string();
  j["formula_length"] = ex.formula_length;
  j["formula_subsum_size"] = ex.formula_subsum_size;
  j["ii_b_fails"] = ex.ii_b_fails;
  j["below_length_bound"] = ex.subsum_size < ex.length - ex.n + 1;
  return j;
}

json hunt_json(const HuntReport& r) {
  json j;
  j["n"] = r.n;
  j["canonical"] = r.canonical;
  j["exhaustive"] = r.exhaustive;
  j["tuples"] = r.tuples;
  j["aperiodic"] = r.aperiodic;
  j["hits"] = r.hits;
  j["outcome"] = r.hits ? "hit" : "no hit";
  json hist = json::object();
  for (const auto& [k, v] : r.min_count_histogram) hist[std::to_string(k)] = v;
  j["min_count_histogram"] = hist;
  json ex = json::array();
  for (const auto& parts : r.hit_examples) {
    json t = json::array();
    for (const Subset& p : parts) t.push_back(p.to_string());
    ex.push_back(t);
  }
  j["hit_examples"] = ex;
  return j;
}

json audit_aggregate_json(const AuditReport& r) {
  json j;
  const AuditConfig& c = r.config;
  j["config"] = {{"max_group_order", c.max_group_order},
                 {"exhaustive_len_cap", c.exhaustive_len_cap},
                 {"exhaustive_max_order", c.exhaustive_max_order ? c.exhaustive_max_order : c.max_group_order},
                 {"random_samples", c.random_samples},
                 {"random_len_cap", c.random_len_cap},
                 {"seed", std::to_string(c.seed)},
                 {"checkers", c.checkers}};
  j["instances"] = r.instances;
  j["exhaustive_instances"] = r.exhaustive_instances;
  json tallies = json::object();
  for (const auto& [name, t] : r.tallies) {
    tallies[name] = {{"checks", t.checks},
                     {"holds", t.holds},
                     {"violated", t.violated},
                     {"not_triggered", t.not_triggered},
                     {"inapplicable", t.inapplicable},
                     {"hypotheses_unmet", t.hypotheses_unmet},
                     {"internal_errors", t.internal_errors},
                     {"labels", t.labels}};
  }
  j["tallies"] = tallies;
  j["total_failures"] = r.total_failures;
  json fails = json::array();
  for (const AuditFailure& f : r.failures)
    fails.push_back({{"instance", f.instance}, {"checker", f.checker}, {"message", f.message}, {"replay", f.replay}});
  j["failures"] = fails;
  return j;
}

json envelope(const std::string& command, const std::string& group, json inputs, json result, bool verified,
              const std::vector<std::string>& violations, std::int64_t timing_ms) {
  json j;
  j["schema"] = kSchema;
  j["command"] = command;
  j["group"] = group;
  j["inputs"] = std::move(inputs);
  j["result"] = std::move(result);
  j["verified"] = verified;
  j["violations"] = violations;
  j["timing_ms"] = timing_ms;
  return j;
}

namespace {

void render(std::ostringstream& out, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  auto flat = [&](const json& v) {
    if (!v.is_array()) return false;
    for (const auto& x : v)
      if (x.is_object() || x.is_array()) return false;
    return true;
  };
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_object() && !v.empty()) {
        out << pad << k << ":\n";
        render(out, v, indent + 2);
      } else if (v.is_array() && !flat(v)) {
        out << pad << k << ":\n";
        render(out, v, indent + 2);
      } else if (v.is_array()) {
        out << pad << k << ": [";
        for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << scalar(v[i]);
        out << "]\n";
      } else {
        out << pad << k << ": " << (v.is_object() ? "{}" : scalar(v)) << "\n";
      }
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (v.is_object() || (v.is_array() && !flat(v))) {
        out << pad << "-\n";
        render(out, v, indent + 2);
      } else if (v.is_array()) {
        out << pad << "- [";
        for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << scalar(v[i]);
        out << "]\n";
      } else {
        out << pad << "- " << scalar(v) << "\n";
      }
    }
  } else {
    out << pad << scalar(j) << "\n";
  }
}

}  // namespace

std::string render_text(const json& j, int indent) {
  std::ostringstream out;
  render(out, j, indent);
  return out.str();
}

}  // namespace subsum::report
