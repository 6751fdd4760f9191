#pragma once

// JSON forms of library results, schema "subsum-lab/1". All numbers are
// integers; elements and subsets use the literal grammar.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "subsumlab/search.hpp"
#include "subsumlab/setpartition.hpp"
#include "subsumlab/verifiers.hpp"

namespace subsum::report {

using nlohmann::json;

inline constexpr const char* kSchema = "subsum-lab/1";

json subset_json(const Subset& s);  // list of element literals
json check_json(const CheckReport& r);
json certificate_json(const Certificate& c);
// Inverse of certificate_json over the given group; throws ParseError.
Certificate certificate_from_json(const GroupSpec& g, const json& j);
json example_json(const ExampleInstance& ex);
json hunt_json(const HuntReport& r);
// Everything that must agree between runs: no timing, no job count.
json audit_aggregate_json(const AuditReport& r);

json envelope(const std::string& command, const std::string& group, json inputs, json result, bool verified,
              const std::vector<std::string>& violations, std::int64_t timing_ms);

// Indented "key: value" rendering of a JSON value, for text output.
std::string render_text(const json& j, int indent = 0);

}  // namespace subsum::report
