#pragma once

// Text forms. Whitespace is ignored everywhere.
//   group     2x4x8            (the trivial group is "1")
//   element   3 | (1,0,2)      (plain integers only for rank <= 1)
//   sequence  0^2;4^2;(1,0)    (empty string: empty sequence)
//   subset    {0,1,(1,2)}      (braces optional)
// Integers are reduced into their cyclic factor; negatives are allowed.

#include <string>
#include <string_view>

#include "subsumlab/group.hpp"
#include "subsumlab/sequence.hpp"

namespace subsum {

// Throws ParseError on malformed text and PreconditionError on factors < 1.
GroupSpec parse_group(std::string_view text, bool* normalized = nullptr);
Elem parse_element(const GroupSpec& g, std::string_view text);
Sequence parse_sequence(const GroupSpec& g, std::string_view text);
Subset parse_subset(const GroupSpec& g, std::string_view text);

}  // namespace subsum
