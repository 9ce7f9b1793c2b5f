#pragma once

#include <iosfwd>
#include <string>

#include "svogs/problem.hpp"

namespace svogs {

// Sparse text format: one sample per line, "label idx:value idx:value ...",
// 1-based strictly increasing indices, '#' starts a comment. Rows are
// densified to dim = max observed index unless dim_override is larger.
// Malformed lines raise InvalidArgument naming the line number.
RegressionData parse_libsvm(std::istream& in, Index dim_override = 0);
RegressionData parse_libsvm_file(const std::string& path, Index dim_override = 0);

// Writes the nonzero entries back in the same format (17 significant
// digits, LF endings), so parse(serialize(data)) reproduces data exactly.
void serialize_libsvm(const RegressionData& data, std::ostream& out);

}  // namespace svogs
