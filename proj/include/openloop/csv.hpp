#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace openloop::csv {

/// Quotes a field when it contains a separator, quote or line break.
std::string field(std::string_view text);

/// Shortest decimal text that round-trips to the same double.
std::string number(double value);

/// Parses RFC-4180 style CSV (quoted fields, doubled quotes, CRLF or LF).
std::vector<std::vector<std::string>> read(std::istream& in);

}  // namespace openloop::csv
