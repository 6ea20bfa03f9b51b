#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rca {

/// Minimal RFC-4180 reader: quoted fields, embedded commas/newlines, CRLF.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

/// Quote a field only when it needs quoting.
std::string csv_escape(const std::string& field);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace rca
