#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fedwh::csv {

/// RFC-4180-ish: comma separated, double quotes with "" escapes, CRLF
/// tolerated. Every record keeps its cell count as written.
std::vector<std::vector<std::string>> parse(std::string_view text);

std::string escape(std::string_view cell);

}  // namespace fedwh::csv

namespace fedwh::text {

/// Strict decimal parse of the full string; nullopt for anything else.
std::optional<double> parse_number(std::string_view s);

std::string read_file(const std::string& path);  // throws io_error

}  // namespace fedwh::text
