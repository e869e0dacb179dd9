#include "csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fedwh/error.hpp"

namespace fedwh::csv {

std::vector<std::vector<std::string>> parse(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string cell;
    bool quoted = false;
    bool any = false;

    auto end_cell = [&] {
        record.push_back(std::move(cell));
        cell.clear();
    };
    auto end_record = [&] {
        end_cell();
        records.push_back(std::move(record));
        record.clear();
        any = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"': quoted = true; any = true; break;
            case ',': end_cell(); any = true; break;
            case '\r': break;
            // Blank lines are skipped; a lone empty cell needs quotes ("").
            case '\n':
                if (any) end_record();
                break;
            default: cell.push_back(c); any = true; break;
        }
    }
    if (any) end_record();
    return records;
}

std::string escape(std::string_view cell) {
    if (cell.find_first_of("\",\n\r") == std::string_view::npos) return std::string(cell);
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

}  // namespace fedwh::csv

namespace fedwh::text {

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double value = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return value;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FedError(ErrorCode::io_error, "cannot read '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace fedwh::text
