#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedwh {

/// Stable error identities surfaced by parsers, the integrator, the planner
/// and the executor. Tests and the CLI match on the code, not the message.
enum class ErrorCode {
    malformed_triple,
    malformed_override,
    conflicting_override,
    hierarchy_cycle,

    parse_error,
    dangling_parent,
    parent_cycle,
    duplicate_name,

    aggregation_conflict,
    hierarchy_conflict,
    catalog_corruption,

    syntax_error,
    unknown_name,
    unanswerable,

    missing_table,
    header_mismatch,
    cell_type_error,
    shape_mismatch,

    config_error,
    io_error,
};

const char* error_code_name(ErrorCode code);

class FedError : public std::runtime_error {
public:
    FedError(ErrorCode code, std::string message, std::size_t line = 0)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code),
          line_(line) {}

    ErrorCode code() const { return code_; }

    /// 1-based line (or character position for query syntax errors); 0 when
    /// the error is not tied to a location.
    std::size_t line() const { return line_; }

private:
    ErrorCode code_;
    std::size_t line_;
};

}  // namespace fedwh
