#pragma once

#include <iosfwd>
#include <string>

#include "fedwh/config.hpp"

namespace fedwh {

/// Exit codes shared by every subcommand: 0 success, 1 domain error,
/// 2 usage error. Payloads go to `out`, diagnostics to `err`.
inline constexpr int exit_ok = 0;
inline constexpr int exit_domain_error = 1;
inline constexpr int exit_usage_error = 2;

/// Builds the federation, writes the catalog file and prints the mapping
/// report to `out`.
int cmd_integrate(const std::string& config_path, const std::string& catalog_override,
                  std::ostream& out, std::ostream& err);

/// Plans (and unless `explain_only` executes) one federated query against a
/// previously written catalog. `format` is "csv" or "json".
int cmd_query(const std::string& catalog_path, const std::string& config_path,
              const std::string& query_text, const std::string& format, bool explain_only,
              std::ostream& out, std::ostream& err);

/// Validates ontologies, descriptors and table headers without writing
/// anything; lists singleton merge candidates.
int cmd_check(const std::string& config_path, std::ostream& out, std::ostream& err);

}  // namespace fedwh
