#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "fedwh/integrator.hpp"
#include "fedwh/ontology.hpp"
#include "fedwh/query_planner.hpp"
#include "fedwh/schema_model.hpp"

namespace fedwh {

/// A result cell: null (monostate), a number, or a string.
using Cell = std::variant<std::monostate, double, std::string>;

enum class ColumnKind { key, measure };

struct ResultColumn {
    std::string name;
    ColumnKind kind = ColumnKind::key;

    friend bool operator==(const ResultColumn&, const ResultColumn&) = default;
};

struct ResultTable {
    std::vector<ResultColumn> columns;
    std::vector<std::vector<Cell>> rows;
};

/// Raw rows of one CSV-backed table; cells stay strings, measure columns are
/// numeric-validated at load.
struct TableData {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(std::string_view column) const;  // throws header_mismatch
};

using ComponentTables = std::map<std::string, TableData>;

/// Loads `<table>.csv` for the fact and every dimension from data_dir and
/// validates headers (exact set, order-free) and measure cell types.
ComponentTables load_tables(const ComponentSchema& component);

struct SubqueryResult {
    ResultTable table;
    std::uint64_t dangling_dropped = 0;  // fact rows lost to missing parent keys
};

/// Runs one component-local plan: join-path resolution, filtering, grouping
/// by raw local values, physical aggregation. AVG never runs locally.
SubqueryResult execute_subquery(const SubQueryPlan& plan, const ComponentTables& tables);

/// Canonicalizes flagged key columns, regroups partial rows and recombines
/// measures (sum of sums, min of mins, ..., AVG as total sum / total count).
/// Rows whose measures are all null are dropped; output is sorted by keys.
ResultTable merge_results(const std::vector<std::pair<std::string, ResultTable>>& partials,
                          const MergePlan& merge_plan, const OntologyRepository& repo);

struct FederatedResult {
    ResultTable table;
    std::vector<std::string> warnings;
    std::uint64_t dangling_dropped = 0;
};

/// plan -> execute each sub-plan -> merge. Sub-plan order cannot affect the
/// outcome; merging is order-insensitive.
FederatedResult execute_federated(const FederatedQuery& query, const FederationCatalog& catalog,
                                  const OntologyRepository& repo,
                                  const std::map<std::string, ComponentTables>& tables);

/// Brute-force reference path: denormalizes each eligible component by row
/// scans (no hash joins, no pushdown), concatenates all components' rows and
/// evaluates the query directly. Kept independent of the planner/executor
/// machinery it is used to check.
FederatedResult execute_global_oracle(const FederatedQuery& query,
                                      const FederationCatalog& catalog,
                                      const OntologyRepository& repo,
                                      const std::map<std::string, ComponentTables>& tables);

std::string result_to_csv(const ResultTable& table);
std::string result_to_json(const ResultTable& table);

std::string format_number(double value);

}  // namespace fedwh
