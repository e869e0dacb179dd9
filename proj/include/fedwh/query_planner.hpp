#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fedwh/integrator.hpp"
#include "fedwh/ontology.hpp"

namespace fedwh {

enum class Comparator { eq, ne, lt, le, gt, ge };

const char* comparator_token(Comparator cmp);

struct QueryFilter {
    std::string attribute;
    Comparator cmp = Comparator::eq;
    std::string literal;
    bool literal_is_number = false;
};

struct SelectedMeasure {
    Aggregation aggregation = Aggregation::sum;
    std::string name;
};

/// A parsed federated query. Names stay unresolved until plan time.
struct FederatedQuery {
    std::vector<SelectedMeasure> measures;
    std::vector<std::string> attributes;  // selected bare names
    std::vector<QueryFilter> filters;
    std::vector<std::string> group_by;
};

/// `SELECT item ("," item)* [WHERE cond (AND cond)*] [GROUP BY name+]` with
/// item := AGG "(" name ")" | name. Keywords are case-insensitive. Throws
/// FedError(syntax_error) carrying the 1-based character position.
FederatedQuery parse_query(std::string_view text);

std::string unparse_query(const FederatedQuery& query);

/// One hop of a snowflake join path: child.fk = parent.key.
struct JoinHop {
    std::string child_table;
    std::string fk_column;
    std::string parent_table;
    std::string key_column;

    friend bool operator==(const JoinHop&, const JoinHop&) = default;
};

/// A physical aggregate computed inside one component. AVG never appears
/// here; the planner splits it into a SUM and a COUNT column.
struct PlannedMeasureColumn {
    std::string column_id;    // partial-table column header, e.g. "m0:sum"
    std::string fact_table;
    std::string local_name;
    Aggregation local_agg = Aggregation::sum;
};

struct PlannedAttributeColumn {
    std::string fed_name;
    std::string table;
    std::string local_name;
    std::vector<JoinHop> join_path;  // starts at the fact table; empty only for fact columns
};

struct PlannedFilter {
    std::string table;
    std::string local_name;
    std::vector<JoinHop> join_path;
    Comparator cmp = Comparator::eq;
    std::string literal;
    bool literal_is_number = false;
    std::vector<std::string> accepted_values;  // sameValue expansion, for eq/ne only
};

struct SubQueryPlan {
    std::string component_id;
    std::string fact_table;
    std::vector<PlannedMeasureColumn> measure_columns;
    std::vector<PlannedAttributeColumn> attribute_columns;  // group keys, in group_by order
    std::vector<PlannedFilter> local_filters;
};

struct MergeKeyColumn {
    std::string fed_name;
    bool canonicalize = true;
};

/// How one output measure is recombined from partial physical columns.
struct MergeMeasureColumn {
    std::string header;             // e.g. "SUM(price)"
    Aggregation aggregation = Aggregation::sum;
    std::string column_id;          // physical column (SUM/COUNT/MIN/MAX)
    std::string count_column_id;    // second physical column, AVG only
};

struct MergePlan {
    std::vector<MergeKeyColumn> keys;
    std::vector<MergeMeasureColumn> measures;
};

struct QueryPlan {
    std::vector<SubQueryPlan> subplans;
    MergePlan merge;
    std::vector<std::string> warnings;  // components excluded and why
};

/// Resolves names against the catalog (case-insensitive federated names,
/// ontology concepts, then local names), keeps every component that holds
/// all referenced elements, and computes fact-rooted join paths (shortest,
/// ties by declaration order). Throws unknown_name / unanswerable.
QueryPlan plan(const FederatedQuery& query, const FederationCatalog& catalog,
               const OntologyRepository& repo);

/// Renders the plan (locations, join paths, filters, merge rules) as text.
std::string explain(const FederatedQuery& query, const FederationCatalog& catalog,
                    const OntologyRepository& repo);

}  // namespace fedwh
