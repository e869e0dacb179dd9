#include "fedwh/executor.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "csv.hpp"
#include "fedwh/error.hpp"

namespace fedwh {

std::string format_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::size_t TableData::column_index(std::string_view column) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == column) return i;
    throw FedError(ErrorCode::header_mismatch,
                   "table '" + name + "' has no column '" + std::string(column) + "'");
}

namespace {

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        if (!out.empty()) out += ", ";
        out += n;
    }
    return out;
}

TableData load_one_table(const std::string& data_dir, const std::string& table,
                         const std::vector<std::string>& expected_columns) {
    namespace fs = std::filesystem;
    fs::path path = fs::path(data_dir) / (table + ".csv");
    if (!fs::exists(path))
        throw FedError(ErrorCode::missing_table, "'" + table + "' (" + path.string() + ")");

    auto records = csv::parse(text::read_file(path.string()));
    if (records.empty())
        throw FedError(ErrorCode::header_mismatch, "table '" + table + "' has no header row");

    TableData data;
    data.name = table;
    data.columns = records.front();

    std::vector<std::string> found = data.columns;
    std::vector<std::string> expected = expected_columns;
    std::sort(found.begin(), found.end());
    std::sort(expected.begin(), expected.end());
    if (found != expected)
        throw FedError(ErrorCode::header_mismatch,
                       "table '" + table + "': expected columns {" + join_names(expected) +
                           "}, found {" + join_names(found) + "}");

    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != data.columns.size())
            throw FedError(ErrorCode::parse_error,
                           "table '" + table + "' row " + std::to_string(r) + ": expected " +
                               std::to_string(data.columns.size()) + " cells, got " +
                               std::to_string(records[r].size()));
        data.rows.push_back(records[r]);
    }
    return data;
}

}  // namespace

ComponentTables load_tables(const ComponentSchema& component) {
    ComponentTables tables;

    std::vector<std::string> fact_columns;
    for (const auto& m : component.fact.measures) fact_columns.push_back(m.name);
    for (const auto& link : component.fact.links) fact_columns.push_back(link.fk);
    TableData fact = load_one_table(component.data_dir, component.fact.name, fact_columns);

    // Measure cells must be numeric; the empty string stands for null.
    for (const auto& m : component.fact.measures) {
        std::size_t col = fact.column_index(m.name);
        for (std::size_t r = 0; r < fact.rows.size(); ++r) {
            const std::string& cell = fact.rows[r][col];
            if (!cell.empty() && !text::parse_number(cell))
                throw FedError(ErrorCode::cell_type_error,
                               "table '" + fact.name + "' row " + std::to_string(r + 1) +
                                   " column '" + m.name + "': '" + cell + "' is not numeric");
        }
    }
    tables.emplace(fact.name, std::move(fact));

    for (const auto& dim : component.dimensions) {
        std::vector<std::string> columns;
        for (const auto& attr : dim.attributes) columns.push_back(attr.name);
        tables.emplace(dim.name, load_one_table(component.data_dir, dim.name, columns));
    }
    return tables;
}

namespace {

/// Hash indexes over (table, key column), built on first use. The first row
/// wins when a dimension key repeats.
class JoinIndexes {
public:
    explicit JoinIndexes(const ComponentTables& tables) : tables_(tables) {}

    const std::unordered_map<std::string, std::size_t>& index(const std::string& table,
                                                              const std::string& column) {
        auto key = table + "\x1f" + column;
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const TableData& data = tables_.at(table);
        std::size_t col = data.column_index(column);
        std::unordered_map<std::string, std::size_t> built;
        built.reserve(data.rows.size());
        for (std::size_t r = 0; r < data.rows.size(); ++r) built.try_emplace(data.rows[r][col], r);
        return cache_.emplace(std::move(key), std::move(built)).first->second;
    }

private:
    const ComponentTables& tables_;
    std::unordered_map<std::string, std::unordered_map<std::string, std::size_t>> cache_;
};

/// Follows a join path from a fact row; nullopt when any hop dangles.
std::optional<std::string> resolve_via_path(const ComponentTables& tables, JoinIndexes& indexes,
                                            const std::vector<JoinHop>& path,
                                            const std::string& leaf_column,
                                            const std::vector<std::string>& fact_row,
                                            const std::string& fact_table) {
    const std::vector<std::string>* row = &fact_row;
    std::string current_table = fact_table;
    for (const auto& hop : path) {
        const TableData& child = tables.at(current_table);
        const std::string& fk_value = (*row)[child.column_index(hop.fk_column)];
        const auto& idx = indexes.index(hop.parent_table, hop.key_column);
        auto hit = idx.find(fk_value);
        if (hit == idx.end()) return std::nullopt;
        row = &tables.at(hop.parent_table).rows[hit->second];
        current_table = hop.parent_table;
    }
    return (*row)[tables.at(current_table).column_index(leaf_column)];
}

bool filter_match(const std::string& value, const PlannedFilter& filter) {
    if (filter.cmp == Comparator::eq || filter.cmp == Comparator::ne) {
        bool hit;
        if (filter.literal_is_number) {
            auto v = text::parse_number(value);
            auto l = text::parse_number(filter.literal);
            hit = v && l ? *v == *l : value == filter.literal;
        } else if (!filter.accepted_values.empty()) {
            hit = std::find(filter.accepted_values.begin(), filter.accepted_values.end(), value) !=
                  filter.accepted_values.end();
        } else {
            hit = value == filter.literal;
        }
        return filter.cmp == Comparator::eq ? hit : !hit;
    }
    int order;
    auto v = text::parse_number(value);
    auto l = filter.literal_is_number ? text::parse_number(filter.literal) : std::nullopt;
    if (v && l) order = *v < *l ? -1 : (*v > *l ? 1 : 0);
    else order = value < filter.literal ? -1 : (value > filter.literal ? 1 : 0);
    switch (filter.cmp) {
        case Comparator::lt: return order < 0;
        case Comparator::le: return order <= 0;
        case Comparator::gt: return order > 0;
        case Comparator::ge: return order >= 0;
        default: return false;
    }
}

struct Accumulator {
    double sum = 0;
    double min = 0;
    double max = 0;
    std::int64_t count = 0;
    bool has_value = false;

    void add(double v) {
        sum += v;
        min = has_value ? std::min(min, v) : v;
        max = has_value ? std::max(max, v) : v;
        ++count;
        has_value = true;
    }

    Cell finish(Aggregation agg) const {
        switch (agg) {
            case Aggregation::count: return Cell{static_cast<double>(count)};
            case Aggregation::sum: return has_value ? Cell{sum} : Cell{};
            case Aggregation::min: return has_value ? Cell{min} : Cell{};
            case Aggregation::max: return has_value ? Cell{max} : Cell{};
            case Aggregation::avg: break;  // split before execution
        }
        return Cell{};
    }
};

bool cell_is_null(const Cell& cell) { return std::holds_alternative<std::monostate>(cell); }

void sort_rows_by_keys(ResultTable& table, std::size_t key_count) {
    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [key_count](const auto& a, const auto& b) {
                         for (std::size_t k = 0; k < key_count; ++k) {
                             const auto& sa = std::get<std::string>(a[k]);
                             const auto& sb = std::get<std::string>(b[k]);
                             if (sa != sb) return sa < sb;
                         }
                         return false;
                     });
}

}  // namespace

SubqueryResult execute_subquery(const SubQueryPlan& plan, const ComponentTables& tables) {
    SubqueryResult result;
    JoinIndexes indexes(tables);
    const TableData& fact = tables.at(plan.fact_table);

    std::vector<std::size_t> measure_cols;
    for (const auto& mc : plan.measure_columns) measure_cols.push_back(fact.column_index(mc.local_name));

    std::map<std::vector<std::string>, std::vector<Accumulator>> groups;
    for (const auto& fact_row : fact.rows) {
        // Resolve every referenced join path first (inner-join semantics),
        // then filter; a dangling hop drops the row and bumps the counter.
        std::vector<std::string> keys;
        keys.reserve(plan.attribute_columns.size());
        bool dangling = false;
        for (const auto& ac : plan.attribute_columns) {
            auto value = resolve_via_path(tables, indexes, ac.join_path, ac.local_name, fact_row,
                                          plan.fact_table);
            if (!value) {
                dangling = true;
                break;
            }
            keys.push_back(std::move(*value));
        }
        std::vector<std::string> filter_values;
        if (!dangling) {
            for (const auto& f : plan.local_filters) {
                auto value = resolve_via_path(tables, indexes, f.join_path, f.local_name, fact_row,
                                              plan.fact_table);
                if (!value) {
                    dangling = true;
                    break;
                }
                filter_values.push_back(std::move(*value));
            }
        }
        if (dangling) {
            ++result.dangling_dropped;
            continue;
        }
        bool keep = true;
        for (std::size_t i = 0; i < plan.local_filters.size() && keep; ++i)
            keep = filter_match(filter_values[i], plan.local_filters[i]);
        if (!keep) continue;

        auto [it, inserted] =
            groups.try_emplace(std::move(keys), plan.measure_columns.size(), Accumulator{});
        for (std::size_t i = 0; i < plan.measure_columns.size(); ++i) {
            const std::string& cell = fact_row[measure_cols[i]];
            if (cell.empty()) continue;  // null
            it->second[i].add(*text::parse_number(cell));
        }
    }

    for (const auto& ac : plan.attribute_columns)
        result.table.columns.push_back(ResultColumn{ac.fed_name, ColumnKind::key});
    for (const auto& mc : plan.measure_columns)
        result.table.columns.push_back(ResultColumn{mc.column_id, ColumnKind::measure});

    for (const auto& [keys, accs] : groups) {
        std::vector<Cell> row;
        for (const auto& k : keys) row.emplace_back(k);
        for (std::size_t i = 0; i < accs.size(); ++i)
            row.push_back(accs[i].finish(plan.measure_columns[i].local_agg));
        result.table.rows.push_back(std::move(row));
    }

    // A keyless aggregate over zero rows still answers COUNT with 0.
    if (plan.attribute_columns.empty() && result.table.rows.empty()) {
        bool has_count = std::any_of(plan.measure_columns.begin(), plan.measure_columns.end(),
                                     [](const PlannedMeasureColumn& mc) {
                                         return mc.local_agg == Aggregation::count;
                                     });
        if (has_count) {
            std::vector<Cell> row;
            for (const auto& mc : plan.measure_columns)
                row.push_back(mc.local_agg == Aggregation::count ? Cell{0.0} : Cell{});
            result.table.rows.push_back(std::move(row));
        }
    }
    return result;
}

ResultTable merge_results(const std::vector<std::pair<std::string, ResultTable>>& partials,
                          const MergePlan& merge_plan, const OntologyRepository& repo) {
    std::vector<ResultColumn> expected;
    for (const auto& key : merge_plan.keys)
        expected.push_back(ResultColumn{key.fed_name, ColumnKind::key});
    std::vector<std::pair<std::size_t, std::size_t>> physical;  // (col, count col or npos)
    constexpr std::size_t npos = static_cast<std::size_t>(-1);
    for (const auto& mc : merge_plan.measures) {
        expected.push_back(ResultColumn{mc.column_id, ColumnKind::measure});
        std::size_t main = expected.size() - 1;
        std::size_t count = npos;
        if (!mc.count_column_id.empty()) {
            expected.push_back(ResultColumn{mc.count_column_id, ColumnKind::measure});
            count = expected.size() - 1;
        }
        physical.emplace_back(main, count);
    }

    std::size_t key_count = merge_plan.keys.size();
    std::map<std::vector<std::string>, std::vector<Accumulator>> groups;
    for (const auto& [component_id, partial] : partials) {
        if (partial.columns != expected)
            throw FedError(ErrorCode::shape_mismatch,
                           "partial from component '" + component_id +
                               "' does not match the merge plan");
        for (const auto& row : partial.rows) {
            std::vector<std::string> keys;
            keys.reserve(key_count);
            for (std::size_t k = 0; k < key_count; ++k) {
                const std::string& raw = std::get<std::string>(row[k]);
                keys.push_back(merge_plan.keys[k].canonicalize ? repo.canonical_value(raw) : raw);
            }
            auto [it, inserted] =
                groups.try_emplace(std::move(keys), expected.size() - key_count, Accumulator{});
            for (std::size_t c = key_count; c < expected.size(); ++c) {
                const Cell& cell = row[c];
                if (cell_is_null(cell)) continue;
                Accumulator& acc = it->second[c - key_count];
                double v = std::get<double>(cell);
                // Partial COUNT cells recombine by summation like SUM cells.
                acc.add(v);
            }
        }
    }

    ResultTable merged;
    for (const auto& key : merge_plan.keys)
        merged.columns.push_back(ResultColumn{key.fed_name, ColumnKind::key});
    for (const auto& mc : merge_plan.measures)
        merged.columns.push_back(ResultColumn{mc.header, ColumnKind::measure});

    for (const auto& [keys, accs] : groups) {
        std::vector<Cell> row;
        for (const auto& k : keys) row.emplace_back(k);
        bool all_null = true;
        for (std::size_t m = 0; m < merge_plan.measures.size(); ++m) {
            const auto& mc = merge_plan.measures[m];
            const Accumulator& main = accs[physical[m].first - key_count];
            Cell cell;
            switch (mc.aggregation) {
                case Aggregation::sum:
                case Aggregation::count:
                    cell = main.has_value ? Cell{main.sum} : Cell{};
                    break;
                case Aggregation::min:
                    cell = main.has_value ? Cell{main.min} : Cell{};
                    break;
                case Aggregation::max:
                    cell = main.has_value ? Cell{main.max} : Cell{};
                    break;
                case Aggregation::avg: {
                    const Accumulator& count = accs[physical[m].second - key_count];
                    double total_count = count.has_value ? count.sum : 0;
                    if (total_count > 0 && main.has_value) cell = Cell{main.sum / total_count};
                    break;
                }
            }
            if (!cell_is_null(cell)) all_null = false;
            row.push_back(std::move(cell));
        }
        if (!merge_plan.measures.empty() && all_null) continue;
        merged.rows.push_back(std::move(row));
    }
    sort_rows_by_keys(merged, key_count);
    return merged;
}

FederatedResult execute_federated(const FederatedQuery& query, const FederationCatalog& catalog,
                                  const OntologyRepository& repo,
                                  const std::map<std::string, ComponentTables>& tables) {
    QueryPlan qp = plan(query, catalog, repo);
    FederatedResult result;
    result.warnings = qp.warnings;

    std::vector<std::pair<std::string, ResultTable>> partials;
    for (const auto& sub : qp.subplans) {
        SubqueryResult partial = execute_subquery(sub, tables.at(sub.component_id));
        result.dangling_dropped += partial.dangling_dropped;
        partials.emplace_back(sub.component_id, std::move(partial.table));
    }
    result.table = merge_results(partials, qp.merge, repo);
    return result;
}

std::string result_to_csv(const ResultTable& table) {
    std::ostringstream out;
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        out << (c ? "," : "") << csv::escape(table.columns[c].name);
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ",";
            if (std::holds_alternative<std::string>(row[c]))
                out << csv::escape(std::get<std::string>(row[c]));
            else if (std::holds_alternative<double>(row[c]))
                out << format_number(std::get<double>(row[c]));
        }
        out << "\n";
    }
    return out.str();
}

std::string result_to_json(const ResultTable& table) {
    nlohmann::json doc;
    doc["columns"] = nlohmann::json::array();
    for (const auto& col : table.columns)
        doc["columns"].push_back(
            {{"name", col.name}, {"kind", col.kind == ColumnKind::key ? "key" : "measure"}});
    doc["rows"] = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& cell : row) {
            if (std::holds_alternative<std::monostate>(cell)) cells.push_back(nullptr);
            else if (std::holds_alternative<double>(cell)) cells.push_back(std::get<double>(cell));
            else cells.push_back(std::get<std::string>(cell));
        }
        doc["rows"].push_back(std::move(cells));
    }
    return doc.dump(2) + "\n";
}

}  // namespace fedwh
