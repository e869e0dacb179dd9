#include <algorithm>
#include <map>
#include <numeric>
#include <optional>

#include "csv.hpp"
#include "fedwh/error.hpp"
#include "fedwh/executor.hpp"

// Reference evaluation by denormalize-and-scan. This file re-derives name
// resolution, location choice and aggregation from the query contract on
// purpose; it must not reuse the planner/executor machinery it checks.

namespace fedwh {

namespace {

struct RefElement {
    std::string display;
    ConceptId concept_id;
    std::set<Location> locations;
};

bool ref_matches(const OntologyRepository& repo, const std::string& query_name,
                 const std::string& fed_name, const ConceptId& concept_id,
                 const std::set<Location>& locations) {
    std::string folded = fold_term(query_name);
    if (fold_term(fed_name) == folded || repo.concept_of(query_name) == concept_id) return true;
    return std::any_of(locations.begin(), locations.end(), [&](const Location& loc) {
        return fold_term(loc.local_name) == folded;
    });
}

RefElement ref_resolve(const std::string& name, const FederationCatalog& catalog,
                       const OntologyRepository& repo, bool want_measure) {
    std::map<ConceptId, RefElement> groups;
    auto consider = [&](const std::string& fed_name, const ConceptId& concept_id,
                        const std::set<Location>& locations) {
        if (!ref_matches(repo, name, fed_name, concept_id, locations)) return;
        auto& g = groups[concept_id];
        if (g.display.empty()) g.display = fed_name;
        g.concept_id = concept_id;
        g.locations.insert(locations.begin(), locations.end());
    };
    if (want_measure) {
        for (const auto& m : catalog.measures) consider(m.fed_name, m.concept_id, m.locations);
    } else {
        for (const auto& dim : catalog.dimensions)
            for (const auto& attr : dim.attributes)
                consider(attr.fed_name, attr.concept_id, attr.locations);
    }
    if (groups.empty())
        throw FedError(ErrorCode::unknown_name,
                       std::string("no federated ") + (want_measure ? "measure" : "attribute") +
                           " matches '" + name + "'");
    if (groups.size() > 1)
        throw FedError(ErrorCode::unknown_name, "'" + name + "' is ambiguous across " +
                                                    std::to_string(groups.size()) + " concepts");
    return groups.begin()->second;
}

/// Breadth-first distances from the fact table, expanding fact links then
/// parent links in declaration order (the location-choice contract).
struct RefReach {
    std::vector<std::string> order;                               // discovery order
    std::map<std::string, std::vector<JoinHop>> path;

    static RefReach compute(const ComponentSchema& component) {
        RefReach reach;
        reach.path[component.fact.name] = {};
        reach.order.push_back(component.fact.name);
        for (std::size_t next = 0; next < reach.order.size(); ++next) {
            std::string table = reach.order[next];
            const std::vector<TableLink>* links = nullptr;
            if (table == component.fact.name) links = &component.fact.links;
            else links = &component.find_dimension(table)->parents;
            for (const auto& link : *links) {
                if (reach.path.count(link.dimension)) continue;
                const DimensionDescriptor* parent = component.find_dimension(link.dimension);
                auto hops = reach.path[table];
                hops.push_back(
                    JoinHop{table, link.fk, parent->name, parent->primary_key()->name});
                reach.path[link.dimension] = std::move(hops);
                reach.order.push_back(link.dimension);
            }
        }
        return reach;
    }
};

struct ChosenColumn {
    std::string table;
    std::string column;
    std::vector<JoinHop> hops;
};

std::optional<ChosenColumn> ref_choose(const RefElement& element, const ComponentSchema& component,
                                       const RefReach& reach) {
    std::optional<ChosenColumn> best;
    std::tuple<std::size_t, std::size_t, std::size_t> best_rank{};
    for (const auto& loc : element.locations) {
        if (loc.component_id != component.component_id) continue;
        auto it = reach.path.find(loc.table);
        if (it == reach.path.end()) continue;
        const DimensionDescriptor* dim = component.find_dimension(loc.table);
        if (!dim) continue;
        std::size_t decl = 0;
        while (decl < dim->attributes.size() && dim->attributes[decl].name != loc.local_name)
            ++decl;
        std::size_t discovered =
            std::find(reach.order.begin(), reach.order.end(), loc.table) - reach.order.begin();
        std::tuple<std::size_t, std::size_t, std::size_t> rank{it->second.size(), discovered, decl};
        if (!best || rank < best_rank) {
            best = ChosenColumn{loc.table, loc.local_name, it->second};
            best_rank = rank;
        }
    }
    return best;
}

/// Scan-based row lookup, first match wins (mirrors the documented
/// duplicate-key rule without sharing the hash-join code path).
const std::vector<std::string>* scan_for_row(const TableData& table, std::size_t key_col,
                                             const std::string& value) {
    for (const auto& row : table.rows)
        if (row[key_col] == value) return &row;
    return nullptr;
}

std::optional<std::string> ref_value(const ComponentTables& tables, const ChosenColumn& chosen,
                                     const std::vector<std::string>& fact_row,
                                     const std::string& fact_table) {
    const std::vector<std::string>* row = &fact_row;
    std::string table = fact_table;
    for (const auto& hop : chosen.hops) {
        const TableData& child = tables.at(table);
        const TableData& parent = tables.at(hop.parent_table);
        const std::string& fk = (*row)[child.column_index(hop.fk_column)];
        row = scan_for_row(parent, parent.column_index(hop.key_column), fk);
        if (!row) return std::nullopt;
        table = hop.parent_table;
    }
    return (*row)[tables.at(table).column_index(chosen.column)];
}

bool ref_filter(const OntologyRepository& repo, const std::string& value, const QueryFilter& f) {
    if (f.cmp == Comparator::eq || f.cmp == Comparator::ne) {
        bool hit;
        if (f.literal_is_number) {
            auto v = text::parse_number(value);
            auto l = text::parse_number(f.literal);
            hit = (v && l) ? *v == *l : value == f.literal;
        } else {
            // Same-class membership, phrased as canonical-form equality.
            hit = repo.canonical_value(value) == repo.canonical_value(f.literal);
        }
        return f.cmp == Comparator::eq ? hit : !hit;
    }
    auto v = text::parse_number(value);
    std::optional<double> l;
    if (f.literal_is_number) l = text::parse_number(f.literal);
    bool lt;
    bool gt;
    if (v && l) {
        lt = *v < *l;
        gt = *v > *l;
    } else {
        lt = value < f.literal;
        gt = value > f.literal;
    }
    switch (f.cmp) {
        case Comparator::lt: return lt;
        case Comparator::le: return !gt;
        case Comparator::gt: return gt;
        case Comparator::ge: return !lt;
        default: return false;
    }
}

}  // namespace

FederatedResult execute_global_oracle(const FederatedQuery& query,
                                      const FederationCatalog& catalog,
                                      const OntologyRepository& repo,
                                      const std::map<std::string, ComponentTables>& tables) {
    if (catalog.components.empty())
        throw FedError(ErrorCode::unanswerable, "the catalog has no components");

    std::vector<RefElement> measure_slots;
    for (const auto& m : query.measures)
        measure_slots.push_back(ref_resolve(m.name, catalog, repo, true));

    std::vector<RefElement> key_slots;
    for (const auto& name : query.group_by) {
        RefElement element = ref_resolve(name, catalog, repo, false);
        bool seen = std::any_of(key_slots.begin(), key_slots.end(), [&](const RefElement& e) {
            return e.concept_id == element.concept_id;
        });
        if (!seen) key_slots.push_back(std::move(element));
    }
    for (const auto& name : query.attributes) ref_resolve(name, catalog, repo, false);

    std::vector<RefElement> filter_slots;
    for (const auto& f : query.filters)
        filter_slots.push_back(ref_resolve(f.attribute, catalog, repo, false));

    FederatedResult result;
    // Group key -> per measure slot, the raw values in concatenation order.
    std::map<std::vector<std::string>, std::vector<std::vector<double>>> groups;
    bool any_eligible = false;

    for (const auto& component : catalog.components) {
        RefReach reach = RefReach::compute(component);

        bool eligible = true;
        std::vector<std::string> measure_columns;  // fact-local column per slot
        for (const auto& slot : measure_slots) {
            const Location* local = nullptr;
            for (const auto& loc : slot.locations)
                if (loc.component_id == component.component_id && !local) local = &loc;
            if (!local) {
                eligible = false;
                break;
            }
            measure_columns.push_back(local->local_name);
        }
        std::vector<ChosenColumn> key_columns;
        std::vector<ChosenColumn> filter_columns;
        if (eligible) {
            for (const auto& slot : key_slots) {
                auto chosen = ref_choose(slot, component, reach);
                if (!chosen) {
                    eligible = false;
                    break;
                }
                key_columns.push_back(std::move(*chosen));
            }
        }
        if (eligible) {
            for (const auto& slot : filter_slots) {
                auto chosen = ref_choose(slot, component, reach);
                if (!chosen) {
                    eligible = false;
                    break;
                }
                filter_columns.push_back(std::move(*chosen));
            }
        }
        if (!eligible) {
            result.warnings.push_back("component " + component.component_id + " excluded");
            continue;
        }
        any_eligible = true;

        const ComponentTables& component_tables = tables.at(component.component_id);
        const TableData& fact = component_tables.at(component.fact.name);
        std::vector<std::size_t> measure_idx;
        for (const auto& column : measure_columns) measure_idx.push_back(fact.column_index(column));

        for (const auto& fact_row : fact.rows) {
            bool dangling = false;
            std::vector<std::string> raw_keys;
            for (const auto& chosen : key_columns) {
                auto value = ref_value(component_tables, chosen, fact_row, component.fact.name);
                if (!value) {
                    dangling = true;
                    break;
                }
                raw_keys.push_back(std::move(*value));
            }
            std::vector<std::string> raw_filters;
            if (!dangling) {
                for (const auto& chosen : filter_columns) {
                    auto value = ref_value(component_tables, chosen, fact_row, component.fact.name);
                    if (!value) {
                        dangling = true;
                        break;
                    }
                    raw_filters.push_back(std::move(*value));
                }
            }
            if (dangling) {
                ++result.dangling_dropped;
                continue;
            }
            bool keep = true;
            for (std::size_t i = 0; i < query.filters.size() && keep; ++i)
                keep = ref_filter(repo, raw_filters[i], query.filters[i]);
            if (!keep) continue;

            std::vector<std::string> keys;
            for (const auto& raw : raw_keys) keys.push_back(repo.canonical_value(raw));
            auto [it, inserted] = groups.try_emplace(
                std::move(keys), measure_slots.size(), std::vector<double>{});
            for (std::size_t s = 0; s < measure_slots.size(); ++s) {
                const std::string& cell = fact_row[measure_idx[s]];
                if (cell.empty()) continue;
                it->second[s].push_back(*text::parse_number(cell));
            }
        }
    }

    if (!any_eligible)
        throw FedError(ErrorCode::unanswerable, "no component holds every referenced element");

    for (const auto& slot : key_slots)
        result.table.columns.push_back(ResultColumn{slot.display, ColumnKind::key});
    for (std::size_t s = 0; s < measure_slots.size(); ++s)
        result.table.columns.push_back(
            ResultColumn{std::string(aggregation_token(query.measures[s].aggregation)) + "(" +
                             measure_slots[s].display + ")",
                         ColumnKind::measure});

    auto fold = [](const std::vector<double>& values, Aggregation agg) -> Cell {
        if (agg == Aggregation::count) return Cell{static_cast<double>(values.size())};
        if (values.empty()) return Cell{};
        switch (agg) {
            case Aggregation::sum: return Cell{std::accumulate(values.begin(), values.end(), 0.0)};
            case Aggregation::min: return Cell{*std::min_element(values.begin(), values.end())};
            case Aggregation::max: return Cell{*std::max_element(values.begin(), values.end())};
            case Aggregation::avg:
                return Cell{std::accumulate(values.begin(), values.end(), 0.0) /
                            static_cast<double>(values.size())};
            default: return Cell{};
        }
    };

    for (const auto& [keys, value_lists] : groups) {
        std::vector<Cell> row;
        for (const auto& k : keys) row.emplace_back(k);
        bool all_null = true;
        for (std::size_t s = 0; s < measure_slots.size(); ++s) {
            Cell cell = fold(value_lists[s], query.measures[s].aggregation);
            if (!std::holds_alternative<std::monostate>(cell)) all_null = false;
            row.push_back(std::move(cell));
        }
        if (!query.measures.empty() && all_null) continue;
        result.table.rows.push_back(std::move(row));
    }

    // Keyless aggregates over nothing still answer COUNT with 0.
    if (key_slots.empty() && result.table.rows.empty()) {
        bool has_count = std::any_of(query.measures.begin(), query.measures.end(),
                                     [](const SelectedMeasure& m) {
                                         return m.aggregation == Aggregation::count;
                                     });
        if (has_count) {
            std::vector<Cell> row;
            for (const auto& m : query.measures)
                row.push_back(m.aggregation == Aggregation::count ? Cell{0.0} : Cell{});
            result.table.rows.push_back(std::move(row));
        }
    }

    std::stable_sort(result.table.rows.begin(), result.table.rows.end(),
                     [n = key_slots.size()](const auto& a, const auto& b) {
                         for (std::size_t k = 0; k < n; ++k) {
                             const auto& sa = std::get<std::string>(a[k]);
                             const auto& sb = std::get<std::string>(b[k]);
                             if (sa != sb) return sa < sb;
                         }
                         return false;
                     });
    return result;
}

}  // namespace fedwh
