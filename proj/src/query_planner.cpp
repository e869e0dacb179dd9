#include "fedwh/query_planner.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <queue>
#include <sstream>

#include "fedwh/error.hpp"

namespace fedwh {

const char* comparator_token(Comparator cmp) {
    switch (cmp) {
        case Comparator::eq: return "=";
        case Comparator::ne: return "!=";
        case Comparator::lt: return "<";
        case Comparator::le: return "<=";
        case Comparator::gt: return ">";
        case Comparator::ge: return ">=";
    }
    return "?";
}

namespace {

struct Token {
    enum class Kind { identifier, number, string, symbol, end };
    Kind kind = Kind::end;
    std::string text;
    std::size_t pos = 0;  // 1-based character position
};

[[noreturn]] void syntax_error(std::size_t pos, const std::string& expected) {
    throw FedError(ErrorCode::syntax_error,
                   "position " + std::to_string(pos) + ": expected " + expected, pos);
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t pos = i + 1;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = i;
            while (i < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
                ++i;
            tokens.push_back({Token::Kind::identifier, std::string(text.substr(start, i - start)), pos});
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '-' && i + 1 < text.size() &&
                    std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            std::size_t start = i;
            if (c == '-') ++i;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            if (i < text.size() && text[i] == '.') {
                ++i;
                while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            }
            tokens.push_back({Token::Kind::number, std::string(text.substr(start, i - start)), pos});
        } else if (c == '"') {
            std::size_t end = text.find('"', i + 1);
            if (end == std::string_view::npos) syntax_error(pos, "closing '\"'");
            tokens.push_back({Token::Kind::string, std::string(text.substr(i + 1, end - i - 1)), pos});
            i = end + 1;
        } else if (c == '(' || c == ')' || c == ',' || c == '=') {
            tokens.push_back({Token::Kind::symbol, std::string(1, c), pos});
            ++i;
        } else if (c == '!' && i + 1 < text.size() && text[i + 1] == '=') {
            tokens.push_back({Token::Kind::symbol, "!=", pos});
            i += 2;
        } else if (c == '<' || c == '>') {
            if (i + 1 < text.size() && text[i + 1] == '=') {
                tokens.push_back({Token::Kind::symbol, std::string(1, c) + "=", pos});
                i += 2;
            } else {
                tokens.push_back({Token::Kind::symbol, std::string(1, c), pos});
                ++i;
            }
        } else {
            syntax_error(pos, "a valid token");
        }
    }
    tokens.push_back({Token::Kind::end, "", text.size() + 1});
    return tokens;
}

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return out;
}

bool is_keyword(const Token& t, const char* kw) {
    return t.kind == Token::Kind::identifier && upper(t.text) == kw;
}

std::optional<Aggregation> aggregation_keyword(const Token& t) {
    if (t.kind != Token::Kind::identifier) return std::nullopt;
    std::string u = upper(t.text);
    if (u == "SUM") return Aggregation::sum;
    if (u == "COUNT") return Aggregation::count;
    if (u == "AVG") return Aggregation::avg;
    if (u == "MIN") return Aggregation::min;
    if (u == "MAX") return Aggregation::max;
    return std::nullopt;
}

class QueryParser {
public:
    explicit QueryParser(std::string_view text) : tokens_(tokenize(text)) {}

    FederatedQuery parse() {
        FederatedQuery query;
        expect_keyword("SELECT");
        parse_select_item(query);
        while (accept_symbol(",")) parse_select_item(query);
        if (is_keyword(peek(), "WHERE")) {
            ++cursor_;
            query.filters.push_back(parse_condition());
            while (is_keyword(peek(), "AND")) {
                ++cursor_;
                query.filters.push_back(parse_condition());
            }
        }
        if (is_keyword(peek(), "GROUP")) {
            ++cursor_;
            expect_keyword("BY");
            query.group_by.push_back(expect_name());
            while (accept_symbol(",")) query.group_by.push_back(expect_name());
        }
        if (peek().kind != Token::Kind::end) syntax_error(peek().pos, "end of query");

        for (std::size_t i = 0; i < query.attributes.size(); ++i) {
            const std::string& attr = query.attributes[i];
            bool grouped = std::any_of(query.group_by.begin(), query.group_by.end(),
                                       [&](const std::string& g) {
                                           return fold_term(g) == fold_term(attr);
                                       });
            if (!grouped)
                syntax_error(attribute_positions_[i],
                             "selected attribute '" + attr + "' to appear in GROUP BY");
        }
        return query;
    }

private:
    const Token& peek() const { return tokens_[cursor_]; }

    void expect_keyword(const char* kw) {
        if (!is_keyword(peek(), kw)) syntax_error(peek().pos, std::string("'") + kw + "'");
        ++cursor_;
    }

    bool accept_symbol(const char* sym) {
        if (peek().kind == Token::Kind::symbol && peek().text == sym) {
            ++cursor_;
            return true;
        }
        return false;
    }

    std::string expect_name() {
        const Token& t = peek();
        if (t.kind != Token::Kind::identifier || aggregation_keyword(t) ||
            is_keyword(t, "SELECT") || is_keyword(t, "WHERE") || is_keyword(t, "AND") ||
            is_keyword(t, "GROUP") || is_keyword(t, "BY"))
            syntax_error(t.pos, "a name");
        ++cursor_;
        return t.text;
    }

    void parse_select_item(FederatedQuery& query) {
        if (auto agg = aggregation_keyword(peek());
            agg && tokens_[cursor_ + 1].kind == Token::Kind::symbol &&
            tokens_[cursor_ + 1].text == "(") {
            ++cursor_;
            accept_symbol("(");
            std::string name = expect_name();
            if (!accept_symbol(")")) syntax_error(peek().pos, "')'");
            query.measures.push_back(SelectedMeasure{*agg, std::move(name)});
        } else {
            attribute_positions_.push_back(peek().pos);
            query.attributes.push_back(expect_name());
        }
    }

    QueryFilter parse_condition() {
        QueryFilter filter;
        filter.attribute = expect_name();
        const Token& op = peek();
        if (op.kind != Token::Kind::symbol) syntax_error(op.pos, "a comparator");
        if (op.text == "=") filter.cmp = Comparator::eq;
        else if (op.text == "!=") filter.cmp = Comparator::ne;
        else if (op.text == "<") filter.cmp = Comparator::lt;
        else if (op.text == "<=") filter.cmp = Comparator::le;
        else if (op.text == ">") filter.cmp = Comparator::gt;
        else if (op.text == ">=") filter.cmp = Comparator::ge;
        else syntax_error(op.pos, "a comparator");
        ++cursor_;
        const Token& lit = peek();
        if (lit.kind == Token::Kind::string) filter.literal = lit.text;
        else if (lit.kind == Token::Kind::number) {
            filter.literal = lit.text;
            filter.literal_is_number = true;
        } else syntax_error(lit.pos, "a quoted string or number literal");
        ++cursor_;
        return filter;
    }

    std::vector<Token> tokens_;
    std::size_t cursor_ = 0;
    std::vector<std::size_t> attribute_positions_;
};

}  // namespace

FederatedQuery parse_query(std::string_view text) { return QueryParser(text).parse(); }

std::string unparse_query(const FederatedQuery& query) {
    std::ostringstream out;
    out << "SELECT ";
    bool first = true;
    for (const auto& m : query.measures) {
        if (!first) out << ", ";
        out << aggregation_token(m.aggregation) << "(" << m.name << ")";
        first = false;
    }
    for (const auto& a : query.attributes) {
        if (!first) out << ", ";
        out << a;
        first = false;
    }
    for (std::size_t i = 0; i < query.filters.size(); ++i) {
        const auto& f = query.filters[i];
        out << (i == 0 ? " WHERE " : " AND ") << f.attribute << " " << comparator_token(f.cmp)
            << " ";
        if (f.literal_is_number) out << f.literal;
        else out << '"' << f.literal << '"';
    }
    for (std::size_t i = 0; i < query.group_by.size(); ++i)
        out << (i == 0 ? " GROUP BY " : ", ") << query.group_by[i];
    return out.str();
}

namespace {

struct ResolvedElement {
    std::string fed_name;
    ConceptId concept_id;
    std::set<Location> locations;  // union across the matching concept_id group
};

bool name_matches(const OntologyRepository& repo, const std::string& query_name,
                  const std::string& fed_name, const ConceptId& concept_id,
                  const std::set<Location>& locations) {
    std::string folded = fold_term(query_name);
    if (fold_term(fed_name) == folded) return true;
    if (repo.concept_of(query_name) == concept_id) return true;
    for (const auto& loc : locations)
        if (fold_term(loc.local_name) == folded) return true;
    return false;
}

ResolvedElement resolve_measure(const std::string& name, const FederationCatalog& catalog,
                                const OntologyRepository& repo) {
    std::map<ConceptId, ResolvedElement> groups;
    for (const auto& m : catalog.measures)
        if (name_matches(repo, name, m.fed_name, m.concept_id, m.locations)) {
            auto& g = groups[m.concept_id];
            if (g.fed_name.empty()) g.fed_name = m.fed_name;
            g.concept_id = m.concept_id;
            g.locations.insert(m.locations.begin(), m.locations.end());
        }
    if (groups.empty())
        throw FedError(ErrorCode::unknown_name, "no federated measure matches '" + name + "'");
    if (groups.size() > 1)
        throw FedError(ErrorCode::unknown_name,
                       "'" + name + "' is ambiguous across " + std::to_string(groups.size()) +
                           " measure concepts");
    return groups.begin()->second;
}

ResolvedElement resolve_attribute(const std::string& name, const FederationCatalog& catalog,
                                  const OntologyRepository& repo) {
    // The same concept may surface in several federated dimensions (a star
    // folds a level that a snowflake keeps as its own table); those are one
    // logical attribute and their inventories are pooled.
    std::map<ConceptId, ResolvedElement> groups;
    for (const auto& dim : catalog.dimensions)
        for (const auto& attr : dim.attributes)
            if (name_matches(repo, name, attr.fed_name, attr.concept_id, attr.locations)) {
                auto& g = groups[attr.concept_id];
                if (g.fed_name.empty()) g.fed_name = attr.fed_name;
                g.concept_id = attr.concept_id;
                g.locations.insert(attr.locations.begin(), attr.locations.end());
            }
    if (groups.empty())
        throw FedError(ErrorCode::unknown_name, "no federated attribute matches '" + name + "'");
    if (groups.size() > 1)
        throw FedError(ErrorCode::unknown_name,
                       "'" + name + "' is ambiguous across " + std::to_string(groups.size()) +
                           " attribute concepts");
    return groups.begin()->second;
}

/// Fact-rooted shortest join paths for one component. BFS expands fact links
/// then parent links in declaration order, so ties resolve deterministically.
struct ComponentPaths {
    std::map<std::string, std::vector<JoinHop>> by_table;
    std::vector<std::string> discovery_order;

    static ComponentPaths compute(const ComponentSchema& component) {
        ComponentPaths paths;
        std::queue<std::string> frontier;
        paths.by_table[component.fact.name] = {};
        paths.discovery_order.push_back(component.fact.name);
        frontier.push(component.fact.name);
        while (!frontier.empty()) {
            std::string table = frontier.front();
            frontier.pop();
            const std::vector<TableLink>* links = nullptr;
            if (table == component.fact.name) links = &component.fact.links;
            else if (const auto* dim = component.find_dimension(table)) links = &dim->parents;
            if (!links) continue;
            for (const auto& link : *links) {
                if (paths.by_table.count(link.dimension)) continue;
                const DimensionDescriptor* parent = component.find_dimension(link.dimension);
                std::vector<JoinHop> path = paths.by_table[table];
                path.push_back(JoinHop{table, link.fk, parent->name, parent->primary_key()->name});
                paths.by_table[link.dimension] = std::move(path);
                paths.discovery_order.push_back(link.dimension);
                frontier.push(link.dimension);
            }
        }
        return paths;
    }

    std::size_t discovery_rank(const std::string& table) const {
        auto it = std::find(discovery_order.begin(), discovery_order.end(), table);
        return static_cast<std::size_t>(it - discovery_order.begin());
    }
};

/// Picks the component-local location with the shortest join path; ties go
/// to the earliest-discovered table, then to attribute declaration order.
std::optional<PlannedAttributeColumn> choose_location(const ResolvedElement& element,
                                                      const ComponentSchema& component,
                                                      const ComponentPaths& paths) {
    bool found = false;
    PlannedAttributeColumn candidate;
    std::tuple<std::size_t, std::size_t, std::size_t> best_rank;
    for (const auto& loc : element.locations) {
        if (loc.component_id != component.component_id) continue;
        auto path_it = paths.by_table.find(loc.table);
        if (path_it == paths.by_table.end()) continue;  // unreachable table
        const DimensionDescriptor* dim = component.find_dimension(loc.table);
        if (!dim) continue;
        std::size_t attr_index = 0;
        for (; attr_index < dim->attributes.size(); ++attr_index)
            if (dim->attributes[attr_index].name == loc.local_name) break;
        std::tuple<std::size_t, std::size_t, std::size_t> rank{
            path_it->second.size(), paths.discovery_rank(loc.table), attr_index};
        if (!found || rank < best_rank) {
            candidate = PlannedAttributeColumn{element.fed_name, loc.table, loc.local_name,
                                               path_it->second};
            found = true;
            best_rank = rank;
        }
    }
    if (!found) return std::nullopt;
    return candidate;
}

}  // namespace

QueryPlan plan(const FederatedQuery& query, const FederationCatalog& catalog,
               const OntologyRepository& repo) {
    if (catalog.components.empty())
        throw FedError(ErrorCode::unanswerable, "the catalog has no components");

    struct MeasureSlot {
        Aggregation aggregation;
        ResolvedElement element;
    };
    std::vector<MeasureSlot> measure_slots;
    for (const auto& m : query.measures)
        measure_slots.push_back({m.aggregation, resolve_measure(m.name, catalog, repo)});

    // Group keys, deduplicated by concept, in first-appearance order.
    std::vector<ResolvedElement> key_elements;
    for (const auto& name : query.group_by) {
        ResolvedElement element = resolve_attribute(name, catalog, repo);
        bool seen = std::any_of(key_elements.begin(), key_elements.end(),
                                [&](const ResolvedElement& e) { return e.concept_id == element.concept_id; });
        if (!seen) key_elements.push_back(std::move(element));
    }
    for (const auto& name : query.attributes) resolve_attribute(name, catalog, repo);

    struct FilterSlot {
        QueryFilter filter;
        ResolvedElement element;
    };
    std::vector<FilterSlot> filter_slots;
    for (const auto& f : query.filters)
        filter_slots.push_back({f, resolve_attribute(f.attribute, catalog, repo)});

    QueryPlan result;
    for (const auto& element : key_elements)
        result.merge.keys.push_back(MergeKeyColumn{element.fed_name, true});
    for (std::size_t i = 0; i < measure_slots.size(); ++i) {
        const auto& slot = measure_slots[i];
        MergeMeasureColumn mc;
        mc.header = std::string(aggregation_token(slot.aggregation)) + "(" +
                    slot.element.fed_name + ")";
        mc.aggregation = slot.aggregation;
        std::string base = "m" + std::to_string(i);
        if (slot.aggregation == Aggregation::avg) {
            mc.column_id = base + ":sum";
            mc.count_column_id = base + ":count";
        } else if (slot.aggregation == Aggregation::count) {
            mc.column_id = base + ":count";
        } else {
            mc.column_id = base + ":" + [&] {
                switch (slot.aggregation) {
                    case Aggregation::sum: return "sum";
                    case Aggregation::min: return "min";
                    case Aggregation::max: return "max";
                    default: return "agg";
                }
            }();
        }
        result.merge.measures.push_back(std::move(mc));
    }

    for (const auto& component : catalog.components) {
        ComponentPaths paths = ComponentPaths::compute(component);
        SubQueryPlan sub;
        sub.component_id = component.component_id;
        sub.fact_table = component.fact.name;
        std::string missing;

        for (std::size_t i = 0; i < measure_slots.size() && missing.empty(); ++i) {
            const auto& slot = measure_slots[i];
            const Location* local = nullptr;
            for (const auto& loc : slot.element.locations)
                if (loc.component_id == component.component_id && !local) local = &loc;
            if (!local) {
                missing = "measure '" + slot.element.fed_name + "'";
                break;
            }
            const MergeMeasureColumn& mc = result.merge.measures[i];
            if (slot.aggregation == Aggregation::avg) {
                sub.measure_columns.push_back(PlannedMeasureColumn{
                    mc.column_id, local->table, local->local_name, Aggregation::sum});
                sub.measure_columns.push_back(PlannedMeasureColumn{
                    mc.count_column_id, local->table, local->local_name, Aggregation::count});
            } else {
                sub.measure_columns.push_back(PlannedMeasureColumn{
                    mc.column_id, local->table, local->local_name, slot.aggregation});
            }
        }
        for (const auto& element : key_elements) {
            if (!missing.empty()) break;
            auto column = choose_location(element, component, paths);
            if (!column) {
                missing = "attribute '" + element.fed_name + "'";
                break;
            }
            sub.attribute_columns.push_back(std::move(*column));
        }
        for (const auto& slot : filter_slots) {
            if (!missing.empty()) break;
            auto column = choose_location(slot.element, component, paths);
            if (!column) {
                missing = "attribute '" + slot.element.fed_name + "'";
                break;
            }
            PlannedFilter pf;
            pf.table = column->table;
            pf.local_name = column->local_name;
            pf.join_path = column->join_path;
            pf.cmp = slot.filter.cmp;
            pf.literal = slot.filter.literal;
            pf.literal_is_number = slot.filter.literal_is_number;
            if ((pf.cmp == Comparator::eq || pf.cmp == Comparator::ne) && !pf.literal_is_number)
                pf.accepted_values = repo.value_class(pf.literal);
            sub.local_filters.push_back(std::move(pf));
        }

        if (missing.empty())
            result.subplans.push_back(std::move(sub));
        else
            result.warnings.push_back("component " + component.component_id + " excluded: no " +
                                      missing);
    }

    if (result.subplans.empty())
        throw FedError(ErrorCode::unanswerable, "no component holds every referenced element");
    return result;
}

std::string explain(const FederatedQuery& query, const FederationCatalog& catalog,
                    const OntologyRepository& repo) {
    QueryPlan qp = plan(query, catalog, repo);
    std::ostringstream out;
    out << "query: " << unparse_query(query) << "\n";
    out << "sub-queries (" << qp.subplans.size() << "):\n";
    for (const auto& sub : qp.subplans) {
        const ComponentSchema* component = catalog.find_component(sub.component_id);
        out << "  component " << sub.component_id << " (fact " << component->fact.name << ")\n";
        for (const auto& mc : sub.measure_columns)
            out << "    measure " << mc.column_id << " <- " << aggregation_token(mc.local_agg)
                << "(" << mc.fact_table << "." << mc.local_name << ")\n";
        for (const auto& ac : sub.attribute_columns) {
            out << "    key " << ac.fed_name << " <- " << ac.table << "." << ac.local_name;
            for (const auto& hop : ac.join_path)
                out << "  [" << hop.child_table << "." << hop.fk_column << " = "
                    << hop.parent_table << "." << hop.key_column << "]";
            out << "\n";
        }
        for (const auto& f : sub.local_filters) {
            out << "    filter " << f.table << "." << f.local_name << " "
                << comparator_token(f.cmp) << " ";
            if (f.literal_is_number) out << f.literal;
            else out << '"' << f.literal << '"';
            if (f.accepted_values.size() > 1) {
                out << "  (accepts:";
                for (const auto& v : f.accepted_values) out << " \"" << v << "\"";
                out << ")";
            }
            out << "\n";
        }
    }
    out << "merge:\n";
    for (const auto& key : qp.merge.keys)
        out << "  key " << key.fed_name << (key.canonicalize ? " (canonicalized)" : "") << "\n";
    for (const auto& mc : qp.merge.measures) {
        out << "  " << mc.header << " <- ";
        switch (mc.aggregation) {
            case Aggregation::sum: out << "sum of partial sums"; break;
            case Aggregation::count: out << "sum of partial counts"; break;
            case Aggregation::min: out << "min of partial mins"; break;
            case Aggregation::max: out << "max of partial maxes"; break;
            case Aggregation::avg: out << "total sum / total count"; break;
        }
        out << "\n";
    }
    for (const auto& warning : qp.warnings) out << "warning: " << warning << "\n";
    return out.str();
}

}  // namespace fedwh
