#include "fedwh/ontology.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <numeric>
#include <sstream>

#include "fedwh/error.hpp"

namespace fedwh {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::malformed_triple: return "MalformedTriple";
        case ErrorCode::malformed_override: return "MalformedOverride";
        case ErrorCode::conflicting_override: return "ConflictingOverride";
        case ErrorCode::hierarchy_cycle: return "HierarchyCycle";
        case ErrorCode::parse_error: return "ParseError";
        case ErrorCode::dangling_parent: return "DanglingParent";
        case ErrorCode::parent_cycle: return "ParentCycle";
        case ErrorCode::duplicate_name: return "DuplicateName";
        case ErrorCode::aggregation_conflict: return "AggregationConflict";
        case ErrorCode::hierarchy_conflict: return "HierarchyConflict";
        case ErrorCode::catalog_corruption: return "CatalogCorruption";
        case ErrorCode::syntax_error: return "SyntaxError";
        case ErrorCode::unknown_name: return "UnknownName";
        case ErrorCode::unanswerable: return "Unanswerable";
        case ErrorCode::missing_table: return "MissingTable";
        case ErrorCode::header_mismatch: return "HeaderMismatch";
        case ErrorCode::cell_type_error: return "CellTypeError";
        case ErrorCode::shape_mismatch: return "ShapeMismatch";
        case ErrorCode::config_error: return "ConfigError";
        case ErrorCode::io_error: return "IoError";
    }
    return "FedError";
}

const char* predicate_token(Predicate p) {
    switch (p) {
        case Predicate::synonym_of: return "synonymOf";
        case Predicate::is_a: return "isA";
        case Predicate::parent_of: return "parentOf";
        case Predicate::same_value: return "sameValue";
    }
    return "?";
}

std::string fold_term(std::string_view term) {
    std::size_t b = 0;
    std::size_t e = term.size();
    while (b < e && std::isspace(static_cast<unsigned char>(term[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(term[e - 1]))) --e;
    std::string out;
    out.reserve(e - b);
    for (std::size_t i = b; i < e; ++i)
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(term[i]))));
    return out;
}

namespace {

std::vector<std::string> split_tokens(std::string_view line) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) tokens.emplace_back(line.substr(start, i - start));
    }
    return tokens;
}

/// Calls fn(line, 1-based number) for each non-blank, non-comment line.
void for_each_statement(std::string_view text,
                        const std::function<void(std::string_view, std::size_t)>& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        std::size_t first = line.find_first_not_of(" \t");
        if (first != std::string_view::npos && line[first] != '#') fn(line, line_no);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
}

// Union-find over folded term keys.
class DisjointSets {
public:
    void add(const std::string& key) {
        parent_.try_emplace(key, key);
    }

    const std::string& find(const std::string& key) {
        auto it = parent_.try_emplace(key, key).first;
        if (it->second == key) return it->first;
        it->second = find(it->second);
        return it->second;
    }

    void unite(const std::string& a, const std::string& b) {
        std::string ra = find(a);
        std::string rb = find(b);
        if (ra == rb) return;
        // Smaller key becomes the root, which makes class keys canonical.
        if (rb < ra) std::swap(ra, rb);
        parent_[rb] = ra;
    }

    const std::map<std::string, std::string>& raw() const { return parent_; }

private:
    std::map<std::string, std::string> parent_;
};

}  // namespace

std::vector<Triple> parse_ontology(std::string_view text) {
    std::vector<Triple> triples;
    for_each_statement(text, [&](std::string_view line, std::size_t line_no) {
        auto tokens = split_tokens(line);
        if (tokens.size() != 3)
            throw FedError(ErrorCode::malformed_triple,
                           "line " + std::to_string(line_no) + ": expected 3 tokens, got " +
                               std::to_string(tokens.size()),
                           line_no);
        Predicate pred;
        if (tokens[1] == "synonymOf") pred = Predicate::synonym_of;
        else if (tokens[1] == "isA") pred = Predicate::is_a;
        else if (tokens[1] == "parentOf") pred = Predicate::parent_of;
        else if (tokens[1] == "sameValue") pred = Predicate::same_value;
        else
            throw FedError(ErrorCode::malformed_triple,
                           "line " + std::to_string(line_no) + ": unknown predicate '" +
                               tokens[1] + "'",
                           line_no);
        triples.push_back(Triple{tokens[0], pred, tokens[2]});
    });
    return triples;
}

std::vector<ExpertOverride> parse_overrides(std::string_view text) {
    std::vector<ExpertOverride> overrides;
    for_each_statement(text, [&](std::string_view line, std::size_t line_no) {
        auto tokens = split_tokens(line);
        if (tokens.size() != 3 || (tokens[0] != "force-similar" && tokens[0] != "force-distinct"))
            throw FedError(ErrorCode::malformed_override,
                           "line " + std::to_string(line_no) +
                               ": expected 'force-similar a b' or 'force-distinct a b'",
                           line_no);
        overrides.push_back(ExpertOverride{tokens[0] == "force-similar"
                                               ? ExpertOverride::Kind::force_similar
                                               : ExpertOverride::Kind::force_distinct,
                                           tokens[1], tokens[2]});
    });
    return overrides;
}

OntologyRepository OntologyRepository::build(const std::vector<Triple>& triples,
                                             const std::vector<ExpertOverride>& overrides) {
    OntologyRepository repo;

    std::set<std::pair<std::string, std::string>> distinct_pairs;
    std::set<std::pair<std::string, std::string>> similar_pairs;
    auto folded_pair = [](const std::string& a, const std::string& b) {
        std::string fa = fold_term(a);
        std::string fb = fold_term(b);
        if (fb < fa) std::swap(fa, fb);
        return std::make_pair(fa, fb);
    };
    for (const auto& ov : overrides) {
        (ov.kind == ExpertOverride::Kind::force_distinct ? distinct_pairs : similar_pairs)
            .insert(folded_pair(ov.a, ov.b));
    }
    for (const auto& p : similar_pairs)
        if (distinct_pairs.count(p))
            throw FedError(ErrorCode::conflicting_override,
                           "pair (" + p.first + ", " + p.second + ") forced both ways");

    // Register every observed spelling; track the smallest one per folded term.
    DisjointSets classes;
    std::map<std::string, std::string> spelling;
    auto observe = [&](const std::string& term) {
        std::string key = fold_term(term);
        classes.add(key);
        auto [it, inserted] = spelling.try_emplace(key, term);
        if (!inserted && term < it->second) it->second = term;
        return key;
    };

    std::vector<std::pair<std::string, std::string>> synonym_edges;
    std::vector<std::pair<std::string, std::string>> parent_edges;
    std::vector<std::pair<std::string, std::string>> isa_edges;
    DisjointSets values;
    std::set<std::string> value_universe;

    for (const auto& t : triples) {
        if (t.predicate == Predicate::same_value) {
            // Value-level synonymy lives in its own (case-sensitive) universe.
            values.add(t.subject);
            values.add(t.object);
            values.unite(t.subject, t.object);
            value_universe.insert(t.subject);
            value_universe.insert(t.object);
            continue;
        }
        std::string s = observe(t.subject);
        std::string o = observe(t.object);
        switch (t.predicate) {
            case Predicate::synonym_of: synonym_edges.emplace_back(s, o); break;
            case Predicate::parent_of: parent_edges.emplace_back(o, s); break;  // (child, parent)
            case Predicate::is_a: isa_edges.emplace_back(s, o); break;
            case Predicate::same_value: break;
        }
    }
    for (const auto& ov : overrides) {
        observe(ov.a);
        observe(ov.b);
    }

    // force-distinct removes the specific edge; connectivity through other
    // edges survives. force-similar edges are appended afterwards and win.
    for (const auto& e : synonym_edges) {
        auto p = folded_pair(e.first, e.second);
        if (!distinct_pairs.count(p)) classes.unite(e.first, e.second);
    }
    for (const auto& p : similar_pairs) classes.unite(p.first, p.second);

    for (const auto& [key, _] : classes.raw()) repo.term_class_[key] = "";
    for (auto& [key, cls] : repo.term_class_) cls = classes.find(key);

    // Display label per class: smallest observed spelling across members.
    for (const auto& [key, cls] : repo.term_class_) {
        const std::string& candidate = spelling.at(key);
        auto [it, inserted] = repo.class_label_.try_emplace(cls, candidate);
        if (!inserted && candidate < it->second) it->second = candidate;
    }

    auto lift = [&](const std::vector<std::pair<std::string, std::string>>& edges,
                    std::set<std::pair<std::string, std::string>>& out) {
        for (const auto& [a, b] : edges) {
            std::string ca = classes.find(a);
            std::string cb = classes.find(b);
            if (ca != cb) out.emplace(ca, cb);
        }
    };
    lift(parent_edges, repo.parent_edges_);
    lift(isa_edges, repo.isa_edges_);

    // The concept-level parentOf graph must stay acyclic.
    {
        std::map<std::string, std::vector<std::string>> succ;
        for (const auto& [child, parent] : repo.parent_edges_) succ[child].push_back(parent);
        std::map<std::string, int> state;  // 0 unseen, 1 on stack, 2 done
        std::vector<std::string> stack;
        std::function<void(const std::string&)> visit = [&](const std::string& node) {
            state[node] = 1;
            stack.push_back(node);
            for (const auto& next : succ[node]) {
                if (state[next] == 1) {
                    auto from = std::find(stack.begin(), stack.end(), next);
                    std::string members;
                    for (auto it = from; it != stack.end(); ++it) {
                        if (!members.empty()) members += ", ";
                        members += repo.class_label_.count(*it) ? repo.class_label_.at(*it) : *it;
                    }
                    throw FedError(ErrorCode::hierarchy_cycle,
                                   "parentOf cycle among concepts [" + members + "]");
                }
                if (state[next] == 0) visit(next);
            }
            stack.pop_back();
            state[node] = 2;
        };
        for (const auto& [node, _] : succ)
            if (state[node] == 0) visit(node);
    }

    for (const auto& v : value_universe) {
        std::string root = values.find(v);
        repo.value_members_[root].push_back(v);
    }
    for (auto& [root, members] : repo.value_members_) {
        std::sort(members.begin(), members.end());
        for (const auto& m : members) repo.value_class_[m] = members.front();
    }
    // Re-key members by representative (smallest member), not by union root.
    {
        std::map<std::string, std::vector<std::string>> rekeyed;
        for (auto& [root, members] : repo.value_members_) rekeyed[members.front()] = members;
        repo.value_members_ = std::move(rekeyed);
    }

    return repo;
}

ConceptId OntologyRepository::concept_of(std::string_view term) const {
    std::string key = fold_term(term);
    auto it = term_class_.find(key);
    if (it != term_class_.end()) return ConceptId{it->second};
    return ConceptId{std::move(key)};
}

bool OntologyRepository::knows_term(std::string_view term) const {
    return term_class_.count(fold_term(term)) > 0;
}

std::string OntologyRepository::label_of(const ConceptId& concept_id) const {
    auto it = class_label_.find(concept_id.key);
    return it != class_label_.end() ? it->second : concept_id.key;
}

std::set<ConceptId> OntologyRepository::parents_of(const ConceptId& concept_id) const {
    std::set<ConceptId> out;
    for (auto it = parent_edges_.lower_bound({concept_id.key, ""});
         it != parent_edges_.end() && it->first == concept_id.key; ++it)
        out.insert(ConceptId{it->second});
    return out;
}

std::set<ConceptId> OntologyRepository::generalizations_of(const ConceptId& concept_id) const {
    std::set<ConceptId> out;
    for (auto it = isa_edges_.lower_bound({concept_id.key, ""});
         it != isa_edges_.end() && it->first == concept_id.key; ++it)
        out.insert(ConceptId{it->second});
    return out;
}

const std::string& OntologyRepository::canonical_value(const std::string& value) const {
    auto it = value_class_.find(value);
    return it != value_class_.end() ? it->second : value;
}

std::vector<std::string> OntologyRepository::value_class(const std::string& value) const {
    auto it = value_class_.find(value);
    if (it == value_class_.end()) return {value};
    return value_members_.at(it->second);
}

bool similar(const OntologyRepository& repo, std::string_view a, std::string_view b) {
    return repo.concept_of(a) == repo.concept_of(b);
}

}  // namespace fedwh
