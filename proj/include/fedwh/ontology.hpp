#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fedwh {

enum class Predicate {
    synonym_of,
    is_a,
    parent_of,
    same_value,
};

const char* predicate_token(Predicate p);

/// One `subject predicate object` statement from an ontology file.
/// `A parentOf B` states that A is the parent (coarser level) of B.
struct Triple {
    std::string subject;
    Predicate predicate{Predicate::synonym_of};
    std::string object;

    friend bool operator==(const Triple&, const Triple&) = default;
};

/// Identity of a synonym equivalence class. Two terms share a ConceptId iff
/// they are linked by synonymOf edges or are case-insensitively identical.
/// The key is the lexicographically smallest case-folded member, so it is
/// stable across input orderings.
struct ConceptId {
    std::string key;

    friend auto operator<=>(const ConceptId&, const ConceptId&) = default;
};

struct ExpertOverride {
    enum class Kind { force_similar, force_distinct };
    Kind kind{Kind::force_similar};
    std::string a;
    std::string b;
};

/// Trimmed, ASCII-lowercased form of a term; the unit of term identity.
std::string fold_term(std::string_view term);

/// Parses the line-oriented triple format: one `subject predicate object`
/// statement per line, runs of whitespace tolerated, `#` lines and blank
/// lines skipped. Throws FedError(malformed_triple) with the line number.
std::vector<Triple> parse_ontology(std::string_view text);

/// Override file: lines `force-similar a b` / `force-distinct a b`.
std::vector<ExpertOverride> parse_overrides(std::string_view text);

class OntologyRepository {
public:
    /// Computes synonym classes by union over synonymOf edges (after expert
    /// overrides are applied), lifts parentOf/isA to concept level and closes
    /// sameValue classes. Throws FedError(hierarchy_cycle) when the concept
    /// parentOf graph is cyclic and FedError(conflicting_override) when one
    /// pair is forced both ways.
    static OntologyRepository build(const std::vector<Triple>& triples,
                                    const std::vector<ExpertOverride>& overrides = {});

    ConceptId concept_of(std::string_view term) const;

    /// True iff the class of `term` was observed in a triple or override.
    bool knows_term(std::string_view term) const;

    /// Canonical display label of a class: the lexicographically smallest
    /// spelling observed for it. Falls back to the key for unseen classes.
    std::string label_of(const ConceptId& concept_id) const;

    /// Direct (non-transitive) parentOf successors at concept level.
    std::set<ConceptId> parents_of(const ConceptId& concept_id) const;

    /// Direct isA generalizations; stored for reporting, never drives merging.
    std::set<ConceptId> generalizations_of(const ConceptId& concept_id) const;

    /// Representative of a literal's sameValue class (lexicographically
    /// smallest member); the literal itself when unmapped.
    const std::string& canonical_value(const std::string& value) const;

    /// All members of a literal's sameValue class, the literal included.
    std::vector<std::string> value_class(const std::string& value) const;

    std::size_t term_count() const { return term_class_.size(); }

private:
    std::map<std::string, std::string> term_class_;       // folded term -> class key
    std::map<std::string, std::string> class_label_;      // class key -> display label
    std::set<std::pair<std::string, std::string>> parent_edges_;  // (child key, parent key)
    std::set<std::pair<std::string, std::string>> isa_edges_;     // (child key, parent key)
    std::map<std::string, std::string> value_class_;      // literal -> representative
    std::map<std::string, std::vector<std::string>> value_members_;  // representative -> members
};

/// One predicate behind all three similarity relations (dimensions,
/// attributes, measures): concept equality.
bool similar(const OntologyRepository& repo, std::string_view a, std::string_view b);

}  // namespace fedwh
