#pragma once

#include <set>
#include <string>
#include <vector>

#include "fedwh/ontology.hpp"
#include "fedwh/schema_model.hpp"

namespace fedwh {

/// Where a federated element physically lives. component_id disambiguates
/// equal table names across components.
struct Location {
    std::string component_id;
    std::string table;
    std::string local_name;

    friend auto operator<=>(const Location&, const Location&) = default;
};

struct FederatedAttribute {
    std::string fed_name;
    ConceptId concept_id;
    std::set<Location> locations;
    bool is_key = false;       // true while every location is a key column
    bool term_known = false;   // the name (or a synonym of it) appears in the ontology
};

struct FederatedMeasure {
    std::string fed_name;
    ConceptId concept_id;
    std::set<Location> locations;
    Aggregation aggregation = Aggregation::sum;
    bool term_known = false;
};

struct FederatedDimension {
    std::string fed_name;
    ConceptId concept_id;
    std::vector<FederatedAttribute> attributes;
    std::set<std::pair<std::string, std::string>> source_tables;  // (component_id, table)
    bool term_known = false;

    const FederatedAttribute* find_attribute(const ConceptId& concept_id) const;
};

/// A component-level parent link lifted to federated dimensions, witnessed
/// by the (child fk column, parent key column) location pair.
struct HierarchyEdge {
    ConceptId child;
    ConceptId parent;
    Location child_fk;
    Location parent_key;

    friend auto operator<=>(const HierarchyEdge&, const HierarchyEdge&) = default;
};

/// The federation's logical schema: federated measures and dimensions with
/// their location inventories, plus the dimension hierarchy.
struct FederationCatalog {
    std::vector<FederatedMeasure> measures;
    std::vector<FederatedDimension> dimensions;
    std::set<HierarchyEdge> hierarchy_edges;
    std::vector<ComponentSchema> components;
    std::vector<std::string> build_log;

    FederatedMeasure* find_measure(const ConceptId& concept_id);
    FederatedDimension* find_dimension(const ConceptId& concept_id);
    const ComponentSchema* find_component(std::string_view component_id) const;

    /// Checks information preservation, concept uniqueness and hierarchy
    /// acyclicity; throws FedError(catalog_corruption) on violation.
    void verify_invariants() const;
};

/// Folds one component's fact measures into the catalog; a measure lands in
/// an existing federated measure when their concepts match, otherwise it is
/// appended. Throws FedError(aggregation_conflict) on default-aggregation
/// disagreement.
void integrate_measures(FederationCatalog& catalog, const ComponentSchema& component,
                        const OntologyRepository& repo);

/// Folds one dimension table into the catalog: merge into a similar
/// federated dimension when one exists (growing attribute inventories),
/// else create a new one. Ancestors must already be integrated in this pass.
void integrate_dimension_into(FederationCatalog& catalog, const DimensionDescriptor& dimension,
                              const std::string& component_id, const OntologyRepository& repo);

/// Registers the component, integrates measures first, then dimensions in
/// ancestor-first order, then records hierarchy edges. Re-registering an
/// existing component_id replaces its previous contribution.
void integrate_component(FederationCatalog& catalog, const ComponentSchema& component,
                         const OntologyRepository& repo);

/// Empty catalog folded over the components in the given order.
FederationCatalog build_federation(const std::vector<ComponentSchema>& components,
                                   const OntologyRepository& repo);

struct MappingReport {
    std::string text;
    std::string json;
    std::vector<std::string> singleton_candidates;  // one-location names absent from the ontology
};

MappingReport mapping_report(const FederationCatalog& catalog);

/// Stable serialization: lexicographic keys, deterministic array order, so
/// identical inputs give byte-identical output.
std::string catalog_to_json(const FederationCatalog& catalog);
FederationCatalog catalog_from_json(std::string_view text);

}  // namespace fedwh
