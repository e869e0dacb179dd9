#include "fedwh/integrator.hpp"

#include <algorithm>
#include <map>

#include "fedwh/error.hpp"

namespace fedwh {

namespace {

std::string location_str(const Location& loc) {
    return "(" + loc.component_id + ", " + loc.table + ", " + loc.local_name + ")";
}

/// Display name for a fresh federated element: the ontology class label when
/// the term is known, otherwise the first-seen local name.
std::string fed_name_for(const OntologyRepository& repo, const std::string& local_name) {
    if (repo.knows_term(local_name)) return repo.label_of(repo.concept_of(local_name));
    return local_name;
}

/// True when `parent` can already reach `child` along child->parent edges,
/// i.e. adding (child, parent) would close a cycle.
bool would_cycle(const FederationCatalog& catalog, const ConceptId& child,
                 const ConceptId& parent) {
    if (child == parent) return true;
    std::vector<ConceptId> frontier{parent};
    std::set<ConceptId> seen{parent};
    while (!frontier.empty()) {
        ConceptId node = frontier.back();
        frontier.pop_back();
        for (const auto& edge : catalog.hierarchy_edges) {
            if (!(edge.child == node)) continue;
            if (edge.parent == child) return true;
            if (seen.insert(edge.parent).second) frontier.push_back(edge.parent);
        }
    }
    return false;
}

/// Removes every trace of component_id so the component can be re-registered.
void purge_component(FederationCatalog& catalog, const std::string& component_id) {
    auto drop_locations = [&](std::set<Location>& locations) {
        for (auto it = locations.begin(); it != locations.end();)
            it = it->component_id == component_id ? locations.erase(it) : std::next(it);
    };
    for (auto& m : catalog.measures) drop_locations(m.locations);
    std::erase_if(catalog.measures,
                  [](const FederatedMeasure& m) { return m.locations.empty(); });
    for (auto& dim : catalog.dimensions) {
        for (auto& attr : dim.attributes) drop_locations(attr.locations);
        std::erase_if(dim.attributes,
                      [](const FederatedAttribute& a) { return a.locations.empty(); });
        std::erase_if(dim.source_tables,
                      [&](const auto& st) { return st.first == component_id; });
    }
    std::erase_if(catalog.dimensions, [](const FederatedDimension& d) {
        return d.attributes.empty() && d.source_tables.empty();
    });
    std::erase_if(catalog.hierarchy_edges, [&](const HierarchyEdge& e) {
        return e.child_fk.component_id == component_id;
    });
    std::erase_if(catalog.components, [&](const ComponentSchema& c) {
        return c.component_id == component_id;
    });
}

}  // namespace

const FederatedAttribute* FederatedDimension::find_attribute(const ConceptId& c) const {
    for (const auto& attr : attributes)
        if (attr.concept_id == c) return &attr;
    return nullptr;
}

FederatedMeasure* FederationCatalog::find_measure(const ConceptId& concept_id) {
    for (auto& m : measures)
        if (m.concept_id == concept_id) return &m;
    return nullptr;
}

FederatedDimension* FederationCatalog::find_dimension(const ConceptId& concept_id) {
    for (auto& dim : dimensions)
        if (dim.concept_id == concept_id) return &dim;
    return nullptr;
}

const ComponentSchema* FederationCatalog::find_component(std::string_view component_id) const {
    for (const auto& c : components)
        if (c.component_id == component_id) return &c;
    return nullptr;
}

void FederationCatalog::verify_invariants() const {
    auto corrupt = [](const std::string& what) {
        throw FedError(ErrorCode::catalog_corruption, what);
    };

    // Information preservation: catalog locations == declared elements, as
    // multisets (locations are sets, so equality plus count suffices).
    std::multiset<Location> held;
    for (const auto& m : measures) {
        if (m.locations.empty()) corrupt("measure '" + m.fed_name + "' has no locations");
        held.insert(m.locations.begin(), m.locations.end());
    }
    std::set<ConceptId> dim_concepts;
    for (const auto& dim : dimensions) {
        if (!dim_concepts.insert(dim.concept_id).second)
            corrupt("two federated dimensions share concept '" + dim.concept_id.key + "'");
        std::set<ConceptId> attr_concepts;
        for (const auto& attr : dim.attributes) {
            if (attr.locations.empty())
                corrupt("attribute '" + attr.fed_name + "' has no locations");
            if (!attr_concepts.insert(attr.concept_id).second)
                corrupt("dimension '" + dim.fed_name + "' holds two attributes of concept '" +
                        attr.concept_id.key + "'");
            held.insert(attr.locations.begin(), attr.locations.end());
        }
    }
    std::set<ConceptId> measure_concepts;
    for (const auto& m : measures)
        if (!measure_concepts.insert(m.concept_id).second)
            corrupt("two federated measures share concept '" + m.concept_id.key + "'");

    std::multiset<Location> declared;
    for (const auto& component : components) {
        for (const auto& m : component.fact.measures)
            declared.insert(Location{component.component_id, component.fact.name, m.name});
        for (const auto& dim : component.dimensions)
            for (const auto& attr : dim.attributes)
                declared.insert(Location{component.component_id, dim.name, attr.name});
    }
    if (held != declared) corrupt("location inventory does not match declared elements");

    // Hierarchy acyclicity over the deduplicated concept-pair projection.
    std::map<ConceptId, std::vector<ConceptId>> succ;
    for (const auto& edge : hierarchy_edges) succ[edge.child].push_back(edge.parent);
    std::map<ConceptId, int> state;
    auto visit = [&](auto&& self, const ConceptId& node) -> void {
        state[node] = 1;
        for (const auto& next : succ[node]) {
            if (state[next] == 1)
                corrupt("hierarchy cycle through '" + next.key + "'");
            if (state[next] == 0) self(self, next);
        }
        state[node] = 2;
    };
    std::vector<ConceptId> roots;
    for (const auto& [node, _] : succ) roots.push_back(node);
    for (const auto& node : roots)
        if (state[node] == 0) visit(visit, node);
}

void integrate_measures(FederationCatalog& catalog, const ComponentSchema& component,
                        const OntologyRepository& repo) {
    for (const auto& measure : component.fact.measures) {
        Location loc{component.component_id, component.fact.name, measure.name};
        ConceptId concept_id = repo.concept_of(measure.name);
        if (FederatedMeasure* existing = catalog.find_measure(concept_id)) {
            if (existing->aggregation != measure.default_aggregation)
                throw FedError(ErrorCode::aggregation_conflict,
                               "measure '" + existing->fed_name + "': " +
                                   aggregation_token(existing->aggregation) + " vs " +
                                   aggregation_token(measure.default_aggregation) + " at " +
                                   location_str(loc));
            existing->locations.insert(loc);
            catalog.build_log.push_back("measure " + existing->fed_name + ": added location " +
                                        location_str(loc));
        } else {
            FederatedMeasure fresh;
            fresh.fed_name = fed_name_for(repo, measure.name);
            fresh.concept_id = concept_id;
            fresh.locations.insert(loc);
            fresh.aggregation = measure.default_aggregation;
            fresh.term_known = repo.knows_term(measure.name);
            catalog.build_log.push_back("measure " + fresh.fed_name + ": created from " +
                                        location_str(loc));
            catalog.measures.push_back(std::move(fresh));
        }
    }
}

void integrate_dimension_into(FederationCatalog& catalog, const DimensionDescriptor& dimension,
                              const std::string& component_id, const OntologyRepository& repo) {
    ConceptId concept_id = repo.concept_of(dimension.name);
    FederatedDimension* target = catalog.find_dimension(concept_id);
    if (!target) {
        FederatedDimension fresh;
        fresh.fed_name = fed_name_for(repo, dimension.name);
        fresh.concept_id = concept_id;
        fresh.term_known = repo.knows_term(dimension.name);
        catalog.build_log.push_back("dimension " + fresh.fed_name + ": created from (" +
                                    component_id + ", " + dimension.name + ")");
        catalog.dimensions.push_back(std::move(fresh));
        target = &catalog.dimensions.back();
    } else {
        catalog.build_log.push_back("dimension " + target->fed_name + ": merged (" +
                                    component_id + ", " + dimension.name + ")");
    }
    target->source_tables.emplace(component_id, dimension.name);

    for (const auto& attr : dimension.attributes) {
        Location loc{component_id, dimension.name, attr.name};
        ConceptId attr_concept = repo.concept_of(attr.name);
        bool merged = false;
        for (auto& existing : target->attributes) {
            if (existing.concept_id == attr_concept) {
                existing.locations.insert(loc);
                existing.is_key = existing.is_key && attr.is_key;
                catalog.build_log.push_back("attribute " + target->fed_name + "." +
                                            existing.fed_name + ": added location " +
                                            location_str(loc));
                merged = true;
                break;
            }
        }
        if (!merged) {
            FederatedAttribute fresh;
            fresh.fed_name = fed_name_for(repo, attr.name);
            fresh.concept_id = attr_concept;
            fresh.locations.insert(loc);
            fresh.is_key = attr.is_key;
            fresh.term_known = repo.knows_term(attr.name);
            catalog.build_log.push_back("attribute " + target->fed_name + "." + fresh.fed_name +
                                        ": created from " + location_str(loc));
            target->attributes.push_back(std::move(fresh));
        }
    }
}

void integrate_component(FederationCatalog& catalog, const ComponentSchema& component,
                         const OntologyRepository& repo) {
    if (catalog.find_component(component.component_id)) {
        catalog.build_log.push_back("component " + component.component_id + ": re-registered");
        purge_component(catalog, component.component_id);
    }
    catalog.components.push_back(component);

    integrate_measures(catalog, component, repo);

    // Ancestor-first order integrates every parent level before the
    // dimensions that reference it, at any hierarchy depth.
    for (const DimensionDescriptor* dim : topological_dimensions(component))
        integrate_dimension_into(catalog, *dim, component.component_id, repo);

    for (const auto& dim : component.dimensions) {
        for (const auto& link : dim.parents) {
            const DimensionDescriptor* parent = component.find_dimension(link.dimension);
            HierarchyEdge edge;
            edge.child = repo.concept_of(dim.name);
            edge.parent = repo.concept_of(link.dimension);
            edge.child_fk = Location{component.component_id, dim.name, link.fk};
            edge.parent_key =
                Location{component.component_id, parent->name, parent->primary_key()->name};
            bool known = false;
            for (const auto& e : catalog.hierarchy_edges)
                if (e.child == edge.child && e.parent == edge.parent) known = true;
            if (!known && would_cycle(catalog, edge.child, edge.parent))
                throw FedError(ErrorCode::hierarchy_conflict,
                               "edge (" + dim.name + " -> " + link.dimension +
                                   ") would close a hierarchy cycle");
            catalog.hierarchy_edges.insert(edge);
            catalog.build_log.push_back("hierarchy: " + dim.name + " -> " + link.dimension +
                                        " witnessed by " + location_str(edge.child_fk));
        }
    }

    catalog.verify_invariants();
}

FederationCatalog build_federation(const std::vector<ComponentSchema>& components,
                                   const OntologyRepository& repo) {
    std::set<std::string> ids;
    for (const auto& component : components)
        if (!ids.insert(component.component_id).second)
            throw FedError(ErrorCode::duplicate_name,
                           "component id '" + component.component_id + "'");
    FederationCatalog catalog;
    for (const auto& component : components) integrate_component(catalog, component, repo);
    return catalog;
}

}  // namespace fedwh
