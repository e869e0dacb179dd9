#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fedwh/executor.hpp"
#include "fedwh/integrator.hpp"
#include "fedwh/ontology.hpp"
#include "fedwh/schema_model.hpp"

namespace fedwh_test {

struct GeneratorOptions {
    int min_components = 1;
    int max_components = 4;
    int max_dimensions = 8;
    int max_extra_attributes = 7;  // key + extras + up to 2 fks stays <= 10 columns
    bool with_data = false;
    int max_rows = 60;
    double dangling_rate = 0.0;
    int max_synonyms = 6;
};

struct RandomFederation {
    std::vector<fedwh::Triple> triples;
    fedwh::OntologyRepository repo;
    std::vector<fedwh::ComponentSchema> components;
    std::map<std::string, fedwh::ComponentTables> tables;  // filled when with_data
};

/// Deterministic random federation; draws that fail to build (synonym-induced
/// hierarchy self-edges and the like) are skipped by advancing a sub-seed.
RandomFederation make_random_federation(std::uint32_t seed, const GeneratorOptions& options = {});

/// A random query string over the catalog's federated names.
std::string make_random_query(std::mt19937& rng, const fedwh::FederationCatalog& catalog);

/// Label-free catalog form keyed by ConceptId, for order-independence checks.
struct CanonicalCatalog {
    std::map<std::string, std::set<fedwh::Location>> measures;
    std::map<std::string, std::map<std::string, std::set<fedwh::Location>>> dimensions;
    std::map<std::string, std::set<std::pair<std::string, std::string>>> sources;
    std::set<std::pair<std::string, std::string>> hierarchy;

    friend bool operator==(const CanonicalCatalog&, const CanonicalCatalog&) = default;
};

CanonicalCatalog canonicalize(const fedwh::FederationCatalog& catalog);

/// Independent recount of the information-preservation invariant.
bool information_preserved(const std::vector<fedwh::ComponentSchema>& components,
                           const fedwh::FederationCatalog& catalog);

/// Empty string when equal; otherwise a description of the first difference.
/// Measure cells under an AVG(...) header compare within avg_rel_tol.
std::string compare_results(const fedwh::ResultTable& a, const fedwh::ResultTable& b,
                            double avg_rel_tol);

}  // namespace fedwh_test
