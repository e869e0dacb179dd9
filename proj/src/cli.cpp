#include "fedwh/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include "csv.hpp"
#include "fedwh/error.hpp"
#include "fedwh/executor.hpp"
#include "fedwh/integrator.hpp"
#include "fedwh/ontology.hpp"
#include "fedwh/query_planner.hpp"
#include "fedwh/schema_model.hpp"

namespace fedwh {

namespace {

namespace fs = std::filesystem;

OntologyRepository build_repository_from_config(const FederationConfig& config) {
    std::vector<Triple> triples;
    for (const auto& file : config.ontology_files) {
        auto parsed = parse_ontology(text::read_file(file));
        triples.insert(triples.end(), parsed.begin(), parsed.end());
    }
    std::vector<ExpertOverride> overrides;
    if (config.override_file) overrides = parse_overrides(text::read_file(*config.override_file));
    return OntologyRepository::build(triples, overrides);
}

std::vector<ComponentSchema> load_components(const FederationConfig& config) {
    std::vector<ComponentSchema> components;
    for (const auto& dir : config.component_dirs) {
        fs::path descriptor = fs::path(dir) / "schema.json";
        components.push_back(parse_component(text::read_file(descriptor.string()), dir));
    }
    return components;
}

int report_error(const FedError& e, std::ostream& err) {
    err << e.what() << "\n";
    return e.code() == ErrorCode::config_error ? exit_usage_error : exit_domain_error;
}

}  // namespace

int cmd_integrate(const std::string& config_path, const std::string& catalog_override,
                  std::ostream& out, std::ostream& err) {
    try {
        FederationConfig config = load_config(config_path);
        OntologyRepository repo = build_repository_from_config(config);
        FederationCatalog catalog = build_federation(load_components(config), repo);

        std::string catalog_path = catalog_override.empty() ? config.catalog_out : catalog_override;
        std::ofstream file(catalog_path, std::ios::binary | std::ios::trunc);
        if (!file) throw FedError(ErrorCode::io_error, "cannot write '" + catalog_path + "'");
        file << catalog_to_json(catalog);
        file.close();

        out << mapping_report(catalog).text;
        err << "catalog written to " << catalog_path << "\n";
        return exit_ok;
    } catch (const FedError& e) {
        return report_error(e, err);
    }
}

int cmd_query(const std::string& catalog_path, const std::string& config_path,
              const std::string& query_text, const std::string& format, bool explain_only,
              std::ostream& out, std::ostream& err) {
    try {
        if (format != "csv" && format != "json")
            throw FedError(ErrorCode::config_error, "unknown format '" + format + "'");
        FederationConfig config = load_config(config_path);
        OntologyRepository repo = build_repository_from_config(config);
        FederationCatalog catalog = catalog_from_json(text::read_file(catalog_path));
        FederatedQuery query = parse_query(query_text);

        if (explain_only) {
            out << explain(query, catalog, repo);
            return exit_ok;
        }

        // Load data only for components the plan keeps; an excluded
        // component with broken files must not block the query.
        QueryPlan qp = plan(query, catalog, repo);
        std::map<std::string, ComponentTables> tables;
        for (const auto& sub : qp.subplans)
            tables.emplace(sub.component_id,
                           load_tables(*catalog.find_component(sub.component_id)));

        FederatedResult result = execute_federated(query, catalog, repo, tables);
        for (const auto& warning : result.warnings) err << "warning: " << warning << "\n";
        if (result.dangling_dropped > 0)
            err << "warning: " << result.dangling_dropped
                << " fact row(s) dropped on dangling foreign keys\n";
        out << (format == "json" ? result_to_json(result.table) : result_to_csv(result.table));
        return exit_ok;
    } catch (const FedError& e) {
        return report_error(e, err);
    }
}

int cmd_check(const std::string& config_path, std::ostream& out, std::ostream& err) {
    try {
        FederationConfig config = load_config(config_path);
        OntologyRepository repo = build_repository_from_config(config);
        std::vector<ComponentSchema> components = load_components(config);
        for (const auto& component : components) load_tables(component);

        // A throwaway integration surfaces merge candidates without writing.
        FederationCatalog catalog = build_federation(components, repo);
        for (const auto& candidate : mapping_report(catalog).singleton_candidates)
            out << "candidate: " << candidate << " has a single location and no ontology entry\n";
        out << "OK: " << components.size() << " component(s), " << repo.term_count()
            << " ontology term(s)\n";
        return exit_ok;
    } catch (const FedError& e) {
        return report_error(e, err);
    }
}

}  // namespace fedwh
