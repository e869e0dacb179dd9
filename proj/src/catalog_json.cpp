#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "fedwh/error.hpp"
#include "fedwh/integrator.hpp"

namespace fedwh {

using nlohmann::json;  // map-backed: object keys serialize in lexicographic order

namespace {

json location_to_json(const Location& loc) {
    return {{"component", loc.component_id}, {"table", loc.table}, {"name", loc.local_name}};
}

Location location_from_json(const json& j) {
    return Location{j.at("component").get<std::string>(), j.at("table").get<std::string>(),
                    j.at("name").get<std::string>()};
}

json locations_to_json(const std::set<Location>& locations) {
    json arr = json::array();
    for (const auto& loc : locations) arr.push_back(location_to_json(loc));
    return arr;
}

}  // namespace

std::string catalog_to_json(const FederationCatalog& catalog) {
    json doc;
    doc["measures"] = json::array();
    for (const auto& m : catalog.measures) {
        doc["measures"].push_back({{"name", m.fed_name},
                                   {"concept", m.concept_id.key},
                                   {"agg", aggregation_token(m.aggregation)},
                                   {"in_ontology", m.term_known},
                                   {"locations", locations_to_json(m.locations)}});
    }
    doc["dimensions"] = json::array();
    for (const auto& dim : catalog.dimensions) {
        json d;
        d["name"] = dim.fed_name;
        d["concept"] = dim.concept_id.key;
        d["in_ontology"] = dim.term_known;
        d["attributes"] = json::array();
        for (const auto& attr : dim.attributes)
            d["attributes"].push_back({{"name", attr.fed_name},
                                       {"concept", attr.concept_id.key},
                                       {"key", attr.is_key},
                                       {"in_ontology", attr.term_known},
                                       {"locations", locations_to_json(attr.locations)}});
        d["source_tables"] = json::array();
        for (const auto& [component, table] : dim.source_tables)
            d["source_tables"].push_back({{"component", component}, {"table", table}});
        doc["dimensions"].push_back(std::move(d));
    }
    doc["hierarchy"] = json::array();
    for (const auto& edge : catalog.hierarchy_edges)
        doc["hierarchy"].push_back({{"child", edge.child.key},
                                    {"parent", edge.parent.key},
                                    {"child_fk", location_to_json(edge.child_fk)},
                                    {"parent_key", location_to_json(edge.parent_key)}});
    doc["components"] = json::array();
    for (const auto& component : catalog.components)
        doc["components"].push_back({{"id", component.component_id},
                                     {"data_dir", component.data_dir},
                                     {"schema", json::parse(serialize_component(component))}});
    doc["build_log"] = catalog.build_log;
    return doc.dump(2) + "\n";
}

FederationCatalog catalog_from_json(std::string_view text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw FedError(ErrorCode::parse_error, "catalog: not a JSON object");

    FederationCatalog catalog;
    try {
        for (const auto& m : doc.at("measures")) {
            FederatedMeasure measure;
            measure.fed_name = m.at("name").get<std::string>();
            measure.concept_id = ConceptId{m.at("concept").get<std::string>()};
            measure.aggregation = aggregation_from_token(m.at("agg").get<std::string>());
            measure.term_known = m.at("in_ontology").get<bool>();
            for (const auto& loc : m.at("locations"))
                measure.locations.insert(location_from_json(loc));
            catalog.measures.push_back(std::move(measure));
        }
        for (const auto& d : doc.at("dimensions")) {
            FederatedDimension dim;
            dim.fed_name = d.at("name").get<std::string>();
            dim.concept_id = ConceptId{d.at("concept").get<std::string>()};
            dim.term_known = d.at("in_ontology").get<bool>();
            for (const auto& a : d.at("attributes")) {
                FederatedAttribute attr;
                attr.fed_name = a.at("name").get<std::string>();
                attr.concept_id = ConceptId{a.at("concept").get<std::string>()};
                attr.is_key = a.at("key").get<bool>();
                attr.term_known = a.at("in_ontology").get<bool>();
                for (const auto& loc : a.at("locations"))
                    attr.locations.insert(location_from_json(loc));
                dim.attributes.push_back(std::move(attr));
            }
            for (const auto& st : d.at("source_tables"))
                dim.source_tables.emplace(st.at("component").get<std::string>(),
                                          st.at("table").get<std::string>());
            catalog.dimensions.push_back(std::move(dim));
        }
        for (const auto& e : doc.at("hierarchy")) {
            HierarchyEdge edge;
            edge.child = ConceptId{e.at("child").get<std::string>()};
            edge.parent = ConceptId{e.at("parent").get<std::string>()};
            edge.child_fk = location_from_json(e.at("child_fk"));
            edge.parent_key = location_from_json(e.at("parent_key"));
            catalog.hierarchy_edges.insert(edge);
        }
        for (const auto& c : doc.at("components")) {
            ComponentSchema schema = parse_component(c.at("schema").dump(),
                                                     c.at("data_dir").get<std::string>());
            if (schema.component_id != c.at("id").get<std::string>())
                throw FedError(ErrorCode::parse_error, "catalog: component id mismatch");
            catalog.components.push_back(std::move(schema));
        }
        if (doc.contains("build_log"))
            catalog.build_log = doc.at("build_log").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw FedError(ErrorCode::parse_error, std::string("catalog: ") + e.what());
    }
    return catalog;
}

MappingReport mapping_report(const FederationCatalog& catalog) {
    MappingReport report;
    std::ostringstream out;
    json machine;
    machine["measures"] = json::array();
    machine["dimensions"] = json::array();
    machine["singleton_candidates"] = json::array();

    if (catalog.measures.empty() && catalog.dimensions.empty()) {
        report.text = "";
        report.json = machine.dump(2) + "\n";
        return report;
    }

    auto flag_singleton = [&](const std::string& kind, const std::string& name,
                              const std::set<Location>& locations, bool term_known) {
        if (locations.size() == 1 && !term_known) {
            report.singleton_candidates.push_back(kind + " " + name);
            machine["singleton_candidates"].push_back({{"kind", kind}, {"name", name}});
        }
    };

    out << "Federated measures (" << catalog.measures.size() << "):\n";
    for (const auto& m : catalog.measures) {
        out << "  " << m.fed_name << " [" << aggregation_token(m.aggregation) << "]";
        for (const auto& loc : m.locations)
            out << " (" << loc.component_id << "." << loc.table << "." << loc.local_name << ")";
        out << "\n";
        machine["measures"].push_back({{"name", m.fed_name},
                                       {"agg", aggregation_token(m.aggregation)},
                                       {"locations", m.locations.size()}});
        flag_singleton("measure", m.fed_name, m.locations, m.term_known);
    }

    out << "Federated dimensions (" << catalog.dimensions.size() << "):\n";
    for (const auto& dim : catalog.dimensions) {
        out << "  " << dim.fed_name << " <-";
        for (const auto& [component, table] : dim.source_tables)
            out << " " << component << "." << table;
        out << "\n";
        json dj{{"name", dim.fed_name}, {"attributes", json::array()}};
        for (bool keys_pass : {false, true}) {
            for (const auto& attr : dim.attributes) {
                if (attr.is_key != keys_pass) continue;
                out << "    " << (attr.is_key ? "[key] " : "") << attr.fed_name << ":";
                for (const auto& loc : attr.locations)
                    out << " (" << loc.component_id << "." << loc.table << "." << loc.local_name
                        << ")";
                out << "\n";
                dj["attributes"].push_back(
                    {{"name", attr.fed_name}, {"key", attr.is_key},
                     {"locations", attr.locations.size()}});
                if (!attr.is_key)
                    flag_singleton("attribute", dim.fed_name + "." + attr.fed_name,
                                   attr.locations, attr.term_known);
            }
        }
        machine["dimensions"].push_back(std::move(dj));
    }

    if (!catalog.hierarchy_edges.empty()) {
        out << "Hierarchy edges (" << catalog.hierarchy_edges.size() << "):\n";
        for (const auto& edge : catalog.hierarchy_edges)
            out << "  " << edge.child.key << " -> " << edge.parent.key << "  via "
                << edge.child_fk.component_id << "." << edge.child_fk.table << "."
                << edge.child_fk.local_name << "\n";
    }

    if (!report.singleton_candidates.empty()) {
        out << "Merge candidates (single location, not in ontology):\n";
        for (const auto& name : report.singleton_candidates) out << "  " << name << "\n";
    }

    report.text = out.str();
    report.json = machine.dump(2) + "\n";
    return report;
}

}  // namespace fedwh
