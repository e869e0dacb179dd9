#include "fedwh/schema_model.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "fedwh/error.hpp"

namespace fedwh {

using nlohmann::json;

const char* aggregation_token(Aggregation agg) {
    switch (agg) {
        case Aggregation::sum: return "SUM";
        case Aggregation::count: return "COUNT";
        case Aggregation::avg: return "AVG";
        case Aggregation::min: return "MIN";
        case Aggregation::max: return "MAX";
    }
    return "?";
}

Aggregation aggregation_from_token(std::string_view token) {
    std::string upper(token);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    if (upper == "SUM") return Aggregation::sum;
    if (upper == "COUNT") return Aggregation::count;
    if (upper == "AVG") return Aggregation::avg;
    if (upper == "MIN") return Aggregation::min;
    if (upper == "MAX") return Aggregation::max;
    throw FedError(ErrorCode::parse_error, "unknown aggregation '" + std::string(token) + "'");
}

const AttributeDescriptor* DimensionDescriptor::primary_key() const {
    for (const auto& attr : attributes)
        if (attr.is_key) return &attr;
    return nullptr;
}

const DimensionDescriptor* ComponentSchema::find_dimension(std::string_view name) const {
    for (const auto& dim : dimensions)
        if (dim.name == name) return &dim;
    return nullptr;
}

namespace {

[[noreturn]] void fail_parse(const std::string& where, const std::string& what) {
    throw FedError(ErrorCode::parse_error, where + ": " + what);
}

std::string require_string(const json& obj, const char* field, const std::string& where) {
    if (!obj.contains(field) || !obj[field].is_string() || obj[field].get<std::string>().empty())
        fail_parse(where, std::string("missing or empty '") + field + "'");
    return obj[field].get<std::string>();
}

std::vector<TableLink> parse_links(const json& arr, const std::string& where) {
    std::vector<TableLink> links;
    for (const auto& item : arr) {
        if (!item.is_object()) fail_parse(where, "link entries must be objects");
        links.push_back(TableLink{require_string(item, "dimension", where),
                                  require_string(item, "fk", where)});
    }
    return links;
}

void reject_duplicates(const std::vector<std::string>& names, const std::string& scope) {
    std::set<std::string> seen;
    for (const auto& name : names)
        if (!seen.insert(name).second)
            throw FedError(ErrorCode::duplicate_name, scope + ": '" + name + "'");
}

void validate(const ComponentSchema& schema) {
    std::vector<std::string> dim_names;
    for (const auto& dim : schema.dimensions) dim_names.push_back(dim.name);
    reject_duplicates(dim_names, "dimensions of " + schema.component_id);
    if (std::find(dim_names.begin(), dim_names.end(), schema.fact.name) != dim_names.end())
        throw FedError(ErrorCode::duplicate_name,
                       "table '" + schema.fact.name + "' declared as both fact and dimension");

    std::vector<std::string> measure_names;
    for (const auto& m : schema.fact.measures) measure_names.push_back(m.name);
    reject_duplicates(measure_names, "measures of " + schema.fact.name);

    std::set<std::string> linked;
    std::set<std::string> fact_columns(measure_names.begin(), measure_names.end());
    for (const auto& link : schema.fact.links) {
        if (!linked.insert(link.dimension).second)
            throw FedError(ErrorCode::duplicate_name,
                           "fact '" + schema.fact.name + "' links dimension '" + link.dimension +
                               "' twice");
        if (!fact_columns.insert(link.fk).second)
            throw FedError(ErrorCode::duplicate_name,
                           "fact '" + schema.fact.name + "' column '" + link.fk + "'");
        const DimensionDescriptor* target = schema.find_dimension(link.dimension);
        if (!target)
            throw FedError(ErrorCode::dangling_parent,
                           "fact '" + schema.fact.name + "' links unknown dimension '" +
                               link.dimension + "'");
        if (!target->primary_key())
            fail_parse("fact '" + schema.fact.name + "'",
                       "linked dimension '" + link.dimension + "' declares no key attribute");
    }

    for (const auto& dim : schema.dimensions) {
        std::vector<std::string> attr_names;
        for (const auto& attr : dim.attributes) attr_names.push_back(attr.name);
        reject_duplicates(attr_names, "attributes of " + dim.name);

        std::set<std::string> parent_names;
        for (const auto& link : dim.parents) {
            if (!parent_names.insert(link.dimension).second)
                throw FedError(ErrorCode::duplicate_name,
                               "dimension '" + dim.name + "' lists parent '" + link.dimension +
                                   "' twice");
            const DimensionDescriptor* target = schema.find_dimension(link.dimension);
            if (!target)
                throw FedError(ErrorCode::dangling_parent,
                               "dimension '" + dim.name + "' references unknown parent '" +
                                   link.dimension + "'");
            if (std::find(attr_names.begin(), attr_names.end(), link.fk) == attr_names.end())
                fail_parse("dimension '" + dim.name + "'",
                           "fk '" + link.fk + "' is not one of its attributes");
            if (!target->primary_key())
                fail_parse("dimension '" + dim.name + "'",
                           "parent '" + link.dimension + "' declares no key attribute");
        }
    }

    // Parent graph acyclicity, reported with the offending chain.
    std::map<std::string, int> state;
    std::vector<std::string> stack;
    auto visit = [&](auto&& self, const DimensionDescriptor& dim) -> void {
        state[dim.name] = 1;
        stack.push_back(dim.name);
        for (const auto& link : dim.parents) {
            int s = state[link.dimension];
            if (s == 1) {
                auto from = std::find(stack.begin(), stack.end(), link.dimension);
                std::string members;
                for (auto it = from; it != stack.end(); ++it) {
                    if (!members.empty()) members += ", ";
                    members += *it;
                }
                throw FedError(ErrorCode::parent_cycle, "parent cycle [" + members + "]");
            }
            if (s == 0) self(self, *schema.find_dimension(link.dimension));
        }
        stack.pop_back();
        state[dim.name] = 2;
    };
    for (const auto& dim : schema.dimensions)
        if (state[dim.name] == 0) visit(visit, dim);
}

}  // namespace

ComponentSchema parse_component(std::string_view descriptor_json, std::string data_dir) {
    json doc = json::parse(descriptor_json, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        fail_parse("descriptor", "not a JSON object");

    ComponentSchema schema;
    schema.component_id = require_string(doc, "component_id", "descriptor");
    schema.data_dir = std::move(data_dir);

    if (!doc.contains("fact") || !doc["fact"].is_object())
        fail_parse(schema.component_id, "missing 'fact' object");
    const json& fact = doc["fact"];
    schema.fact.name = require_string(fact, "name", schema.component_id + ".fact");
    for (const auto& m : fact.value("measures", json::array())) {
        if (!m.is_object()) fail_parse(schema.fact.name, "measure entries must be objects");
        schema.fact.measures.push_back(
            MeasureDescriptor{require_string(m, "name", schema.fact.name + ".measures"),
                              aggregation_from_token(require_string(m, "agg", schema.fact.name))});
    }
    schema.fact.links = parse_links(fact.value("links", json::array()), schema.fact.name + ".links");

    for (const auto& d : doc.value("dimensions", json::array())) {
        if (!d.is_object()) fail_parse(schema.component_id, "dimension entries must be objects");
        DimensionDescriptor dim;
        dim.name = require_string(d, "name", schema.component_id + ".dimensions");
        for (const auto& a : d.value("attributes", json::array())) {
            if (!a.is_object()) fail_parse(dim.name, "attribute entries must be objects");
            AttributeDescriptor attr;
            attr.name = require_string(a, "name", dim.name + ".attributes");
            attr.is_key = a.value("key", false);
            dim.attributes.push_back(std::move(attr));
        }
        dim.parents = parse_links(d.value("parents", json::array()), dim.name + ".parents");
        schema.dimensions.push_back(std::move(dim));
    }

    validate(schema);
    return schema;
}

std::string serialize_component(const ComponentSchema& schema) {
    json doc;
    doc["component_id"] = schema.component_id;
    doc["fact"]["name"] = schema.fact.name;
    doc["fact"]["measures"] = json::array();
    for (const auto& m : schema.fact.measures)
        doc["fact"]["measures"].push_back(
            {{"name", m.name}, {"agg", aggregation_token(m.default_aggregation)}});
    doc["fact"]["links"] = json::array();
    for (const auto& link : schema.fact.links)
        doc["fact"]["links"].push_back({{"dimension", link.dimension}, {"fk", link.fk}});
    doc["dimensions"] = json::array();
    for (const auto& dim : schema.dimensions) {
        json d;
        d["name"] = dim.name;
        d["attributes"] = json::array();
        for (const auto& attr : dim.attributes)
            d["attributes"].push_back({{"name", attr.name}, {"key", attr.is_key}});
        d["parents"] = json::array();
        for (const auto& link : dim.parents)
            d["parents"].push_back({{"dimension", link.dimension}, {"fk", link.fk}});
        doc["dimensions"].push_back(std::move(d));
    }
    return doc.dump(2);
}

SchemaKind classify(const ComponentSchema& schema) {
    for (const auto& dim : schema.dimensions)
        if (!dim.parents.empty()) return SchemaKind::snowflake;
    return SchemaKind::star;
}

std::vector<const DimensionDescriptor*> topological_dimensions(const ComponentSchema& schema) {
    std::vector<const DimensionDescriptor*> order;
    std::vector<bool> placed(schema.dimensions.size(), false);
    std::set<std::string> done;

    // Kahn's algorithm, always taking the earliest declared ready dimension,
    // so star schemas come out in declaration order.
    for (std::size_t taken = 0; taken < schema.dimensions.size(); ++taken) {
        for (std::size_t i = 0; i < schema.dimensions.size(); ++i) {
            if (placed[i]) continue;
            const auto& dim = schema.dimensions[i];
            bool ready = std::all_of(dim.parents.begin(), dim.parents.end(),
                                     [&](const TableLink& l) { return done.count(l.dimension); });
            if (ready) {
                placed[i] = true;
                done.insert(dim.name);
                order.push_back(&dim);
                break;
            }
        }
    }
    return order;
}

}  // namespace fedwh
