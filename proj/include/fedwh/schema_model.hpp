#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fedwh {

enum class Aggregation { sum, count, avg, min, max };

const char* aggregation_token(Aggregation agg);
Aggregation aggregation_from_token(std::string_view token);  // throws parse_error

struct AttributeDescriptor {
    std::string name;
    bool is_key = false;

    friend bool operator==(const AttributeDescriptor&, const AttributeDescriptor&) = default;
};

struct MeasureDescriptor {
    std::string name;
    Aggregation default_aggregation = Aggregation::sum;

    friend bool operator==(const MeasureDescriptor&, const MeasureDescriptor&) = default;
};

/// A (dimension, fk) reference: the fk column on the referencing side joins
/// against the target dimension's primary key (its first key attribute).
struct TableLink {
    std::string dimension;
    std::string fk;

    friend bool operator==(const TableLink&, const TableLink&) = default;
};

struct DimensionDescriptor {
    std::string name;
    std::vector<AttributeDescriptor> attributes;
    std::vector<TableLink> parents;

    const AttributeDescriptor* primary_key() const;  // first key attribute, or nullptr

    friend bool operator==(const DimensionDescriptor&, const DimensionDescriptor&) = default;
};

struct FactDescriptor {
    std::string name;
    std::vector<MeasureDescriptor> measures;
    std::vector<TableLink> links;

    friend bool operator==(const FactDescriptor&, const FactDescriptor&) = default;
};

/// One component warehouse: a single fact table plus its dimension tables,
/// backed by `<table>.csv` files under data_dir.
struct ComponentSchema {
    std::string component_id;
    FactDescriptor fact;
    std::vector<DimensionDescriptor> dimensions;
    std::string data_dir;

    const DimensionDescriptor* find_dimension(std::string_view name) const;

    friend bool operator==(const ComponentSchema&, const ComponentSchema&) = default;
};

enum class SchemaKind { star, snowflake };

/// Parses and validates a component descriptor (the schema.json format).
/// data_dir is attached as given; it does not participate in validation.
ComponentSchema parse_component(std::string_view descriptor_json, std::string data_dir = {});

/// Inverse of parse_component up to formatting; parse(serialize(s)) == s.
std::string serialize_component(const ComponentSchema& schema);

/// star iff every dimension has an empty parent set.
SchemaKind classify(const ComponentSchema& schema);

/// Ancestor-first order over the dimension tables; ties broken by
/// declaration order. A pure star schema comes back in declaration order.
std::vector<const DimensionDescriptor*> topological_dimensions(const ComponentSchema& schema);

}  // namespace fedwh
