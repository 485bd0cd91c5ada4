#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vthing/containers.hpp"
#include "vthing/error.hpp"
#include "vthing/json.hpp"

namespace vthing {

enum class SchemaType { Null, Boolean, Integer, Number, String, Array, Object };

inline std::string_view to_string(SchemaType type)
{
    switch (type) {
    case SchemaType::Null: return "null";
    case SchemaType::Boolean: return "boolean";
    case SchemaType::Integer: return "integer";
    case SchemaType::Number: return "number";
    case SchemaType::String: return "string";
    case SchemaType::Array: return "array";
    case SchemaType::Object: return "object";
    }
    return "null";
}

inline std::optional<SchemaType> schema_type_from_string(std::string_view name)
{
    if (name == "null") return SchemaType::Null;
    if (name == "boolean") return SchemaType::Boolean;
    if (name == "integer") return SchemaType::Integer;
    if (name == "number") return SchemaType::Number;
    if (name == "string") return SchemaType::String;
    if (name == "array") return SchemaType::Array;
    if (name == "object") return SchemaType::Object;
    return std::nullopt;
}

/// The JSON Schema subset that drives generation and validation:
/// type/enum/const/oneOf for every type, minimum/maximum for numbers,
/// items/minItems/maxItems for arrays, properties/required for objects.
/// Any other keyword is dropped at extraction.
struct DataSchema {
    std::optional<SchemaType> type;
    std::optional<std::vector<Json>> enum_values;
    std::optional<Json> const_value;
    std::optional<std::vector<DataSchema>> one_of;
    std::optional<double> minimum;
    std::optional<double> maximum;
    Box<DataSchema> items;
    std::optional<std::uint64_t> min_items;
    std::optional<std::uint64_t> max_items;
    std::optional<OrderedMap<DataSchema>> properties;
    std::optional<std::vector<std::string>> required;

    bool operator==(const DataSchema&) const = default;

    /// True when nothing constrains the value at all.
    bool empty() const
    {
        return !type && !enum_values && !const_value && !one_of && !minimum && !maximum && !items &&
               !min_items && !max_items && !properties && !required;
    }

    /// Throws Error(InvalidSchemaBounds / TypeMismatch) when this schema or
    /// any nested schema breaks a structural invariant.
    void check_invariants(const std::string& where = "") const
    {
        if (minimum && maximum && *minimum > *maximum)
            throw Error(Errc::InvalidSchemaBounds, "minimum > maximum at '" + where + "'");
        if (min_items && max_items && *min_items > *max_items)
            throw Error(Errc::InvalidSchemaBounds, "minItems > maxItems at '" + where + "'");
        if (enum_values && enum_values->empty())
            throw Error(Errc::TypeMismatch, "enum must be a non-empty array at '" + where + "'");
        if (one_of && one_of->empty())
            throw Error(Errc::TypeMismatch, "oneOf must be a non-empty array at '" + where + "'");
        if (items)
            items->check_invariants(where + "/items");
        if (one_of)
            for (std::size_t i = 0; i < one_of->size(); ++i)
                (*one_of)[i].check_invariants(where + "/oneOf/" + std::to_string(i));
        if (properties)
            for (const auto& [name, sub] : *properties)
                sub.check_invariants(where + "/properties/" + escape_pointer_token(name));
    }

    /// Nesting depth of the schema tree (a leaf is 0).
    std::size_t nesting() const
    {
        std::size_t deepest = 0;
        auto visit = [&](const DataSchema& s) { deepest = std::max(deepest, 1 + s.nesting()); };
        if (items)
            visit(*items);
        if (one_of)
            for (const auto& s : *one_of)
                visit(s);
        if (properties)
            for (const auto& [name, s] : *properties)
                visit(s);
        return deepest;
    }
};

struct Form {
    std::string href;
    std::optional<std::string> content_type;
    std::optional<std::vector<std::string>> op;

    std::string effective_content_type() const { return content_type.value_or("application/json"); }

    bool operator==(const Form&) const = default;
};

// Each affordance keeps its complete source object in `raw`; the typed
// fields are views extracted from it and `raw` is what gets serialized.

struct PropertyAffordance {
    DataSchema data_schema;
    bool read_only = false;
    bool observable = false;
    std::vector<Form> forms;
    Json raw = Json::object();

    bool operator==(const PropertyAffordance&) const = default;
};

struct ActionAffordance {
    std::optional<DataSchema> input;
    std::optional<DataSchema> output;
    std::vector<Form> forms;
    Json raw = Json::object();

    bool operator==(const ActionAffordance&) const = default;
};

struct EventAffordance {
    std::optional<DataSchema> data;
    std::vector<Form> forms;
    Json raw = Json::object();

    bool operator==(const EventAffordance&) const = default;
};

struct ThingDescription {
    std::optional<Json> context;
    std::optional<std::string> id;
    std::string title;
    std::optional<std::string> description;
    std::optional<std::string> base;
    std::optional<Json> security;
    std::optional<Json> security_definitions;
    OrderedMap<PropertyAffordance> properties;
    OrderedMap<ActionAffordance> actions;
    OrderedMap<EventAffordance> events;
    /// Unrecognized top-level members, verbatim and in source order.
    Json extra = Json::object();

    // Whether the source carried the section member at all, so an explicit
    // empty "properties": {} survives serialization.
    bool has_properties_member = false;
    bool has_actions_member = false;
    bool has_events_member = false;

    bool operator==(const ThingDescription&) const = default;
};

} // namespace vthing
