#pragma once

#include <cmath>
#include <string>

#include "vthing/error.hpp"
#include "vthing/json.hpp"
#include "vthing/td_model.hpp"

namespace vthing {

inline bool matches_type(SchemaType type, const Json& value)
{
    switch (type) {
    case SchemaType::Null: return value.is_null();
    case SchemaType::Boolean: return value.is_boolean();
    case SchemaType::Integer:
        if (value.is_number_integer())
            return true;
        if (value.is_number_float()) {
            double d = value.get<double>();
            return std::floor(d) == d;
        }
        return false;
    case SchemaType::Number: return value.is_number();
    case SchemaType::String: return value.is_string();
    case SchemaType::Array: return value.is_array();
    case SchemaType::Object: return value.is_object();
    }
    return false;
}

namespace detail {

inline std::string describe(const Json& value)
{
    auto text = dump_compact(value);
    if (text.size() > 64)
        text = text.substr(0, 61) + "...";
    return text;
}

inline void validate_into(const DataSchema& schema, const Json& value, const std::string& path, ValidationResult& out)
{
    if (schema.type && !matches_type(*schema.type, value))
        out.add(path, "type", "expected " + std::string(to_string(*schema.type)) + ", got " + json_type_name(value));

    if (schema.const_value && !(value == *schema.const_value))
        out.add(path, "const", "expected " + describe(*schema.const_value));

    if (schema.enum_values) {
        bool member = false;
        for (const auto& candidate : *schema.enum_values)
            if (candidate == value) {
                member = true;
                break;
            }
        if (!member)
            out.add(path, "enum", describe(value) + " is not one of the enumerated values");
    }

    if (schema.one_of) {
        bool any = false;
        for (const auto& branch : *schema.one_of) {
            ValidationResult scratch;
            validate_into(branch, value, path, scratch);
            if (scratch.valid) {
                any = true;
                break;
            }
        }
        if (!any)
            out.add(path, "oneOf", "value matches none of the " + std::to_string(schema.one_of->size()) + " alternatives");
    }

    if (value.is_number()) {
        double d = value.get<double>();
        if (schema.minimum && d < *schema.minimum)
            out.add(path, "minimum", describe(value) + " < " + describe(Json(*schema.minimum)));
        if (schema.maximum && d > *schema.maximum)
            out.add(path, "maximum", describe(value) + " > " + describe(Json(*schema.maximum)));
    }

    if (value.is_array()) {
        if (schema.min_items && value.size() < *schema.min_items)
            out.add(path, "minItems", "array has " + std::to_string(value.size()) + " items, fewer than " + std::to_string(*schema.min_items));
        if (schema.max_items && value.size() > *schema.max_items)
            out.add(path, "maxItems", "array has " + std::to_string(value.size()) + " items, more than " + std::to_string(*schema.max_items));
        if (schema.items)
            for (std::size_t i = 0; i < value.size(); ++i)
                validate_into(*schema.items, value[i], path + "/" + std::to_string(i), out);
    }

    if (value.is_object()) {
        if (schema.required)
            for (const auto& name : *schema.required)
                if (!value.contains(name))
                    out.add(path + "/" + escape_pointer_token(name), "required", "missing required member \"" + name + "\"");
        if (schema.properties)
            for (const auto& [name, sub] : *schema.properties)
                if (auto it = value.find(name); it != value.end())
                    validate_into(sub, *it, path + "/" + escape_pointer_token(name), out);
    }
}

} // namespace detail

/// Check `value` against the schema. Never throws for bad input; all
/// findings are collected (a wrong type does not stop the enum check).
inline ValidationResult validate(const DataSchema& schema, const Json& value)
{
    ValidationResult result;
    detail::validate_into(schema, value, "", result);
    return result;
}

inline Json to_json(const Violation& v)
{
    return Json{{"path", v.path}, {"rule", v.rule}, {"detail", v.detail}};
}

inline Json violations_to_json(const ValidationResult& result)
{
    Json arr = Json::array();
    for (const auto& v : result.violations)
        arr.push_back(to_json(v));
    return arr;
}

} // namespace vthing
