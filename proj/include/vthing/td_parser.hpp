#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "vthing/error.hpp"
#include "vthing/json.hpp"
#include "vthing/td_model.hpp"

namespace vthing {

/// Non-fatal findings collected while parsing.
struct ParseDiagnostics {
    std::vector<std::string> warnings;

    void warn(std::string message) { warnings.push_back(std::move(message)); }
};

namespace detail {

inline void warn(ParseDiagnostics* diag, std::string message)
{
    if (diag)
        diag->warn(std::move(message));
}

[[noreturn]] inline void type_mismatch(const std::string& where, std::string_view key, std::string_view expected)
{
    throw Error(Errc::TypeMismatch, "'" + std::string(key) + "' at '" + where + "' must be " + std::string(expected));
}

inline std::uint64_t non_negative_integer(const Json& value, const std::string& where, std::string_view key)
{
    if (!value.is_number())
        type_mismatch(where, key, "a non-negative integer");
    double d = value.get<double>();
    if (d < 0 || std::floor(d) != d || d > 9007199254740992.0)
        type_mismatch(where, key, "a non-negative integer");
    return value.is_number_unsigned() ? value.get<std::uint64_t>() : static_cast<std::uint64_t>(d);
}

inline std::vector<Form> parse_forms(const Json& affordance, const std::string& where)
{
    std::vector<Form> forms;
    auto it = affordance.find("forms");
    if (it == affordance.end())
        return forms;
    if (!it->is_array())
        type_mismatch(where, "forms", "an array");
    for (const auto& entry : *it) {
        if (!entry.is_object())
            type_mismatch(where, "forms", "an array of objects");
        Form form;
        auto href = entry.find("href");
        if (href == entry.end() || !href->is_string() || href->get<std::string>().empty())
            type_mismatch(where + "/forms", "href", "a non-empty string");
        form.href = href->get<std::string>();
        if (auto ct = entry.find("contentType"); ct != entry.end()) {
            if (!ct->is_string())
                type_mismatch(where + "/forms", "contentType", "a string");
            form.content_type = ct->get<std::string>();
        }
        if (auto op = entry.find("op"); op != entry.end()) {
            std::vector<std::string> ops;
            if (op->is_string()) {
                ops.push_back(op->get<std::string>());
            } else if (op->is_array()) {
                for (const auto& o : *op) {
                    if (!o.is_string())
                        type_mismatch(where + "/forms", "op", "a string or array of strings");
                    ops.push_back(o.get<std::string>());
                }
            } else {
                type_mismatch(where + "/forms", "op", "a string or array of strings");
            }
            form.op = std::move(ops);
        }
        forms.push_back(std::move(form));
    }
    return forms;
}

inline bool optional_flag(const Json& affordance, std::string_view key, const std::string& where, ParseDiagnostics* diag)
{
    auto it = affordance.find(key);
    if (it == affordance.end())
        return false;
    if (!it->is_boolean()) {
        warn(diag, "'" + std::string(key) + "' at '" + where + "' is not a boolean; treated as false");
        return false;
    }
    return it->get<bool>();
}

} // namespace detail

/// Build a DataSchema from the schema-relevant keys of `node`. Everything
/// else in the object (forms, titles, units, unsupported keywords) is ignored.
inline DataSchema extract_schema(const Json& node, ParseDiagnostics* diag = nullptr, const std::string& where = "")
{
    using detail::type_mismatch;
    if (!node.is_object())
        throw Error(Errc::TypeMismatch, "schema at '" + where + "' must be an object");

    DataSchema schema;
    if (auto it = node.find("type"); it != node.end()) {
        if (!it->is_string())
            type_mismatch(where, "type", "a string");
        schema.type = schema_type_from_string(it->get<std::string>());
        if (!schema.type)
            type_mismatch(where, "type", "one of null, boolean, integer, number, string, array, object");
    }
    if (auto it = node.find("enum"); it != node.end()) {
        if (!it->is_array())
            type_mismatch(where, "enum", "an array");
        schema.enum_values = std::vector<Json>(it->begin(), it->end());
    }
    if (auto it = node.find("const"); it != node.end())
        schema.const_value = *it;
    if (auto it = node.find("oneOf"); it != node.end()) {
        if (!it->is_array())
            type_mismatch(where, "oneOf", "an array");
        std::vector<DataSchema> branches;
        for (std::size_t i = 0; i < it->size(); ++i)
            branches.push_back(extract_schema((*it)[i], diag, where + "/oneOf/" + std::to_string(i)));
        schema.one_of = std::move(branches);
    }
    if (auto it = node.find("minimum"); it != node.end()) {
        if (!it->is_number())
            type_mismatch(where, "minimum", "a number");
        schema.minimum = it->get<double>();
    }
    if (auto it = node.find("maximum"); it != node.end()) {
        if (!it->is_number())
            type_mismatch(where, "maximum", "a number");
        schema.maximum = it->get<double>();
    }
    if (auto it = node.find("items"); it != node.end()) {
        if (!it->is_object())
            type_mismatch(where, "items", "an object");
        schema.items = extract_schema(*it, diag, where + "/items");
    }
    if (auto it = node.find("minItems"); it != node.end())
        schema.min_items = detail::non_negative_integer(*it, where, "minItems");
    if (auto it = node.find("maxItems"); it != node.end())
        schema.max_items = detail::non_negative_integer(*it, where, "maxItems");
    if (auto it = node.find("properties"); it != node.end()) {
        if (!it->is_object())
            type_mismatch(where, "properties", "an object");
        OrderedMap<DataSchema> props;
        for (const auto& [name, sub] : it->items())
            props.insert_or_assign(name, extract_schema(sub, diag, where + "/properties/" + escape_pointer_token(name)));
        schema.properties = std::move(props);
    }
    if (auto it = node.find("required"); it != node.end()) {
        if (!it->is_array())
            type_mismatch(where, "required", "an array of strings");
        std::vector<std::string> names;
        for (const auto& n : *it) {
            if (!n.is_string())
                type_mismatch(where, "required", "an array of strings");
            names.push_back(n.get<std::string>());
        }
        schema.required = std::move(names);
    }

    schema.check_invariants(where);

    if (schema.required) {
        for (const auto& name : *schema.required)
            if (!schema.properties || !schema.properties->contains(name))
                detail::warn(diag, "required member '" + name + "' at '" + where +
                                       "' has no entry in properties; it will be generated as null");
    }
    return schema;
}

inline PropertyAffordance parse_property(const Json& raw, const std::string& where, ParseDiagnostics* diag = nullptr)
{
    if (!raw.is_object())
        throw Error(Errc::TypeMismatch, "property at '" + where + "' must be an object");
    PropertyAffordance p;
    p.data_schema = extract_schema(raw, diag, where);
    p.read_only = detail::optional_flag(raw, "readOnly", where, diag);
    p.observable = detail::optional_flag(raw, "observable", where, diag);
    p.forms = detail::parse_forms(raw, where);
    p.raw = raw;
    return p;
}

inline ActionAffordance parse_action(const Json& raw, const std::string& where, ParseDiagnostics* diag = nullptr)
{
    if (!raw.is_object())
        throw Error(Errc::TypeMismatch, "action at '" + where + "' must be an object");
    ActionAffordance a;
    if (auto it = raw.find("input"); it != raw.end())
        a.input = extract_schema(*it, diag, where + "/input");
    if (auto it = raw.find("output"); it != raw.end())
        a.output = extract_schema(*it, diag, where + "/output");
    a.forms = detail::parse_forms(raw, where);
    a.raw = raw;
    return a;
}

inline EventAffordance parse_event(const Json& raw, const std::string& where, ParseDiagnostics* diag = nullptr)
{
    if (!raw.is_object())
        throw Error(Errc::TypeMismatch, "event at '" + where + "' must be an object");
    EventAffordance e;
    if (auto it = raw.find("data"); it != raw.end())
        e.data = extract_schema(*it, diag, where + "/data");
    e.forms = detail::parse_forms(raw, where);
    e.raw = raw;
    return e;
}

/// Build a ThingDescription from an already-parsed JSON document.
inline ThingDescription td_from_json(const Json& doc, ParseDiagnostics* diag = nullptr)
{
    if (!doc.is_object())
        throw Error(Errc::NotAnObject, "a Thing Description must be a JSON object");

    auto title = doc.find("title");
    if (title == doc.end() || !title->is_string() || title->get<std::string>().empty())
        throw Error(Errc::MissingTitle, "\"title\" must be a non-empty string");

    ThingDescription td;
    td.title = title->get<std::string>();

    auto optional_string = [&](std::string_view key) -> std::optional<std::string> {
        auto it = doc.find(key);
        if (it == doc.end())
            return std::nullopt;
        if (!it->is_string())
            detail::type_mismatch("", key, "a string");
        return it->get<std::string>();
    };

    for (const auto& [key, value] : doc.items()) {
        if (key == "@context") {
            td.context = value;
        } else if (key == "id") {
            td.id = optional_string("id");
        } else if (key == "title") {
            continue;
        } else if (key == "description") {
            td.description = optional_string("description");
        } else if (key == "base") {
            td.base = optional_string("base");
        } else if (key == "security") {
            td.security = value;
        } else if (key == "securityDefinitions") {
            td.security_definitions = value;
        } else if (key == "properties") {
            if (!value.is_object())
                detail::type_mismatch("", "properties", "an object");
            td.has_properties_member = true;
            for (const auto& [name, raw] : value.items())
                td.properties.insert_or_assign(name, parse_property(raw, "/properties/" + escape_pointer_token(name), diag));
        } else if (key == "actions") {
            if (!value.is_object())
                detail::type_mismatch("", "actions", "an object");
            td.has_actions_member = true;
            for (const auto& [name, raw] : value.items())
                td.actions.insert_or_assign(name, parse_action(raw, "/actions/" + escape_pointer_token(name), diag));
        } else if (key == "events") {
            if (!value.is_object())
                detail::type_mismatch("", "events", "an object");
            td.has_events_member = true;
            for (const auto& [name, raw] : value.items())
                td.events.insert_or_assign(name, parse_event(raw, "/events/" + escape_pointer_token(name), diag));
        } else {
            td.extra[key] = value;
        }
    }

    if (!td.context)
        detail::warn(diag, "missing \"@context\"");
    if (!td.security)
        detail::warn(diag, "missing \"security\"");
    return td;
}

/// Parse TD text. Errors: MalformedJson, NotAnObject, MissingTitle,
/// InvalidSchemaBounds, TypeMismatch.
inline ThingDescription parse_td(std::string_view text, ParseDiagnostics* diag = nullptr)
{
    Json doc = parse_json(text, [&](const std::string& key) {
        detail::warn(diag, "duplicate member \"" + key + "\"; last occurrence wins");
    });
    return td_from_json(doc, diag);
}

inline Json td_to_json(const ThingDescription& td)
{
    Json out = Json::object();
    if (td.context)
        out["@context"] = *td.context;
    if (td.id)
        out["id"] = *td.id;
    out["title"] = td.title;
    if (td.description)
        out["description"] = *td.description;
    if (td.security)
        out["security"] = *td.security;
    if (td.security_definitions)
        out["securityDefinitions"] = *td.security_definitions;
    if (td.base)
        out["base"] = *td.base;
    if (td.has_properties_member || !td.properties.empty()) {
        Json props = Json::object();
        for (const auto& [name, p] : td.properties)
            props[name] = p.raw;
        out["properties"] = std::move(props);
    }
    if (td.has_actions_member || !td.actions.empty()) {
        Json actions = Json::object();
        for (const auto& [name, a] : td.actions)
            actions[name] = a.raw;
        out["actions"] = std::move(actions);
    }
    if (td.has_events_member || !td.events.empty()) {
        Json events = Json::object();
        for (const auto& [name, e] : td.events)
            events[name] = e.raw;
        out["events"] = std::move(events);
    }
    for (const auto& [key, value] : td.extra.items())
        out[key] = value;
    return out;
}

/// Serialize to TD JSON text; indent < 0 yields compact output.
inline std::string serialize_td(const ThingDescription& td, int indent = -1)
{
    return td_to_json(td).dump(indent, ' ', false, Json::error_handler_t::replace);
}

} // namespace vthing
