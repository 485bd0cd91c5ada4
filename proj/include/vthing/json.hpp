#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "vthing/error.hpp"

namespace vthing {

/// Generic JSON tree. Objects keep insertion order; numbers are always finite.
using Json = nlohmann::ordered_json;

/// Compact serialization used on the wire (no embedded newlines).
inline std::string dump_compact(const Json& value)
{
    return value.dump(-1, ' ', false, Json::error_handler_t::replace);
}

inline bool all_numbers_finite(const Json& value)
{
    switch (value.type()) {
    case Json::value_t::number_float:
        return std::isfinite(value.get<double>());
    case Json::value_t::array:
        for (const auto& v : value)
            if (!all_numbers_finite(v))
                return false;
        return true;
    case Json::value_t::object:
        for (const auto& [k, v] : value.items())
            if (!all_numbers_finite(v))
                return false;
        return true;
    default:
        return true;
    }
}

/// Parse JSON text strictly. Duplicate object keys keep the last value and
/// are reported through `on_duplicate`. Non-finite numbers (e.g. 1e400) are
/// rejected as malformed.
inline Json parse_json(std::string_view text,
                       const std::function<void(const std::string&)>& on_duplicate = {})
{
    std::vector<std::unordered_set<std::string>> seen;
    Json::parser_callback_t cb = [&](int, Json::parse_event_t event, Json& parsed) {
        switch (event) {
        case Json::parse_event_t::object_start:
            seen.emplace_back();
            break;
        case Json::parse_event_t::key: {
            auto key = parsed.get<std::string>();
            if (!seen.empty() && !seen.back().insert(key).second && on_duplicate)
                on_duplicate(key);
            break;
        }
        case Json::parse_event_t::object_end:
            if (!seen.empty())
                seen.pop_back();
            break;
        default:
            break;
        }
        return true;
    };

    Json result;
    try {
        result = Json::parse(text.begin(), text.end(), cb);
    } catch (const Json::exception& e) {
        throw Error(Errc::MalformedJson, e.what());
    }
    if (!all_numbers_finite(result))
        throw Error(Errc::MalformedJson, "number out of range (non-finite)");
    return result;
}

/// Escape one reference token of a JSON pointer (RFC 6901).
inline std::string escape_pointer_token(std::string_view token)
{
    std::string out;
    out.reserve(token.size());
    for (char c : token) {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

/// Percent-encode everything outside the RFC 3986 unreserved set.
inline std::string percent_encode(std::string_view text)
{
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : text) {
        bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                          c == '-' || c == '.' || c == '_' || c == '~';
        if (unreserved) {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0x0F];
        }
    }
    return out;
}

inline std::string json_type_name(const Json& value)
{
    switch (value.type()) {
    case Json::value_t::null:
        return "null";
    case Json::value_t::boolean:
        return "boolean";
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned:
        return "integer";
    case Json::value_t::number_float:
        return "number";
    case Json::value_t::string:
        return "string";
    case Json::value_t::array:
        return "array";
    case Json::value_t::object:
        return "object";
    default:
        return "unknown";
    }
}

} // namespace vthing
