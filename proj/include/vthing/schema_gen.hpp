#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "vthing/error.hpp"
#include "vthing/json.hpp"
#include "vthing/random_source.hpp"
#include "vthing/schema_validate.hpp"
#include "vthing/td_model.hpp"

namespace vthing {

/// Past this nesting level arrays shrink to minItems, objects keep only
/// required members and oneOf takes its shallowest branch.
inline constexpr std::size_t kGenerationDepthCap = 8;

namespace gen_defaults {
inline constexpr std::int64_t kIntMin = -128;
inline constexpr std::int64_t kIntMax = 127;
inline constexpr double kNumberMin = -100.0;
inline constexpr double kNumberMax = 100.0;
inline constexpr double kOneSidedSpan = 256.0;
inline constexpr std::size_t kStringMinLength = 4;
inline constexpr std::size_t kStringMaxLength = 16;
inline constexpr std::uint64_t kArrayDefaultSpan = 5;
inline constexpr std::uint64_t kArrayMaxSpan = 16;
inline constexpr int kAttemptsPerBranch = 16;
// Integers beyond 2^53 are not exactly representable as doubles.
inline constexpr double kExactIntLimit = 9007199254740992.0;
} // namespace gen_defaults

namespace detail {

struct Range {
    double lo;
    double hi;
};

/// Bounds used for numeric generation; one-sided bounds get a window of
/// 256 clipped to the default range, never crossing the given bound.
inline Range numeric_range(const DataSchema& s, double default_lo, double default_hi)
{
    using namespace gen_defaults;
    if (s.minimum && s.maximum)
        return {*s.minimum, *s.maximum};
    if (s.maximum) {
        double lo = std::min(std::max(static_cast<double>(kIntMin), *s.maximum - kOneSidedSpan), *s.maximum);
        return {lo, *s.maximum};
    }
    if (s.minimum) {
        double hi = std::max(std::min(static_cast<double>(kIntMax), *s.minimum + kOneSidedSpan), *s.minimum);
        return {*s.minimum, hi};
    }
    return {default_lo, default_hi};
}

inline Json generate_integer(const DataSchema& s, RandomSource& rng)
{
    using namespace gen_defaults;
    auto [lo, hi] = numeric_range(s, static_cast<double>(kIntMin), static_cast<double>(kIntMax));
    double lo_i = std::max(std::ceil(lo), -kExactIntLimit);
    double hi_i = std::min(std::floor(hi), kExactIntLimit);
    if (lo_i > hi_i)
        throw Error(Errc::Unsatisfiable, "no integer lies within [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return Json(rng.uniform_int(static_cast<std::int64_t>(lo_i), static_cast<std::int64_t>(hi_i)));
}

inline Json generate_number(const DataSchema& s, RandomSource& rng)
{
    using namespace gen_defaults;
    auto [lo, hi] = numeric_range(s, kNumberMin, kNumberMax);
    double x = rng.uniform_real(lo, hi);
    if (std::abs(x) < 1e9) {
        double rounded = std::round(x * 1e6) / 1e6;
        if (rounded >= lo && rounded <= hi)
            x = rounded;
    }
    return Json(x);
}

inline Json generate_string(RandomSource& rng)
{
    using namespace gen_defaults;
    auto length = static_cast<std::size_t>(rng.uniform_int(kStringMinLength, kStringMaxLength));
    std::string out(length, 'a');
    for (auto& c : out)
        c = static_cast<char>('a' + rng.uniform_int(0, 25));
    return Json(std::move(out));
}

} // namespace detail

inline Json generate(const DataSchema& schema, RandomSource& rng, std::size_t depth = 0);

namespace detail {

inline Json generate_array(const DataSchema& s, RandomSource& rng, std::size_t depth)
{
    using namespace gen_defaults;
    std::uint64_t lo = s.min_items.value_or(0);
    std::uint64_t hi = s.max_items ? *s.max_items : lo + kArrayDefaultSpan;
    hi = std::min(hi, lo + kArrayMaxSpan);
    std::uint64_t length = depth >= kGenerationDepthCap
                               ? lo
                               : static_cast<std::uint64_t>(rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
    Json out = Json::array();
    static const DataSchema unconstrained;
    const DataSchema& item_schema = s.items ? *s.items : unconstrained;
    for (std::uint64_t i = 0; i < length; ++i)
        out.push_back(generate(item_schema, rng, depth + 1));
    return out;
}

inline Json generate_object(const DataSchema& s, RandomSource& rng, std::size_t depth)
{
    Json out = Json::object();
    bool capped = depth >= kGenerationDepthCap;
    auto is_required = [&](const std::string& name) {
        return s.required && std::find(s.required->begin(), s.required->end(), name) != s.required->end();
    };
    if (s.properties)
        for (const auto& [name, sub] : *s.properties)
            if (!capped || is_required(name))
                out[name] = generate(sub, rng, depth + 1);
    if (s.required)
        for (const auto& name : *s.required)
            if (!out.contains(name))
                out[name] = nullptr;
    return out;
}

inline Json generate_from_type(const DataSchema& s, RandomSource& rng, std::size_t depth)
{
    std::optional<SchemaType> type = s.type;
    if (!type && (s.minimum || s.maximum))
        type = SchemaType::Number;
    if (!type)
        return nullptr;
    switch (*type) {
    case SchemaType::Null: return nullptr;
    case SchemaType::Boolean: return Json(rng.coin());
    case SchemaType::Integer: return generate_integer(s, rng);
    case SchemaType::Number: return generate_number(s, rng);
    case SchemaType::String: return generate_string(rng);
    case SchemaType::Array: return generate_array(s, rng, depth);
    case SchemaType::Object: return generate_object(s, rng, depth);
    }
    return nullptr;
}

inline Json generate_one_of(const DataSchema& s, RandomSource& rng, std::size_t depth)
{
    using namespace gen_defaults;
    const auto& branches = *s.one_of;
    std::vector<std::size_t> order(branches.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (depth >= kGenerationDepthCap) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return branches[a].nesting() < branches[b].nesting(); });
    } else {
        // Uniform first pick, remaining branches as fallbacks in random order.
        std::shuffle(order.begin(), order.end(), rng.engine());
    }
    for (std::size_t idx : order) {
        for (int attempt = 0; attempt < kAttemptsPerBranch; ++attempt) {
            Json candidate;
            try {
                candidate = generate(branches[idx], rng, depth);
            } catch (const Error& e) {
                if (e.code() != Errc::Unsatisfiable)
                    throw;
                break;
            }
            if (validate(s, candidate).valid)
                return candidate;
        }
    }
    throw Error(Errc::Unsatisfiable, "no oneOf alternative yields a value satisfying the whole schema");
}

} // namespace detail

/// Produce a random value that validates against `schema`.
///
/// Keyword precedence is const > enum > oneOf > type. Sibling keywords
/// still apply: enum members and oneOf results that fail the rest of the
/// schema are skipped. A schema with none of const/enum/oneOf/type (and no
/// numeric bounds) yields null. Throws Error(Unsatisfiable) when no
/// conforming value can be produced.
inline Json generate(const DataSchema& schema, RandomSource& rng, std::size_t depth)
{
    if (schema.const_value) {
        if (!validate(schema, *schema.const_value).valid)
            throw Error(Errc::Unsatisfiable, "const value conflicts with the rest of the schema");
        return *schema.const_value;
    }

    if (schema.enum_values) {
        std::vector<const Json*> members;
        for (const auto& v : *schema.enum_values)
            if (validate(schema, v).valid)
                members.push_back(&v);
        if (members.empty())
            throw Error(Errc::Unsatisfiable, "no enum member satisfies the rest of the schema");
        return *members[rng.index(members.size())];
    }

    if (schema.one_of)
        return detail::generate_one_of(schema, rng, depth);

    Json value = detail::generate_from_type(schema, rng, depth);
    if (!validate(schema, value).valid)
        throw Error(Errc::Unsatisfiable, "generated value cannot satisfy the schema");
    return value;
}

} // namespace vthing
