#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "vthing/error.hpp"
#include "vthing/json.hpp"

namespace vthing {

inline constexpr double kRandomIntervalMin = 5.0;
inline constexpr double kRandomIntervalMax = 60.0;

/// How one event is emitted: never, every 5-60 s (re-drawn after each
/// emission), or at a fixed period.
struct EventSchedule {
    enum class Kind { None, RandomInterval, FixedInterval };

    Kind kind = Kind::RandomInterval;
    double seconds = 0.0;

    static EventSchedule none() { return {Kind::None, 0.0}; }
    static EventSchedule random() { return {Kind::RandomInterval, 0.0}; }
    static EventSchedule fixed(double seconds)
    {
        if (!(seconds > 0.0) || !std::isfinite(seconds))
            throw Error(Errc::InvalidConfig, "fixed event interval must be a positive number of seconds");
        return {Kind::FixedInterval, seconds};
    }

    bool operator==(const EventSchedule&) const = default;
};

struct EventMode {
    EventSchedule default_schedule = EventSchedule::random();
    std::map<std::string, EventSchedule> overrides;

    const EventSchedule& for_event(const std::string& name) const
    {
        auto it = overrides.find(name);
        return it == overrides.end() ? default_schedule : it->second;
    }

    bool operator==(const EventMode&) const = default;
};

enum class LogLevel { Error, Warn, Info, Debug };

inline std::optional<LogLevel> log_level_from_string(std::string_view s)
{
    if (s == "error") return LogLevel::Error;
    if (s == "warn") return LogLevel::Warn;
    if (s == "info") return LogLevel::Info;
    if (s == "debug") return LogLevel::Debug;
    return std::nullopt;
}

inline std::string_view to_string(LogLevel level)
{
    switch (level) {
    case LogLevel::Error: return "error";
    case LogLevel::Warn: return "warn";
    case LogLevel::Info: return "info";
    case LogLevel::Debug: return "debug";
    }
    return "info";
}

struct ServientConfig {
    std::string address = "127.0.0.1";
    int port = 8080;
    EventMode event_mode;
    /// Absent means seeded from std::random_device.
    std::optional<std::uint64_t> seed;
    LogLevel log_level = LogLevel::Info;

    void check() const
    {
        if (port < 1 || port > 65535)
            throw Error(Errc::InvalidConfig, "port must be in [1, 65535], got " + std::to_string(port));
        if (address.empty())
            throw Error(Errc::InvalidConfig, "address must not be empty");
    }

    /// Absolute base URL of the servient, without trailing slash.
    std::string base_url() const
    {
        bool ipv6 = address.find(':') != std::string::npos;
        return "http://" + (ipv6 ? "[" + address + "]" : address) + ":" + std::to_string(port);
    }

    bool operator==(const ServientConfig&) const = default;
};

/// Parse "none", "random" or "fixed:SECONDS".
inline EventSchedule parse_event_schedule(std::string_view text)
{
    if (text == "none")
        return EventSchedule::none();
    if (text == "random")
        return EventSchedule::random();
    constexpr std::string_view prefix = "fixed:";
    if (text.substr(0, prefix.size()) == prefix) {
        std::string number(text.substr(prefix.size()));
        try {
            std::size_t used = 0;
            double seconds = std::stod(number, &used);
            if (used == number.size())
                return EventSchedule::fixed(seconds);
        } catch (const std::logic_error&) {
        }
    }
    throw Error(Errc::InvalidConfig, "event mode must be none, random or fixed:SECONDS, got '" + std::string(text) + "'");
}

/// Command-line settings; unset members fall back to the config file, then
/// to ServientConfig defaults.
struct ConfigOverrides {
    std::optional<std::string> address;
    std::optional<int> port;
    std::optional<std::string> event_mode;
    std::map<std::string, double> event_intervals;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> log_level;
};

/// Apply a JSON config document of the form
/// {"address", "port", "eventMode": "none"|"random"|{"fixed": s}, "eventIntervals": {name: s}, "seed", "logLevel"}.
inline void apply_config_json(ServientConfig& config, const Json& doc)
{
    auto bad = [](const std::string& what) { throw Error(Errc::InvalidConfig, what); };
    if (!doc.is_object())
        bad("config file must contain a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "address") {
            if (!value.is_string())
                bad("\"address\" must be a string");
            config.address = value.get<std::string>();
        } else if (key == "port") {
            if (!value.is_number_integer() || value.get<std::int64_t>() < 1 || value.get<std::int64_t>() > 65535)
                bad("\"port\" must be an integer in [1, 65535]");
            config.port = value.get<int>();
        } else if (key == "eventMode") {
            if (value.is_string()) {
                auto s = value.get<std::string>();
                if (s != "none" && s != "random")
                    bad("\"eventMode\" must be \"none\", \"random\" or {\"fixed\": seconds}");
                config.event_mode.default_schedule = parse_event_schedule(s);
            } else if (value.is_object() && value.size() == 1 && value.contains("fixed") && value["fixed"].is_number()) {
                config.event_mode.default_schedule = EventSchedule::fixed(value["fixed"].get<double>());
            } else {
                bad("\"eventMode\" must be \"none\", \"random\" or {\"fixed\": seconds}");
            }
        } else if (key == "eventIntervals") {
            if (!value.is_object())
                bad("\"eventIntervals\" must be an object of name -> seconds");
            for (const auto& [name, seconds] : value.items()) {
                if (!seconds.is_number())
                    bad("\"eventIntervals\" values must be numbers");
                config.event_mode.overrides[name] = EventSchedule::fixed(seconds.get<double>());
            }
        } else if (key == "seed") {
            if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0))
                bad("\"seed\" must be a non-negative integer");
            config.seed = value.get<std::uint64_t>();
        } else if (key == "logLevel") {
            if (!value.is_string() || !log_level_from_string(value.get<std::string>()))
                bad("\"logLevel\" must be one of error, warn, info, debug");
            config.log_level = *log_level_from_string(value.get<std::string>());
        } else {
            bad("unknown config key \"" + key + "\"");
        }
    }
}

/// Merge config file (if any) and overrides; overrides win key by key.
inline ServientConfig resolve_config(const std::optional<Json>& file, const ConfigOverrides& flags)
{
    ServientConfig config;
    if (file)
        apply_config_json(config, *file);
    if (flags.address)
        config.address = *flags.address;
    if (flags.port)
        config.port = *flags.port;
    if (flags.event_mode)
        config.event_mode.default_schedule = parse_event_schedule(*flags.event_mode);
    for (const auto& [name, seconds] : flags.event_intervals)
        config.event_mode.overrides[name] = EventSchedule::fixed(seconds);
    if (flags.seed)
        config.seed = *flags.seed;
    if (flags.log_level) {
        auto level = log_level_from_string(*flags.log_level);
        if (!level)
            throw Error(Errc::InvalidConfig, "log level must be one of error, warn, info, debug");
        config.log_level = *level;
    }
    config.check();
    return config;
}

} // namespace vthing
