#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vthing {

enum class Errc {
    MalformedJson,
    NotAnObject,
    MissingTitle,
    InvalidSchemaBounds,
    TypeMismatch,
    Unsatisfiable,
    DuplicateThingName,
    UnknownProperty,
    UnknownAction,
    UnknownEvent,
    InvalidValue,
    ReadOnlyProperty,
    MissingInput,
    InvalidInput,
    BindFailure,
    InvalidConfig,
};

inline std::string_view to_string(Errc code)
{
    switch (code) {
    case Errc::MalformedJson: return "MalformedJson";
    case Errc::NotAnObject: return "NotAnObject";
    case Errc::MissingTitle: return "MissingTitle";
    case Errc::InvalidSchemaBounds: return "InvalidSchemaBounds";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::Unsatisfiable: return "Unsatisfiable";
    case Errc::DuplicateThingName: return "DuplicateThingName";
    case Errc::UnknownProperty: return "UnknownProperty";
    case Errc::UnknownAction: return "UnknownAction";
    case Errc::UnknownEvent: return "UnknownEvent";
    case Errc::InvalidValue: return "InvalidValue";
    case Errc::ReadOnlyProperty: return "ReadOnlyProperty";
    case Errc::MissingInput: return "MissingInput";
    case Errc::InvalidInput: return "InvalidInput";
    case Errc::BindFailure: return "BindFailure";
    case Errc::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

/// One failed check, located by JSON pointer into the validated value.
struct Violation {
    std::string path;
    std::string rule;
    std::string detail;

    bool operator==(const Violation&) const = default;
};

struct ValidationResult {
    bool valid = true;
    std::vector<Violation> violations;

    void add(std::string path, std::string rule, std::string detail)
    {
        valid = false;
        violations.push_back({std::move(path), std::move(rule), std::move(detail)});
    }

    bool has_rule(std::string_view rule) const
    {
        for (const auto& v : violations)
            if (v.rule == rule)
                return true;
        return false;
    }
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Rejected value or input; carries the validator's findings.
class ValidationError : public Error {
public:
    ValidationError(Errc code, const std::string& message, ValidationResult result)
        : Error(code, message), result_(std::move(result))
    {}

    const ValidationResult& result() const noexcept { return result_; }

private:
    ValidationResult result_;
};

} // namespace vthing
