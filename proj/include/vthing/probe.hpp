#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>

#include "vthing/error.hpp"
#include "vthing/json.hpp"
#include "vthing/random_source.hpp"
#include "vthing/schema_gen.hpp"
#include "vthing/schema_validate.hpp"
#include "vthing/td_model.hpp"
#include "vthing/td_parser.hpp"

namespace vthing {

struct ProbeOptions {
    std::string target; // http URL of a TD, or a path to a TD file
    double duration_seconds = 10.0;
    std::optional<std::uint64_t> seed;
    double request_timeout_seconds = 5.0;
};

struct ProbeEntry {
    std::string affordance;
    std::string kind; // property | action | event
    bool pass = false;
    std::string detail;
};

struct ProbeReport {
    std::vector<ProbeEntry> entries;
    int exit_code = 0; // 0 all pass, 1 some failure, 2 target unusable
    std::string error;  // set when exit_code == 2
};

/// Split "http://host:port/path?q" into origin and path.
struct HttpUrl {
    std::string origin;
    std::string path;
};

inline std::optional<HttpUrl> split_http_url(const std::string& url)
{
    constexpr std::string_view scheme = "http://";
    if (url.compare(0, scheme.size(), scheme) != 0)
        return std::nullopt;
    auto slash = url.find('/', scheme.size());
    if (slash == scheme.size())
        return std::nullopt;
    if (slash == std::string::npos)
        return HttpUrl{url, "/"};
    return HttpUrl{url.substr(0, slash), url.substr(slash)};
}

namespace detail {

inline bool is_absolute_url(const std::string& href) { return href.find("://") != std::string::npos; }

/// Resolve a form href. Relative hrefs are appended to the TD's base (as TDs
/// conventionally do), or to the origin the TD was fetched from.
inline std::optional<std::string> resolve_href(const std::string& href, const ThingDescription& td,
                                               const std::optional<HttpUrl>& fetched_from)
{
    if (is_absolute_url(href))
        return href;
    std::string base;
    if (td.base)
        base = *td.base;
    else if (fetched_from)
        base = fetched_from->origin;
    else
        return std::nullopt;
    while (!base.empty() && base.back() == '/')
        base.pop_back();
    return base + (!href.empty() && href.front() == '/' ? "" : "/") + href;
}

inline std::unique_ptr<httplib::Client> make_client(const HttpUrl& url, double timeout)
{
    auto client = std::make_unique<httplib::Client>(url.origin);
    auto secs = static_cast<time_t>(timeout);
    auto usecs = static_cast<time_t>((timeout - static_cast<double>(secs)) * 1e6);
    client->set_connection_timeout(secs, usecs);
    client->set_read_timeout(secs, usecs);
    client->set_write_timeout(secs, usecs);
    return client;
}

inline std::string status_detail(const httplib::Result& result)
{
    if (!result)
        return "request failed: " + httplib::to_string(result.error());
    std::string text = "HTTP " + std::to_string(result->status);
    if (!result->body.empty())
        text += " " + result->body.substr(0, 200);
    return text;
}

inline std::string first_violation(const ValidationResult& r)
{
    if (r.violations.empty())
        return "";
    const auto& v = r.violations.front();
    return v.rule + " violation at '" + v.path + "': " + v.detail;
}

class Prober {
public:
    Prober(const ThingDescription& td, std::optional<HttpUrl> origin, const ProbeOptions& options)
        : td_(td),
          origin_(std::move(origin)),
          options_(options),
          rng_(options.seed ? RandomSource(*options.seed) : RandomSource::from_entropy())
    {}

    ProbeEntry property(const std::string& name, const PropertyAffordance& p)
    {
        ProbeEntry entry{name, "property", false, ""};
        auto url = endpoint(p.forms, entry);
        if (!url)
            return entry;
        auto client = make_client(*url, options_.request_timeout_seconds);

        auto read = client->Get(url->path);
        if (!read || read->status != 200) {
            entry.detail = "read: " + status_detail(read);
            return entry;
        }
        auto value = parse_body(read->body, entry, "read");
        if (!value)
            return entry;
        auto check = validate(p.data_schema, *value);
        if (!check.valid) {
            entry.detail = "read value " + dump_compact(*value) + ": " + first_violation(check);
            return entry;
        }
        if (p.read_only) {
            entry.pass = true;
            entry.detail = "read ok (read-only)";
            return entry;
        }

        Json written = generate(p.data_schema, rng_);
        auto put = client->Put(url->path, dump_compact(written), "application/json");
        if (put && put->status == 405) {
            entry.pass = true;
            entry.detail = "read ok; write rejected as read-only";
            return entry;
        }
        if (!put || put->status < 200 || put->status >= 300) {
            entry.detail = "write " + dump_compact(written) + ": " + status_detail(put);
            return entry;
        }
        auto reread = client->Get(url->path);
        if (!reread || reread->status != 200) {
            entry.detail = "re-read: " + status_detail(reread);
            return entry;
        }
        auto after = parse_body(reread->body, entry, "re-read");
        if (!after)
            return entry;
        if (!(*after == written)) {
            entry.detail = "wrote " + dump_compact(written) + " but read back " + dump_compact(*after);
            return entry;
        }
        entry.pass = true;
        entry.detail = "read ok; write/read-back ok";
        return entry;
    }

    ProbeEntry action(const std::string& name, const ActionAffordance& a)
    {
        ProbeEntry entry{name, "action", false, ""};
        auto url = endpoint(a.forms, entry);
        if (!url)
            return entry;
        auto client = make_client(*url, options_.request_timeout_seconds);

        std::string body;
        if (a.input)
            body = dump_compact(generate(*a.input, rng_));
        auto result = client->Post(url->path, body, "application/json");
        if (!result || result->status < 200 || result->status >= 300) {
            entry.detail = "invoke: " + status_detail(result);
            return entry;
        }
        if (!a.output) {
            entry.pass = true;
            entry.detail = "invoked (HTTP " + std::to_string(result->status) + ")";
            return entry;
        }
        if (result->status == 204 || result->body.empty()) {
            entry.detail = "output schema declared but response has no body";
            return entry;
        }
        auto output = parse_body(result->body, entry, "output");
        if (!output)
            return entry;
        auto check = validate(*a.output, *output);
        if (!check.valid) {
            entry.detail = "output " + dump_compact(*output) + ": " + first_violation(check);
            return entry;
        }
        entry.pass = true;
        entry.detail = "output ok";
        return entry;
    }

    ProbeEntry event(const std::string& name, const EventAffordance& e)
    {
        ProbeEntry entry{name, "event", false, ""};
        auto url = endpoint(e.forms, entry);
        if (!url)
            return entry;
        auto client = make_client(*url, options_.request_timeout_seconds);
        // Idle streams end through the read timeout.
        double duration = options_.duration_seconds;
        client->set_read_timeout(static_cast<time_t>(duration), static_cast<time_t>((duration - std::floor(duration)) * 1e6));

        int status = 0;
        std::string content_type;
        std::string buffer;
        std::size_t messages = 0;
        std::optional<std::string> failure;
        auto started = std::chrono::steady_clock::now();
        auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };

        httplib::Headers headers{{"Accept", std::string("text/event-stream")}};
        auto result = client->Get(
            url->path, headers,
            [&](const httplib::Response& response) {
                status = response.status;
                content_type = response.get_header_value("Content-Type");
                return status == 200;
            },
            [&](const char* data, std::size_t length) {
                buffer.append(data, length);
                std::size_t end;
                while ((end = buffer.find("\n\n")) != std::string::npos) {
                    auto frame = buffer.substr(0, end);
                    buffer.erase(0, end + 2);
                    auto payload = frame_data(frame);
                    if (!payload)
                        continue;
                    ++messages;
                    try {
                        auto value = parse_json(*payload);
                        if (e.data) {
                            auto check = validate(*e.data, value);
                            if (!check.valid && !failure)
                                failure = "payload " + dump_compact(value) + ": " + first_violation(check);
                        }
                    } catch (const Error& err) {
                        if (!failure)
                            failure = std::string("payload is not JSON: ") + err.what();
                    }
                }
                return elapsed() < duration;
            });

        if (status == 0) {
            entry.detail = "subscribe: " + status_detail(result);
            return entry;
        }
        if (status != 200) {
            entry.detail = "subscribe: HTTP " + std::to_string(status);
            return entry;
        }
        if (content_type.find("text/event-stream") == std::string::npos) {
            entry.detail = "subscribe: unexpected content type '" + content_type + "'";
            return entry;
        }
        if (failure) {
            entry.detail = *failure;
            return entry;
        }
        entry.pass = true;
        entry.detail = std::to_string(messages) + " message(s) ok";
        return entry;
    }

private:
    static std::optional<std::string> frame_data(const std::string& frame)
    {
        std::optional<std::string> data;
        std::istringstream lines(frame);
        std::string line;
        while (std::getline(lines, line)) {
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.rfind("data:", 0) != 0)
                continue;
            auto chunk = line.substr(5);
            if (!chunk.empty() && chunk.front() == ' ')
                chunk.erase(0, 1);
            data = data ? *data + "\n" + chunk : chunk;
        }
        return data;
    }

    std::optional<HttpUrl> endpoint(const std::vector<Form>& forms, ProbeEntry& entry) const
    {
        for (const auto& form : forms) {
            auto href = resolve_href(form.href, td_, origin_);
            if (!href)
                continue;
            if (auto url = split_http_url(*href))
                return url;
        }
        entry.detail = forms.empty() ? "no forms" : "no usable http form";
        return std::nullopt;
    }

    static std::optional<Json> parse_body(const std::string& body, ProbeEntry& entry, const std::string& what)
    {
        try {
            return parse_json(body);
        } catch (const Error& e) {
            entry.detail = what + ": body is not JSON (" + e.what() + ")";
            return std::nullopt;
        }
    }

    const ThingDescription& td_;
    std::optional<HttpUrl> origin_;
    ProbeOptions options_;
    RandomSource rng_;
};

} // namespace detail

/// Exercise every affordance of the TD at `options.target` as a consuming
/// client would: read/write properties, invoke actions with generated
/// input, listen to events, validating everything against the TD schemas.
/// Affordances are probed sequentially in TD order.
inline ProbeReport probe(const ProbeOptions& options)
{
    ProbeReport report;
    std::optional<HttpUrl> origin;
    std::string text;

    if (options.target.rfind("http://", 0) == 0) {
        origin = split_http_url(options.target);
        if (!origin) {
            report.exit_code = 2;
            report.error = "invalid URL: " + options.target;
            return report;
        }
        auto client = detail::make_client(*origin, options.request_timeout_seconds);
        auto result = client->Get(origin->path, {{"Accept", "application/td+json, application/json"}});
        if (!result || result->status != 200) {
            report.exit_code = 2;
            report.error = "cannot fetch " + options.target + ": " + detail::status_detail(result);
            return report;
        }
        text = result->body;
    } else {
        std::ifstream in(options.target, std::ios::binary);
        if (!in) {
            report.exit_code = 2;
            report.error = "cannot read " + options.target;
            return report;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }

    ThingDescription td;
    try {
        td = parse_td(text);
    } catch (const Error& e) {
        report.exit_code = 2;
        report.error = std::string("target is not a usable Thing Description: ") + e.what();
        return report;
    }

    detail::Prober prober(td, origin, options);
    auto guarded = [&](auto&& run, const std::string& name, const std::string& kind) {
        try {
            report.entries.push_back(run());
        } catch (const std::exception& e) {
            report.entries.push_back({name, kind, false, e.what()});
        }
    };
    for (const auto& [name, p] : td.properties)
        guarded([&] { return prober.property(name, p); }, name, "property");
    for (const auto& [name, a] : td.actions)
        guarded([&] { return prober.action(name, a); }, name, "action");
    for (const auto& [name, e] : td.events)
        guarded([&] { return prober.event(name, e); }, name, "event");

    report.exit_code = 0;
    for (const auto& entry : report.entries)
        if (!entry.pass)
            report.exit_code = 1;
    return report;
}

inline Json report_to_json(const ProbeReport& report)
{
    Json out = Json::array();
    for (const auto& e : report.entries)
        out.push_back({{"affordance", e.affordance}, {"kind", e.kind}, {"result", e.pass ? "PASS" : "FAIL"}, {"detail", e.detail}});
    return out;
}

inline std::string format_report(const ProbeReport& report)
{
    std::ostringstream out;
    if (report.exit_code == 2) {
        out << "error: " << report.error << "\n";
        return out.str();
    }
    std::size_t width = 10;
    for (const auto& e : report.entries)
        width = std::max(width, e.affordance.size());
    out << std::left << std::setw(9) << "KIND" << std::setw(static_cast<int>(width) + 2) << "AFFORDANCE" << std::setw(7) << "RESULT"
        << "DETAIL\n";
    std::size_t passed = 0;
    for (const auto& e : report.entries) {
        out << std::left << std::setw(9) << e.kind << std::setw(static_cast<int>(width) + 2) << e.affordance << std::setw(7)
            << (e.pass ? "PASS" : "FAIL") << e.detail << "\n";
        passed += e.pass ? 1 : 0;
    }
    out << passed << "/" << report.entries.size() << " affordances passed\n";
    return out.str();
}

} // namespace vthing
