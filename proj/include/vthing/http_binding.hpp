#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "vthing/config.hpp"
#include "vthing/error.hpp"
#include "vthing/json.hpp"
#include "vthing/runtime.hpp"
#include "vthing/schema_validate.hpp"
#include "vthing/td_parser.hpp"

namespace vthing {

inline constexpr std::string_view kJsonContentType = "application/json";
inline constexpr std::string_view kTdContentType = "application/td+json";
inline constexpr std::string_view kEventStreamContentType = "text/event-stream";

/// SSE frame for one payload: `data: <compact JSON>` and a blank line.
inline std::string sse_frame(const Json& payload) { return "data: " + dump_compact(payload) + "\n\n"; }

namespace detail {

inline std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Media type without parameters, lower-cased.
inline std::string media_type(std::string_view header)
{
    auto semi = header.find(';');
    auto type = header.substr(0, semi);
    while (!type.empty() && std::isspace(static_cast<unsigned char>(type.back())))
        type.remove_suffix(1);
    while (!type.empty() && std::isspace(static_cast<unsigned char>(type.front())))
        type.remove_prefix(1);
    return lower(type);
}

inline bool is_json_media_type(std::string_view header)
{
    auto type = media_type(header);
    return type == kJsonContentType || (type.size() > 5 && type.ends_with("+json"));
}

inline bool accepts_event_stream(std::string_view accept)
{
    return lower(accept).find(kEventStreamContentType) != std::string::npos;
}

inline void send_json(httplib::Response& res, int status, const Json& body, std::string_view content_type = kJsonContentType)
{
    res.status = status;
    res.set_content(dump_compact(body), std::string(content_type));
}

inline void send_error(httplib::Response& res, int status, const std::string& message, const ValidationResult* result = nullptr)
{
    Json body{{"error", message}};
    if (result)
        body["violations"] = violations_to_json(*result);
    send_json(res, status, body);
}

} // namespace detail

/// One servient's HTTP front end. Routes, for each hosted thing T:
///
///   GET  /T                      rewritten TD (application/td+json)
///   GET  /T/properties           every property value
///   GET  /T/properties/{name}    property value
///   PUT  /T/properties/{name}    204 | 400 | 404 | 405 read-only | 415
///   POST /T/actions/{name}       200 output | 204 | 400 | 404
///   GET  /T/events/{name}        Server-Sent Events (Accept: text/event-stream, else 406)
///
/// Anything else is 404 {"error": "not found"}.
class HttpServer {
public:
    HttpServer(std::vector<std::shared_ptr<VirtualThing>> things, ServientConfig config)
        : things_(std::move(things)), config_(std::move(config))
    {
        config_.check();
        std::set<std::string> segments;
        for (const auto& t : things_)
            if (!segments.insert(t->segment()).second)
                throw Error(Errc::DuplicateThingName, "two things share the URL segment '" + t->segment() + "'");
        // No SO_REUSEPORT: a second server on a busy port must fail to bind.
        server_.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
        });
        install_routes();
    }

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;
    ~HttpServer() { stop(); }

    /// Bind and start serving in the background. Errors: BindFailure.
    void start()
    {
        if (!server_.bind_to_port(config_.address, config_.port))
            throw Error(Errc::BindFailure, "cannot listen on " + config_.address + ":" + std::to_string(config_.port));
        listener_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        pump_ = std::make_unique<EventPump>(things_);
        running_ = true;
    }

    /// Graceful shutdown: event streams end, in-flight requests finish.
    void stop()
    {
        if (!running_.exchange(false))
            return;
        stopping_ = true;
        pump_.reset();
        for (const auto& t : things_)
            t->close_subscriptions();
        server_.stop();
        if (listener_.joinable())
            listener_.join();
    }

    bool running() const noexcept { return running_; }
    const ServientConfig& config() const noexcept { return config_; }
    const std::vector<std::shared_ptr<VirtualThing>>& things() const noexcept { return things_; }

    /// Method and absolute URL of every route, for startup logs.
    std::vector<std::string> route_list() const
    {
        std::vector<std::string> routes;
        for (const auto& t : things_) {
            auto url = t->thing_url();
            routes.push_back("GET  " + url);
            routes.push_back("GET  " + url + "/properties");
            for (const auto& [name, p] : t->original_td().properties) {
                routes.push_back("GET  " + url + "/properties/" + percent_encode(name));
                if (!p.read_only)
                    routes.push_back("PUT  " + url + "/properties/" + percent_encode(name));
            }
            for (const auto& [name, a] : t->original_td().actions)
                routes.push_back("POST " + url + "/actions/" + percent_encode(name));
            for (const auto& [name, e] : t->original_td().events)
                routes.push_back("GET  " + url + "/events/" + percent_encode(name) + " (SSE)");
        }
        return routes;
    }

private:
    struct Target {
        std::shared_ptr<VirtualThing> thing;
        std::string rest; // path after the thing segment, e.g. "/properties/state"
    };

    // httplib hands over the percent-decoded path, so match on raw titles.
    // Longest title wins when one title is a prefix of another.
    std::optional<Target> resolve(const std::string& path) const
    {
        std::optional<Target> best;
        std::size_t best_len = 0;
        for (const auto& t : things_) {
            const std::string prefix = "/" + t->title();
            if (path.size() < prefix.size() || path.compare(0, prefix.size(), prefix) != 0)
                continue;
            if (path.size() > prefix.size() && path[prefix.size()] != '/')
                continue;
            if (!best || prefix.size() > best_len) {
                best = Target{t, path.substr(prefix.size())};
                best_len = prefix.size();
            }
        }
        return best;
    }

    static std::optional<std::string> member(const std::string& rest, std::string_view section)
    {
        const std::string prefix = "/" + std::string(section) + "/";
        if (rest.size() <= prefix.size() || rest.compare(0, prefix.size(), prefix) != 0)
            return std::nullopt;
        return rest.substr(prefix.size());
    }

    void install_routes()
    {
        server_.new_task_queue = [] { return new httplib::ThreadPool(64); };
        auto guarded = [this](auto handler) {
            return [this, handler](const httplib::Request& req, httplib::Response& res) {
                try {
                    (this->*handler)(req, res);
                } catch (const ValidationError& e) {
                    detail::send_error(res, 400, e.what(), &e.result());
                } catch (const Error& e) {
                    switch (e.code()) {
                    case Errc::UnknownProperty:
                    case Errc::UnknownAction:
                    case Errc::UnknownEvent:
                        detail::send_error(res, 404, "not found");
                        break;
                    case Errc::ReadOnlyProperty:
                        detail::send_error(res, 405, e.what());
                        break;
                    case Errc::MalformedJson:
                        detail::send_error(res, 400, e.what());
                        break;
                    default:
                        detail::send_error(res, 500, e.what());
                    }
                } catch (const std::exception& e) {
                    detail::send_error(res, 500, e.what());
                }
                spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
            };
        };
        server_.Get(".*", guarded(&HttpServer::handle_get));
        server_.Put(".*", guarded(&HttpServer::handle_put));
        server_.Post(".*", guarded(&HttpServer::handle_post));
        auto not_found = [](const httplib::Request&, httplib::Response& res) { detail::send_error(res, 404, "not found"); };
        server_.Delete(".*", not_found);
        server_.Patch(".*", not_found);
        server_.Options(".*", not_found);
    }

    void handle_get(const httplib::Request& req, httplib::Response& res)
    {
        auto target = resolve(req.path);
        if (!target)
            return detail::send_error(res, 404, "not found");
        auto& thing = *target->thing;
        const auto& rest = target->rest;

        if (rest.empty())
            return detail::send_json(res, 200, td_to_json(thing.exposed_td()), kTdContentType);
        if (rest == "/properties")
            return detail::send_json(res, 200, thing.read_all_properties());
        if (auto name = member(rest, "properties"))
            return detail::send_json(res, 200, thing.read_property(*name));
        if (auto name = member(rest, "events"))
            return open_event_stream(thing, *name, req, res);
        detail::send_error(res, 404, "not found");
    }

    void handle_put(const httplib::Request& req, httplib::Response& res)
    {
        auto target = resolve(req.path);
        auto name = target ? member(target->rest, "properties") : std::nullopt;
        if (!name)
            return detail::send_error(res, 404, "not found");
        auto& thing = *target->thing;
        const auto* affordance = thing.original_td().properties.get(*name);
        if (!affordance)
            return detail::send_error(res, 404, "not found");
        if (affordance->read_only)
            return detail::send_error(res, 405, "property '" + *name + "' is read-only");
        if (req.has_header("Content-Type") && !detail::is_json_media_type(req.get_header_value("Content-Type")))
            return detail::send_error(res, 415, "payload must be application/json");
        thing.write_property(*name, parse_json(req.body));
        res.status = 204;
    }

    void handle_post(const httplib::Request& req, httplib::Response& res)
    {
        auto target = resolve(req.path);
        auto name = target ? member(target->rest, "actions") : std::nullopt;
        if (!name)
            return detail::send_error(res, 404, "not found");
        std::optional<Json> input;
        if (req.body.find_first_not_of(" \t\r\n") != std::string::npos)
            input = parse_json(req.body);
        auto output = target->thing->invoke_action(*name, input);
        if (output)
            detail::send_json(res, 200, *output);
        else
            res.status = 204;
    }

    void open_event_stream(VirtualThing& thing, const std::string& name, const httplib::Request& req, httplib::Response& res)
    {
        auto subscription = std::make_shared<Subscription>(thing.subscribe_event(name));
        if (!detail::accepts_event_stream(req.get_header_value("Accept")))
            return detail::send_error(res, 406, "event subscriptions require Accept: text/event-stream");

        res.status = 200;
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            std::string(kEventStreamContentType),
            [this, subscription](std::size_t, httplib::DataSink& sink) {
                if (stopping_) {
                    sink.done();
                    return true;
                }
                if (auto message = subscription->next(std::chrono::milliseconds(200))) {
                    auto frame = sse_frame(message->payload);
                    return sink.write(frame.data(), frame.size());
                }
                if (subscription->closed()) {
                    sink.done();
                    return true;
                }
                return sink.is_writable();
            },
            [subscription](bool) { subscription->unsubscribe(); });
    }

    std::vector<std::shared_ptr<VirtualThing>> things_;
    ServientConfig config_;
    httplib::Server server_;
    std::thread listener_;
    std::unique_ptr<EventPump> pump_;
    std::atomic<bool> running_{false};
    std::atomic<bool> stopping_{false};
};

/// Start serving `things` as configured. Errors: DuplicateThingName, BindFailure.
inline std::unique_ptr<HttpServer> serve(std::vector<std::shared_ptr<VirtualThing>> things, const ServientConfig& config)
{
    auto server = std::make_unique<HttpServer>(std::move(things), config);
    server->start();
    return server;
}

inline std::unique_ptr<HttpServer> serve(const Servient& servient)
{
    return serve(servient.things(), servient.config());
}

} // namespace vthing
