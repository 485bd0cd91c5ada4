#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "vthing/clock.hpp"
#include "vthing/config.hpp"
#include "vthing/error.hpp"
#include "vthing/json.hpp"
#include "vthing/random_source.hpp"
#include "vthing/schema_gen.hpp"
#include "vthing/schema_validate.hpp"
#include "vthing/td_model.hpp"
#include "vthing/td_parser.hpp"

namespace vthing {

/// URL path segment of a thing: its title, percent-encoded.
inline std::string thing_segment(const ThingDescription& td) { return percent_encode(td.title); }

/// Copy of `td` whose forms all point at this servient:
/// `<base_url>/<thing>/{properties,actions,events}/<name>`. Each affordance
/// gets exactly one form and "base" is dropped; nothing else changes.
inline ThingDescription rewrite_td(const ThingDescription& td, const std::string& base_url)
{
    ThingDescription out = td;
    out.base.reset();
    const std::string thing_url = base_url + "/" + thing_segment(td);

    auto retarget = [](auto& affordance, const std::string& href) {
        affordance.forms = {Form{href, std::nullopt, std::nullopt}};
        affordance.raw["forms"] = Json::array({Json{{"href", href}}});
    };
    for (auto& [name, p] : out.properties)
        retarget(p, thing_url + "/properties/" + percent_encode(name));
    for (auto& [name, a] : out.actions)
        retarget(a, thing_url + "/actions/" + percent_encode(name));
    for (auto& [name, e] : out.events)
        retarget(e, thing_url + "/events/" + percent_encode(name));
    return out;
}

struct EventMessage {
    double time; // scheduled emission time on the thing's clock
    Json payload;
};

namespace detail {

class EventQueue {
public:
    /// False once closed; the message is dropped.
    bool push(EventMessage message)
    {
        {
            std::lock_guard lock(mutex_);
            if (closed_)
                return false;
            queue_.push_back(std::move(message));
        }
        cv_.notify_all();
        return true;
    }

    std::optional<EventMessage> pop(std::chrono::milliseconds timeout)
    {
        std::unique_lock lock(mutex_);
        cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
        if (queue_.empty())
            return std::nullopt;
        auto message = std::move(queue_.front());
        queue_.pop_front();
        return message;
    }

    std::vector<EventMessage> drain()
    {
        std::lock_guard lock(mutex_);
        std::vector<EventMessage> out(std::make_move_iterator(queue_.begin()), std::make_move_iterator(queue_.end()));
        queue_.clear();
        return out;
    }

    void close()
    {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    bool closed() const
    {
        std::lock_guard lock(mutex_);
        return closed_;
    }

private:
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<EventMessage> queue_;
    bool closed_ = false;
};

} // namespace detail

/// Receives every emission of one event from the moment it was created
/// until unsubscribe() (or destruction). Earlier emissions are not replayed.
class Subscription {
public:
    Subscription() = default;
    explicit Subscription(std::shared_ptr<detail::EventQueue> queue) : queue_(std::move(queue)) {}
    Subscription(const Subscription&) = delete;
    Subscription& operator=(const Subscription&) = delete;
    Subscription(Subscription&&) noexcept = default;
    Subscription& operator=(Subscription&& other) noexcept
    {
        if (this != &other) {
            unsubscribe();
            queue_ = std::move(other.queue_);
        }
        return *this;
    }
    ~Subscription() { unsubscribe(); }

    /// Wait up to `timeout` for the next message. Queued messages are still
    /// returned after the stream is closed.
    std::optional<EventMessage> next(std::chrono::milliseconds timeout = std::chrono::milliseconds(0))
    {
        return queue_ ? queue_->pop(timeout) : std::nullopt;
    }

    std::vector<EventMessage> drain() { return queue_ ? queue_->drain() : std::vector<EventMessage>{}; }

    /// True after unsubscribe() or when the thing closed its streams.
    bool closed() const { return !queue_ || queue_->closed(); }

    void unsubscribe()
    {
        if (queue_)
            queue_->close();
    }

private:
    std::shared_ptr<detail::EventQueue> queue_;
};

struct VirtualThingOptions {
    std::string base_url = "http://127.0.0.1:8080";
    EventMode event_mode;
    std::optional<std::uint64_t> seed;
    std::shared_ptr<Clock> clock;
};

/// A simulated Thing built from a TD alone. Properties, action outputs and
/// event payloads are generated from the affordance schemas; written
/// property values persist until the next write.
///
/// Thread-safe: all state sits behind one mutex, so property access is
/// linearizable and the request RandomSource is consumed in some serial
/// order. Events draw from a separate stream so that scheduling does not
/// perturb the request sequence.
class VirtualThing {
public:
    VirtualThing(ThingDescription td, VirtualThingOptions options)
        : original_(std::move(td)),
          exposed_(rewrite_td(original_, options.base_url)),
          segment_(thing_segment(original_)),
          base_url_(std::move(options.base_url)),
          event_mode_(std::move(options.event_mode)),
          clock_(options.clock ? std::move(options.clock) : make_steady_clock()),
          rng_(options.seed ? RandomSource(mix_seed(*options.seed ^ fnv1a(segment_))) : RandomSource::from_entropy()),
          event_rng_(mix_seed(rng_.seed() + 1))
    {
        for (const auto& [name, p] : original_.properties)
            store_[name] = std::nullopt;
        warn_about_schemas();
        double now = clock_->now();
        for (const auto& [name, e] : original_.events) {
            EventState state;
            state.schedule = event_mode_.for_event(name);
            if (state.schedule.kind != EventSchedule::Kind::None)
                state.next_due = now + draw_interval(state.schedule);
            events_.emplace(name, std::move(state));
        }
    }

    VirtualThing(const VirtualThing&) = delete;
    VirtualThing& operator=(const VirtualThing&) = delete;
    ~VirtualThing() { close_subscriptions(); }

    const ThingDescription& original_td() const noexcept { return original_; }
    const ThingDescription& exposed_td() const noexcept { return exposed_; }
    const std::string& segment() const noexcept { return segment_; }
    const std::string& title() const noexcept { return original_.title; }
    const std::string& base_url() const noexcept { return base_url_; }
    std::string thing_url() const { return base_url_ + "/" + segment_; }
    std::uint64_t seed() const noexcept { return rng_.seed(); }
    const Clock& clock() const noexcept { return *clock_; }

    /// Stored value if the property was written, else a fresh random value.
    Json read_property(const std::string& name)
    {
        const auto& affordance = property(name);
        std::lock_guard lock(mutex_);
        if (const auto& stored = store_.at(name))
            return *stored;
        return generate(affordance.data_schema, rng_);
    }

    /// One value per property, in TD order.
    Json read_all_properties()
    {
        std::lock_guard lock(mutex_);
        Json out = Json::object();
        for (const auto& [name, p] : original_.properties) {
            const auto& stored = store_.at(name);
            out[name] = stored ? *stored : generate(p.data_schema, rng_);
        }
        return out;
    }

    /// Errors: UnknownProperty, ReadOnlyProperty, InvalidValue (ValidationError).
    void write_property(const std::string& name, const Json& value)
    {
        const auto& affordance = property(name);
        if (affordance.read_only)
            throw Error(Errc::ReadOnlyProperty, "property '" + name + "' is read-only");
        auto result = validate(affordance.data_schema, value);
        if (!result.valid)
            throw ValidationError(Errc::InvalidValue, "value rejected for property '" + name + "'", std::move(result));
        std::lock_guard lock(mutex_);
        store_.at(name) = value;
    }

    /// Written value of a property, if any.
    std::optional<Json> stored_value(const std::string& name) const
    {
        property(name);
        std::lock_guard lock(mutex_);
        return store_.at(name);
    }

    /// Validates input against the action's input schema (if it has one)
    /// and returns a generated output (if it declares one).
    /// Errors: UnknownAction, MissingInput, InvalidInput (both ValidationError).
    std::optional<Json> invoke_action(const std::string& name, const std::optional<Json>& input)
    {
        const auto* action = original_.actions.get(name);
        if (!action)
            throw Error(Errc::UnknownAction, "no action named '" + name + "'");
        if (action->input) {
            if (!input) {
                ValidationResult missing;
                missing.add("", "required", "action '" + name + "' requires an input value");
                throw ValidationError(Errc::MissingInput, "action '" + name + "' requires input", std::move(missing));
            }
            auto result = validate(*action->input, *input);
            if (!result.valid)
                throw ValidationError(Errc::InvalidInput, "input rejected for action '" + name + "'", std::move(result));
        }
        if (!action->output)
            return std::nullopt;
        std::lock_guard lock(mutex_);
        return generate(*action->output, rng_);
    }

    /// Errors: UnknownEvent.
    Subscription subscribe_event(const std::string& name)
    {
        std::lock_guard lock(mutex_);
        auto it = events_.find(name);
        if (it == events_.end())
            throw Error(Errc::UnknownEvent, "no event named '" + name + "'");
        auto queue = std::make_shared<detail::EventQueue>();
        if (closed_)
            queue->close();
        else
            it->second.subscribers.push_back(queue);
        return Subscription(queue);
    }

    std::size_t subscriber_count(const std::string& name)
    {
        std::lock_guard lock(mutex_);
        auto it = events_.find(name);
        if (it == events_.end())
            throw Error(Errc::UnknownEvent, "no event named '" + name + "'");
        prune(it->second);
        return it->second.subscribers.size();
    }

    const EventSchedule& schedule_for(const std::string& name) const
    {
        auto it = events_.find(name);
        if (it == events_.end())
            throw Error(Errc::UnknownEvent, "no event named '" + name + "'");
        return it->second.schedule;
    }

    /// Time of the next scheduled emission of `name`, if any.
    std::optional<double> next_due(const std::string& name)
    {
        std::lock_guard lock(mutex_);
        auto it = events_.find(name);
        if (it == events_.end())
            throw Error(Errc::UnknownEvent, "no event named '" + name + "'");
        return it->second.next_due;
    }

    /// One scheduler step for `name`: generate a payload (null without a
    /// data schema), deliver it to every current subscriber, then schedule
    /// the next emission relative to this one.
    void emit_cycle(const std::string& name)
    {
        std::lock_guard lock(mutex_);
        auto it = events_.find(name);
        if (it == events_.end())
            throw Error(Errc::UnknownEvent, "no event named '" + name + "'");
        emit_locked(name, it->second);
    }

    /// Emit everything due at the current clock time, oldest first. Returns
    /// the earliest pending due time.
    std::optional<double> pump_events()
    {
        std::lock_guard lock(mutex_);
        double now = clock_->now();
        for (;;) {
            EventState* earliest = nullptr;
            const std::string* earliest_name = nullptr;
            for (auto& [name, state] : events_) {
                if (state.next_due && (!earliest || *state.next_due < *earliest->next_due)) {
                    earliest = &state;
                    earliest_name = &name;
                }
            }
            if (!earliest)
                return std::nullopt;
            if (*earliest->next_due > now)
                return earliest->next_due;
            emit_locked(*earliest_name, *earliest);
        }
    }

    /// Close every event stream; later subscriptions start closed.
    void close_subscriptions()
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
        for (auto& [name, state] : events_) {
            for (auto& q : state.subscribers)
                q->close();
            state.subscribers.clear();
        }
    }

private:
    struct EventState {
        EventSchedule schedule;
        std::optional<double> next_due;
        std::vector<std::shared_ptr<detail::EventQueue>> subscribers;
    };

    const PropertyAffordance& property(const std::string& name) const
    {
        const auto* p = original_.properties.get(name);
        if (!p)
            throw Error(Errc::UnknownProperty, "no property named '" + name + "'");
        return *p;
    }

    double draw_interval(const EventSchedule& schedule)
    {
        if (schedule.kind == EventSchedule::Kind::FixedInterval)
            return schedule.seconds;
        return event_rng_.uniform_real(kRandomIntervalMin, kRandomIntervalMax);
    }

    static void prune(EventState& state)
    {
        std::erase_if(state.subscribers, [](const auto& q) { return q->closed(); });
    }

    void emit_locked(const std::string& name, EventState& state)
    {
        double at = state.next_due.value_or(clock_->now());
        // next_due advances even when generation throws.
        if (state.schedule.kind == EventSchedule::Kind::None)
            state.next_due.reset();
        else
            state.next_due = at + draw_interval(state.schedule);
        const auto& data = original_.events.get(name)->data;
        Json payload = data ? generate(*data, event_rng_) : Json(nullptr);
        prune(state);
        for (auto& q : state.subscribers)
            q->push(EventMessage{at, payload});
    }

    void warn_about_schemas()
    {
        auto check = [&](const std::string& what, const DataSchema& schema) {
            if (!schema.type && !schema.enum_values && !schema.const_value && !schema.one_of && !schema.minimum &&
                !schema.maximum)
                spdlog::warn("[{}] {} has no type/enum/const/oneOf; it will always be null", original_.title, what);
            RandomSource probe(0);
            try {
                generate(schema, probe);
            } catch (const Error& e) {
                spdlog::warn("[{}] {} cannot be generated: {}", original_.title, what, e.what());
            }
        };
        for (const auto& [name, p] : original_.properties)
            check("property '" + name + "'", p.data_schema);
        for (const auto& [name, a] : original_.actions)
            if (a.output)
                check("output of action '" + name + "'", *a.output);
        for (const auto& [name, e] : original_.events)
            if (e.data)
                check("data of event '" + name + "'", *e.data);
    }

    ThingDescription original_;
    ThingDescription exposed_;
    std::string segment_;
    std::string base_url_;
    EventMode event_mode_;
    std::shared_ptr<Clock> clock_;

    mutable std::mutex mutex_;
    RandomSource rng_;
    RandomSource event_rng_;
    std::map<std::string, std::optional<Json>> store_;
    std::map<std::string, EventState> events_;
    bool closed_ = false;
};

/// Hosts any number of virtual things under one base URL. Things are keyed
/// by URL segment, which must be unique.
class Servient {
public:
    explicit Servient(ServientConfig config, std::shared_ptr<Clock> clock = make_steady_clock())
        : config_(std::move(config)), clock_(std::move(clock))
    {
        config_.check();
    }

    const ServientConfig& config() const noexcept { return config_; }
    std::string base_url() const { return config_.base_url(); }
    const std::vector<std::shared_ptr<VirtualThing>>& things() const noexcept { return things_; }

    std::shared_ptr<VirtualThing> find(const std::string& segment) const
    {
        for (const auto& t : things_)
            if (t->segment() == segment)
                return t;
        return nullptr;
    }

    /// Errors: DuplicateThingName.
    std::shared_ptr<VirtualThing> attach(ThingDescription td)
    {
        auto segment = thing_segment(td);
        if (find(segment))
            throw Error(Errc::DuplicateThingName, "a thing titled '" + td.title + "' is already attached");
        VirtualThingOptions options;
        options.base_url = base_url();
        options.event_mode = config_.event_mode;
        options.seed = config_.seed;
        options.clock = clock_;
        auto thing = std::make_shared<VirtualThing>(std::move(td), std::move(options));
        things_.push_back(thing);
        return thing;
    }

private:
    ServientConfig config_;
    std::shared_ptr<Clock> clock_;
    std::vector<std::shared_ptr<VirtualThing>> things_;
};

inline std::shared_ptr<VirtualThing> create_virtual_thing(Servient& servient, ThingDescription td)
{
    return servient.attach(std::move(td));
}

/// Background thread that drives event emission for a set of things in
/// real time (steady clock).
class EventPump {
public:
    explicit EventPump(std::vector<std::shared_ptr<VirtualThing>> things) : things_(std::move(things))
    {
        thread_ = std::thread([this] { run(); });
    }
    EventPump(const EventPump&) = delete;
    EventPump& operator=(const EventPump&) = delete;
    ~EventPump() { stop(); }

    void stop()
    {
        {
            std::lock_guard lock(mutex_);
            stopping_ = true;
        }
        cv_.notify_all();
        if (thread_.joinable())
            thread_.join();
    }

private:
    void run()
    {
        constexpr double kMaxSleep = 0.25;
        std::unique_lock lock(mutex_);
        while (!stopping_) {
            double sleep = kMaxSleep;
            lock.unlock();
            for (const auto& thing : things_) {
                try {
                    if (auto due = thing->pump_events())
                        sleep = std::min(sleep, std::max(0.0, *due - thing->clock().now()));
                } catch (const std::exception& e) {
                    spdlog::error("[{}] event emission failed: {}", thing->title(), e.what());
                }
            }
            lock.lock();
            cv_.wait_for(lock, std::chrono::duration<double>(sleep), [&] { return stopping_; });
        }
    }

    std::vector<std::shared_ptr<VirtualThing>> things_;
    std::mutex mutex_;
    std::condition_variable cv_;
    bool stopping_ = false;
    std::thread thread_;
};

} // namespace vthing
