#pragma once

#include <chrono>
#include <memory>
#include <mutex>

namespace vthing {

/// Monotonic time source in seconds. Injected into the event scheduler so
/// that minute-scale intervals can be tested without waiting.
class Clock {
public:
    virtual ~Clock() = default;
    virtual double now() const = 0;
};

class SteadyClock final : public Clock {
public:
    double now() const override
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

class ManualClock final : public Clock {
public:
    explicit ManualClock(double start = 0.0) : now_(start) {}

    double now() const override
    {
        std::lock_guard lock(mutex_);
        return now_;
    }

    void set(double t)
    {
        std::lock_guard lock(mutex_);
        now_ = t;
    }

    void advance(double seconds)
    {
        std::lock_guard lock(mutex_);
        now_ += seconds;
    }

private:
    mutable std::mutex mutex_;
    double now_;
};

inline std::shared_ptr<Clock> make_steady_clock() { return std::make_shared<SteadyClock>(); }

} // namespace vthing
