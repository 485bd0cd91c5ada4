#include <gtest/gtest.h>

#include "vthing/config.hpp"

using namespace vthing;

TEST(Config, Defaults)
{
    auto c = resolve_config(std::nullopt, {});
    EXPECT_EQ(c.address, "127.0.0.1");
    EXPECT_EQ(c.port, 8080);
    EXPECT_EQ(c.event_mode.default_schedule, EventSchedule::random());
    EXPECT_FALSE(c.seed);
    EXPECT_EQ(c.log_level, LogLevel::Info);
    EXPECT_EQ(c.base_url(), "http://127.0.0.1:8080");
}

TEST(Config, EventModeStrings)
{
    EXPECT_EQ(parse_event_schedule("none"), EventSchedule::none());
    EXPECT_EQ(parse_event_schedule("random"), EventSchedule::random());
    EXPECT_EQ(parse_event_schedule("fixed:1.5"), EventSchedule::fixed(1.5));
    for (const char* bad : {"fixed:", "fixed:0", "fixed:-2", "fixed:abc", "fixed:1s", "often"})
        EXPECT_THROW(parse_event_schedule(bad), Error) << bad;
}

TEST(Config, FileIsApplied)
{
    auto file = Json::parse(R"({"address":"0.0.0.0","port":9000,"eventMode":{"fixed":3},
                               "eventIntervals":{"error":2},"seed":7,"logLevel":"debug"})");
    auto c = resolve_config(file, {});
    EXPECT_EQ(c.address, "0.0.0.0");
    EXPECT_EQ(c.port, 9000);
    EXPECT_EQ(c.event_mode.default_schedule, EventSchedule::fixed(3));
    EXPECT_EQ(c.event_mode.for_event("error"), EventSchedule::fixed(2));
    EXPECT_EQ(c.event_mode.for_event("other"), EventSchedule::fixed(3));
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.log_level, LogLevel::Debug);
}

TEST(Config, FlagsOverrideFileKeyByKey)
{
    auto file = Json::parse(R"({"address":"0.0.0.0","port":9000,"eventMode":"none",
                               "eventIntervals":{"error":2,"other":4},"seed":7,"logLevel":"debug"})");
    auto base = resolve_config(file, {});

    ConfigOverrides address;
    address.address = "10.0.0.5";
    auto c = resolve_config(file, address);
    EXPECT_EQ(c.address, "10.0.0.5");
    EXPECT_EQ(c.port, base.port);

    ConfigOverrides port;
    port.port = 9090;
    c = resolve_config(file, port);
    EXPECT_EQ(c.port, 9090);
    EXPECT_EQ(c.address, base.address);

    ConfigOverrides mode;
    mode.event_mode = "fixed:1";
    c = resolve_config(file, mode);
    EXPECT_EQ(c.event_mode.default_schedule, EventSchedule::fixed(1));
    EXPECT_EQ(c.event_mode.overrides, base.event_mode.overrides);

    ConfigOverrides interval;
    interval.event_intervals["error"] = 9;
    c = resolve_config(file, interval);
    EXPECT_EQ(c.event_mode.for_event("error"), EventSchedule::fixed(9));
    EXPECT_EQ(c.event_mode.for_event("other"), EventSchedule::fixed(4));

    ConfigOverrides seed;
    seed.seed = 42;
    c = resolve_config(file, seed);
    EXPECT_EQ(c.seed, 42u);

    ConfigOverrides level;
    level.log_level = "warn";
    c = resolve_config(file, level);
    EXPECT_EQ(c.log_level, LogLevel::Warn);
    EXPECT_EQ(c.seed, base.seed);
}

TEST(Config, RejectsBadValues)
{
    EXPECT_THROW(resolve_config(Json::parse(R"({"port":0})"), {}), Error);
    EXPECT_THROW(resolve_config(Json::parse(R"({"port":70000})"), {}), Error);
    EXPECT_THROW(resolve_config(Json::parse(R"({"eventMode":"sometimes"})"), {}), Error);
    EXPECT_THROW(resolve_config(Json::parse(R"({"eventMode":{"fixed":0}})"), {}), Error);
    EXPECT_THROW(resolve_config(Json::parse(R"({"seed":-1})"), {}), Error);
    EXPECT_THROW(resolve_config(Json::parse(R"({"logLevel":"loud"})"), {}), Error);
    EXPECT_THROW(resolve_config(Json::parse(R"({"colour":"red"})"), {}), Error);
    EXPECT_THROW(resolve_config(Json::parse(R"([1])"), {}), Error);
    ConfigOverrides bad_port;
    bad_port.port = 0;
    EXPECT_THROW(resolve_config(std::nullopt, bad_port), Error);
}

TEST(Config, Ipv6BaseUrl)
{
    ServientConfig c;
    c.address = "::1";
    c.port = 81;
    EXPECT_EQ(c.base_url(), "http://[::1]:81");
}
