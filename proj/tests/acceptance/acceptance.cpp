// Acceptance suite: one gtest per criterion, summarised as one PASS/FAIL
// line each after the run.

#include <chrono>
#include <iostream>
#include <map>
#include <regex>
#include <set>

#include <gtest/gtest.h>

#include "support/live.hpp"
#include "support/oracles.hpp"
#include "support/random_schema.hpp"
#include "vthing/vthing.hpp"

using namespace vthing;
using namespace vthing::testing;

namespace {

// Pinned limits.
constexpr int kStateReads = 100;
constexpr double kStateReadBudgetSeconds = 5.0;
constexpr int kRandomGaps = 100;
constexpr double kGapMin = 5.0;
constexpr double kGapMax = 60.0;
constexpr int kFixedExpected = 10;
constexpr int kFixedTolerance = 1;
constexpr double kWallClockSeconds = 10.0;
constexpr std::size_t kWallClockMinMessages = 8;
constexpr int kGeneratedTds = 50;
constexpr int kSoundnessSchemas = 1000;
constexpr int kSoundnessSeeds = 10;
constexpr int kSoundnessDepth = 4;
constexpr double kSoundnessBudgetSeconds = 30.0;
constexpr int kMutantsPerSchema = 100;
constexpr double kSelfConsistencyBudgetSeconds = 30.0;

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Reference encoder for URL segments, written independently of the library.
std::string encode_segment(const std::string& s)
{
    std::string out;
    char buf[4];
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
            out += static_cast<char>(c);
        } else {
            std::snprintf(buf, sizeof(buf), "%%%02X", c);
            out += buf;
        }
    }
    return out;
}

ServientConfig test_config(EventSchedule schedule = EventSchedule::none())
{
    ServientConfig c;
    c.port = free_port();
    c.seed = 42;
    c.event_mode.default_schedule = schedule;
    return c;
}

std::vector<Json> generated_tds()
{
    TdFuzzer fuzz(7);
    std::vector<Json> out;
    for (int i = 0; i < kGeneratedTds; ++i)
        out.push_back(fuzz.td());
    return out;
}

} // namespace

TEST(Acceptance, C1_CoffeeMachineStateEndToEnd)
{
    auto started = std::chrono::steady_clock::now();
    Servient servient(test_config());
    servient.attach(coffee_machine());
    auto server = serve(servient);
    httplib::Client client("127.0.0.1", servient.config().port);

    const std::set<std::string> allowed{"Ready", "Brewing", "Error"};
    std::set<std::string> seen;
    for (int i = 0; i < kStateReads; ++i) {
        auto r = client.Get("/Coffee-Machine/properties/state");
        ASSERT_TRUE(r);
        ASSERT_EQ(r->status, 200);
        auto v = Json::parse(r->body);
        ASSERT_TRUE(v.is_string()) << r->body;
        EXPECT_TRUE(allowed.count(v.get<std::string>())) << r->body;
        seen.insert(v.get<std::string>());
    }
    server->stop();
    EXPECT_GE(seen.size(), 2u);
    EXPECT_LT(seconds_since(started), kStateReadBudgetSeconds);
}

TEST(Acceptance, C2_BrewActionContract)
{
    Servient servient(test_config());
    servient.attach(coffee_machine());
    auto server = serve(servient);
    httplib::Client client("127.0.0.1", servient.config().port);

    for (const char* ok : {R"("espresso")", R"("cappuccino")"}) {
        auto r = client.Post("/Coffee-Machine/actions/brew", ok, "application/json");
        ASSERT_TRUE(r);
        EXPECT_EQ(r->status, 204) << ok;
    }
    for (const char* bad : {R"("latte")", "7", ""}) {
        auto r = client.Post("/Coffee-Machine/actions/brew", bad, "application/json");
        ASSERT_TRUE(r);
        EXPECT_EQ(r->status, 400) << bad;
        auto body = Json::parse(r->body);
        ASSERT_TRUE(body["violations"].is_array()) << r->body;
        EXPECT_FALSE(body["violations"].empty()) << r->body;
    }
}

TEST(Acceptance, C3_EventTiming)
{
    {
        auto clock = std::make_shared<ManualClock>();
        ServientConfig config = test_config(EventSchedule::random());
        Servient servient(config, clock);
        auto thing = servient.attach(coffee_machine());
        auto sub = thing->subscribe_event("error");
        std::vector<double> times;
        while (static_cast<int>(times.size()) < kRandomGaps + 1) {
            auto due = thing->next_due("error");
            ASSERT_TRUE(due);
            clock->set(*due);
            thing->pump_events();
            for (auto& m : sub.drain())
                times.push_back(m.time);
        }
        for (int i = 1; i <= kRandomGaps; ++i) {
            double gap = times[i] - times[i - 1];
            EXPECT_GE(gap, kGapMin) << "gap " << i;
            EXPECT_LE(gap, kGapMax) << "gap " << i;
        }
    }
    {
        auto clock = std::make_shared<ManualClock>();
        Servient servient(test_config(EventSchedule::fixed(2.0)), clock);
        auto thing = servient.attach(coffee_machine());
        auto sub = thing->subscribe_event("error");
        for (int step = 1; step <= 200; ++step) {
            clock->set(step * 0.1);
            thing->pump_events();
        }
        auto n = static_cast<int>(sub.drain().size());
        EXPECT_GE(n, kFixedExpected - kFixedTolerance);
        EXPECT_LE(n, kFixedExpected + kFixedTolerance);
    }
    {
        int port = free_port();
        ChildProcess child({cli_path(), "run", samples_path("things/coffee-machine.td.json"), "--port", std::to_string(port),
                            "--event-mode", "fixed:1"},
                           log_file("acceptance-c3"));
        ASSERT_TRUE(wait_for_http(port, "/Coffee-Machine"));
        auto frames = read_sse(port, "/Coffee-Machine/events/error", 1000, kWallClockSeconds);
        EXPECT_GE(frames.size(), kWallClockMinMessages);
        for (const auto& f : frames) {
            ASSERT_EQ(f.rfind("data: ", 0), 0u) << f;
            EXPECT_TRUE(Json::parse(f.substr(6)).is_string()) << f;
        }
        EXPECT_EQ(child.interrupt(), 0);
    }
}

TEST(Acceptance, C4_TdRewriteFidelity)
{
    auto inputs = generated_tds();
    inputs.insert(inputs.begin(), Json::parse(coffee_machine_text()));

    // Things with equal titles go to separate servients.
    std::vector<std::unique_ptr<Servient>> servients;
    std::vector<std::pair<Json, Servient*>> placed;
    for (const auto& doc : inputs) {
        auto td = parse_td(doc.dump());
        Servient* home = nullptr;
        for (auto& s : servients)
            if (!s->find(encode_segment(td.title))) {
                home = s.get();
                break;
            }
        if (!home) {
            servients.push_back(std::make_unique<Servient>(test_config()));
            home = servients.back().get();
        }
        home->attach(std::move(td));
        placed.emplace_back(doc, home);
    }
    std::vector<std::unique_ptr<HttpServer>> servers;
    for (auto& s : servients)
        servers.push_back(serve(*s));

    const std::regex allowed(R"(^/base$|^/(properties|actions|events)/[^/]+/forms(/.*)?$)");
    for (const auto& [doc, servient] : placed) {
        std::string title = doc["title"];
        std::string thing_url = servient->base_url() + "/" + encode_segment(title);
        httplib::Client client("127.0.0.1", servient->config().port);
        auto r = client.Get("/" + encode_segment(title));
        ASSERT_TRUE(r);
        ASSERT_EQ(r->status, 200) << title;
        auto served = Json::parse(r->body);

        for (const auto& path : json_diff(doc, served))
            EXPECT_TRUE(std::regex_match(path, allowed)) << title << ": " << path;
        EXPECT_FALSE(served.contains("base"));
        for (const char* section : {"properties", "actions", "events"}) {
            if (!doc.contains(section))
                continue;
            for (const auto& [name, affordance] : doc[section].items()) {
                auto expected = Json::array({Json{{"href", thing_url + "/" + section + "/" + encode_segment(name)}}});
                EXPECT_EQ(served[section][name]["forms"], expected) << title << " " << section << "/" << name;
            }
        }
    }
}

TEST(Acceptance, C5_GeneratorSoundness)
{
    auto started = std::chrono::steady_clock::now();
    SchemaFuzzer fuzz(20240501);
    int checked = 0;
    for (int i = 0; i < kSoundnessSchemas; ++i) {
        auto doc = fuzz.schema(kSoundnessDepth);
        auto schema = extract_schema(doc);
        for (int seed = 0; seed < kSoundnessSeeds; ++seed) {
            RandomSource rng(static_cast<std::uint64_t>(i) * 1000 + seed);
            auto value = generate(schema, rng);
            auto result = validate(schema, value);
            EXPECT_TRUE(result.valid) << doc.dump() << " -> " << value.dump() << " " << violations_to_json(result).dump();
            ++checked;
        }
    }
    EXPECT_EQ(checked, kSoundnessSchemas * kSoundnessSeeds);
    std::cout << "  " << checked << " generated values validated\n";
    EXPECT_LT(seconds_since(started), kSoundnessBudgetSeconds);
}

namespace {

std::vector<Json> enumerable_fixtures()
{
    std::vector<Json> fixtures;
    for (const char* text : {
             R"({"type":"string","enum":["Ready","Brewing","Error"]})",
             R"({"enum":["espresso","cappuccino"]})",
             R"({"type":"integer","minimum":0,"maximum":20})",
             R"({"type":"integer","minimum":-3.5,"maximum":3.5})",
             R"({"type":"boolean"})",
             R"({"type":"null"})",
             R"({"const":"ok"})",
             R"({"const":4,"type":"integer","minimum":0})",
             R"({"enum":[1,2,3,4,5,6,7,8,9,10],"type":"integer","minimum":3,"maximum":8})",
             R"({"oneOf":[{"type":"boolean"},{"type":"integer","minimum":1,"maximum":3},{"const":"x"}]})",
             R"({"type":"array","items":{"type":"integer","minimum":1,"maximum":3},"maxItems":3})",
             R"({"type":"array","items":{"enum":["a","b"]},"minItems":2,"maxItems":3})",
             R"({"type":"array","items":{"type":"array","items":{"type":"boolean"},"maxItems":2},"maxItems":2})",
             R"({"type":"array","items":{"oneOf":[{"type":"null"},{"const":0}]},"minItems":1,"maxItems":1})",
         })
        fixtures.push_back(Json::parse(text));

    SchemaFuzzer fuzz(99);
    while (fixtures.size() < 200) {
        auto s = fuzz.schema(2);
        auto set = enumerate_conforming(s);
        if (set && !set->empty() && set->size() <= 5000)
            fixtures.push_back(s);
    }
    return fixtures;
}

Json mutate(const Json& base, const Json& schema, SchemaFuzzer& fuzz)
{
    switch (fuzz.pick(8)) {
    case 0: return fuzz.any_value();
    case 1:
        if (base.is_number())
            return base.get<double>() + 0.5;
        return fuzz.word();
    case 2:
        if (schema.contains("minimum"))
            return std::floor(schema["minimum"].get<double>()) - 1 - fuzz.integer(0, 5);
        return fuzz.integer(-1000, 1000);
    case 3:
        if (schema.contains("maximum"))
            return std::ceil(schema["maximum"].get<double>()) + 1 + fuzz.integer(0, 5);
        return Json(base.is_boolean() ? Json(base.dump()) : Json(!base.is_null()));
    case 4: {
        if (!base.is_array())
            return Json::array({base});
        Json out = base;
        out.push_back(out.empty() ? fuzz.any_value() : out.back());
        return out;
    }
    case 5: {
        if (!base.is_array() || base.empty())
            return Json::object({{fuzz.word(), base}});
        Json out = base;
        out.erase(out.begin());
        return out;
    }
    case 6: {
        if (!base.is_array() || base.empty())
            return nullptr;
        Json out = base;
        out[fuzz.pick(static_cast<int>(out.size()))] = mutate(out[0], schema.value("items", Json::object()), fuzz);
        return out;
    }
    default: return fuzz.scalar_of(std::vector<std::string>{"null", "boolean", "integer", "number", "string"}[fuzz.pick(5)]);
    }
}

} // namespace

TEST(Acceptance, C6_ValidatorMatchesBruteForce)
{
    SchemaFuzzer fuzz(31337);
    std::size_t schemas = 0, conforming = 0, rejected = 0;
    for (const auto& doc : enumerable_fixtures()) {
        auto members = *enumerate_conforming(doc);
        ++schemas;
        conforming += members.size();
        auto schema = extract_schema(doc);
        for (const auto& v : members)
            EXPECT_TRUE(validate(schema, v).valid) << doc.dump() << " rejects " << v.dump();

        int mutants = 0;
        for (int attempt = 0; mutants < kMutantsPerSchema && attempt < 100 * kMutantsPerSchema; ++attempt) {
            auto base = members[fuzz.pick(static_cast<int>(members.size()))];
            auto m = mutate(base, doc, fuzz);
            if (contains_value(members, m))
                continue;
            ++mutants;
            ++rejected;
            EXPECT_FALSE(validate(schema, m).valid) << doc.dump() << " accepts " << m.dump();
        }
        EXPECT_EQ(mutants, kMutantsPerSchema) << doc.dump();
    }
    std::cout << "  " << schemas << " schemas, " << conforming << " conforming values, " << rejected << " mutants\n";
}

TEST(Acceptance, C7_RoundTrip)
{
    auto inputs = generated_tds();
    inputs.insert(inputs.begin(), Json::parse(coffee_machine_text()));
    for (const auto& doc : inputs) {
        auto first = parse_td(doc.dump());
        auto text = serialize_td(first);
        auto second = parse_td(text);
        EXPECT_EQ(first, second) << doc.dump();
        EXPECT_TRUE(same_json(Json::parse(text), doc)) << doc.dump();
    }
}

TEST(Acceptance, C8_ProbeAgainstRun)
{
    auto started = std::chrono::steady_clock::now();
    for (const auto& file : corpus_files()) {
        auto td = parse_td(read_text(file));
        int port = free_port();
        ChildProcess server({cli_path(), "run", file, "--port", std::to_string(port), "--event-mode", "fixed:0.25"},
                            log_file("acceptance-c8-run"));
        auto path = "/" + encode_segment(td.title);
        ASSERT_TRUE(wait_for_http(port, path)) << file;
        auto [status, output] = run_command({cli_path(), "probe", "http://127.0.0.1:" + std::to_string(port) + path, "--duration", "1"},
                                            log_file("acceptance-c8-probe"));
        EXPECT_EQ(status, 0) << file << "\n" << output;
        EXPECT_EQ(server.interrupt(), 0);
    }
    EXPECT_LT(seconds_since(started), kSelfConsistencyBudgetSeconds);
}

namespace {

std::vector<std::string> scripted_session(int port)
{
    httplib::Client c("127.0.0.1", port);
    std::vector<std::string> log;
    auto record = [&](const httplib::Result& r) { log.push_back(r ? std::to_string(r->status) + " " + r->body : "no response"); };
    for (int i = 0; i < 10; ++i) {
        record(c.Get("/Coffee-Machine/properties/state"));
        record(c.Get("/Weather%20Station/properties"));
        record(c.Post("/Weather%20Station/actions/roll-dice", "", "application/json"));
        record(c.Get("/My-Lamp/properties/brightness"));
        record(c.Post("/My-Lamp/actions/fade", R"({"brightness":50,"duration":200})", "application/json"));
    }
    record(c.Put("/My-Lamp/properties/brightness", "7", "application/json"));
    record(c.Get("/My-Lamp/properties"));
    record(c.Post("/Weather%20Station/actions/calibrate", R"({"offset":0.5})", "application/json"));
    return log;
}

std::vector<std::string> seeded_run(int index)
{
    int port = free_port();
    ChildProcess server({cli_path(), "run", samples_path("things/coffee-machine.td.json"), samples_path("things/lamp.td.json"),
                         samples_path("things/weather-station.td.json"), "--port", std::to_string(port), "--seed", "42"},
                        log_file("acceptance-c9-" + std::to_string(index)));
    if (!wait_for_http(port, "/Coffee-Machine"))
        return {};
    auto log = scripted_session(port);
    server.interrupt();
    return log;
}

} // namespace

TEST(Acceptance, C9_SeededRunsRepeat)
{
    auto first = seeded_run(1);
    auto second = seeded_run(2);
    ASSERT_FALSE(first.empty());
    EXPECT_EQ(first, second);
    std::set<std::string> distinct(first.begin(), first.begin() + 50);
    EXPECT_GT(distinct.size(), 5u);
}

namespace {

class CriterionPrinter : public ::testing::EmptyTestEventListener {
public:
    void OnTestEnd(const ::testing::TestInfo& info) override
    {
        std::string name = info.name();
        auto underscore = name.find('_');
        results_.emplace_back(name.substr(1, underscore - 1), name.substr(underscore + 1), info.result()->Passed());
    }
    void OnTestProgramEnd(const ::testing::UnitTest&) override
    {
        std::cout << "\nAcceptance criteria:\n";
        for (const auto& [number, label, passed] : results_)
            std::cout << "  criterion " << number << " " << (passed ? "PASS" : "FAIL") << "  " << label << "\n";
    }

private:
    std::vector<std::tuple<std::string, std::string, bool>> results_;
};

} // namespace

int main(int argc, char** argv)
{
    ::testing::InitGoogleTest(&argc, argv);
    spdlog::set_level(spdlog::level::err);
    ::testing::UnitTest::GetInstance()->listeners().Append(new CriterionPrinter);
    return RUN_ALL_TESTS();
}
