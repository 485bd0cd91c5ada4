// Embeds a virtual coffee machine in-process: reads a few properties,
// invokes an action and collects events on a simulated clock.

#include <fstream>
#include <iostream>
#include <sstream>

#include "vthing/vthing.hpp"

int main(int argc, char** argv)
{
    std::string path = argc > 1 ? argv[1] : VTHING_SAMPLES_DIR "/things/coffee-machine.td.json";
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();

    auto clock = std::make_shared<vthing::ManualClock>();
    vthing::ServientConfig config;
    config.seed = 7;
    config.event_mode.default_schedule = vthing::EventSchedule::fixed(2.0);

    vthing::Servient servient(config, clock);
    auto thing = servient.attach(vthing::parse_td(text.str()));
    std::cout << "exposed TD:\n" << vthing::serialize_td(thing->exposed_td(), 2) << "\n\n";

    for (int i = 0; i < 5; ++i)
        std::cout << "state = " << thing->read_property("state").dump() << "\n";

    thing->write_property("state", "Ready");
    std::cout << "after write: " << thing->read_property("state").dump() << "\n";

    try {
        thing->invoke_action("brew", vthing::Json("latte"));
    } catch (const vthing::ValidationError& e) {
        std::cout << "brew(\"latte\") rejected: " << e.result().violations.front().detail << "\n";
    }

    auto errors = thing->subscribe_event("error");
    clock->advance(10.0);
    thing->pump_events();
    for (const auto& message : errors.drain())
        std::cout << "t=" << message.time << "s error event " << message.payload.dump() << "\n";
    return 0;
}
