#pragma once

#include <string>
#include <vector>

#include "fcsim/loop.hpp"
#include "fcsim/plant.hpp"

namespace fcsim {

struct Scenario {
    std::string name;
    LoopConfig loop;
    std::vector<LoadChange> load_schedule;
};

/// Parses and validates a scenario document. Errors name the offending field
/// by its path (e.g. "topology.tasks[2].wcet_est").
Scenario load_scenario_json(const std::string& text);

Scenario load_scenario_file(const std::string& path);

const std::vector<std::string>& builtin_scenario_names();

bool is_builtin_scenario(const std::string& name);

/// The canned experiment as shipped; throws on unknown names.
Scenario builtin_scenario(const std::string& name);

std::string builtin_scenario_text(const std::string& name);

}  // namespace fcsim
