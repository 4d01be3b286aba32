#ifndef MGSIM_JSON_IO_HPP
#define MGSIM_JSON_IO_HPP

#include <string>

#include "mgsim/scenario.hpp"

namespace mgsim {

Testbed load_testbed_file(const std::string& path);
Testbed load_testbed_json(const std::string& text);

/// Scenario files reference their testbed by path, resolved relative to the
/// scenario file's directory.
Scenario load_scenario_file(const std::string& path);
Scenario load_scenario_json(const std::string& text, const std::string& base_dir);

void write_thresholds_file(const std::string& path, const CalibrationResult& r);

} // namespace mgsim

#endif
