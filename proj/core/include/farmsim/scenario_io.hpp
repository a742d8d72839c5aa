/***************************************************************
 *
 * Copyright (C) 2026, the farmsim developers
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you
 * may not use this file except in compliance with the License.  You may
 * obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 ***************************************************************/

#pragma once

#include <string>
#include <vector>

#include "farmsim/scenario.hpp"

namespace farmsim {

// Strict json scenario parsing: unknown keys are validation errors, all
// violations are reported together.  Throws ScenarioParseError (bad json,
// with line/column) or ScenarioValidationError.
Scenario parse_scenario_json(const std::string& json_text);

// Loads a scenario file; `name_or_path` may also be a preset name.
Scenario load_scenario(const std::string& name_or_path);

// Built-in scenario presets (json text, parsed through the same loader).
std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
const std::string& preset_json(const std::string& name);
Scenario load_preset(const std::string& name);

} // namespace farmsim
