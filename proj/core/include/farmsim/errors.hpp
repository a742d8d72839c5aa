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

#include <stdexcept>
#include <string>
#include <vector>

namespace farmsim {

// Error taxonomy for the simulation library.  Callers that want to branch on
// a specific failure catch SimError and inspect kind().
enum class ErrorKind {
    InsufficientResources,
    Draining,
    UnknownSlot,
    DuplicateId,
    InvalidTransition,
    OutOfRange,
    IoError,
    ScenarioInvalid,
    InvariantViolation,
};

class SimError : public std::runtime_error {
  public:
    SimError(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

// Aborts a run: some post-event consistency check failed.
class InvariantViolation : public SimError {
  public:
    explicit InvariantViolation(const std::string& msg)
        : SimError(ErrorKind::InvariantViolation, msg) {}
};

// Scenario file could not be parsed at all (malformed JSON).
class ScenarioParseError : public SimError {
  public:
    ScenarioParseError(const std::string& msg, int line, int column)
        : SimError(ErrorKind::ScenarioInvalid, msg), line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

  private:
    int line_;
    int column_;
};

// Scenario parsed but failed validation; carries every violation found,
// not just the first.
class ScenarioValidationError : public SimError {
  public:
    explicit ScenarioValidationError(std::vector<std::string> violations)
        : SimError(ErrorKind::ScenarioInvalid, join(violations)),
          violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const { return violations_; }

  private:
    static std::string join(const std::vector<std::string>& vs) {
        std::string out = "scenario invalid:";
        for (const auto& v : vs) {
            out += "\n  - ";
            out += v;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

} // namespace farmsim
