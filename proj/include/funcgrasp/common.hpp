/*
 * Copyright 2026 the funcgrasp authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace funcgrasp {

inline constexpr const char* kToolVersion = "0.1.0";

/// Malformed or invalid user input (config files, meshes, CLI arguments).
/// Mapped to exit code 2 by the CLI.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid hand/scenario configuration content.
struct ConfigError : InputError {
  explicit ConfigError(const std::string& msg) : InputError(msg) {}
};

/// A pipeline artifact does not match the configs it is being used with.
/// Mapped to exit code 3 by the CLI.
struct ProvenanceError : std::runtime_error {
  explicit ProvenanceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The planner cannot run on the given inputs (e.g. heatmap without a
/// selected cluster). Mapped to exit code 4 by the CLI.
struct PlanningRefusal : std::runtime_error {
  explicit PlanningRefusal(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace funcgrasp
