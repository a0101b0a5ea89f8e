/*
 * Copyright 2026 Breaker Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
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

namespace breaker {

// Invalid configuration, schema violations, inconsistent shapes at API
// boundaries. Mapped to exit code 2 by the CLI.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem and file-format failures. Mapped to exit code 3 by the CLI.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values where finite ones are required (losses, gradients).
// Mapped to exit code 4 by the CLI.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Checkpoint error kinds, distinguishable by type.
class CheckpointCorrupt : public IoError {
 public:
  explicit CheckpointCorrupt(const std::string& what) : IoError(what) {}
};

class CheckpointVersionError : public IoError {
 public:
  explicit CheckpointVersionError(const std::string& what) : IoError(what) {}
};

class CheckpointShapeError : public ConfigError {
 public:
  explicit CheckpointShapeError(const std::string& what) : ConfigError(what) {}
};

}  // namespace breaker
