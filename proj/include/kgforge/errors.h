/*
 * Copyright 2026 The kgforge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef KGFORGE_ERRORS_H_
#define KGFORGE_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgforge {

// Malformed input file. `line()` is 1-based; 0 when the error is not tied to
// a specific line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : std::runtime_error(line == 0 ? message
                                     : "line " + std::to_string(line) + ": " +
                                           message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Invalid or inconsistent user configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An auxiliary node or new relation label clashes with an existing label.
class CollisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checkpoint is unreadable or does not match the dataset.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training diverged (non-finite loss) or was set up with bad inputs.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kgforge

#endif  // KGFORGE_ERRORS_H_
