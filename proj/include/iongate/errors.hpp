// Copyright 2026 The iongate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IONGATE_ERRORS_HPP
#define IONGATE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace iongate {

/// Invalid parameters, shapes or configuration values.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Request lies outside the physical model (pole proximity, resonant force, ...).
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// The oscillator truncation cannot hold the requested thermal state.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, int required_fock_dim)
      : std::runtime_error(what), required_fock_dim_(required_fock_dim) {}
  int required_fock_dim() const { return required_fock_dim_; }

 private:
  int required_fock_dim_;
};

/// A density matrix violated trace, Hermiticity or positivity bounds.
class StateError : public std::runtime_error {
 public:
  explicit StateError(const std::string& what) : std::runtime_error(what) {}
};

/// The ODE integrator could not advance (step-size underflow or non-finite state).
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time_reached)
      : std::runtime_error(what), time_reached_(time_reached) {}
  double time_reached() const { return time_reached_; }

 private:
  double time_reached_;
};

}  // namespace iongate

#endif  // IONGATE_ERRORS_HPP
