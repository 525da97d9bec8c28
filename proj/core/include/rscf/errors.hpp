// SPDX-License-Identifier: Apache-2.0
//
// rscf: rate-splitting cell-free MIMO link-level simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace rscf {

/// Invalid scenario/configuration input. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// A channel draw is too ill-conditioned for the requested precoder.
/// The Monte Carlo engine resamples fading and counts these.
class SingularChannelError : public std::runtime_error {
  public:
    explicit SingularChannelError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// Unrecoverable failure while running an experiment. CLI exit code 3.
class SimulationError : public std::runtime_error {
  public:
    explicit SimulationError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

} // namespace rscf
