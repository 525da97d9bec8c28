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

#include <iosfwd>
#include <string>

#include "rscf/experiment.hpp"

namespace rscf {

enum class OutputFormat { Csv, Json };

/// A parsed scenario: the experiment configuration plus the output sink
/// selection. Scenario files are `key = value` lines with '#' comments;
/// unknown keys are hard errors so typos never silently fall back to
/// defaults.
struct Scenario {
    ExperimentConfig experiment;
    std::string out_path; // empty selects stdout
    OutputFormat format = OutputFormat::Csv;
};

Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario_file(const std::string& path);

/// Applies one `key=value` override, same grammar and validation as a
/// scenario line.
void apply_override(Scenario& scenario, const std::string& key_eq_value);

/// Re-validates cross-field constraints (ranges are checked per key on
/// assignment). Called by parse/apply; exposed for configs built in code.
void validate(const ExperimentConfig& cfg);

/// Canonical `key = value` rendering of every configuration key in a fixed
/// order, with doubles at 17 significant digits. Identical configurations
/// serialize identically.
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a hash of the canonical serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// CSV with the fixed column set
/// axis_name,axis_value,variant,esr_bits_hz,min_common_rate,delta_opt,
/// n_channel,n_error,seed,guarded_sinr_count,resampled_count.
/// Floats carry 17 significant digits and round-trip exactly.
std::string to_csv(const SweepResult& result);

/// JSON document mirroring the CSV fields per record (plus per-user private
/// rates), with a config echo block, the config hash, the scope, and the
/// library version.
std::string to_json(const SweepResult& result, const ExperimentConfig& cfg);

/// Delta-search curve as two-column CSV (delta, esr).
std::string curve_to_csv(const DeltaSearch& search);

std::string curve_to_json(const DeltaSearch& search, const ExperimentConfig& cfg);

enum class Command { SweepSnr, SweepError, OptimizeDelta, SingleTrial };

Command parse_command(const std::string& name);

/// Runs a command and writes the serialized result to `data_out`; a one-line
/// run summary (variants, points, seed, runtime, guard/resample counters)
/// goes to `log`. Returns the process exit status: 0 success, 2 config
/// error, 3 runtime error.
int run_command(Command command, const Scenario& scenario, std::ostream& data_out,
                std::ostream& log);

/// Parses flags, loads the scenario, applies overrides, dispatches, and
/// writes the output file. The CLI entry point delegates here.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace rscf
