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

#include "rscf/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rscf/errors.hpp"
#include "rscf/rng.hpp"
#include "rscf/version.hpp"

namespace rscf {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos)
        return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, sep))
        parts.push_back(item);
    return parts;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t idx = 0;
        const double v = std::stod(value, &idx);
        if (idx != value.size())
            throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": '" + value + "' is not a number");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t idx = 0;
        const unsigned long long v = std::stoull(value, &idx);
        if (idx != value.size())
            throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": '" + value + "' is not a non-negative integer");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on")
        return true;
    if (value == "false" || value == "0" || value == "no" || value == "off")
        return false;
    throw ConfigError(key + ": '" + value + "' is not a boolean");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const std::string& part : split(value, ',')) {
        const std::string item = trim(part);
        if (item.empty())
            throw ConfigError(key + ": empty element in list '" + value + "'");
        out.push_back(parse_double(key, item));
    }
    if (out.empty())
        throw ConfigError(key + ": list must not be empty");
    return out;
}

std::string topology_name(Topology t) {
    return t == Topology::CellFree ? "cellfree" : "centralbs";
}

Topology parse_topology(const std::string& value) {
    if (value == "cellfree" || value == "cf")
        return Topology::CellFree;
    if (value == "centralbs" || value == "bs")
        return Topology::CentralBs;
    throw ConfigError("topology: expected cellfree|centralbs, got '" + value + "'");
}

std::string precoder_name(PrecoderKind p) { return p == PrecoderKind::Mf ? "mf" : "zf"; }

PrecoderKind parse_precoder(const std::string& value) {
    if (value == "mf")
        return PrecoderKind::Mf;
    if (value == "zf")
        return PrecoderKind::Zf;
    throw ConfigError("precoder: expected mf|zf, got '" + value + "'");
}

std::string scope_name(EsrScope s) {
    return s == EsrScope::MinOfMeans ? "min_of_means" : "mean_of_mins";
}

EsrScope parse_scope(const std::string& value) {
    if (value == "min_of_means")
        return EsrScope::MinOfMeans;
    if (value == "mean_of_mins")
        return EsrScope::MeanOfMins;
    throw ConfigError("esr_scope: expected min_of_means|mean_of_mins, got '" + value + "'");
}

std::string snr_norm_name(SnrNorm n) {
    return n == SnrNorm::PerRealization ? "per_realization" : "expected_trace";
}

SnrNorm parse_snr_norm(const std::string& value) {
    if (value == "per_realization")
        return SnrNorm::PerRealization;
    if (value == "expected_trace")
        return SnrNorm::ExpectedTrace;
    throw ConfigError("snr_norm: expected per_realization|expected_trace, got '" + value + "'");
}

std::string variants_name(const std::vector<Variant>& variants) {
    if (variants.empty())
        return "auto";
    std::string out;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        if (i)
            out += ',';
        out += variants[i].name();
    }
    return out;
}

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out += ',';
        out += fmt_double(values[i]);
    }
    return out;
}

using Setter = std::function<void(Scenario&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"m",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.m = parse_u64(key, v);
             if (s.experiment.m < 1)
                 throw ConfigError("m: must be >= 1");
         }},
        {"k",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.k = parse_u64(key, v);
             if (s.experiment.k < 1)
                 throw ConfigError("k: must be >= 1");
         }},
        {"area_side",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.area_side = parse_double(key, v);
             if (!(s.experiment.area_side > 0.0))
                 throw ConfigError("area_side: must be positive");
         }},
        {"topology",
         [](Scenario& s, const std::string&, const std::string& v) {
             s.experiment.topology = parse_topology(v);
         }},
        {"precoder",
         [](Scenario& s, const std::string&, const std::string& v) {
             s.experiment.precoder = parse_precoder(v);
         }},
        {"rs_enabled",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.rs_enabled = parse_bool(key, v);
         }},
        {"variants",
         [](Scenario& s, const std::string&, const std::string& v) {
             s.experiment.variants.clear();
             if (v == "auto")
                 return;
             for (const std::string& part : split(v, ','))
                 s.experiment.variants.push_back(parse_variant(trim(part)));
         }},
        {"sigma_e2",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.sigma_e2 = parse_double_list(key, v);
             for (double x : s.experiment.sigma_e2)
                 if (x < 0.0 || x > 1.0)
                     throw ConfigError("sigma_e2: each value must lie in [0, 1], got " +
                                       fmt_double(x));
         }},
        {"snr_db",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.snr_db = parse_double_list(key, v);
         }},
        {"n_channel",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.n_channel = parse_u64(key, v);
             if (s.experiment.n_channel < 1)
                 throw ConfigError("n_channel: must be >= 1");
         }},
        {"n_error",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.n_error = parse_u64(key, v);
             if (s.experiment.n_error < 1)
                 throw ConfigError("n_error: must be >= 1");
         }},
        {"delta_grid_step",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.delta_grid_step = parse_double(key, v);
             if (!(s.experiment.delta_grid_step > 0.0) || s.experiment.delta_grid_step > 1.0)
                 throw ConfigError("delta_grid_step: must lie in (0, 1]");
         }},
        {"seed",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.seed = parse_u64(key, v);
         }},
        {"esr_scope",
         [](Scenario& s, const std::string&, const std::string& v) {
             s.experiment.esr_scope = parse_scope(v);
         }},
        {"snr_norm",
         [](Scenario& s, const std::string&, const std::string& v) {
             s.experiment.snr_norm = parse_snr_norm(v);
         }},
        {"fixed_geometry",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.fixed_geometry = parse_bool(key, v);
         }},
        {"zf_cond_cap",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.zf_cond_cap = parse_double(key, v);
             if (!(s.experiment.zf_cond_cap > 1.0))
                 throw ConfigError("zf_cond_cap: must be > 1");
         }},
        {"zf_retry_budget",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.zf_retry_budget = parse_u64(key, v);
         }},
        {"threads",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.threads = parse_u64(key, v);
             if (s.experiment.threads < 1)
                 throw ConfigError("threads: must be >= 1");
         }},
        {"physical",
         [](Scenario& s, const std::string&, const std::string& v) {
             if (v != "paper-sec5")
                 throw ConfigError("physical: the only named parameter set is 'paper-sec5'");
             s.experiment.physical = PhysicalParams::paper_sec5();
         }},
        {"freq_mhz",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.physical.freq_mhz = parse_double(key, v);
             if (!(s.experiment.physical.freq_mhz > 0.0))
                 throw ConfigError("freq_mhz: must be positive");
         }},
        {"h_ap_m",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.physical.h_ap_m = parse_double(key, v);
             if (!(s.experiment.physical.h_ap_m > 0.0))
                 throw ConfigError("h_ap_m: must be positive");
         }},
        {"h_u_m",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.physical.h_u_m = parse_double(key, v);
             if (!(s.experiment.physical.h_u_m > 0.0))
                 throw ConfigError("h_u_m: must be positive");
         }},
        {"d0_m",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.physical.d0_m = parse_double(key, v);
             if (!(s.experiment.physical.d0_m > 0.0))
                 throw ConfigError("d0_m: must be positive");
         }},
        {"d1_m",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.physical.d1_m = parse_double(key, v);
             if (!(s.experiment.physical.d1_m > 0.0))
                 throw ConfigError("d1_m: must be positive");
         }},
        {"sigma_shadow_db",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.physical.sigma_shadow_db = parse_double(key, v);
             if (s.experiment.physical.sigma_shadow_db < 0.0)
                 throw ConfigError("sigma_shadow_db: must be non-negative");
         }},
        {"noise_temp_k",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.physical.noise_temp_k = parse_double(key, v);
             if (!(s.experiment.physical.noise_temp_k > 0.0))
                 throw ConfigError("noise_temp_k: must be positive");
         }},
        {"boltzmann_jk",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.physical.boltzmann_jk = parse_double(key, v);
             if (!(s.experiment.physical.boltzmann_jk > 0.0))
                 throw ConfigError("boltzmann_jk: must be positive");
         }},
        {"bandwidth_hz",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.physical.bandwidth_hz = parse_double(key, v);
             if (!(s.experiment.physical.bandwidth_hz > 0.0))
                 throw ConfigError("bandwidth_hz: must be positive");
         }},
        {"noise_figure_db",
         [](Scenario& s, const std::string& key, const std::string& v) {
             s.experiment.physical.noise_figure_db = parse_double(key, v);
         }},
        {"out",
         [](Scenario& s, const std::string&, const std::string& v) { s.out_path = v; }},
        {"format",
         [](Scenario& s, const std::string&, const std::string& v) {
             if (v == "csv")
                 s.format = OutputFormat::Csv;
             else if (v == "json")
                 s.format = OutputFormat::Json;
             else
                 throw ConfigError("format: expected csv|json, got '" + v + "'");
         }},
    };
    return table;
}

void apply_assignment(Scenario& scenario, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("expected key=value, got '" + assignment + "'");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    if (key.empty())
        throw ConfigError("empty key in '" + assignment + "'");
    const auto it = setters().find(key);
    if (it == setters().end())
        throw ConfigError("unknown key '" + key + "'");
    it->second(scenario, key, value);
}

void apply_line(Scenario& scenario, const std::string& raw_line) {
    std::string line = raw_line;
    if (const auto hash = line.find('#'); hash != std::string::npos)
        line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
        return;

    // Either one `key = value` per line, or several space-separated
    // `key=value` tokens (values never contain spaces in that form).
    std::vector<std::string> words;
    {
        std::stringstream ss(line);
        std::string w;
        while (ss >> w)
            words.push_back(w);
    }
    const bool all_assignments =
        words.size() > 1 &&
        std::all_of(words.begin(), words.end(),
                    [](const std::string& w) { return w.find('=') != std::string::npos; });
    if (all_assignments)
        for (const std::string& w : words)
            apply_assignment(scenario, w);
    else
        apply_assignment(scenario, line);
}

} // namespace

void validate(const ExperimentConfig& cfg) {
    if (cfg.m < 1)
        throw ConfigError("m: must be >= 1");
    if (cfg.k < 1)
        throw ConfigError("k: must be >= 1");
    if (!(cfg.area_side > 0.0))
        throw ConfigError("area_side: must be positive");
    if (cfg.sigma_e2.empty())
        throw ConfigError("sigma_e2: must provide at least one value");
    for (double x : cfg.sigma_e2)
        if (x < 0.0 || x > 1.0)
            throw ConfigError("sigma_e2: each value must lie in [0, 1], got " + fmt_double(x));
    if (cfg.snr_db.empty())
        throw ConfigError("snr_db: must provide at least one value");
    if (cfg.n_channel < 1)
        throw ConfigError("n_channel: must be >= 1");
    if (cfg.n_error < 1)
        throw ConfigError("n_error: must be >= 1");
    if (!(cfg.delta_grid_step > 0.0) || cfg.delta_grid_step > 1.0)
        throw ConfigError("delta_grid_step: must lie in (0, 1]");
    if (!(cfg.physical.d1_m > cfg.physical.d0_m))
        throw ConfigError("d1_m: must exceed d0_m");
    if (cfg.threads < 1)
        throw ConfigError("threads: must be >= 1");
    for (const Variant& v : cfg.effective_variants())
        if (v.precoder == PrecoderKind::Zf && cfg.m <= cfg.k)
            throw ConfigError("precoder: zero forcing requires m > k (got m=" +
                              std::to_string(cfg.m) + ", k=" + std::to_string(cfg.k) + ")");
}

Scenario parse_scenario_text(const std::string& text) {
    Scenario scenario;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        apply_line(scenario, line);
    validate(scenario.experiment);
    return scenario;
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read scenario file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str());
}

void apply_override(Scenario& scenario, const std::string& key_eq_value) {
    apply_assignment(scenario, key_eq_value);
    validate(scenario.experiment);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    // `threads` is an execution knob with no effect on results, so it stays
    // out of the canonical form and the hash.
    std::string s;
    s += "m = " + std::to_string(cfg.m) + "\n";
    s += "k = " + std::to_string(cfg.k) + "\n";
    s += "area_side = " + fmt_double(cfg.area_side) + "\n";
    s += "topology = " + topology_name(cfg.topology) + "\n";
    s += "precoder = " + precoder_name(cfg.precoder) + "\n";
    s += std::string("rs_enabled = ") + (cfg.rs_enabled ? "true" : "false") + "\n";
    s += "variants = " + variants_name(cfg.variants) + "\n";
    s += "sigma_e2 = " + join_doubles(cfg.sigma_e2) + "\n";
    s += "snr_db = " + join_doubles(cfg.snr_db) + "\n";
    s += "n_channel = " + std::to_string(cfg.n_channel) + "\n";
    s += "n_error = " + std::to_string(cfg.n_error) + "\n";
    s += "delta_grid_step = " + fmt_double(cfg.delta_grid_step) + "\n";
    s += "seed = " + std::to_string(cfg.seed) + "\n";
    s += "esr_scope = " + scope_name(cfg.esr_scope) + "\n";
    s += "snr_norm = " + snr_norm_name(cfg.snr_norm) + "\n";
    s += std::string("fixed_geometry = ") + (cfg.fixed_geometry ? "true" : "false") + "\n";
    s += "zf_cond_cap = " + fmt_double(cfg.zf_cond_cap) + "\n";
    s += "zf_retry_budget = " + std::to_string(cfg.zf_retry_budget) + "\n";
    s += "freq_mhz = " + fmt_double(cfg.physical.freq_mhz) + "\n";
    s += "h_ap_m = " + fmt_double(cfg.physical.h_ap_m) + "\n";
    s += "h_u_m = " + fmt_double(cfg.physical.h_u_m) + "\n";
    s += "d0_m = " + fmt_double(cfg.physical.d0_m) + "\n";
    s += "d1_m = " + fmt_double(cfg.physical.d1_m) + "\n";
    s += "sigma_shadow_db = " + fmt_double(cfg.physical.sigma_shadow_db) + "\n";
    s += "noise_temp_k = " + fmt_double(cfg.physical.noise_temp_k) + "\n";
    s += "boltzmann_jk = " + fmt_double(cfg.physical.boltzmann_jk) + "\n";
    s += "bandwidth_hz = " + fmt_double(cfg.physical.bandwidth_hz) + "\n";
    s += "noise_figure_db = " + fmt_double(cfg.physical.noise_figure_db) + "\n";
    return s;
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::uint64_t h = fnv1a64(serialize_config(cfg));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string to_csv(const SweepResult& result) {
    std::string out = "axis_name,axis_value,variant,esr_bits_hz,min_common_rate,delta_opt,"
                      "n_channel,n_error,seed,guarded_sinr_count,resampled_count\n";
    for (const SweepPoint& p : result.points) {
        out += result.axis_name + ',' + fmt_double(p.axis_value) + ',' + p.variant + ',' +
               fmt_double(p.esr) + ',' + fmt_double(p.min_common_rate) + ',' +
               fmt_double(p.delta_opt) + ',' + std::to_string(result.n_channel) + ',' +
               std::to_string(result.n_error) + ',' + std::to_string(result.seed) + ',' +
               std::to_string(p.guarded_sinr_count) + ',' + std::to_string(p.resampled_count) +
               '\n';
    }
    return out;
}

namespace {

nlohmann::json config_echo(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["m"] = cfg.m;
    j["k"] = cfg.k;
    j["area_side"] = cfg.area_side;
    j["topology"] = topology_name(cfg.topology);
    j["precoder"] = precoder_name(cfg.precoder);
    j["rs_enabled"] = cfg.rs_enabled;
    j["variants"] = variants_name(cfg.variants);
    j["sigma_e2"] = cfg.sigma_e2;
    j["snr_db"] = cfg.snr_db;
    j["n_channel"] = cfg.n_channel;
    j["n_error"] = cfg.n_error;
    j["delta_grid_step"] = cfg.delta_grid_step;
    j["seed"] = cfg.seed;
    j["esr_scope"] = scope_name(cfg.esr_scope);
    j["snr_norm"] = snr_norm_name(cfg.snr_norm);
    j["fixed_geometry"] = cfg.fixed_geometry;
    j["zf_cond_cap"] = cfg.zf_cond_cap;
    j["zf_retry_budget"] = cfg.zf_retry_budget;
    j["freq_mhz"] = cfg.physical.freq_mhz;
    j["h_ap_m"] = cfg.physical.h_ap_m;
    j["h_u_m"] = cfg.physical.h_u_m;
    j["d0_m"] = cfg.physical.d0_m;
    j["d1_m"] = cfg.physical.d1_m;
    j["sigma_shadow_db"] = cfg.physical.sigma_shadow_db;
    j["noise_temp_k"] = cfg.physical.noise_temp_k;
    j["boltzmann_jk"] = cfg.physical.boltzmann_jk;
    j["bandwidth_hz"] = cfg.physical.bandwidth_hz;
    j["noise_figure_db"] = cfg.physical.noise_figure_db;
    return j;
}

} // namespace

std::string to_json(const SweepResult& result, const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["config_hash"] = result.config_hash.empty() ? config_hash(cfg) : result.config_hash;
    j["scope"] = scope_name(result.scope);
    j["seed"] = result.seed;
    j["axis_name"] = result.axis_name;
    j["config"] = config_echo(cfg);
    nlohmann::json records = nlohmann::json::array();
    for (const SweepPoint& p : result.points) {
        nlohmann::json r;
        r["axis_name"] = result.axis_name;
        r["axis_value"] = p.axis_value;
        r["variant"] = p.variant;
        r["esr_bits_hz"] = p.esr;
        r["min_common_rate"] = p.min_common_rate;
        r["delta_opt"] = p.delta_opt;
        r["n_channel"] = result.n_channel;
        r["n_error"] = result.n_error;
        r["seed"] = result.seed;
        r["guarded_sinr_count"] = p.guarded_sinr_count;
        r["resampled_count"] = p.resampled_count;
        r["psi1_tie_count"] = p.psi1_tie_count;
        r["per_user_private_rates"] =
            std::vector<double>(p.mean_private_rates.begin(), p.mean_private_rates.end());
        records.push_back(std::move(r));
    }
    j["records"] = std::move(records);
    return j.dump(2) + "\n";
}

std::string curve_to_csv(const DeltaSearch& search) {
    std::string out = "delta,esr\n";
    for (const auto& [delta, esr] : search.curve)
        out += fmt_double(delta) + std::string(",") + fmt_double(esr) + "\n";
    return out;
}

std::string curve_to_json(const DeltaSearch& search, const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["config_hash"] = config_hash(cfg);
    j["config"] = config_echo(cfg);
    j["delta_opt"] = search.delta_opt;
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& [delta, esr] : search.curve)
        curve.push_back({delta, esr});
    j["curve"] = std::move(curve);
    return j.dump(2) + "\n";
}

Command parse_command(const std::string& name) {
    if (name == "sweep-snr")
        return Command::SweepSnr;
    if (name == "sweep-error")
        return Command::SweepError;
    if (name == "optimize-delta")
        return Command::OptimizeDelta;
    if (name == "single-trial")
        return Command::SingleTrial;
    throw ConfigError("unknown command '" + name + "'");
}

namespace {

std::string command_name(Command c) {
    switch (c) {
    case Command::SweepSnr: return "sweep-snr";
    case Command::SweepError: return "sweep-error";
    case Command::OptimizeDelta: return "optimize-delta";
    case Command::SingleTrial: return "single-trial";
    }
    return "?";
}

} // namespace

int run_command(Command command, const Scenario& scenario, std::ostream& data_out,
                std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    try {
        const ExperimentConfig& cfg = scenario.experiment;
        validate(cfg);

        std::string payload;
        std::string summary;
        if (command == Command::OptimizeDelta) {
            cfg.single_snr_db();
            cfg.single_sigma_e2();
            const Variant base{cfg.topology, cfg.precoder, true};
            const TrialSet set = run_trials(variant_trial_config(cfg, base));
            const DeltaSearch search =
                optimize_delta(set, cfg.delta_grid_step, cfg.esr_scope, cfg.threads);
            payload = scenario.format == OutputFormat::Csv ? curve_to_csv(search)
                                                           : curve_to_json(search, cfg);
            summary = "variants=" + base.name() + " points=" +
                      std::to_string(search.curve.size()) + " delta_opt=" +
                      fmt_double(search.delta_opt);
        } else {
            SweepResult result;
            if (command == Command::SweepSnr) {
                result = sweep_snr(cfg);
            } else if (command == Command::SweepError) {
                result = sweep_error_variance(cfg);
            } else { // single-trial: one evaluation at the configured point
                cfg.single_snr_db();
                cfg.single_sigma_e2();
                result = sweep_snr(cfg);
            }
            result.config_hash = config_hash(cfg);
            payload = scenario.format == OutputFormat::Csv ? to_csv(result)
                                                           : to_json(result, cfg);

            std::uint64_t guarded = 0;
            std::uint64_t resampled = 0;
            std::uint64_t ties = 0;
            for (const SweepPoint& p : result.points) {
                guarded += p.guarded_sinr_count;
                resampled = std::max(resampled, p.resampled_count);
                ties = std::max(ties, p.psi1_tie_count);
            }
            std::string names;
            for (const Variant& v : cfg.effective_variants()) {
                if (!names.empty())
                    names += ',';
                names += v.name();
            }
            summary = "variants=" + names + " points=" + std::to_string(result.points.size()) +
                      " guarded=" + std::to_string(guarded) +
                      " resampled=" + std::to_string(resampled);
            if (ties > 0)
                summary += " psi1_ties=" + std::to_string(ties);
        }

        data_out << payload;
        data_out.flush();
        if (!data_out)
            throw SimulationError("failed to write results to output sink");

        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        char runtime[32];
        std::snprintf(runtime, sizeof(runtime), "%.2fs", secs);
        log << command_name(command) << ": " << summary
            << " seed=" << scenario.experiment.seed << " runtime=" << runtime << "\n";
        return 0;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 3;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"rscf: ergodic sum-rate simulator for rate-splitting cell-free MIMO downlinks"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_path;
    std::string format;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    bool have_seed = false;
    bool have_threads = false;

    app.add_option("--config", config_path, "Scenario file (key = value lines)");
    app.add_option("--set", overrides, "Override a scenario key, e.g. --set snr_db=0,10,20")
        ->take_all();
    app.add_option("--out", out_path, "Output path (default: scenario 'out' key or stdout)");
    app.add_option("--format", format, "Output format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", seed, "Override the scenario seed")
        ->each([&](const std::string&) { have_seed = true; });
    app.add_option("--threads", threads, "Worker threads (never affects results)")
        ->each([&](const std::string&) { have_threads = true; });

    for (const char* name : {"sweep-snr", "sweep-error", "optimize-delta", "single-trial"})
        app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        Scenario scenario =
            config_path.empty() ? Scenario{} : parse_scenario_file(config_path);
        for (const std::string& kv : overrides)
            apply_override(scenario, kv);
        if (have_seed)
            scenario.experiment.seed = seed;
        if (have_threads) {
            if (threads < 1)
                throw ConfigError("threads: must be >= 1");
            scenario.experiment.threads = threads;
        }
        if (!out_path.empty())
            scenario.out_path = out_path;
        if (!format.empty())
            scenario.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
        validate(scenario.experiment);

        const Command command = parse_command(app.get_subcommands().front()->get_name());

        if (scenario.out_path.empty())
            return run_command(command, scenario, out, err);
        std::ofstream file(scenario.out_path, std::ios::binary);
        if (!file) {
            err << "error: cannot open output file '" << scenario.out_path << "'\n";
            return 3;
        }
        return run_command(command, scenario, file, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace rscf
