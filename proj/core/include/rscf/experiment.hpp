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

#include <armadillo>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rscf/channel.hpp"
#include "rscf/geometry.hpp"
#include "rscf/precoding.hpp"
#include "rscf/rates.hpp"

namespace rscf {

/// How the SNR target maps to a transmit power: from each trial's realized
/// channel trace (every trial hits the target exactly) or from the expected
/// trace sum_mk zeta_mk of the realization.
enum class SnrNorm { PerRealization, ExpectedTrace };

/// One simulated system: transmitter topology, private precoder, and whether
/// the power split over a common stream is enabled.
struct Variant {
    Topology topology = Topology::CellFree;
    PrecoderKind precoder = PrecoderKind::Zf;
    bool rs = true;

    std::string name() const;
    bool operator==(const Variant&) const = default;
};

Variant parse_variant(const std::string& name);

struct ExperimentConfig {
    std::size_t m = 6;
    std::size_t k = 3;
    double area_side = 600.0;
    Topology topology = Topology::CellFree;
    PrecoderKind precoder = PrecoderKind::Zf;
    bool rs_enabled = true;
    std::vector<Variant> variants; // empty: derived from the three fields above
    std::vector<double> sigma_e2{0.25};
    std::vector<double> snr_db{20.0};
    std::size_t n_channel = 100;
    std::size_t n_error = 100;
    double delta_grid_step = 0.001;
    std::uint64_t seed = 1;
    EsrScope esr_scope = EsrScope::MinOfMeans;
    SnrNorm snr_norm = SnrNorm::PerRealization;
    bool fixed_geometry = false;
    double zf_cond_cap = 1e8;
    std::size_t zf_retry_budget = 100;
    std::size_t threads = 1;
    PhysicalParams physical;

    /// The explicit variant list, or the pairing derived from
    /// (topology, precoder, rs_enabled): with RS on, the RS variant plus its
    /// non-RS baseline; otherwise the baseline alone.
    std::vector<Variant> effective_variants() const;

    /// Scalar accessors for commands that need a single axis value; throw
    /// ConfigError naming the key when a sweep list is configured.
    double single_sigma_e2() const;
    double single_snr_db() const;
};

/// Per-trial statistics: every inner product the SINR expressions need,
/// cached so the delta sweep never touches an M-dimensional vector again.
/// Row index k is the receiving user, column i the interfering stream.
struct TrialStats {
    arma::vec c_hat;   // K: |g_hat_k^T p_c|^2
    arma::vec c_cross; // K: Re{(g_hat_k^T p_c)* (g_err_k^T p_c)}
    arma::vec c_err;   // K: |g_err_k^T p_c|^2
    arma::mat p_hat;   // K x K: |g_hat_k^T p_i|^2
    arma::mat p_cross; // K x K: Re{(g_hat_k^T p_i)* (g_err_k^T p_i)}
    arma::mat p_err;   // K x K: |g_err_k^T p_i|^2
    arma::mat p_true;  // K x K: |g_k^T p_i|^2
    arma::vec row_true; // K: sum_i p_true(k, i)
    double trace_true = 0.0; // ||G||_F^2 of this trial's true channel
    double sum_zeta = 0.0;   // expected trace of the realization
    double p_t = 0.0;        // transmit power stamped for the current SNR point
};

/// All trials of one (topology, precoder, sigma_e2) point, realization-major
/// with stride n_error.
struct TrialSet {
    std::vector<TrialStats> records;
    std::size_t n_channel = 0;
    std::size_t n_error = 0;
    std::size_t num_aps = 0;
    std::size_t num_users = 0;
    double sigma_w2 = 0.0;
    std::uint64_t resampled = 0;  // fading redraws forced by singular ZF channels
    std::uint64_t psi1_ties = 0;  // realizations with a degenerate dominant singular value

    const TrialStats& at(std::size_t realization, std::size_t error_draw) const {
        return records[realization * n_error + error_draw];
    }

    /// Restamps every record's transmit power for a new SNR point.
    void stamp_power(double snr_linear, SnrNorm norm);
};

/// One channel realization: layout, large-scale fading, estimate, and the
/// precoders built from the estimate alone. Exposed so tests can regenerate
/// trials through the uncached path.
struct RealizedChannel {
    NetworkLayout layout;
    LargeScaleFading fading;
    arma::cx_mat g_hat;
    PrecoderSet precoders;
    std::uint64_t resample_attempts = 0;
};

RealizedChannel realize_channel(const ExperimentConfig& cfg, std::uint64_t realization);

/// The error draw for trial (realization, error_draw); raw normal draws
/// depend only on (seed, realization, error_draw), not on ZF resampling.
arma::cx_mat realize_error(const ExperimentConfig& cfg, const LargeScaleFading& fading,
                           std::uint64_t realization, std::uint64_t error_draw);

/// Runs n_channel x n_error trials for the configured topology/precoder at
/// the configured scalar sigma_e2, with power stamped at the scalar SNR.
/// Reproducible per seed and invariant to cfg.threads.
TrialSet run_trials(const ExperimentConfig& cfg);

struct EsrEvaluation {
    double esr = 0.0;
    double min_common_rate = 0.0;
    std::size_t argmin_user = 0;
    arma::vec common_means;  // per-user ensemble means
    arma::vec private_means; // per-user ensemble means
    std::uint64_t guarded = 0;
};

/// Reconstructs every SINR from the cached statistics at power split `delta`
/// and aggregates to the ergodic sum-rate. O(n_trials * K) per call.
EsrEvaluation evaluate_esr(const TrialSet& set, double delta, EsrScope scope);

double esr_for_delta(const TrialSet& set, double delta, EsrScope scope);

struct DeltaSearch {
    double delta_opt = 0.0;
    std::vector<std::pair<double, double>> curve; // (delta, esr), ascending delta
};

/// Exhaustive search over the grid {0, step, 2 step, ..., 1}; ties resolve to
/// the smallest delta so RS falls back to plain transmission when the split
/// adds nothing.
DeltaSearch optimize_delta(const TrialSet& set, double grid_step, EsrScope scope,
                           std::size_t threads = 1);

struct SweepPoint {
    double axis_value = 0.0;
    std::string variant;
    double esr = 0.0;
    double min_common_rate = 0.0;
    double delta_opt = 0.0;
    arma::vec mean_private_rates;
    std::uint64_t guarded_sinr_count = 0; // from the reported-delta evaluation
    std::uint64_t resampled_count = 0;
    std::uint64_t psi1_tie_count = 0; // realizations with a degenerate dominant singular value
};

struct SweepResult {
    std::string axis_name;
    std::vector<SweepPoint> points; // axis-major, variants in config order
    std::uint64_t seed = 0;
    std::size_t n_channel = 0;
    std::size_t n_error = 0;
    EsrScope scope = EsrScope::MinOfMeans;
    std::string config_hash; // filled by the CLI layer before serialization
};

/// ESR/min-CR across the configured SNR list at a fixed sigma_e2. All
/// variants and axis points reuse the same underlying trial draws; RS and
/// non-RS variants of a (topology, precoder) pair share the identical trial
/// set, so the RS point dominates by construction.
SweepResult sweep_snr(const ExperimentConfig& cfg);

/// Same protocol across the configured sigma_e2 list at a fixed SNR.
SweepResult sweep_error_variance(const ExperimentConfig& cfg);

/// The trial-generation config a variant actually sees: only topology and
/// precoder may differ between variants; the RS flag never reaches trial
/// generation.
ExperimentConfig variant_trial_config(const ExperimentConfig& cfg, const Variant& variant);

} // namespace rscf
