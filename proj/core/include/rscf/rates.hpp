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
#include <vector>

#include "rscf/precoding.hpp"

namespace rscf {

/// How the common-rate part of the ergodic sum-rate takes its per-user
/// minimum: outside the ensemble average (MinOfMeans, the printed formula) or
/// per realization before averaging (MeanOfMins, the decodability reading).
enum class EsrScope { MinOfMeans, MeanOfMins };

/// SINR denominator floor, as a fraction of the noise power. The signed loss
/// terms can drive a denominator non-positive even though the physical
/// received power is not; such denominators are floored and every floored
/// evaluation is counted, never hidden.
inline constexpr double kDenominatorGuard = 1e-12;

/// Additive decomposition of one decode stage at one user. All terms are
/// powers in Watts; `loss` and `residual_power` may be negative (they carry
/// the cross terms between estimate and error). desired + loss + mui +
/// residual equals the received signal power of the stage, so the breakdown
/// sums to the stage's total received power once noise is added.
struct SinrBreakdown {
    double desired_power = 0.0;  // numerator, through the estimated channel
    double loss = 0.0;           // power loss from the CSIT error on the decoded stream
    double mui_power = 0.0;      // multiuser interference through the estimated channel
    double residual_power = 0.0; // interference contributed by the CSIT error
    double noise = 0.0;
    double gamma = 0.0;
    bool guarded = false;        // denominator hit the floor
};

/// SINR when decoding the common stream at user k: numerator
/// a_c^2 |g_hat_k^T p_c|^2; denominator carries the CSIT loss term, all K
/// private streams through the true channel, and noise.
SinrBreakdown sinr_common_general(std::size_t k, const arma::cx_mat& g_hat,
                                  const arma::cx_mat& g_err, const PrecoderSet& precoders,
                                  const PowerAllocation& alloc, double sigma_w2);

/// SINR when decoding the private stream after ideal SIC of the common
/// symbol: numerator a_k^2 |g_hat_k^T p_k|^2; interference from streams i != k.
SinrBreakdown sinr_private_general(std::size_t k, const arma::cx_mat& g_hat,
                                   const arma::cx_mat& g_err, const PrecoderSet& precoders,
                                   const PowerAllocation& alloc, double sigma_w2);

struct ClosedFormSinr {
    double gamma_common = 0.0;
    double gamma_private = 0.0;
};

/// Closed-form SINRs for the unnormalized MF convention (p_k = conj(g_hat_k),
/// p_c = v_1), expressed through the SVD side products. Cross-checks the
/// general path; requires precoders.kind == Mf.
ClosedFormSinr sinr_mf_closed(std::size_t k, const arma::cx_mat& g_hat,
                              const arma::cx_mat& g_err, const PrecoderSet& precoders,
                              const SvdSideInfo& svd, const PowerAllocation& alloc,
                              double sigma_w2);

/// Closed-form SINRs for the unnormalized ZF convention (g_hat^T P = I),
/// expressed through Lambda = (g_hat^T g_hat*)^-1. The common-stage
/// denominator includes the full |1 + t_k|^2 self term (t_k = g_err_k^T
/// g_hat* lambda_k); dropping its cross part does not survive the expansion
/// check against the general path. Requires precoders.kind == Zf.
ClosedFormSinr sinr_zf_closed(std::size_t k, const arma::cx_mat& g_hat,
                              const arma::cx_mat& g_err, const PrecoderSet& precoders,
                              const SvdSideInfo& svd, const PowerAllocation& alloc,
                              double sigma_w2);

/// Shannon rate log2(1 + gamma) in bits/s/Hz.
double rate(double gamma);

/// Per-user rates averaged over CSIT-error draws, conditioned on one channel
/// estimate (the precoders must be built from g_hat only).
struct AverageRates {
    arma::vec common;   // K entries
    arma::vec privates; // K entries
    std::uint64_t guarded = 0;
};

AverageRates average_rates(const arma::cx_mat& g_hat,
                           const std::vector<arma::cx_mat>& error_samples,
                           const PrecoderSet& precoders, const PowerAllocation& alloc,
                           double sigma_w2);

struct RateReport {
    arma::vec common_rates;  // per-user ensemble means
    arma::vec private_rates; // per-user ensemble means
    double min_common_rate = 0.0;
    std::size_t argmin_user = 0; // user with the smallest mean common rate
    double sum_rate = 0.0;
    EsrScope scope = EsrScope::MinOfMeans;
};

/// Ergodic sum-rate over channel realizations. MinOfMeans:
/// min_k E[R_c,k] + sum_k E[R_k]; MeanOfMins replaces the first term with
/// E[min_k R_c,k]. sum_rate = min_common_rate + sum(private_rates) always.
RateReport ergodic_sum_rate(const std::vector<AverageRates>& per_realization, EsrScope scope);

} // namespace rscf
