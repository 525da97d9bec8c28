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
#include <utility>

namespace rscf {

enum class PrecoderKind { Mf, Zf };

struct SvdResult {
    arma::cx_mat u;  // left singular vectors, n_rows x n_rows
    arma::vec psi;   // singular values, descending
    arma::cx_mat v;  // right singular vectors, n_cols x n_cols
};

/// Full SVD a = U diag(psi) V^H with a deterministic phase convention: for
/// each singular triplet, both columns are rotated so the largest-magnitude
/// entry of the U column is real positive. The rotation cancels in u v^H, so
/// the factorization is unchanged; it only pins the representative.
SvdResult complex_svd(const arma::cx_mat& a);

/// Side products of the SVD of the estimated channel's transpose, needed by
/// the closed-form SINR expressions: the dominant singular value psi_1 and
/// the first column of U (entries u_{k,1}).
struct SvdSideInfo {
    double psi1 = 0.0;
    arma::cx_vec u_col1;
    bool psi1_degenerate = false; // dominant singular value has multiplicity > 1
};

/// Common-stream precoder: the dominant right singular vector v_1 of
/// g_hat^T, so that g_hat_k^T v_1 = u_{k,1} psi_1 for every user k.
std::pair<arma::cx_vec, SvdSideInfo> common_precoder(const arma::cx_mat& g_hat);

struct PrecoderSet {
    arma::cx_vec p_common;       // v_1, unit norm
    arma::cx_mat p_private;      // M x K, columns normalized to unit norm
    PrecoderKind kind = PrecoderKind::Mf;
    arma::vec raw_column_norms;  // norms of the unnormalized columns
    arma::cx_mat zf_lambda;      // (g_hat^T g_hat*)^-1, present iff kind == Zf
    SvdSideInfo svd;

    /// Columns rescaled back to the analytic convention (MF: conj(g_hat_k);
    /// ZF: g_hat^T P = I). The closed-form SINR expressions are stated for
    /// these unnormalized columns.
    arma::cx_mat unnormalized_private() const;

    /// Copy with unnormalized columns and unit raw norms.
    PrecoderSet as_unnormalized() const;
};

/// Matched filter: private column k proportional to conj(g_hat_k).
PrecoderSet mf_precoder(const arma::cx_mat& g_hat);

/// Zero forcing: P = g_hat* (g_hat^T g_hat*)^-1. Throws SingularChannelError
/// when the Gram matrix's condition number exceeds `cond_cap`.
PrecoderSet zf_precoder(const arma::cx_mat& g_hat, double cond_cap = 1e8);

/// Rate-splitting power split: a_c^2 = delta P_t for the common stream and a
/// uniform (1 - delta) P_t / K per private stream.
struct PowerAllocation {
    double p_t = 0.0;
    double delta = 0.0;
    double a_common = 0.0;
    arma::vec a_private;
};

PowerAllocation allocate_power(double p_t, double delta, std::size_t k);

/// Mean transmit power a_c^2 ||p_c||^2 + sum_k a_k^2 ||p_k||^2 for unit-power
/// symbols. Equals alloc.p_t when the columns are unit norm.
double effective_tx_power(const PrecoderSet& precoders, const PowerAllocation& alloc);

} // namespace rscf
