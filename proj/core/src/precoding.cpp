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

#include "rscf/precoding.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "rscf/errors.hpp"

namespace rscf {

namespace {

// Relative gap below which the two leading singular values are treated as a
// tie. Any maximizing direction is a valid common precoder; the tie is only
// flagged for the run report.
constexpr double kPsiTieTol = 1e-10;

} // namespace

SvdResult complex_svd(const arma::cx_mat& a) {
    if (!a.is_finite())
        throw std::invalid_argument("complex_svd: input has non-finite entries");

    SvdResult r;
    if (!arma::svd(r.u, r.psi, r.v, a))
        throw SimulationError("complex_svd: factorization failed to converge");

    const arma::uword rank_bound = std::min(a.n_rows, a.n_cols);
    for (arma::uword j = 0; j < rank_bound; ++j) {
        const arma::uword imax = arma::abs(r.u.col(j)).index_max();
        const std::complex<double> pivot = r.u(imax, j);
        if (std::abs(pivot) > 0.0) {
            const std::complex<double> rot = std::conj(pivot) / std::abs(pivot);
            r.u.col(j) *= rot;
            r.v.col(j) *= rot;
        }
    }
    return r;
}

std::pair<arma::cx_vec, SvdSideInfo> common_precoder(const arma::cx_mat& g_hat) {
    if (arma::norm(g_hat, "fro") == 0.0)
        throw std::invalid_argument("common_precoder: channel estimate is the zero matrix");

    const SvdResult svd = complex_svd(g_hat.st()); // g_hat^T = U Psi V^H

    SvdSideInfo side;
    side.psi1 = svd.psi(0);
    side.u_col1 = svd.u.col(0);
    side.psi1_degenerate =
        svd.psi.n_elem > 1 && (svd.psi(0) - svd.psi(1)) <= kPsiTieTol * svd.psi(0);
    return {svd.v.col(0), side};
}

arma::cx_mat PrecoderSet::unnormalized_private() const {
    return p_private * arma::diagmat(raw_column_norms);
}

PrecoderSet PrecoderSet::as_unnormalized() const {
    PrecoderSet out = *this;
    out.p_private = unnormalized_private();
    out.raw_column_norms = arma::vec(p_private.n_cols, arma::fill::ones);
    return out;
}

PrecoderSet mf_precoder(const arma::cx_mat& g_hat) {
    PrecoderSet set;
    set.kind = PrecoderKind::Mf;
    std::tie(set.p_common, set.svd) = common_precoder(g_hat);

    const arma::uword k = g_hat.n_cols;
    set.p_private.set_size(g_hat.n_rows, k);
    set.raw_column_norms.set_size(k);
    for (arma::uword j = 0; j < k; ++j) {
        const double nrm = arma::norm(g_hat.col(j));
        if (nrm == 0.0)
            throw std::invalid_argument("mf_precoder: zero channel-estimate column (degenerate user)");
        set.p_private.col(j) = arma::conj(g_hat.col(j)) / nrm;
        set.raw_column_norms(j) = nrm;
    }
    return set;
}

PrecoderSet zf_precoder(const arma::cx_mat& g_hat, double cond_cap) {
    if (g_hat.n_rows <= g_hat.n_cols)
        throw std::invalid_argument("zf_precoder: requires more transmit antennas than users (M > K)");

    // Gram matrix of the estimate, (g_hat^T g_hat*)_{ki} = g_hat_k^T g_hat_i*.
    const arma::cx_mat gram = g_hat.st() * arma::conj(g_hat);
    const double cond = arma::cond(gram);
    if (!std::isfinite(cond) || cond > cond_cap)
        throw SingularChannelError("zf_precoder: Gram matrix condition number " +
                                   std::to_string(cond) + " exceeds cap");

    PrecoderSet set;
    set.kind = PrecoderKind::Zf;
    std::tie(set.p_common, set.svd) = common_precoder(g_hat);

    arma::cx_mat lambda;
    if (!arma::inv(lambda, gram))
        throw SingularChannelError("zf_precoder: Gram matrix is not invertible");
    set.zf_lambda = lambda;

    const arma::cx_mat raw = arma::conj(g_hat) * lambda;
    const arma::uword k = g_hat.n_cols;
    set.p_private.set_size(g_hat.n_rows, k);
    set.raw_column_norms.set_size(k);
    for (arma::uword j = 0; j < k; ++j) {
        const double nrm = arma::norm(raw.col(j));
        set.p_private.col(j) = raw.col(j) / nrm;
        set.raw_column_norms(j) = nrm;
    }
    return set;
}

PowerAllocation allocate_power(double p_t, double delta, std::size_t k) {
    if (p_t < 0.0)
        throw std::invalid_argument("allocate_power: p_t must be non-negative");
    if (delta < 0.0 || delta > 1.0)
        throw std::invalid_argument("allocate_power: delta must lie in [0, 1]");
    if (k < 1)
        throw std::invalid_argument("allocate_power: k must be >= 1");

    PowerAllocation alloc;
    alloc.p_t = p_t;
    alloc.delta = delta;
    alloc.a_common = std::sqrt(delta * p_t);
    alloc.a_private = arma::vec(k, arma::fill::value(std::sqrt((1.0 - delta) * p_t / static_cast<double>(k))));
    return alloc;
}

double effective_tx_power(const PrecoderSet& precoders, const PowerAllocation& alloc) {
    double power = alloc.a_common * alloc.a_common * std::pow(arma::norm(precoders.p_common), 2);
    for (arma::uword j = 0; j < precoders.p_private.n_cols; ++j)
        power += alloc.a_private(j) * alloc.a_private(j) *
                 std::pow(arma::norm(precoders.p_private.col(j)), 2);
    return power;
}

} // namespace rscf
