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

#include "rscf/rates.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace rscf {

namespace {

using cxd = std::complex<double>;

double finish(SinrBreakdown& b, double sigma_w2) {
    b.noise = sigma_w2;
    double denom = b.loss + b.mui_power + b.residual_power + b.noise;
    const double floor = kDenominatorGuard * sigma_w2;
    if (denom < floor) {
        // The signed loss term drove the impairment power non-positive (deep
        // error fade); the denominator is floored and the event counted.
        denom = floor;
        b.guarded = true;
    }
    b.gamma = b.desired_power / denom;
    return b.gamma;
}

// |<hat> + <err>|^2 = |<hat>|^2 + 2 Re{<hat>* <err>} + |<err>|^2; the last two
// terms are the CSIT-error contribution for one stream.
double error_part(cxd through_hat, cxd through_err) {
    return 2.0 * std::real(std::conj(through_hat) * through_err) + std::norm(through_err);
}

SinrBreakdown sinr_general(std::size_t k, const arma::cx_mat& g_hat, const arma::cx_mat& g_err,
                           const PrecoderSet& precoders, const PowerAllocation& alloc,
                           double sigma_w2, bool common_stage) {
    const arma::uword users = g_hat.n_cols;
    if (k >= users)
        throw std::invalid_argument("sinr_general: user index out of range");
    if (g_err.n_rows != g_hat.n_rows || g_err.n_cols != g_hat.n_cols)
        throw std::invalid_argument("sinr_general: estimate/error dimension mismatch");
    if (precoders.p_private.n_rows != g_hat.n_rows || precoders.p_private.n_cols != users ||
        alloc.a_private.n_elem != users)
        throw std::invalid_argument("sinr_general: precoder/allocation dimension mismatch");

    const arma::cx_vec ghat_k = g_hat.col(k);
    const arma::cx_vec gerr_k = g_err.col(k);

    SinrBreakdown b;
    const double ac2 = alloc.a_common * alloc.a_common;

    if (common_stage) {
        const cxd through_hat = arma::dot(ghat_k, precoders.p_common);
        const cxd through_err = arma::dot(gerr_k, precoders.p_common);
        b.desired_power = ac2 * std::norm(through_hat);
        b.loss = ac2 * error_part(through_hat, through_err);
    } else {
        const double ak2 = alloc.a_private(k) * alloc.a_private(k);
        const cxd through_hat = arma::dot(ghat_k, precoders.p_private.col(k));
        const cxd through_err = arma::dot(gerr_k, precoders.p_private.col(k));
        b.desired_power = ak2 * std::norm(through_hat);
        b.loss = ak2 * error_part(through_hat, through_err);
    }

    // Interfering private streams: all of them when decoding the common
    // symbol, the others after SIC. The common stream never interferes with
    // the private stage (ideal SIC).
    for (arma::uword i = 0; i < users; ++i) {
        if (!common_stage && i == k)
            continue;
        const double ai2 = alloc.a_private(i) * alloc.a_private(i);
        const cxd through_hat = arma::dot(ghat_k, precoders.p_private.col(i));
        const cxd through_err = arma::dot(gerr_k, precoders.p_private.col(i));
        b.mui_power += ai2 * std::norm(through_hat);
        b.residual_power += ai2 * error_part(through_hat, through_err);
    }

    finish(b, sigma_w2);
    return b;
}

} // namespace

SinrBreakdown sinr_common_general(std::size_t k, const arma::cx_mat& g_hat,
                                  const arma::cx_mat& g_err, const PrecoderSet& precoders,
                                  const PowerAllocation& alloc, double sigma_w2) {
    return sinr_general(k, g_hat, g_err, precoders, alloc, sigma_w2, true);
}

SinrBreakdown sinr_private_general(std::size_t k, const arma::cx_mat& g_hat,
                                   const arma::cx_mat& g_err, const PrecoderSet& precoders,
                                   const PowerAllocation& alloc, double sigma_w2) {
    return sinr_general(k, g_hat, g_err, precoders, alloc, sigma_w2, false);
}

ClosedFormSinr sinr_mf_closed(std::size_t k, const arma::cx_mat& g_hat,
                              const arma::cx_mat& g_err, const PrecoderSet& precoders,
                              const SvdSideInfo& svd, const PowerAllocation& alloc,
                              double sigma_w2) {
    if (precoders.kind != PrecoderKind::Mf)
        throw std::logic_error("sinr_mf_closed: precoders are not matched-filter");
    const arma::uword users = g_hat.n_cols;
    if (k >= users)
        throw std::invalid_argument("sinr_mf_closed: user index out of range");

    const arma::cx_vec ghat_k = g_hat.col(k);
    const arma::cx_vec gerr_k = g_err.col(k);
    const double ac2 = alloc.a_common * alloc.a_common;
    const double ak2 = alloc.a_private(k) * alloc.a_private(k);
    const double guard = kDenominatorGuard * sigma_w2;

    // True channel onto each unnormalized MF column conj(g_hat_i).
    arma::vec interf(users);
    for (arma::uword i = 0; i < users; ++i) {
        const cxd s = arma::dot(ghat_k, arma::conj(g_hat.col(i))) +
                      arma::dot(gerr_k, arma::conj(g_hat.col(i)));
        interf(i) = std::norm(s);
    }

    // Common stage: g_hat_k^T v_1 = u_{k,1} psi_1.
    const cxd err_v1 = arma::dot(gerr_k, precoders.p_common);
    const double d_cv = ac2 * (2.0 * svd.psi1 * std::real(std::conj(svd.u_col1(k)) * err_v1) +
                               std::norm(err_v1));
    double denom_c = d_cv + sigma_w2;
    for (arma::uword i = 0; i < users; ++i)
        denom_c += alloc.a_private(i) * alloc.a_private(i) * interf(i);

    ClosedFormSinr out;
    const double num_c = ac2 * svd.psi1 * svd.psi1 * std::norm(svd.u_col1(k));
    out.gamma_common = num_c / std::max(denom_c, guard);

    // Private stage: numerator a_k^2 ||g_hat_k||^4.
    const double gk2 = std::pow(arma::norm(ghat_k), 2);
    const cxd err_self = arma::dot(gerr_k, arma::conj(ghat_k));
    const double d_mf = ak2 * (2.0 * gk2 * std::real(err_self) + std::norm(err_self));
    double denom_p = d_mf + sigma_w2;
    for (arma::uword i = 0; i < users; ++i)
        if (i != k)
            denom_p += alloc.a_private(i) * alloc.a_private(i) * interf(i);
    out.gamma_private = ak2 * gk2 * gk2 / std::max(denom_p, guard);
    return out;
}

ClosedFormSinr sinr_zf_closed(std::size_t k, const arma::cx_mat& g_hat,
                              const arma::cx_mat& g_err, const PrecoderSet& precoders,
                              const SvdSideInfo& svd, const PowerAllocation& alloc,
                              double sigma_w2) {
    if (precoders.kind != PrecoderKind::Zf)
        throw std::logic_error("sinr_zf_closed: precoders are not zero-forcing");
    const arma::uword users = g_hat.n_cols;
    if (k >= users)
        throw std::invalid_argument("sinr_zf_closed: user index out of range");

    const arma::cx_vec gerr_k = g_err.col(k);
    const double ac2 = alloc.a_common * alloc.a_common;
    const double ak2 = alloc.a_private(k) * alloc.a_private(k);
    const double guard = kDenominatorGuard * sigma_w2;

    // t_i = g_err_k^T g_hat* lambda_i, the error leakage through ZF column i.
    const arma::cx_rowvec t = (gerr_k.st() * arma::conj(g_hat)) * precoders.zf_lambda;

    const double tk_self = ak2 * (2.0 * std::real(t(k)) + std::norm(t(k)));

    double leak_others = 0.0;
    for (arma::uword i = 0; i < users; ++i)
        if (i != k)
            leak_others += alloc.a_private(i) * alloc.a_private(i) * std::norm(t(i));

    // Common stage. The self stream enters as a_k^2 |1 + t_k|^2: the unit ZF
    // gain plus its error cross term, not just a_k^2 + a_k^2 |t_k|^2.
    const cxd err_v1 = arma::dot(gerr_k, precoders.p_common);
    const double d_cv = ac2 * (2.0 * svd.psi1 * std::real(std::conj(svd.u_col1(k)) * err_v1) +
                               std::norm(err_v1));
    const double denom_c = d_cv + ak2 + tk_self + leak_others + sigma_w2;

    ClosedFormSinr out;
    const double num_c = ac2 * svd.psi1 * svd.psi1 * std::norm(svd.u_col1(k));
    out.gamma_common = num_c / std::max(denom_c, guard);

    // Private stage after SIC: unit desired gain, error self-leakage, others.
    const double denom_p = tk_self + leak_others + sigma_w2;
    out.gamma_private = ak2 / std::max(denom_p, guard);
    return out;
}

double rate(double gamma) {
    if (gamma < 0.0)
        throw std::invalid_argument("rate: gamma must be non-negative");
    return std::log1p(gamma) / std::numbers::ln2;
}

AverageRates average_rates(const arma::cx_mat& g_hat,
                           const std::vector<arma::cx_mat>& error_samples,
                           const PrecoderSet& precoders, const PowerAllocation& alloc,
                           double sigma_w2) {
    if (error_samples.empty())
        throw std::invalid_argument("average_rates: need at least one error sample");

    const arma::uword users = g_hat.n_cols;
    AverageRates avg;
    avg.common = arma::vec(users, arma::fill::zeros);
    avg.privates = arma::vec(users, arma::fill::zeros);

    for (const arma::cx_mat& g_err : error_samples) {
        for (arma::uword k = 0; k < users; ++k) {
            const SinrBreakdown c = sinr_common_general(k, g_hat, g_err, precoders, alloc, sigma_w2);
            const SinrBreakdown p = sinr_private_general(k, g_hat, g_err, precoders, alloc, sigma_w2);
            avg.common(k) += rate(c.gamma);
            avg.privates(k) += rate(p.gamma);
            avg.guarded += (c.guarded ? 1 : 0) + (p.guarded ? 1 : 0);
        }
    }
    const double n = static_cast<double>(error_samples.size());
    avg.common /= n;
    avg.privates /= n;
    return avg;
}

RateReport ergodic_sum_rate(const std::vector<AverageRates>& per_realization, EsrScope scope) {
    if (per_realization.empty())
        throw std::invalid_argument("ergodic_sum_rate: empty realization list");

    const arma::uword users = per_realization.front().common.n_elem;
    RateReport report;
    report.scope = scope;
    report.common_rates = arma::vec(users, arma::fill::zeros);
    report.private_rates = arma::vec(users, arma::fill::zeros);

    double mean_of_mins = 0.0;
    for (const AverageRates& r : per_realization) {
        report.common_rates += r.common;
        report.private_rates += r.privates;
        mean_of_mins += r.common.min();
    }
    const double n = static_cast<double>(per_realization.size());
    report.common_rates /= n;
    report.private_rates /= n;
    mean_of_mins /= n;

    report.argmin_user = report.common_rates.index_min();
    report.min_common_rate = scope == EsrScope::MinOfMeans
                                 ? report.common_rates(report.argmin_user)
                                 : mean_of_mins;
    report.sum_rate = report.min_common_rate + arma::accu(report.private_rates);
    return report;
}

} // namespace rscf
