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

#include "rscf/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace rscf {

NoiseModel NoiseModel::from(const PhysicalParams& p) {
    NoiseModel n;
    n.t0 = p.noise_temp_k;
    n.k_b = p.boltzmann_jk;
    n.bandwidth = p.bandwidth_hz;
    n.nf_db = p.noise_figure_db;
    n.sigma_w2 = noise_variance(n.t0, n.k_b, n.bandwidth, n.nf_db);
    return n;
}

double attenuation_constant(double f_mhz, double h_ap_m, double h_u_m) {
    if (!(f_mhz > 0.0) || !(h_ap_m > 0.0) || !(h_u_m > 0.0))
        throw std::invalid_argument("attenuation_constant: f, h_ap and h_u must be positive");
    const double lf = std::log10(f_mhz);
    return 46.3 + 33.9 * lf - 13.82 * std::log10(h_ap_m) - (1.1 * lf - 0.7) * h_u_m +
           (1.56 * lf - 0.8);
}

double path_loss_db(double d_m, double l_db, double d0_m, double d1_m) {
    if (d_m < 0.0)
        throw std::invalid_argument("path_loss_db: distance must be non-negative");
    if (!(d0_m > 0.0) || !(d1_m > d0_m))
        throw std::invalid_argument("path_loss_db: breakpoints must satisfy 0 < d0 < d1");

    if (d_m > d1_m)
        return -l_db - 35.0 * std::log10(d_m);
    if (d_m > d0_m)
        return -l_db - 15.0 * std::log10(d1_m) - 20.0 * std::log10(d_m);
    return -l_db - 15.0 * std::log10(d1_m) - 20.0 * std::log10(d0_m);
}

LargeScaleFading large_scale_coefficients(const arma::mat& dist, double l_db,
                                          double sigma_s_db, double d0_m, double d1_m,
                                          Topology topology, RandomStream& rng) {
    const arma::uword m = dist.n_rows;
    const arma::uword k = dist.n_cols;

    LargeScaleFading out;
    out.path_loss_db.set_size(m, k);
    out.shadow_db.set_size(m, k);
    out.zeta.set_size(m, k);

    for (arma::uword j = 0; j < k; ++j)
        for (arma::uword i = 0; i < m; ++i) {
            out.path_loss_db(i, j) = path_loss_db(dist(i, j), l_db, d0_m, d1_m);
            out.shadow_db(i, j) = sigma_s_db * rng.normal();
        }
    if (topology == Topology::CentralBs)
        for (arma::uword i = 1; i < m; ++i)
            out.shadow_db.row(i) = out.shadow_db.row(0);

    out.zeta = arma::exp10((out.path_loss_db + out.shadow_db) / 10.0);
    return out;
}

arma::cx_mat sample_estimate(const arma::mat& zeta, double sigma_e2, RandomStream& rng) {
    if (sigma_e2 < 0.0 || sigma_e2 > 1.0)
        throw std::invalid_argument("sample_estimate: sigma_e2 must lie in [0, 1]");
    arma::cx_mat g_hat(zeta.n_rows, zeta.n_cols);
    for (arma::uword j = 0; j < zeta.n_cols; ++j)
        for (arma::uword i = 0; i < zeta.n_rows; ++i)
            g_hat(i, j) = rng.complex_normal((1.0 - sigma_e2) * zeta(i, j));
    return g_hat;
}

arma::cx_mat sample_error(const arma::mat& zeta, double sigma_e2, RandomStream& rng) {
    if (sigma_e2 < 0.0 || sigma_e2 > 1.0)
        throw std::invalid_argument("sample_error: sigma_e2 must lie in [0, 1]");
    arma::cx_mat g_err(zeta.n_rows, zeta.n_cols);
    for (arma::uword j = 0; j < zeta.n_cols; ++j)
        for (arma::uword i = 0; i < zeta.n_rows; ++i)
            g_err(i, j) = rng.complex_normal(sigma_e2 * zeta(i, j));
    return g_err;
}

ChannelRealization sample_channel(const arma::mat& zeta, double sigma_e2, RandomStream& rng) {
    ChannelRealization r;
    r.sigma_e2 = sigma_e2;
    r.g_hat = sample_estimate(zeta, sigma_e2, rng);
    r.g_err = sample_error(zeta, sigma_e2, rng);
    return r;
}

double noise_variance(double t0_k, double k_b, double bandwidth_hz, double nf_db) {
    if (!(t0_k > 0.0) || !(k_b > 0.0) || !(bandwidth_hz > 0.0))
        throw std::invalid_argument("noise_variance: physical constants must be positive");
    return t0_k * k_b * bandwidth_hz * std::pow(10.0, nf_db / 10.0);
}

double transmit_power_for_snr(double snr_linear, const arma::cx_mat& g, double sigma_w2) {
    if (snr_linear < 0.0)
        throw std::invalid_argument("transmit_power_for_snr: snr must be non-negative");
    const double trace = std::pow(arma::norm(g, "fro"), 2);
    if (!(trace > 0.0))
        throw std::invalid_argument("transmit_power_for_snr: zero channel (Tr(G^T G*) = 0)");
    return snr_linear * static_cast<double>(g.n_rows) * static_cast<double>(g.n_cols) *
           sigma_w2 / trace;
}

} // namespace rscf
