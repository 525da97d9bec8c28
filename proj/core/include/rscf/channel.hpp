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

#include "rscf/geometry.hpp"
#include "rscf/rng.hpp"

namespace rscf {

/// Propagation and noise constants. The defaults are the "paper-sec5" set:
/// 1900 MHz carrier, 20 MHz bandwidth, 9 dB noise figure, 8 dB shadowing,
/// three-slope breakpoints at 10 m and 50 m, AP/UE heights 15 m and 1.65 m.
struct PhysicalParams {
    double freq_mhz = 1900.0;
    double h_ap_m = 15.0;
    double h_u_m = 1.65;
    double d0_m = 10.0;
    double d1_m = 50.0;
    double sigma_shadow_db = 8.0;
    double noise_temp_k = 290.0;
    double boltzmann_jk = 1.381e-23;
    double bandwidth_hz = 20e6;
    double noise_figure_db = 9.0;

    static PhysicalParams paper_sec5() { return PhysicalParams{}; }
};

struct LargeScaleFading {
    arma::mat zeta;         // M x K linear power gains
    arma::mat path_loss_db; // M x K
    arma::mat shadow_db;    // M x K
};

/// One small-scale draw: channel estimate, estimation error, and the error
/// variance parameter. The true channel is g_hat + g_err by construction.
struct ChannelRealization {
    arma::cx_mat g_hat; // M x K estimate
    arma::cx_mat g_err; // M x K estimation error
    double sigma_e2 = 0.0;

    arma::cx_mat g() const { return g_hat + g_err; }
};

struct NoiseModel {
    double t0 = 290.0;
    double k_b = 1.381e-23;
    double bandwidth = 20e6;
    double nf_db = 9.0;
    double sigma_w2 = 0.0; // Watts

    static NoiseModel from(const PhysicalParams& p);
};

/// Hata-COST231-style attenuation constant L in dB:
/// 46.3 + 33.9 log10(f) - 13.82 log10(h_ap) - (1.1 log10(f) - 0.7) h_u
///      + (1.56 log10(f) - 0.8), with f in MHz and heights in meters.
double attenuation_constant(double f_mhz, double h_ap_m, double h_u_m);

/// Three-slope path loss in dB:
///   -L - 35 log10(d)                        d > d1
///   -L - 15 log10(d1) - 20 log10(d)         d0 < d <= d1
///   -L - 15 log10(d1) - 20 log10(d0)        d <= d0
double path_loss_db(double d_m, double l_db, double d0_m, double d1_m);

/// Path loss plus log-normal shadowing, combined into linear-scale
/// coefficients zeta = 10^((P + sigma_s z)/10). For CentralBs the colocated
/// antennas see one propagation path per user, so a single shadowing draw per
/// user is replicated across rows. The full M x K draw matrix is consumed in
/// both topologies to keep streams aligned.
LargeScaleFading large_scale_coefficients(const arma::mat& dist, double l_db,
                                          double sigma_s_db, double d0_m, double d1_m,
                                          Topology topology, RandomStream& rng);

/// Channel estimate: entries CN(0, (1 - sigma_e2) zeta_mk), drawn column-major.
arma::cx_mat sample_estimate(const arma::mat& zeta, double sigma_e2, RandomStream& rng);

/// Estimation error: entries CN(0, sigma_e2 zeta_mk), drawn column-major.
arma::cx_mat sample_error(const arma::mat& zeta, double sigma_e2, RandomStream& rng);

/// Draws estimate then error from the same stream.
ChannelRealization sample_channel(const arma::mat& zeta, double sigma_e2, RandomStream& rng);

/// sigma_w^2 = T0 kB B Nf, with the noise figure converted from dB.
double noise_variance(double t0_k, double k_b, double bandwidth_hz, double nf_db);

/// Transmit power that realizes `snr_linear` for the true channel G:
/// P_t = snr * M * K * sigma_w2 / Tr(G^T G*). The trace equals the squared
/// Frobenius norm of G.
double transmit_power_for_snr(double snr_linear, const arma::cx_mat& g, double sigma_w2);

} // namespace rscf
