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

#include <benchmark/benchmark.h>

#include "rscf/experiment.hpp"
#include "rscf/rng.hpp"

using namespace rscf;

namespace {

ExperimentConfig bench_config() {
    ExperimentConfig cfg;
    cfg.m = 6;
    cfg.k = 3;
    cfg.n_channel = 50;
    cfg.n_error = 50;
    cfg.sigma_e2 = {0.25};
    cfg.snr_db = {20.0};
    cfg.seed = 11;
    return cfg;
}

arma::cx_mat random_estimate(RandomStream& rng) {
    arma::cx_mat g(6, 3);
    for (arma::uword j = 0; j < 3; ++j)
        for (arma::uword i = 0; i < 6; ++i)
            g(i, j) = rng.complex_normal(0.75);
    return g;
}

// Matrix-path ESR over retained channel realizations: what every delta grid
// point would cost without the cached trial statistics.
struct MaterializedTrials {
    std::vector<arma::cx_mat> g_hat;
    std::vector<PrecoderSet> precoders;
    std::vector<std::vector<arma::cx_mat>> g_err;
    std::vector<std::vector<double>> p_t;
    double sigma_w2 = 0.0;
    std::size_t users = 0;
};

MaterializedTrials materialize(const ExperimentConfig& cfg) {
    MaterializedTrials m;
    m.sigma_w2 = noise_variance(cfg.physical.noise_temp_k, cfg.physical.boltzmann_jk,
                                cfg.physical.bandwidth_hz, cfg.physical.noise_figure_db);
    m.users = cfg.k;
    const double snr_linear = 100.0;
    for (std::size_t r = 0; r < cfg.n_channel; ++r) {
        const RealizedChannel rc = realize_channel(cfg, r);
        m.g_hat.push_back(rc.g_hat);
        m.precoders.push_back(rc.precoders);
        std::vector<arma::cx_mat> errors;
        std::vector<double> powers;
        for (std::size_t e = 0; e < cfg.n_error; ++e) {
            arma::cx_mat g_err = realize_error(cfg, rc.fading, r, e);
            powers.push_back(transmit_power_for_snr(snr_linear,
                                                    arma::cx_mat(rc.g_hat + g_err), m.sigma_w2));
            errors.push_back(std::move(g_err));
        }
        m.g_err.push_back(std::move(errors));
        m.p_t.push_back(std::move(powers));
    }
    return m;
}

double uncached_esr(const MaterializedTrials& m, double delta) {
    std::vector<AverageRates> per_realization;
    per_realization.reserve(m.g_hat.size());
    for (std::size_t r = 0; r < m.g_hat.size(); ++r) {
        AverageRates avg;
        avg.common = arma::vec(m.users, arma::fill::zeros);
        avg.privates = arma::vec(m.users, arma::fill::zeros);
        for (std::size_t e = 0; e < m.g_err[r].size(); ++e) {
            const PowerAllocation alloc = allocate_power(m.p_t[r][e], delta, m.users);
            for (std::size_t k = 0; k < m.users; ++k) {
                avg.common(k) += rate(sinr_common_general(k, m.g_hat[r], m.g_err[r][e],
                                                          m.precoders[r], alloc, m.sigma_w2)
                                          .gamma);
                avg.privates(k) += rate(sinr_private_general(k, m.g_hat[r], m.g_err[r][e],
                                                             m.precoders[r], alloc, m.sigma_w2)
                                            .gamma);
            }
        }
        avg.common /= static_cast<double>(m.g_err[r].size());
        avg.privates /= static_cast<double>(m.g_err[r].size());
        per_realization.push_back(std::move(avg));
    }
    return ergodic_sum_rate(per_realization, EsrScope::MinOfMeans).sum_rate;
}

void BM_EsrForDeltaCached(benchmark::State& state) {
    const TrialSet set = run_trials(bench_config());
    double delta = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(esr_for_delta(set, delta, EsrScope::MinOfMeans));
        delta = delta < 0.99 ? delta + 0.001 : 0.0;
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(set.records.size()));
}
BENCHMARK(BM_EsrForDeltaCached)->Unit(benchmark::kMicrosecond);

void BM_EsrForDeltaUncached(benchmark::State& state) {
    const MaterializedTrials m = materialize(bench_config());
    double delta = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(uncached_esr(m, delta));
        delta = delta < 0.99 ? delta + 0.001 : 0.0;
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<int64_t>(m.g_hat.size() * m.g_err.front().size()));
}
BENCHMARK(BM_EsrForDeltaUncached)->Unit(benchmark::kMillisecond);

void BM_OptimizeDeltaFullGrid(benchmark::State& state) {
    const TrialSet set = run_trials(bench_config());
    for (auto _ : state)
        benchmark::DoNotOptimize(optimize_delta(set, 0.001, EsrScope::MinOfMeans,
                                                static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_OptimizeDeltaFullGrid)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_RunTrials(benchmark::State& state) {
    ExperimentConfig cfg = bench_config();
    cfg.n_channel = 10;
    cfg.n_error = 20;
    cfg.threads = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(run_trials(cfg));
}
BENCHMARK(BM_RunTrials)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_MfPrecoder(benchmark::State& state) {
    RandomStream rng(3);
    const arma::cx_mat g_hat = random_estimate(rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(mf_precoder(g_hat));
}
BENCHMARK(BM_MfPrecoder)->Unit(benchmark::kMicrosecond);

void BM_ZfPrecoder(benchmark::State& state) {
    RandomStream rng(4);
    const arma::cx_mat g_hat = random_estimate(rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(zf_precoder(g_hat));
}
BENCHMARK(BM_ZfPrecoder)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
