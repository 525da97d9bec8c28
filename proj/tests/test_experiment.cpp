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

#include <doctest.h>

#include <cmath>

#include "rscf/errors.hpp"
#include "rscf/experiment.hpp"
#include "rscf/scenario.hpp"
#include "test_support.hpp"

using namespace rscf;
using rscf::test::rel_err;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.m = 6;
    cfg.k = 3;
    cfg.n_channel = 12;
    cfg.n_error = 10;
    cfg.sigma_e2 = {0.25};
    cfg.snr_db = {20.0};
    cfg.delta_grid_step = 0.05;
    cfg.seed = 7;
    return cfg;
}

bool records_identical(const TrialSet& a, const TrialSet& b) {
    if (a.records.size() != b.records.size())
        return false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const TrialStats& x = a.records[i];
        const TrialStats& y = b.records[i];
        if (arma::any(x.c_hat != y.c_hat) || arma::any(x.c_cross != y.c_cross) ||
            arma::any(x.c_err != y.c_err))
            return false;
        if (arma::any(arma::vectorise(x.p_true != y.p_true)) ||
            arma::any(arma::vectorise(x.p_hat != y.p_hat)))
            return false;
        if (x.trace_true != y.trace_true || x.p_t != y.p_t)
            return false;
    }
    return true;
}

// Re-derives the ESR for one delta straight from matrices: regenerates every
// trial through the public channel path and evaluates the general SINR
// expressions, never touching the cached statistics.
double uncached_esr(const ExperimentConfig& cfg, double delta, EsrScope scope) {
    const double snr_linear = std::pow(10.0, cfg.single_snr_db() / 10.0);
    const double sigma_w2 = noise_variance(cfg.physical.noise_temp_k, cfg.physical.boltzmann_jk,
                                           cfg.physical.bandwidth_hz,
                                           cfg.physical.noise_figure_db);
    std::vector<AverageRates> per_realization;
    for (std::size_t r = 0; r < cfg.n_channel; ++r) {
        const RealizedChannel rc = realize_channel(cfg, r);
        AverageRates avg;
        avg.common = arma::vec(cfg.k, arma::fill::zeros);
        avg.privates = arma::vec(cfg.k, arma::fill::zeros);
        for (std::size_t e = 0; e < cfg.n_error; ++e) {
            const arma::cx_mat g_err = realize_error(cfg, rc.fading, r, e);
            const double p_t =
                transmit_power_for_snr(snr_linear, arma::cx_mat(rc.g_hat + g_err), sigma_w2);
            const PowerAllocation alloc = allocate_power(p_t, delta, cfg.k);
            for (std::size_t k = 0; k < cfg.k; ++k) {
                avg.common(k) += rate(
                    sinr_common_general(k, rc.g_hat, g_err, rc.precoders, alloc, sigma_w2).gamma);
                avg.privates(k) += rate(
                    sinr_private_general(k, rc.g_hat, g_err, rc.precoders, alloc, sigma_w2).gamma);
            }
        }
        avg.common /= static_cast<double>(cfg.n_error);
        avg.privates /= static_cast<double>(cfg.n_error);
        per_realization.push_back(avg);
    }
    return ergodic_sum_rate(per_realization, scope).sum_rate;
}

} // namespace

TEST_CASE("run_trials: produces n_channel x n_error records") {
    ExperimentConfig cfg = small_config();
    const TrialSet set = run_trials(cfg);
    CHECK(set.records.size() == 120);
    CHECK(set.n_channel == 12);
    CHECK(set.n_error == 10);

    SUBCASE("paper-scale count") {
        cfg.n_channel = 100;
        cfg.n_error = 100;
        cfg.threads = 4;
        CHECK(run_trials(cfg).records.size() == 10000);
    }
}

TEST_CASE("run_trials: bit-identical under a fixed seed and across thread counts") {
    ExperimentConfig cfg = small_config();
    const TrialSet once = run_trials(cfg);
    const TrialSet twice = run_trials(cfg);
    CHECK(records_identical(once, twice));

    cfg.threads = 4;
    const TrialSet parallel = run_trials(cfg);
    CHECK(records_identical(once, parallel));
}

TEST_CASE("run_trials: perfect CSIT leaves no error-dependent statistics") {
    ExperimentConfig cfg = small_config();
    cfg.sigma_e2 = {0.0};
    cfg.n_error = 1;
    const TrialSet set = run_trials(cfg);
    for (const TrialStats& rec : set.records) {
        CHECK(arma::norm(rec.c_cross) == 0.0);
        CHECK(arma::norm(rec.c_err) == 0.0);
        CHECK(arma::norm(rec.p_cross, "fro") == 0.0);
        CHECK(arma::norm(rec.p_err, "fro") == 0.0);
        CHECK(arma::norm(rec.p_true - rec.p_hat, "fro") == 0.0);
    }
}

TEST_CASE("run_trials: cached statistics are internally consistent") {
    const TrialSet set = run_trials(small_config());
    for (const TrialStats& rec : set.records)
        for (arma::uword k = 0; k < 3; ++k) {
            double row = 0.0;
            for (arma::uword i = 0; i < 3; ++i) {
                const double rebuilt =
                    rec.p_hat(k, i) + 2.0 * rec.p_cross(k, i) + rec.p_err(k, i);
                CHECK(rel_err(rec.p_true(k, i), rebuilt) < 1e-10);
                row += rec.p_true(k, i);
            }
            CHECK(rel_err(rec.row_true(k), row) < 1e-12);
        }
}

TEST_CASE("run_trials: rejects invalid trial counts") {
    ExperimentConfig cfg = small_config();
    cfg.n_channel = 0;
    CHECK_THROWS_AS(run_trials(cfg), ConfigError);
}

TEST_CASE("stamp_power: per-trial normalization hits the target SNR exactly") {
    ExperimentConfig cfg = small_config();
    const double snr_linear = 100.0; // 20 dB
    TrialSet set = run_trials(cfg);
    for (const TrialStats& rec : set.records) {
        const double snr_back = rec.p_t * rec.trace_true / (6.0 * 3.0 * set.sigma_w2);
        CHECK(rel_err(snr_back, snr_linear) < 1e-12);
    }

    SUBCASE("expected-trace normalization is constant within a realization") {
        set.stamp_power(snr_linear, SnrNorm::ExpectedTrace);
        for (std::size_t r = 0; r < set.n_channel; ++r)
            for (std::size_t e = 1; e < set.n_error; ++e)
                CHECK(set.at(r, e).p_t == set.at(r, 0).p_t);
    }
}

TEST_CASE("evaluate_esr: cached path equals the uncached matrix path") {
    for (PrecoderKind kind : {PrecoderKind::Zf, PrecoderKind::Mf}) {
        ExperimentConfig cfg = small_config();
        cfg.precoder = kind;
        const TrialSet set = run_trials(cfg);
        for (double delta : {0.0, 0.2, 0.5, 0.8, 1.0}) {
            for (EsrScope scope : {EsrScope::MinOfMeans, EsrScope::MeanOfMins}) {
                const double cached = esr_for_delta(set, delta, scope);
                const double direct = uncached_esr(cfg, delta, scope);
                CHECK(rel_err(cached, direct) < 1e-10);
            }
        }
    }
}

TEST_CASE("evaluate_esr: degenerate splits") {
    const TrialSet set = run_trials(small_config());

    SUBCASE("delta = 0: no common rate") {
        const EsrEvaluation eval = evaluate_esr(set, 0.0, EsrScope::MinOfMeans);
        CHECK(eval.min_common_rate == 0.0);
        CHECK(eval.common_means.max() == 0.0);
    }
    SUBCASE("delta = 1: no private rate") {
        const EsrEvaluation eval = evaluate_esr(set, 1.0, EsrScope::MinOfMeans);
        CHECK(eval.private_means.max() == 0.0);
        CHECK(eval.esr == eval.min_common_rate);
    }
    SUBCASE("delta outside [0, 1] rejected") {
        CHECK_THROWS_AS(evaluate_esr(set, -0.1, EsrScope::MinOfMeans), std::invalid_argument);
        CHECK_THROWS_AS(evaluate_esr(set, 1.1, EsrScope::MinOfMeans), std::invalid_argument);
    }
}

TEST_CASE("optimize_delta: grid size, dominance, and tie-breaking") {
    const TrialSet set = run_trials(small_config());

    SUBCASE("step 0.001 evaluates 1001 candidates") {
        const DeltaSearch search = optimize_delta(set, 0.001, EsrScope::MinOfMeans);
        CHECK(search.curve.size() == 1001);
        CHECK(search.curve.front().first == 0.0);
        CHECK(search.curve.back().first == 1.0);
    }
    SUBCASE("optimum dominates delta = 0 and matches a curve scan") {
        const DeltaSearch search = optimize_delta(set, 0.01, EsrScope::MinOfMeans);
        const double esr_opt = esr_for_delta(set, search.delta_opt, EsrScope::MinOfMeans);
        CHECK(esr_opt >= search.curve.front().second);
        double best = -1.0;
        double best_delta = 0.0;
        for (const auto& [d, e] : search.curve)
            if (e > best) {
                best = e;
                best_delta = d;
            }
        CHECK(search.delta_opt == best_delta);
        CHECK(esr_opt == best);
    }
    SUBCASE("parallel grid evaluation is identical") {
        const DeltaSearch serial = optimize_delta(set, 0.01, EsrScope::MinOfMeans, 1);
        const DeltaSearch parallel = optimize_delta(set, 0.01, EsrScope::MinOfMeans, 4);
        CHECK(serial.delta_opt == parallel.delta_opt);
        for (std::size_t j = 0; j < serial.curve.size(); ++j)
            CHECK(serial.curve[j].second == parallel.curve[j].second);
    }
}

TEST_CASE("optimize_delta: perfect CSIT ZF at high SNR needs no rate splitting") {
    // Whether the zero split is exactly optimal under perfect CSIT depends on
    // the drawn geometry (channel-gain disparity can leave a sliver of common
    // rate on the table), so this pins a fixed-seed instance where it is, and
    // bounds the leftover gain on another.
    ExperimentConfig cfg = small_config();
    cfg.sigma_e2 = {0.0};
    cfg.snr_db = {30.0};
    cfg.n_error = 1;
    cfg.seed = 2;
    {
        const TrialSet set = run_trials(cfg);
        const DeltaSearch search = optimize_delta(set, 0.01, EsrScope::MinOfMeans);
        CHECK(search.delta_opt == 0.0);
        for (const auto& [d, e] : search.curve)
            CHECK(e <= search.curve.front().second);
    }
    cfg.seed = 7; // instance with a small interior optimum
    {
        const TrialSet set = run_trials(cfg);
        const DeltaSearch search = optimize_delta(set, 0.01, EsrScope::MinOfMeans);
        const double esr0 = search.curve.front().second;
        const double esr_opt = esr_for_delta(set, search.delta_opt, EsrScope::MinOfMeans);
        CHECK(esr_opt >= esr0);
        CHECK((esr_opt - esr0) / esr0 < 0.03); // perfect CSIT leaves RS nearly useless
    }
}

TEST_CASE("sweep_snr: RS dominates its paired baseline exactly at every point") {
    ExperimentConfig cfg = small_config();
    cfg.snr_db = {0.0, 10.0, 20.0};
    cfg.variants = {parse_variant("rs-cf-zf"), parse_variant("cf-zf")};
    const SweepResult result = sweep_snr(cfg);
    REQUIRE(result.points.size() == 6);
    for (std::size_t p = 0; p < result.points.size(); p += 2) {
        CHECK(result.points[p].variant == "rs-cf-zf");
        CHECK(result.points[p + 1].variant == "cf-zf");
        CHECK(result.points[p].axis_value == result.points[p + 1].axis_value);
        CHECK(result.points[p].esr >= result.points[p + 1].esr); // zero tolerance
        CHECK(result.points[p + 1].delta_opt == 0.0);
    }
}

TEST_CASE("sweep_error_variance: RS dominates at every error level") {
    ExperimentConfig cfg = small_config();
    cfg.snr_db = {20.0};
    cfg.sigma_e2 = {0.0, 0.25, 0.5};
    const SweepResult result = sweep_error_variance(cfg);
    REQUIRE(result.points.size() == 6);
    CHECK(result.axis_name == "sigma_e2");
    for (std::size_t p = 0; p < result.points.size(); p += 2)
        CHECK(result.points[p].esr >= result.points[p + 1].esr);
}

TEST_CASE("sweeps: byte-identical output across runs and thread counts") {
    ExperimentConfig cfg = small_config();
    cfg.snr_db = {10.0, 20.0};
    const std::string once = to_csv(sweep_snr(cfg));
    const std::string twice = to_csv(sweep_snr(cfg));
    CHECK(once == twice);

    cfg.threads = 3;
    CHECK(to_csv(sweep_snr(cfg)) == once);
}

TEST_CASE("variants: trial generation ignores the RS flag and differs only as configured") {
    const ExperimentConfig cfg = small_config();
    const ExperimentConfig rs = variant_trial_config(cfg, parse_variant("rs-cf-zf"));
    const ExperimentConfig plain = variant_trial_config(cfg, parse_variant("cf-zf"));
    CHECK(serialize_config(rs) == serialize_config(plain));

    const ExperimentConfig bs = variant_trial_config(cfg, parse_variant("rs-bs-zf"));
    std::string a = serialize_config(rs);
    std::string b = serialize_config(bs);
    CHECK(a != b);
    // the single differing line is the topology
    a.replace(a.find("topology = cellfree"), 19, "topology = centralbs");
    CHECK(a == b);
}

TEST_CASE("variants: default pairing and name round trip") {
    ExperimentConfig cfg = small_config();
    cfg.rs_enabled = true;
    const auto paired = cfg.effective_variants();
    REQUIRE(paired.size() == 2);
    CHECK(paired[0].rs);
    CHECK(!paired[1].rs);
    CHECK(paired[0].name() == "rs-cf-zf");
    CHECK(paired[1].name() == "cf-zf");

    cfg.rs_enabled = false;
    CHECK(cfg.effective_variants().size() == 1);

    for (const char* name : {"rs-cf-zf", "cf-mf", "rs-bs-mf", "bs-zf"})
        CHECK(parse_variant(name).name() == name);
    CHECK_THROWS_AS(parse_variant("rs-xx-zf"), ConfigError);
}

TEST_CASE("realize_channel: channels are paired across topologies") {
    ExperimentConfig cf_cfg = small_config();
    ExperimentConfig bs_cfg = small_config();
    bs_cfg.topology = Topology::CentralBs;

    const RealizedChannel cf = realize_channel(cf_cfg, 2);
    const RealizedChannel bs = realize_channel(bs_cfg, 2);
    CHECK(arma::all(arma::vectorise(cf.layout.ue_positions == bs.layout.ue_positions)));
    // identical underlying small-scale draws, scaled by each topology's zeta
    const arma::cx_mat raw_cf = cf.g_hat / arma::cx_mat(arma::sqrt((1.0 - 0.25) * cf.fading.zeta),
                                                        arma::zeros<arma::mat>(6, 3));
    const arma::cx_mat raw_bs = bs.g_hat / arma::cx_mat(arma::sqrt((1.0 - 0.25) * bs.fading.zeta),
                                                        arma::zeros<arma::mat>(6, 3));
    CHECK(arma::abs(raw_cf - raw_bs).max() < 1e-12);
}

TEST_CASE("realize_channel: fixed geometry freezes the layout only") {
    ExperimentConfig cfg = small_config();
    cfg.fixed_geometry = true;
    const RealizedChannel a = realize_channel(cfg, 0);
    const RealizedChannel b = realize_channel(cfg, 5);
    CHECK(arma::all(arma::vectorise(a.layout.ap_positions == b.layout.ap_positions)));
    CHECK(arma::all(arma::vectorise(a.layout.ue_positions == b.layout.ue_positions)));
    CHECK(arma::norm(a.fading.zeta - b.fading.zeta, "fro") > 0.0);
}

TEST_CASE("run_trials: ZF resampling is counted and budget exhaustion reported") {
    ExperimentConfig cfg = small_config();
    cfg.n_channel = 30;
    cfg.n_error = 1;

    SUBCASE("modest cap forces some resamples") {
        cfg.zf_cond_cap = 30.0; // cond of the 3x3 Gram matrix is often above this
        const TrialSet set = run_trials(cfg);
        CHECK(set.resampled > 0);
        const TrialSet again = run_trials(cfg);
        CHECK(again.resampled == set.resampled);
    }
    SUBCASE("unreachable cap exhausts the retry budget") {
        cfg.zf_cond_cap = 1.0 + 1e-9;
        cfg.zf_retry_budget = 3;
        CHECK_THROWS_AS(run_trials(cfg), SimulationError);
    }
}

TEST_CASE("sweep_snr: error-variance axis must be scalar") {
    ExperimentConfig cfg = small_config();
    cfg.sigma_e2 = {0.1, 0.2};
    CHECK_THROWS_AS(sweep_snr(cfg), ConfigError);
}
