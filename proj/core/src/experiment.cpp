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

#include "rscf/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <thread>

#include "rscf/errors.hpp"
#include "rscf/rng.hpp"

namespace rscf {

namespace {

constexpr double kInvLn2 = 1.0 / std::numbers::ln2;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Runs fn(0..n-1) on up to `threads` workers. Each index owns its output
// slot, so the schedule cannot influence results.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t count = std::min(threads, n);
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

// Mirrors rates::finish: non-positive impairment decompositions are floored
// and counted.
double guarded_gamma(double numerator, double denominator, double sigma_w2,
                     std::uint64_t& guard_count) {
    const double floor = kDenominatorGuard * sigma_w2;
    if (denominator < floor) {
        denominator = floor;
        ++guard_count;
    }
    return numerator / denominator;
}

std::vector<double> delta_grid(double grid_step) {
    if (!(grid_step > 0.0) || grid_step > 1.0)
        throw std::invalid_argument("optimize_delta: grid step must lie in (0, 1]");
    std::vector<double> grid;
    const auto n = static_cast<long long>(std::llround(1.0 / grid_step));
    if (n >= 1 && std::abs(static_cast<double>(n) * grid_step - 1.0) <= 1e-9) {
        grid.reserve(static_cast<std::size_t>(n) + 1);
        for (long long j = 0; j <= n; ++j)
            grid.push_back(static_cast<double>(j) / static_cast<double>(n));
    } else {
        for (double d = 0.0; d < 1.0; d += grid_step)
            grid.push_back(d);
        grid.push_back(1.0);
    }
    return grid;
}

} // namespace

std::string Variant::name() const {
    std::string n = rs ? "rs-" : "";
    n += topology == Topology::CellFree ? "cf" : "bs";
    n += precoder == PrecoderKind::Mf ? "-mf" : "-zf";
    return n;
}

Variant parse_variant(const std::string& name) {
    Variant v;
    std::string rest = name;
    v.rs = rest.rfind("rs-", 0) == 0;
    if (v.rs)
        rest = rest.substr(3);
    const auto dash = rest.find('-');
    if (dash == std::string::npos)
        throw ConfigError("variants: '" + name + "' is not of the form [rs-](cf|bs)-(mf|zf)");
    const std::string topo = rest.substr(0, dash);
    const std::string prec = rest.substr(dash + 1);
    if (topo == "cf")
        v.topology = Topology::CellFree;
    else if (topo == "bs")
        v.topology = Topology::CentralBs;
    else
        throw ConfigError("variants: unknown topology '" + topo + "' in '" + name + "'");
    if (prec == "mf")
        v.precoder = PrecoderKind::Mf;
    else if (prec == "zf")
        v.precoder = PrecoderKind::Zf;
    else
        throw ConfigError("variants: unknown precoder '" + prec + "' in '" + name + "'");
    return v;
}

std::vector<Variant> ExperimentConfig::effective_variants() const {
    if (!variants.empty())
        return variants;
    Variant base{topology, precoder, false};
    if (!rs_enabled)
        return {base};
    Variant with_rs{topology, precoder, true};
    return {with_rs, base};
}

double ExperimentConfig::single_sigma_e2() const {
    if (sigma_e2.size() != 1)
        throw ConfigError("sigma_e2: this command requires a single value, got a sweep list");
    return sigma_e2.front();
}

double ExperimentConfig::single_snr_db() const {
    if (snr_db.size() != 1)
        throw ConfigError("snr_db: this command requires a single value, got a sweep list");
    return snr_db.front();
}

void TrialSet::stamp_power(double snr_linear, SnrNorm norm) {
    const double scale = snr_linear * static_cast<double>(num_aps) *
                         static_cast<double>(num_users) * sigma_w2;
    for (TrialStats& rec : records) {
        const double trace = norm == SnrNorm::PerRealization ? rec.trace_true : rec.sum_zeta;
        if (!(trace > 0.0))
            throw SimulationError("stamp_power: zero channel trace");
        rec.p_t = scale / trace;
    }
}

RealizedChannel realize_channel(const ExperimentConfig& cfg, std::uint64_t realization) {
    const double sigma_e2 = cfg.single_sigma_e2();
    const double l_db = attenuation_constant(cfg.physical.freq_mhz, cfg.physical.h_ap_m,
                                             cfg.physical.h_u_m);

    const std::uint64_t geo_index = cfg.fixed_geometry ? 0 : realization;
    RandomStream geo_rng = derive_stream(cfg.seed, geo_index, 0, "geometry");

    RealizedChannel rc;
    rc.layout = place_network(cfg.m, cfg.k, cfg.area_side, cfg.topology, geo_rng);
    rc.layout.h_ap = cfg.physical.h_ap_m;
    rc.layout.h_u = cfg.physical.h_u_m;
    const arma::mat dist = distances(rc.layout);

    for (std::uint64_t attempt = 0;; ++attempt) {
        RandomStream shadow_rng = derive_stream(cfg.seed, realization, attempt, "shadow");
        RandomStream ghat_rng = derive_stream(cfg.seed, realization, attempt, "ghat");
        rc.fading = large_scale_coefficients(dist, l_db, cfg.physical.sigma_shadow_db,
                                             cfg.physical.d0_m, cfg.physical.d1_m,
                                             cfg.topology, shadow_rng);
        rc.g_hat = sample_estimate(rc.fading.zeta, sigma_e2, ghat_rng);
        try {
            rc.precoders = cfg.precoder == PrecoderKind::Mf
                               ? mf_precoder(rc.g_hat)
                               : zf_precoder(rc.g_hat, cfg.zf_cond_cap);
            rc.resample_attempts = attempt;
            return rc;
        } catch (const SingularChannelError&) {
            if (attempt >= cfg.zf_retry_budget)
                throw SimulationError(
                    "run_trials: realization " + std::to_string(realization) + " exhausted " +
                    std::to_string(cfg.zf_retry_budget) +
                    " fading resamples without a well-conditioned channel (cond cap " +
                    std::to_string(cfg.zf_cond_cap) + ")");
        }
    }
}

arma::cx_mat realize_error(const ExperimentConfig& cfg, const LargeScaleFading& fading,
                           std::uint64_t realization, std::uint64_t error_draw) {
    RandomStream rng = derive_stream(cfg.seed, realization, error_draw, "gerr");
    return sample_error(fading.zeta, cfg.single_sigma_e2(), rng);
}

namespace {

TrialStats build_record(const RealizedChannel& rc, const arma::cx_mat& g_err, double sum_zeta) {
    const arma::uword users = rc.g_hat.n_cols;
    TrialStats rec;

    const arma::cx_vec common_hat = rc.g_hat.st() * rc.precoders.p_common;
    const arma::cx_vec common_err = g_err.st() * rc.precoders.p_common;
    const arma::cx_mat private_hat = rc.g_hat.st() * rc.precoders.p_private;
    const arma::cx_mat private_err = g_err.st() * rc.precoders.p_private;

    rec.c_hat.set_size(users);
    rec.c_cross.set_size(users);
    rec.c_err.set_size(users);
    rec.p_hat.set_size(users, users);
    rec.p_cross.set_size(users, users);
    rec.p_err.set_size(users, users);
    rec.p_true.set_size(users, users);
    rec.row_true.set_size(users);

    for (arma::uword k = 0; k < users; ++k) {
        rec.c_hat(k) = std::norm(common_hat(k));
        rec.c_cross(k) = std::real(std::conj(common_hat(k)) * common_err(k));
        rec.c_err(k) = std::norm(common_err(k));
        double row_sum = 0.0;
        for (arma::uword i = 0; i < users; ++i) {
            const std::complex<double> h = private_hat(k, i);
            const std::complex<double> t = private_err(k, i);
            rec.p_hat(k, i) = std::norm(h);
            rec.p_cross(k, i) = std::real(std::conj(h) * t);
            rec.p_err(k, i) = std::norm(t);
            rec.p_true(k, i) = std::norm(h + t);
            row_sum += rec.p_true(k, i);
        }
        rec.row_true(k) = row_sum;
    }

    rec.trace_true = std::pow(arma::norm(rc.g_hat + g_err, "fro"), 2);
    rec.sum_zeta = sum_zeta;
    return rec;
}

} // namespace

TrialSet run_trials(const ExperimentConfig& cfg) {
    if (cfg.n_channel < 1 || cfg.n_error < 1)
        throw ConfigError("n_channel/n_error: must be >= 1");
    const double snr_linear = db_to_linear(cfg.single_snr_db());

    TrialSet set;
    set.n_channel = cfg.n_channel;
    set.n_error = cfg.n_error;
    set.num_aps = cfg.m;
    set.num_users = cfg.k;
    set.sigma_w2 = noise_variance(cfg.physical.noise_temp_k, cfg.physical.boltzmann_jk,
                                  cfg.physical.bandwidth_hz, cfg.physical.noise_figure_db);
    set.records.resize(cfg.n_channel * cfg.n_error);

    std::vector<std::uint64_t> attempts(cfg.n_channel, 0);
    std::vector<std::uint8_t> ties(cfg.n_channel, 0);

    parallel_for(cfg.n_channel, cfg.threads, [&](std::size_t r) {
        const RealizedChannel rc = realize_channel(cfg, r);
        attempts[r] = rc.resample_attempts;
        ties[r] = rc.precoders.svd.psi1_degenerate ? 1 : 0;
        const double sum_zeta = arma::accu(rc.fading.zeta);
        for (std::size_t e = 0; e < cfg.n_error; ++e) {
            const arma::cx_mat g_err = realize_error(cfg, rc.fading, r, e);
            set.records[r * cfg.n_error + e] = build_record(rc, g_err, sum_zeta);
        }
    });

    for (std::size_t r = 0; r < cfg.n_channel; ++r) {
        set.resampled += attempts[r];
        set.psi1_ties += ties[r];
    }
    set.stamp_power(snr_linear, cfg.snr_norm);
    return set;
}

EsrEvaluation evaluate_esr(const TrialSet& set, double delta, EsrScope scope) {
    if (set.records.empty())
        throw std::invalid_argument("evaluate_esr: empty trial set");
    if (delta < 0.0 || delta > 1.0)
        throw std::invalid_argument("evaluate_esr: delta must lie in [0, 1]");

    const std::size_t users = set.num_users;
    const double sigma_w2 = set.sigma_w2;
    const double inv_err = 1.0 / static_cast<double>(set.n_error);

    arma::vec sum_common(users, arma::fill::zeros);
    arma::vec sum_private(users, arma::fill::zeros);
    arma::vec acc_common(users);
    arma::vec acc_private(users);
    double sum_min_common = 0.0;
    std::uint64_t guarded = 0;

    for (std::size_t r = 0; r < set.n_channel; ++r) {
        acc_common.zeros();
        acc_private.zeros();
        for (std::size_t e = 0; e < set.n_error; ++e) {
            const TrialStats& rec = set.records[r * set.n_error + e];
            const double ac2 = delta * rec.p_t;
            const double ap2 = (1.0 - delta) * rec.p_t / static_cast<double>(users);
            for (std::size_t k = 0; k < users; ++k) {
                const double interf_all = ap2 * rec.row_true(k);
                const double denom_c =
                    ac2 * (2.0 * rec.c_cross(k) + rec.c_err(k)) + interf_all + sigma_w2;
                const double gamma_c = guarded_gamma(ac2 * rec.c_hat(k), denom_c, sigma_w2, guarded);

                const double denom_p =
                    ap2 * (2.0 * rec.p_cross(k, k) + rec.p_err(k, k)) +
                    (interf_all - ap2 * rec.p_true(k, k)) + sigma_w2;
                const double gamma_p =
                    guarded_gamma(ap2 * rec.p_hat(k, k), denom_p, sigma_w2, guarded);

                acc_common(k) += std::log1p(gamma_c) * kInvLn2;
                acc_private(k) += std::log1p(gamma_p) * kInvLn2;
            }
        }
        acc_common *= inv_err;
        acc_private *= inv_err;
        sum_common += acc_common;
        sum_private += acc_private;
        sum_min_common += acc_common.min();
    }

    const double inv_ch = 1.0 / static_cast<double>(set.n_channel);
    EsrEvaluation eval;
    eval.common_means = sum_common * inv_ch;
    eval.private_means = sum_private * inv_ch;
    eval.argmin_user = eval.common_means.index_min();
    eval.min_common_rate = scope == EsrScope::MinOfMeans ? eval.common_means(eval.argmin_user)
                                                         : sum_min_common * inv_ch;
    eval.esr = eval.min_common_rate + arma::accu(eval.private_means);
    eval.guarded = guarded;
    return eval;
}

double esr_for_delta(const TrialSet& set, double delta, EsrScope scope) {
    return evaluate_esr(set, delta, scope).esr;
}

DeltaSearch optimize_delta(const TrialSet& set, double grid_step, EsrScope scope,
                           std::size_t threads) {
    const std::vector<double> grid = delta_grid(grid_step);

    DeltaSearch search;
    search.curve.resize(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t j) {
        search.curve[j] = {grid[j], esr_for_delta(set, grid[j], scope)};
    });

    double best = -1.0;
    for (const auto& [delta, esr] : search.curve) {
        if (esr > best) { // strict: ties resolve to the smallest delta
            best = esr;
            search.delta_opt = delta;
        }
    }
    return search;
}

ExperimentConfig variant_trial_config(const ExperimentConfig& cfg, const Variant& variant) {
    ExperimentConfig point = cfg;
    point.topology = variant.topology;
    point.precoder = variant.precoder;
    point.rs_enabled = true; // trial generation is identical for RS and non-RS
    point.variants.clear();
    return point;
}

namespace {

struct TrialGroup {
    Variant key; // rs flag ignored
    TrialSet set;
};

// One trial set per (topology, precoder); RS and non-RS variants share it.
std::vector<std::size_t> group_variants(const std::vector<Variant>& variants,
                                        std::vector<Variant>& groups) {
    std::vector<std::size_t> index(variants.size());
    for (std::size_t i = 0; i < variants.size(); ++i) {
        const Variant& v = variants[i];
        std::size_t g = groups.size();
        for (std::size_t j = 0; j < groups.size(); ++j)
            if (groups[j].topology == v.topology && groups[j].precoder == v.precoder) {
                g = j;
                break;
            }
        if (g == groups.size())
            groups.push_back(Variant{v.topology, v.precoder, false});
        index[i] = g;
    }
    return index;
}

SweepPoint evaluate_variant_point(const TrialSet& set, const ExperimentConfig& cfg,
                                  const Variant& variant, double axis_value) {
    SweepPoint point;
    point.axis_value = axis_value;
    point.variant = variant.name();
    point.resampled_count = set.resampled;
    point.psi1_tie_count = set.psi1_ties;

    double delta = 0.0;
    if (variant.rs) {
        const DeltaSearch search = optimize_delta(set, cfg.delta_grid_step, cfg.esr_scope,
                                                  cfg.threads);
        delta = search.delta_opt;
    }
    const EsrEvaluation eval = evaluate_esr(set, delta, cfg.esr_scope);
    point.esr = eval.esr;
    point.min_common_rate = eval.min_common_rate;
    point.delta_opt = delta;
    point.mean_private_rates = eval.private_means;
    point.guarded_sinr_count = eval.guarded;
    return point;
}

} // namespace

SweepResult sweep_snr(const ExperimentConfig& cfg) {
    if (cfg.snr_db.empty())
        throw ConfigError("snr_db: sweep requires at least one point");
    cfg.single_sigma_e2(); // the error-variance axis must be pinned

    const std::vector<Variant> variants = cfg.effective_variants();
    std::vector<Variant> groups;
    const std::vector<std::size_t> group_of = group_variants(variants, groups);

    // One trial generation per group serves every SNR point: only the power
    // stamp changes along this axis.
    std::vector<TrialSet> sets;
    sets.reserve(groups.size());
    for (const Variant& g : groups) {
        ExperimentConfig point_cfg = variant_trial_config(cfg, g);
        point_cfg.snr_db = {cfg.snr_db.front()};
        sets.push_back(run_trials(point_cfg));
    }

    SweepResult result;
    result.axis_name = "snr_db";
    result.seed = cfg.seed;
    result.n_channel = cfg.n_channel;
    result.n_error = cfg.n_error;
    result.scope = cfg.esr_scope;

    for (double snr : cfg.snr_db) {
        for (TrialSet& set : sets)
            set.stamp_power(db_to_linear(snr), cfg.snr_norm);
        for (std::size_t i = 0; i < variants.size(); ++i)
            result.points.push_back(
                evaluate_variant_point(sets[group_of[i]], cfg, variants[i], snr));
    }
    return result;
}

SweepResult sweep_error_variance(const ExperimentConfig& cfg) {
    if (cfg.sigma_e2.empty())
        throw ConfigError("sigma_e2: sweep requires at least one point");
    const double snr = cfg.single_snr_db();

    const std::vector<Variant> variants = cfg.effective_variants();
    std::vector<Variant> groups;
    const std::vector<std::size_t> group_of = group_variants(variants, groups);

    SweepResult result;
    result.axis_name = "sigma_e2";
    result.seed = cfg.seed;
    result.n_channel = cfg.n_channel;
    result.n_error = cfg.n_error;
    result.scope = cfg.esr_scope;

    for (double sigma : cfg.sigma_e2) {
        std::vector<TrialSet> sets;
        sets.reserve(groups.size());
        for (const Variant& g : groups) {
            ExperimentConfig point_cfg = variant_trial_config(cfg, g);
            point_cfg.sigma_e2 = {sigma};
            point_cfg.snr_db = {snr};
            sets.push_back(run_trials(point_cfg));
        }
        for (std::size_t i = 0; i < variants.size(); ++i)
            result.points.push_back(
                evaluate_variant_point(sets[group_of[i]], cfg, variants[i], sigma));
    }
    return result;
}

} // namespace rscf
