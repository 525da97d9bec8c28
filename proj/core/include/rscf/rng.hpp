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

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace rscf {

/// SplitMix64 scrambling step. Used to derive independent stream seeds from
/// (seed, trial indices, purpose tag) so that every Monte Carlo substream is a
/// pure function of its coordinates, never of execution order.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
    return splitmix64(a ^ splitmix64(b));
}

/// Deterministic random stream. The engine (std::mt19937_64) and all variate
/// transforms below are fully specified, so a stream's output depends only on
/// its seed, not on the standard library build or the thread that consumes it.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; the spare variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log1p(-u1)); // log(1-u1), u1 < 1
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Circularly symmetric complex Gaussian with E[|z|^2] = variance.
    /// variance = 0 yields exactly zero while still consuming two normals,
    /// which keeps draw sequences aligned across error-variance sweep points.
    std::complex<double> complex_normal(double variance) {
        const double scale = std::sqrt(0.5 * variance);
        const double re = normal();
        const double im = normal();
        return {scale * re, scale * im};
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives the stream for one labeled substream of one trial. `realization`
/// and `draw` are the Monte Carlo coordinates; `tag` names the purpose
/// ("geometry", "shadow", "ghat", "gerr", ...).
inline RandomStream derive_stream(std::uint64_t seed, std::uint64_t realization,
                                  std::uint64_t draw, std::string_view tag) {
    std::uint64_t s = mix64(seed, fnv1a64(tag));
    s = mix64(s, realization);
    s = mix64(s, draw);
    return RandomStream(s);
}

} // namespace rscf
