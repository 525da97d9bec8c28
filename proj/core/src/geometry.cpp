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

#include "rscf/geometry.hpp"

#include <stdexcept>

namespace rscf {

NetworkLayout place_network(std::size_t m, std::size_t k, double area_side,
                            Topology topology, RandomStream& rng) {
    if (m < 1 || k < 1)
        throw std::invalid_argument("place_network: m and k must be >= 1");
    if (!(area_side > 0.0))
        throw std::invalid_argument("place_network: area_side must be positive");

    NetworkLayout layout;
    layout.area_side = area_side;
    layout.topology = topology;
    layout.ap_positions.set_size(m, 2);
    layout.ue_positions.set_size(k, 2);

    for (std::size_t i = 0; i < m; ++i) {
        const double x = area_side * rng.uniform();
        const double y = area_side * rng.uniform();
        layout.ap_positions(i, 0) = x;
        layout.ap_positions(i, 1) = y;
    }
    if (topology == Topology::CentralBs)
        layout.ap_positions.fill(0.5 * area_side);

    for (std::size_t i = 0; i < k; ++i) {
        layout.ue_positions(i, 0) = area_side * rng.uniform();
        layout.ue_positions(i, 1) = area_side * rng.uniform();
    }
    return layout;
}

arma::mat distances(const NetworkLayout& layout) {
    const std::size_t m = layout.num_aps();
    const std::size_t k = layout.num_users();
    arma::mat d(m, k);
    for (std::size_t j = 0; j < k; ++j) {
        const double ux = layout.ue_positions(j, 0);
        const double uy = layout.ue_positions(j, 1);
        for (std::size_t i = 0; i < m; ++i) {
            const double dx = layout.ap_positions(i, 0) - ux;
            const double dy = layout.ap_positions(i, 1) - uy;
            d(i, j) = std::hypot(dx, dy);
        }
    }
    return d;
}

} // namespace rscf
