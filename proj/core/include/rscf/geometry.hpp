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

#include "rscf/rng.hpp"

namespace rscf {

/// Transmitter layout: geographically distributed single-antenna access
/// points (CellFree) or one colocated multi-antenna base station (CentralBs).
enum class Topology { CellFree, CentralBs };

struct NetworkLayout {
    arma::mat ap_positions; // M x 2, meters
    arma::mat ue_positions; // K x 2, meters
    double area_side = 0.0; // meters
    double h_ap = 0.0;      // AP antenna height above ground, meters
    double h_u = 0.0;       // UE antenna height above ground, meters
    Topology topology = Topology::CellFree;

    std::size_t num_aps() const { return ap_positions.n_rows; }
    std::size_t num_users() const { return ue_positions.n_rows; }
};

/// Draws a random layout over the [0, area_side]^2 square. CellFree places
/// APs i.i.d. uniform; CentralBs colocates all M antennas at the area center.
/// AP coordinates are drawn from the stream in both topologies (and discarded
/// for CentralBs) so that UE placements stay paired across topologies under a
/// shared seed.
NetworkLayout place_network(std::size_t m, std::size_t k, double area_side,
                            Topology topology, RandomStream& rng);

/// M x K horizontal AP-to-UE distances. Antenna heights are not folded in;
/// they enter the link budget only through the attenuation constant.
arma::mat distances(const NetworkLayout& layout);

} // namespace rscf
