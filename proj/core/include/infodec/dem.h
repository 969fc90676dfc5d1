// Copyright 2025 The infodec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef INFODEC_DEM_H_
#define INFODEC_DEM_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "infodec/circuit.h"
#include "infodec/sim.h"

namespace infodec {

constexpr uint8_t kSectorX = 1;
constexpr uint8_t kSectorZ = 2;

struct Mechanism {
    double p = 0;
    Symptom symptom;
};

struct DetectorErrorModel {
    size_t num_detectors = 0;
    size_t num_observables = 0;
    std::vector<Mechanism> mechanisms;  // sorted by symptom
    // Per detector: kSectorX if some pure X fault flips it, kSectorZ if some
    // pure Z fault does (both bits when the basis gets mixed).
    std::vector<uint8_t> detector_sector;

    // One line per mechanism: `error(q) D<i> ... L<k> ...`.
    std::string to_text() const;
};

// Probability that exactly one of two independent events happens.
double merge_probability(double q1, double q2);

DetectorErrorModel extract_dem(const Circuit &c);

class DecompositionError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct Decomposition {
    size_t source;               // index into the input mechanisms
    std::vector<Symptom> parts;  // each with at most two detectors
};

// Splits every mechanism with more than two detectors into graph-like
// symptoms that already occur in the model. A mechanism touching both the X
// and the Z detector sectors is first cut into its two sector halves (two
// detector ones included). Pairs are tried before
// singletons, likelier components first, and the observable parity must be
// preserved. Throws DecompositionError when no split exists.
std::vector<Decomposition> decompose_graphlike(const DetectorErrorModel &dem);

struct GraphEdge {
    uint32_t a = 0, b = 0;  // b == boundary node for single-detector symptoms
    double q = 0;
    double weight = 0;  // ln((1 - q) / q)
    uint64_t observables = 0;
    std::vector<size_t> provenance;  // mechanism indices
};

struct MatchingGraph {
    size_t num_detectors = 0;
    size_t num_observables = 0;
    std::vector<GraphEdge> edges;
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> adj;  // (neighbor, edge index)
    // Mechanisms that flip an observable and no detector at all.
    std::vector<size_t> undetectable;

    uint32_t boundary() const { return static_cast<uint32_t>(num_detectors); }
    size_t num_nodes() const { return num_detectors + 1; }
    void rebuild_adjacency();
    void remove_edge(size_t index);
};

// Throws std::domain_error when a merged probability reaches 0.5 (the weight
// would not be positive).
MatchingGraph build_matching_graph(const DetectorErrorModel &dem,
                                   const std::vector<Decomposition> &decomposition);
MatchingGraph build_matching_graph(const Circuit &c);

struct CircuitDistance {
    int value = -1;  // -1: no undetectable logical error exists in the graph
    std::vector<size_t> witness_edges;
    std::vector<size_t> witness_mechanisms;
};

// Fewest graph edges forming an undetectable, observable-flipping set:
// boundary-to-boundary walks and closed cycles with odd observable parity.
CircuitDistance circuit_distance(const MatchingGraph &g);

}  // namespace infodec

#endif  // INFODEC_DEM_H_
