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

#ifndef INFODEC_MATCHER_H_
#define INFODEC_MATCHER_H_

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "infodec/dem.h"
#include "infodec/sim.h"

namespace infodec {

// Edge weights are quantized to integers so that path sums and blossom duals
// are exact.
constexpr double kWeightScale = 65536.0;
constexpr int64_t kNoPath = std::numeric_limits<int64_t>::max() / 4;
int64_t quantize_weight(double w);

class MatchingError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Blossom matching.

struct WeightedEdge {
    uint32_t u, v;
    int64_t w;
};

// Maximum-weight matching on a general graph (Edmonds' blossom algorithm
// with dual variables, O(n^3)). With max_cardinality the result is a
// maximum-weight matching among the maximum-cardinality ones. Returns
// mate[v] or -1.
std::vector<int> max_weight_matching(uint32_t num_vertices, const std::vector<WeightedEdge> &edges,
                                     bool max_cardinality);

// ---------------------------------------------------------------------------
// Defect metric and matching.

struct DefectMetric {
    std::vector<uint32_t> defects;  // detector ids
    // n x n, row-major; kNoPath where no (or no useful) path is recorded.
    std::vector<int64_t> dist;
    std::vector<uint64_t> mask;  // observable flips along the recorded path
    std::vector<int64_t> boundary_dist;
    std::vector<uint64_t> boundary_mask;

    size_t size() const { return defects.size(); }
    int64_t d(size_t i, size_t j) const { return dist[i * size() + j]; }
    uint64_t m(size_t i, size_t j) const { return mask[i * size() + j]; }
};

// Exact shortest paths between all defects and to the boundary (Dijkstra
// from every defect, ties broken by node id). Throws MatchingError for a
// defect that reaches neither another defect nor the boundary.
DefectMetric all_pairs_defect_metric(const MatchingGraph &g, const std::vector<uint32_t> &defects);

struct MatchResult {
    // (defect, defect) or (defect, boundary id); smaller id first.
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    double weight = 0;
    int64_t weight_units = 0;  // quantized total
    uint64_t observables = 0;
};

// Minimum-weight perfect matching where each defect may instead pair with the
// boundary. Every defect gets a boundary twin; twin pairs mirror the defect
// pairs at zero cost. `boundary_id` labels boundary pairs in the result.
MatchResult mwpm(const DefectMetric &metric, uint32_t boundary_id);

// Shot decoder. Holds the quantized graph and the boundary distance of every
// node; per call, runs bounded Dijkstra per defect, drops pairs that cost at
// least as much as sending both to the boundary, and solves each connected
// cluster with the blossom matcher. Not thread-safe (owns scratch); use one
// per worker.
class Decoder {
   public:
    explicit Decoder(const MatchingGraph &g);
    MatchResult decode(const std::vector<uint32_t> &defects);
    uint64_t predict(const std::vector<uint32_t> &defects) { return decode(defects).observables; }
    const MatchingGraph &graph() const { return g_; }
    int64_t edge_units(size_t e) const { return w_[e]; }

   private:
    struct Arc {
        uint32_t to;
        int64_t w;
        uint64_t obs;
    };
    const MatchingGraph &g_;
    std::vector<int64_t> w_;
    std::vector<uint32_t> off_;  // CSR over detector nodes
    std::vector<Arc> arcs_;
    std::vector<int64_t> bdist_;
    std::vector<uint64_t> bmask_;
    // scratch
    std::vector<int64_t> dist_;
    std::vector<uint64_t> pmask_;
    std::vector<uint32_t> stamp_;
    std::vector<int32_t> slot_;
    std::vector<std::pair<int64_t, uint32_t>> heap_;
    uint32_t epoch_ = 0;
};

// Per-shot predicted observable masks; shots fan out over `workers` threads.
std::vector<uint64_t> decode_batch(const MatchingGraph &g, const ShotBatch &batch, int workers = 1);

// Packed prediction bits (one bit per shot and observable, shot-major,
// LSB first), for replay output.
std::vector<uint8_t> pack_predictions(const std::vector<uint64_t> &pred, size_t num_observables);

}  // namespace infodec

#endif  // INFODEC_MATCHER_H_
