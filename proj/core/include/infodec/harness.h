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

#ifndef INFODEC_HARNESS_H_
#define INFODEC_HARNESS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "infodec/builders.h"
#include "infodec/dem.h"
#include "infodec/matcher.h"

namespace infodec {

// p_lz + p_lx - p_lz * p_lx
double combine_logical(double p_lz, double p_lx);
// Wilson score interval half-width at one standard deviation.
double wilson_halfwidth(size_t failures, size_t shots);

struct BasisStats {
    size_t shots = 0;
    size_t failures = 0;
};

struct ExperimentStats {
    size_t shots = 0;
    size_t fail_z = 0, fail_x = 0;
    double p_lz = 0, p_lx = 0, p_l = 0;
    double stderr_l = 0;
    double wall_s = 0;
};

// Shots are sampled and decoded in fixed chunks; chunk c uses shot indices
// [c * kChunk, ...) of the stream, so results do not depend on `workers`.
constexpr size_t kChunk = 1024;

BasisStats run_basis(const ExperimentSpec &spec, size_t shots, uint64_t seed, int workers = 1);
// Z memory with seed mix_seed(seed, 0), X memory with mix_seed(seed, 1).
ExperimentStats run_memory(ExperimentSpec spec, size_t shots, uint64_t seed, int workers = 1);

struct BandwidthReport {
    Scheme scheme = Scheme::Areal;
    int d = 0;
    size_t bits_per_round = 0;
    double ratio_vs_areal = 0;  // (d^2 - 1) / bits_per_round
};
// Counts the detectors of one bulk round of the generated circuit. Areal
// is measured on the standard circuit (the full static syndrome).
BandwidthReport bandwidth(const ExperimentSpec &spec);

struct DistanceReport {
    int distance = -1;
    bool pass = false;
    std::vector<std::string> witness;  // one DEM line per witness mechanism
};
// Builds the experiment at 4d rounds unless spec.noisy_rounds says otherwise.
DistanceReport verify_distance(const ExperimentSpec &spec);

struct FaultReport {
    bool pass = true;
    size_t mechanisms = 0;
    size_t singles_checked = 0;
    size_t pairs_checked = 0;  // pairs actually decoded
    size_t pairs_total = 0;    // all unordered pairs
    std::vector<std::string> counterexamples;
};
// Decodes every merged mechanism alone (max_weight >= 1) and every pair
// (max_weight == 2). Pairs whose defects cannot interact in the decoder
// (every cross pair costs at least both boundary distances, no shared
// detector) decode as the XOR of their single results and are only counted.
// `full_pairs` disables that shortcut. `graph` overrides the decoding graph.
FaultReport verify_faults(const ExperimentSpec &spec, int max_weight, bool full_pairs = false,
                          const MatchingGraph *graph = nullptr, size_t max_counterexamples = 10);

// Forced-fault replay: a memory experiment with forced faults (p = 0) is
// decoded with the graph of the same experiment at p_graph without faults.
struct ForcedOutcome {
    std::vector<uint32_t> fired;
    uint64_t actual = 0;
    uint64_t predicted = 0;
    bool logical_error() const { return actual != predicted; }
};
ForcedOutcome run_forced(ExperimentSpec spec, double p_graph = 1e-3);

struct SweepCell {
    CircuitKind circuit = CircuitKind::Standard;
    Scheme scheme = Scheme::Areal;
    int d = 3;
    double p = 1e-3;
};
struct SweepRow {
    SweepCell cell;
    int rounds = 0;
    ExperimentStats stats;
    size_t bits_per_round = 0;
};

extern const char *const kCsvHeader;
std::string csv_row(const SweepRow &row);
// Every cell gets the sub-seed mix_seed(seed, cell index).
std::vector<SweepRow> sweep(const std::vector<SweepCell> &cells, size_t shots, uint64_t seed,
                            int rounds_mult = 20, int workers = 1, bool record_wall_time = true);
void write_csv(std::ostream &out, const std::vector<SweepRow> &rows);
std::vector<SweepRow> read_csv(std::istream &in);

// p at which the d_small and d_large curves of one (circuit, scheme) cross,
// by log-log interpolation between grid points; -1 if they do not cross.
double crossing_point(const std::vector<SweepRow> &rows, CircuitKind circuit, Scheme scheme,
                      int d_small, int d_large);
// Least-squares slope of log p_l versus log p over rows with failures.
double loglog_slope(const std::vector<SweepRow> &rows, CircuitKind circuit, Scheme scheme, int d);

}  // namespace infodec

#endif  // INFODEC_HARNESS_H_
