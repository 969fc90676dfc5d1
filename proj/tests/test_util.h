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

// Small independent oracles shared by the tests.

#ifndef INFODEC_TESTS_TEST_UTIL_H_
#define INFODEC_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "infodec/builders.h"
#include "infodec/circuit.h"
#include "infodec/dem.h"
#include "infodec/matcher.h"
#include "infodec/sim.h"

namespace testutil {

// Noiseless Pauli frame carried through Clifford gates; resets clear the
// frame of the reset qubits. Measurement flips are counted in `flips`.
struct Frame {
    std::vector<uint8_t> x, z;
    std::vector<uint8_t> flips;
    explicit Frame(uint32_t n) : x(n), z(n) {}

    void apply(const infodec::Instruction &ins) {
        using infodec::Op;
        const auto &t = ins.targets;
        switch (ins.op) {
            case Op::H:
                for (auto q : t) std::swap(x[q], z[q]);
                break;
            case Op::CX:
                for (size_t k = 0; k + 1 < t.size(); k += 2) {
                    x[t[k + 1]] ^= x[t[k]];
                    z[t[k]] ^= z[t[k + 1]];
                }
                break;
            case Op::ResetZ:
            case Op::ResetX:
                for (auto q : t) x[q] = z[q] = 0;
                break;
            case Op::MeasureZ:
                flips.push_back(x[t[0]]);
                break;
            case Op::MeasureX:
                flips.push_back(z[t[0]]);
                break;
            default:
                break;
        }
    }
};

// Whether `v` lies in the GF(2) row span of `rows`.
inline bool in_span(std::vector<std::vector<uint8_t>> rows, std::vector<uint8_t> v) {
    size_t n = v.size(), r = 0;
    for (size_t col = 0; col < n && r < rows.size(); col++) {
        size_t piv = r;
        while (piv < rows.size() && !rows[piv][col]) piv++;
        if (piv == rows.size()) continue;
        std::swap(rows[piv], rows[r]);
        for (size_t k = 0; k < rows.size(); k++) {
            if (k != r && rows[k][col]) {
                for (size_t j = 0; j < n; j++) rows[k][j] ^= rows[r][j];
            }
        }
        r++;
    }
    // Reduce v by the echelon rows.
    for (size_t k = 0; k < r; k++) {
        size_t lead = 0;
        while (!rows[k][lead]) lead++;
        if (v[lead]) {
            for (size_t j = 0; j < n; j++) v[j] ^= rows[k][j];
        }
    }
    for (auto b : v) {
        if (b) return false;
    }
    return true;
}

// Exhaustive minimum over all pairings where any defect may go to the
// boundary instead. kNoPath entries are forbidden.
inline int64_t brute_force_matching(const infodec::DefectMetric &m, std::vector<char> &used) {
    size_t n = m.size(), i = 0;
    while (i < n && used[i]) i++;
    if (i == n) return 0;
    used[i] = 1;
    int64_t best = infodec::kNoPath;
    if (m.boundary_dist[i] < infodec::kNoPath) {
        int64_t r = brute_force_matching(m, used);
        if (r < infodec::kNoPath) best = std::min(best, m.boundary_dist[i] + r);
    }
    for (size_t j = i + 1; j < n; j++) {
        if (used[j] || m.d(i, j) >= infodec::kNoPath) continue;
        used[j] = 1;
        int64_t r = brute_force_matching(m, used);
        if (r < infodec::kNoPath) best = std::min(best, m.d(i, j) + r);
        used[j] = 0;
    }
    used[i] = 0;
    return best;
}

// Chi-square critical value at upper tail `z` sigmas (Wilson-Hilferty).
inline double chi2_critical(size_t dof, double z) {
    double k = static_cast<double>(dof);
    double a = 2.0 / (9.0 * k);
    return k * std::pow(1 - a + z * std::sqrt(a), 3);
}

// Upper-tail standard normal quantile by bisection on erfc.
inline double normal_quantile_upper(double alpha) {
    double lo = 0, hi = 40;
    for (int i = 0; i < 200; i++) {
        double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(mid / std::sqrt(2.0)) > alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Random noisy circuit U . U^-1 on a few qubits: every final measurement is
// deterministic without noise and becomes a detector. One observable covers
// the first two measurements.
inline infodec::Circuit random_mirror_circuit(std::mt19937_64 &rng) {
    using infodec::Op;
    uint32_t n = 3 + rng() % 4;
    infodec::Circuit c(n);
    std::uniform_real_distribution<double> pd(0.005, 0.08);
    std::vector<char> xbasis(n);
    std::vector<uint32_t> rz, rx;
    for (uint32_t q = 0; q < n; q++) {
        xbasis[q] = rng() % 2;
        (xbasis[q] ? rx : rz).push_back(q);
    }
    if (!rz.empty()) c.gate(Op::ResetZ, rz);
    if (!rx.empty()) c.gate(Op::ResetX, rx);
    if (!rz.empty()) c.gate(Op::FlipX, rz, pd(rng));
    if (!rx.empty()) c.gate(Op::FlipZ, rx, pd(rng));
    c.tick();
    struct Layer {
        Op op;
        std::vector<uint32_t> targets;
    };
    std::vector<Layer> layers;
    int depth = 2 + static_cast<int>(rng() % 4);
    for (int k = 0; k < depth; k++) {
        std::vector<uint32_t> perm(n);
        for (uint32_t q = 0; q < n; q++) perm[q] = q;
        std::shuffle(perm.begin(), perm.end(), rng);
        if (rng() % 2) {
            std::vector<uint32_t> t(perm.begin(), perm.begin() + 1 + rng() % n);
            layers.push_back({Op::H, t});
        } else {
            std::vector<uint32_t> t(perm.begin(), perm.begin() + 2 * (1 + rng() % (n / 2)));
            layers.push_back({Op::CX, t});
        }
    }
    auto emit = [&](const Layer &l) {
        c.gate(l.op, l.targets);
        c.gate(l.op == Op::H ? Op::Depolarize1 : Op::Depolarize2, l.targets, pd(rng));
        c.tick();
    };
    for (const auto &l : layers) emit(l);
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) emit(*it);
    std::vector<size_t> meas;
    for (uint32_t q = 0; q < n; q++) {
        c.gate(xbasis[q] ? Op::FlipZ : Op::FlipX, {q}, pd(rng));
        meas.push_back(c.measure(xbasis[q] ? Op::MeasureX : Op::MeasureZ, q));
    }
    for (uint32_t q = 0; q < n; q++) c.detector({meas[q]}, {static_cast<int>(q), 0, 0}, "m");
    c.observable({meas[0], meas[1]}, 0);
    return c;
}

// Single-qubit data error after the plaquette circuit, as "X1", "Z1 Z2 Z3"...
inline std::string run_plaquette(char half, char pauli, int local) {
    infodec::Circuit c = infodec::build_3cx_plaquette(half);
    Frame f(c.num_qubits());
    (pauli == 'X' ? f.x : f.z)[local - 1] = 1;
    for (const auto &ins : c.instructions()) f.apply(ins);
    std::string s;
    for (int q = 0; q < 4; q++) {
        if (!f.x[q] && !f.z[q]) continue;
        if (!s.empty()) s += ' ';
        s += f.x[q] && f.z[q] ? 'Y' : (f.x[q] ? 'X' : 'Z');
        s += char('1' + q);
    }
    return s;
}

// Connected random graph with random weights and observable masks; some
// edges go to the boundary.
inline infodec::MatchingGraph random_graph(std::mt19937_64 &rng, int nodes, int extra_edges, bool unit_heavy) {
    infodec::MatchingGraph g;
    g.num_detectors = nodes;
    g.num_observables = 2;
    std::uniform_real_distribution<double> wd(0.3, 9.0);
    auto add = [&](uint32_t a, uint32_t b) {
        if (a == b) return;
        infodec::GraphEdge e;
        e.a = std::min(a, b);
        e.b = std::max(a, b);
        e.weight = unit_heavy && rng() % 3 == 0 ? 1.0 : wd(rng);
        e.q = 1 / (1 + std::exp(e.weight));
        e.observables = rng() % 4;
        e.provenance = {g.edges.size()};
        g.edges.push_back(e);
    };
    // Spanning path keeps the graph connected, the rest is random.
    for (int v = 1; v < nodes; v++) add(rng() % v, v);
    for (int k = 0; k < extra_edges; k++) add(rng() % nodes, rng() % (nodes + 1));
    g.rebuild_adjacency();
    return g;
}

// Noiseless d x d 3CX memory: a single X (Z) on any data qubit must sit, up
// to stabilizers of the current coloring, one column right (row down) per
// half until it reaches the right (bottom) edge, and stay there.
inline bool pump_and_stick(int d, std::string &why) {
    using namespace infodec;
    ExperimentSpec spec;
    spec.d = d;
    spec.circuit = CircuitKind::ThreeCX;
    spec.scheme = Scheme::Boundary;
    spec.noisy_rounds = 2 * d + 2;
    auto e = build_memory_circuit(spec);
    const auto &L = e.layout.lattice;
    const auto &ins = e.circuit.instructions();
    for (char pauli : {'X', 'Z'}) {
        PauliKind kind = pauli == 'X' ? PauliKind::X : PauliKind::Z;
        for (const auto &q0 : L.data) {
            Frame f(e.layout.num_qubits());
            (pauli == 'X' ? f.x : f.z)[e.layout.data_qubit(q0)] = 1;
            size_t r = e.first_noisy;
            for (size_t k = e.rounds[r].start; k < ins.size() && r + 1 < e.rounds.size(); k++) {
                if (k == e.rounds[r + 1].start) {
                    r++;
                    int steps = static_cast<int>(r - e.first_noisy);
                    Coord want = q0;
                    if (pauli == 'X') want.x = std::min(q0.x + 2 * steps, 2 * (d - 1));
                    if (pauli == 'Z') want.y = std::min(q0.y + 2 * steps, 2 * (d - 1));
                    std::vector<std::vector<uint8_t>> rows;
                    for (const auto &s : L.stabilizers_at(e.rounds[r].phase)) {
                        if (s.kind != kind) continue;
                        std::vector<uint8_t> row(L.data.size());
                        for (const auto &c : s.support) row[L.data_index(c)] = 1;
                        rows.push_back(row);
                    }
                    std::vector<uint8_t> v(L.data.size());
                    for (size_t q = 0; q < L.data.size(); q++) v[q] = (pauli == 'X' ? f.x : f.z)[q];
                    v[L.data_index(want)] ^= 1;
                    if (!in_span(rows, v)) {
                        why = std::string(1, pauli) + " from (" + std::to_string(q0.x) + "," +
                              std::to_string(q0.y) + ") misplaced after " + std::to_string(steps) + " halves";
                        return false;
                    }
                }
                f.apply(ins[k]);
            }
        }
    }
    return true;
}

struct OracleComparison {
    double worst_chi2 = 0;  // largest per-marginal 2x2 statistic
    double critical = 0;    // Bonferroni-corrected critical value
    bool pass() const { return worst_chi2 <= critical; }
};

// Per-detector and observable marginals of the frame sampler against the
// tableau sampler, each a 2x2 chi-square test, Bonferroni over marginals.
inline OracleComparison compare_with_tableau(const infodec::Circuit &c, size_t shots, uint64_t seed,
                                             double alpha) {
    size_t k = c.num_detectors() + c.num_observables();
    std::vector<size_t> frame_hits(k), tab_hits(k);
    auto batch = infodec::frame_sample(c, shots, seed);
    for (size_t s = 0; s < shots; s++) {
        for (size_t i = 0; i < c.num_detectors(); i++) frame_hits[i] += batch.det(s, i);
        for (size_t o = 0; o < c.num_observables(); o++) frame_hits[c.num_detectors() + o] += (batch.obs_mask(s) >> o) & 1;
    }
    infodec::TableauSampler ts(c);
    std::vector<uint8_t> ev, ob;
    for (size_t s = 0; s < shots; s++) {
        ts.sample(seed ^ 0x5bd1e995u, s, ev, ob);
        for (size_t i = 0; i < c.num_detectors(); i++) tab_hits[i] += ev[i];
        for (size_t o = 0; o < c.num_observables(); o++) tab_hits[c.num_detectors() + o] += ob[o];
    }
    OracleComparison r;
    double z = normal_quantile_upper(alpha / (2.0 * static_cast<double>(k)));
    r.critical = z * z;
    double n = static_cast<double>(shots);
    for (size_t i = 0; i < k; i++) {
        double a = static_cast<double>(frame_hits[i]), b = static_cast<double>(tab_hits[i]);
        double pooled = (a + b) / (2 * n);
        if (pooled <= 0 || pooled >= 1) continue;
        double diff = a / n - b / n;
        double chi2 = diff * diff / (pooled * (1 - pooled) * (2 / n));
        r.worst_chi2 = std::max(r.worst_chi2, chi2);
    }
    return r;
}

}  // namespace testutil

#endif  // INFODEC_TESTS_TEST_UTIL_H_
