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

#include "infodec/builders.h"

#include <algorithm>
#include <bit>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>

#include "infodec/sim.h"

namespace infodec {

std::string to_string(CircuitKind k) { return k == CircuitKind::Standard ? "standard" : "3cx"; }

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::Areal: return "areal";
        case Scheme::RowColumn: return "rowcolumn";
        case Scheme::Boundary: return "boundary";
    }
    return "?";
}

std::string to_string(Basis b) { return b == Basis::Z ? "Z" : "X"; }

CircuitKind parse_circuit_kind(const std::string &s) {
    if (s == "standard") return CircuitKind::Standard;
    if (s == "3cx") return CircuitKind::ThreeCX;
    throw std::invalid_argument("unknown circuit '" + s + "' (expected standard or 3cx)");
}

Scheme parse_scheme(const std::string &s) {
    if (s == "areal") return Scheme::Areal;
    if (s == "rowcolumn") return Scheme::RowColumn;
    if (s == "boundary") return Scheme::Boundary;
    throw std::invalid_argument("unknown scheme '" + s + "' (expected areal, rowcolumn or boundary)");
}

Basis parse_basis(const std::string &s) {
    if (s == "Z" || s == "z") return Basis::Z;
    if (s == "X" || s == "x") return Basis::X;
    throw std::invalid_argument("unknown basis '" + s + "' (expected Z or X)");
}

void ExperimentSpec::validate() const {
    if (d < 3 || d % 2 == 0) throw std::invalid_argument("d must be odd and >= 3");
    if (scheme == Scheme::Boundary && circuit != CircuitKind::ThreeCX) {
        throw std::invalid_argument("the boundary scheme requires the 3cx circuit");
    }
    if (scheme == Scheme::RowColumn && circuit != CircuitKind::Standard) {
        throw std::invalid_argument("the rowcolumn scheme requires the standard circuit");
    }
    if (noisy_rounds < 1) throw std::invalid_argument("noisy_rounds must be >= 1");
    if (!(p >= 0 && p < 1)) throw std::invalid_argument("p must lie in [0, 1)");
    if (flush_rounds < -1) throw std::invalid_argument("flush_rounds must be >= 0");
    if (tail_rounds < -1 || tail_rounds == 0) throw std::invalid_argument("tail_rounds must be >= 1");
    for (const auto &f : forced) {
        if (f.round < 0 || f.round >= noisy_rounds) throw std::invalid_argument("forced fault round out of range");
        if (f.pauli != 'X' && f.pauli != 'Y' && f.pauli != 'Z') {
            throw std::invalid_argument("forced fault pauli must be X, Y or Z");
        }
        if (f.data.x < 0 || f.data.y < 0 || f.data.x > 2 * (d - 1) || f.data.y > 2 * (d - 1) ||
            f.data.x % 2 || f.data.y % 2) {
            throw std::invalid_argument("forced fault is not on a data qubit");
        }
    }
}

int ExperimentSpec::effective_flush() const {
    if (flush_rounds >= 0) return flush_rounds;
    if (scheme == Scheme::Boundary) return d;
    // Edge half-plaquettes are measured on alternate halves, so the 3CX
    // baseline needs one full A+B cycle.
    return circuit == CircuitKind::ThreeCX ? 1 : 0;
}

int ExperimentSpec::effective_tail() const {
    if (tail_rounds >= 1) return tail_rounds;
    // Bulk errors of the last noisy rounds only become visible to the
    // boundary detectors once pumped to the edge.
    return scheme == Scheme::Boundary ? d : 1;
}

const SiteMeasurement *RoundRecord::find(Coord site) const {
    for (const auto &m : meas) {
        if (m.site == site) return &m;
    }
    return nullptr;
}

uint32_t Layout::ancilla_qubit(Coord site) const {
    auto it = std::lower_bound(lattice.sites.begin(), lattice.sites.end(), site,
                               [](Coord a, Coord b) { return std::pair(a.y, a.x) < std::pair(b.y, b.x); });
    if (it == lattice.sites.end() || !(*it == site)) throw std::out_of_range("not an ancilla site");
    return static_cast<uint32_t>(lattice.data.size() + (it - lattice.sites.begin()));
}

std::array<ThreeCxStep, 4> three_cx_schedule(char half) {
    if (half == 'A') return {{{1, true}, {2, true}, {3, false}, {1, false}}};
    if (half == 'B') return {{{1, false}, {3, false}, {2, true}, {1, true}}};
    throw std::invalid_argument("half must be 'A' or 'B'");
}

namespace {

struct Prepared {
    uint32_t anc;
    Coord site;
    PauliKind kind;  // measurement basis
};

void reset_layer(Circuit &c, const std::vector<std::pair<uint32_t, PauliKind>> &resets, double p) {
    std::vector<uint32_t> rz, rx;
    for (auto [q, k] : resets) (k == PauliKind::Z ? rz : rx).push_back(q);
    if (!rz.empty()) c.gate(Op::ResetZ, rz);
    if (!rx.empty()) c.gate(Op::ResetX, rx);
    if (p > 0 && !rz.empty()) c.gate(Op::FlipX, rz, p);
    if (p > 0 && !rx.empty()) c.gate(Op::FlipZ, rx, p);
    c.tick();
}

void cx_layer(Circuit &c, const std::vector<uint32_t> &pairs, double p) {
    if (pairs.empty()) return;
    c.gate(Op::CX, pairs);
    if (p > 0) c.gate(Op::Depolarize2, pairs, p);
    c.tick();
}

void measure_layer(Circuit &c, const std::vector<Prepared> &anc, double p, RoundRecord &rec) {
    for (const auto &a : anc) {
        size_t m = c.measure(a.kind == PauliKind::Z ? Op::MeasureZ : Op::MeasureX, a.anc, p);
        rec.meas.push_back({a.site, a.kind, m});
    }
    c.tick();
}

}  // namespace

RoundRecord build_standard_round(Circuit &c, const Layout &lay, const NoiseModel &noise, bool noisy) {
    double p = noisy ? noise.p : 0;
    RoundRecord rec;
    rec.noisy = noisy;
    const auto &L = lay.lattice;
    std::vector<std::pair<uint32_t, PauliKind>> resets;
    std::vector<Prepared> anc;
    for (const auto &s : L.stabilizers) {
        uint32_t q = lay.ancilla_qubit(s.ancilla);
        resets.push_back({q, s.kind == PauliKind::X ? PauliKind::X : PauliKind::Z});
        anc.push_back({q, s.ancilla, s.kind});
    }
    reset_layer(c, resets, p);
    // X: 1,2,3,4 (hook along rows); Z: 1,3,2,4 (hook along columns).
    static const int kOrderX[4] = {1, 2, 3, 4};
    static const int kOrderZ[4] = {1, 3, 2, 4};
    for (int layer = 0; layer < 4; layer++) {
        std::vector<uint32_t> pairs;
        for (const auto &s : L.stabilizers) {
            bool is_x = s.kind == PauliKind::X;
            Coord dq = corner_of(s.ancilla, is_x ? kOrderX[layer] : kOrderZ[layer]);
            if (!L.is_data(dq)) continue;
            uint32_t a = lay.ancilla_qubit(s.ancilla), q = lay.data_qubit(dq);
            if (is_x) {
                pairs.insert(pairs.end(), {a, q});
            } else {
                pairs.insert(pairs.end(), {q, a});
            }
        }
        cx_layer(c, pairs, p);
    }
    measure_layer(c, anc, p, rec);
    return rec;
}

RoundRecord build_3cx_halfround(Circuit &c, const Layout &lay, int phase, const NoiseModel &noise,
                                bool noisy) {
    double p = noisy ? noise.p : 0;
    RoundRecord rec;
    rec.phase = phase;
    rec.noisy = noisy;
    const auto &L = lay.lattice;
    std::vector<Coord> bulk;
    for (const auto &a : L.sites) {
        if (L.edge_of(a) == Edge::Bulk) bulk.push_back(a);
    }
    // Left and top half-plaquettes of the next coloring come out fresh (their
    // value is set inside this half round), so only right/bottom ones are read.
    std::vector<Stabilizer> edge;
    for (auto &s : L.stabilizers_at(phase + 1)) {
        auto e = L.edge_of(s.ancilla);
        if (e == Edge::Right || e == Edge::Bottom) edge.push_back(std::move(s));
    }
    std::vector<std::pair<uint32_t, PauliKind>> resets;
    std::vector<Prepared> anc;
    for (const auto &a : bulk) {
        bool is_a = L.kind_at(a, phase) == PauliKind::X;
        uint32_t q = lay.ancilla_qubit(a);
        resets.push_back({q, is_a ? PauliKind::X : PauliKind::Z});
        anc.push_back({q, a, is_a ? PauliKind::Z : PauliKind::X});
    }
    for (const auto &s : edge) {
        uint32_t q = lay.ancilla_qubit(s.ancilla);
        resets.push_back({q, s.kind});
        anc.push_back({q, s.ancilla, s.kind});
    }
    reset_layer(c, resets, p);
    for (int layer = 0; layer < 4; layer++) {
        std::vector<uint32_t> pairs;
        for (const auto &a : bulk) {
            auto step = three_cx_schedule(L.kind_at(a, phase) == PauliKind::X ? 'A' : 'B')[layer];
            uint32_t aq = lay.ancilla_qubit(a), dq = lay.data_qubit(corner_of(a, step.corner));
            if (step.ancilla_controls) {
                pairs.insert(pairs.end(), {aq, dq});
            } else {
                pairs.insert(pairs.end(), {dq, aq});
            }
        }
        cx_layer(c, pairs, p);
    }
    // Right/bottom half-plaquettes of the next coloring, one support qubit per layer.
    for (int layer = 0; layer < 2; layer++) {
        std::vector<uint32_t> pairs;
        for (const auto &s : edge) {
            uint32_t aq = lay.ancilla_qubit(s.ancilla), dq = lay.data_qubit(s.support[layer]);
            if (s.kind == PauliKind::X) {
                pairs.insert(pairs.end(), {aq, dq});
            } else {
                pairs.insert(pairs.end(), {dq, aq});
            }
        }
        cx_layer(c, pairs, p);
    }
    measure_layer(c, anc, p, rec);
    return rec;
}

Circuit build_3cx_plaquette(char half) {
    Circuit c(5);
    bool is_a = half == 'A';
    auto sched = three_cx_schedule(half);
    c.gate(is_a ? Op::ResetX : Op::ResetZ, {4});
    c.tick();
    for (const auto &st : sched) {
        uint32_t dq = static_cast<uint32_t>(st.corner - 1);
        if (st.ancilla_controls) {
            c.gate(Op::CX, {4, dq});
        } else {
            c.gate(Op::CX, {dq, 4});
        }
        c.tick();
    }
    c.measure(is_a ? Op::MeasureZ : Op::MeasureX, 4);
    return c;
}

MemoryExperiment build_memory_circuit(const ExperimentSpec &spec) {
    spec.validate();
    MemoryExperiment exp(spec);
    const auto &lay = exp.layout;
    const auto &L = lay.lattice;
    Circuit &c = exp.circuit;
    c.set_num_qubits(lay.num_qubits());
    NoiseModel noise{spec.p};
    bool three = spec.circuit == CircuitKind::ThreeCX;

    std::vector<uint32_t> data;
    for (const auto &q : L.data) data.push_back(lay.data_qubit(q));
    c.gate(spec.basis == Basis::Z ? Op::ResetZ : Op::ResetX, data);
    c.tick();

    int flush = spec.effective_flush();
    int total = flush + 1 + spec.noisy_rounds + spec.effective_tail();
    exp.first_noisy = flush + 1;
    for (int r = 0; r < total; r++) {
        size_t start = c.instructions().size();
        bool noisy = r >= exp.first_noisy && r < exp.first_noisy + spec.noisy_rounds;
        if (noisy) {
            for (const auto &f : spec.forced) {
                if (f.round != r - exp.first_noisy) continue;
                uint32_t q = lay.data_qubit(f.data);
                if (f.pauli != 'Z') c.gate(Op::FlipX, {q}, 1.0);
                if (f.pauli != 'X') c.gate(Op::FlipZ, {q}, 1.0);
            }
        }
        if (three) {
            exp.rounds.push_back(build_3cx_halfround(c, lay, r, noise, noisy));
        } else {
            exp.rounds.push_back(build_standard_round(c, lay, noise, noisy));
        }
        exp.rounds.back().start = start;
    }
    exp.final_phase = three ? total : 0;

    exp.data_meas_start = c.instructions().size();
    Op m = spec.basis == Basis::Z ? Op::MeasureZ : Op::MeasureX;
    for (auto q : data) exp.data_meas.push_back(c.measure(m, q));
    return exp;
}

namespace {

// Symmetric-difference reduction of a measurement list.
std::vector<size_t> xor_reduce(std::vector<size_t> v) {
    std::sort(v.begin(), v.end());
    std::vector<size_t> out;
    for (size_t i = 0; i < v.size();) {
        size_t j = i;
        while (j < v.size() && v[j] == v[i]) j++;
        if ((j - i) % 2) out.push_back(v[i]);
        i = j;
    }
    return out;
}

PauliKind basis_kind(Basis b) { return b == Basis::Z ? PauliKind::Z : PauliKind::X; }

std::vector<size_t> data_support_meas(const MemoryExperiment &exp, const std::vector<Coord> &support) {
    std::vector<size_t> out;
    for (const auto &q : support) out.push_back(exp.data_meas[exp.layout.lattice.data_index(q)]);
    return out;
}

// Gaussian elimination over coin bitsets. Finds a subset of `pool` whose
// coin part equals the target's, with minimum size when the null space is
// small enough to enumerate.
class Gf2Solver {
   public:
    std::optional<std::vector<size_t>> solve(const std::vector<const AffineBit *> &pool,
                                             const AffineBit &target) {
        size_t words = target.coins.size();
        for (auto *p : pool) words = std::max(words, p->coins.size());
        size_t mw = (pool.size() + 63) / 64;
        auto pad = [&](const std::vector<uint64_t> &v) {
            std::vector<uint64_t> out(words, 0);
            std::copy(v.begin(), v.end(), out.begin());
            return out;
        };
        struct Row {
            std::vector<uint64_t> v, mask;
            size_t pivot;
        };
        std::vector<Row> basis;
        std::vector<std::vector<uint64_t>> nulls;
        auto reduce = [&](std::vector<uint64_t> &v, std::vector<uint64_t> &mask) {
            for (const auto &b : basis) {
                if ((v[b.pivot / 64] >> (b.pivot % 64)) & 1) {
                    for (size_t k = 0; k < words; k++) v[k] ^= b.v[k];
                    for (size_t k = 0; k < mw; k++) mask[k] ^= b.mask[k];
                }
            }
        };
        for (size_t i = 0; i < pool.size(); i++) {
            auto v = pad(pool[i]->coins);
            std::vector<uint64_t> mask(mw, 0);
            mask[i / 64] |= uint64_t{1} << (i % 64);
            reduce(v, mask);
            size_t piv = words * 64;
            for (size_t k = 0; k < words; k++) {
                if (v[k]) {
                    piv = k * 64 + std::countr_zero(v[k]);
                    break;
                }
            }
            if (piv == words * 64) {
                nulls.push_back(std::move(mask));
            } else {
                basis.push_back({std::move(v), std::move(mask), piv});
            }
        }
        auto v = pad(target.coins);
        std::vector<uint64_t> mask(mw, 0);
        reduce(v, mask);
        for (auto w : v) {
            if (w) return std::nullopt;
        }
        auto weight = [](const std::vector<uint64_t> &m) {
            size_t c = 0;
            for (auto w : m) c += std::popcount(w);
            return c;
        };
        auto best = mask;
        if (!nulls.empty() && nulls.size() <= 12) {
            for (uint32_t combo = 1; combo < (1u << nulls.size()); combo++) {
                auto cand = mask;
                for (size_t k = 0; k < nulls.size(); k++) {
                    if ((combo >> k) & 1) {
                        for (size_t w = 0; w < mw; w++) cand[w] ^= nulls[k][w];
                    }
                }
                if (weight(cand) < weight(best)) best = cand;
            }
        }
        std::vector<size_t> out;
        for (size_t i = 0; i < pool.size(); i++) {
            if ((best[i / 64] >> (i % 64)) & 1) out.push_back(i);
        }
        return out;
    }
};

void attach_standard(MemoryExperiment &exp) {
    const auto &spec = exp.spec;
    const auto &L = exp.layout.lattice;
    Circuit &c = exp.circuit;
    PauliKind bk = basis_kind(spec.basis);
    const auto &last = exp.rounds.back();
    int R = static_cast<int>(exp.rounds.size());
    if (spec.scheme == Scheme::Areal) {
        for (int r = exp.first_noisy; r < R; r++) {
            for (const auto &m : exp.rounds[r].meas) {
                const auto *prev = exp.rounds[r - 1].find(m.site);
                c.detector({m.index, prev->index}, {m.site.x, m.site.y, r}, "a");
            }
        }
        for (const auto &s : L.stabilizers) {
            if (s.kind != bk) continue;
            auto refs = data_support_meas(exp, s.support);
            refs.push_back(last.find(s.ancilla)->index);
            c.detector(xor_reduce(refs), {s.ancilla.x, s.ancilla.y, R}, "final");
        }
        return;
    }
    // Row/column aggregates.
    auto groups = [&](PauliKind k) { return k == PauliKind::Z ? L.z_rows : L.x_cols; };
    for (int r = exp.first_noisy; r < R; r++) {
        for (PauliKind k : {PauliKind::Z, PauliKind::X}) {
            const auto gs = groups(k);
            for (size_t g = 0; g < gs.size(); g++) {
                std::vector<size_t> refs;
                for (const auto &a : gs[g]) {
                    refs.push_back(exp.rounds[r].find(a)->index);
                    refs.push_back(exp.rounds[r - 1].find(a)->index);
                }
                int gi = static_cast<int>(g);
                if (k == PauliKind::Z) {
                    c.detector(xor_reduce(refs), {-1, 2 * gi + 1, r}, "zrow");
                } else {
                    c.detector(xor_reduce(refs), {2 * gi + 1, -1, r}, "xcol");
                }
            }
        }
    }
    const auto gs = groups(bk);
    for (size_t g = 0; g < gs.size(); g++) {
        std::vector<size_t> refs;
        for (const auto &a : gs[g]) {
            auto s = L.make_stabilizer(a, bk);
            auto dm = data_support_meas(exp, s.support);
            refs.insert(refs.end(), dm.begin(), dm.end());
            refs.push_back(last.find(a)->index);
        }
        int gi = static_cast<int>(g);
        std::vector<int> coords = bk == PauliKind::Z ? std::vector<int>{-1, 2 * gi + 1, R}
                                                     : std::vector<int>{2 * gi + 1, -1, R};
        c.detector(xor_reduce(refs), coords, "final");
    }
}

bool near(Coord a, Coord b, int radius) {
    return std::abs(a.x - b.x) <= radius && std::abs(a.y - b.y) <= radius;
}

// Earlier measurement referenced by a detector, relative to its round.
struct RelRef {
    int back;  // rounds before the detector's round, >= 1
    Coord site;
};

// Finds the comparison set for a detector at round `round` (== rounds.size()
// for the final data reconstruction). The detector may depend only on the
// Pauli frame coins of its last `lookback` rounds, so errors that happened
// earlier cancel between the compared measurements.
std::vector<RelRef> local_relation(const MemoryExperiment &exp, const ReferenceAnalysis &an,
                                   const AffineBit &target, Coord where, int round) {
    static const int kLevels[][2] = {{1, 2}, {1, 4}, {2, 4}, {2, 8}};
    Gf2Solver solver;
    for (const auto &lv : kLevels) {
        int lookback = lv[0];
        std::vector<uint64_t> ignore((an.num_coins + 63) / 64, 0);
        for (int r = round - lookback + 1; r <= round; r++) {
            if (r < 0) continue;
            auto [b, e] = an.frame_coins[r];
            for (size_t k = b; k < e; k++) ignore[k / 64] |= uint64_t{1} << (k % 64);
        }
        auto masked = [&](const AffineBit &v) {
            AffineBit out = v;
            for (size_t k = 0; k < out.coins.size() && k < ignore.size(); k++) out.coins[k] &= ~ignore[k];
            return out;
        };
        std::vector<AffineBit> pool;
        std::vector<RelRef> refs;
        for (int back = 1; back <= lookback; back++) {
            int r = round - back;
            if (r < 0) break;
            for (const auto &m : exp.rounds[r].meas) {
                if (!near(m.site, where, lv[1])) continue;
                pool.push_back(masked(an.measurements[m.index]));
                refs.push_back({back, m.site});
            }
        }
        std::vector<const AffineBit *> ptrs;
        for (const auto &p : pool) ptrs.push_back(&p);
        auto sol = solver.solve(ptrs, masked(target));
        if (!sol) continue;
        std::vector<RelRef> out;
        for (auto k : *sol) out.push_back(refs[k]);
        return out;
    }
    throw std::runtime_error("no local detector relation near (" + std::to_string(where.x) + "," +
                             std::to_string(where.y) + ") in round " + std::to_string(round));
}

std::vector<PauliFrameInsertion> frames_for(const MemoryExperiment &exp) {
    std::vector<uint32_t> data;
    for (const auto &q : exp.layout.lattice.data) data.push_back(exp.layout.data_qubit(q));
    std::vector<PauliFrameInsertion> frames;
    for (const auto &r : exp.rounds) frames.push_back({r.start, data});
    frames.push_back({exp.data_meas_start, data});
    return frames;
}

// Detector relations of the 3CX areal scheme, per round, derived on a short
// circuit with the same start and end and mapped onto the full one. Bulk
// rounds repeat with period two.
struct ThreeCxRelations {
    int first_noisy = 0, rounds = 0;
    std::vector<std::vector<std::vector<RelRef>>> per_round;  // [round][meas in round]
    std::vector<std::vector<RelRef>> final;                   // per final stabilizer
};

ThreeCxRelations derive_three_cx_relations(const ExperimentSpec &spec) {
    ExperimentSpec t = spec;
    t.p = 0;
    t.forced.clear();
    if (t.noisy_rounds > 6) t.noisy_rounds = 4 + t.noisy_rounds % 2;
    auto exp = build_memory_circuit(t);
    auto an = analyze_reference(exp.circuit, {}, frames_for(exp));
    ThreeCxRelations rel;
    rel.first_noisy = exp.first_noisy;
    rel.rounds = static_cast<int>(exp.rounds.size());
    rel.per_round.resize(exp.rounds.size());
    for (int r = exp.first_noisy; r < rel.rounds; r++) {
        for (const auto &m : exp.rounds[r].meas) {
            rel.per_round[r].push_back(local_relation(exp, an, an.measurements[m.index], m.site, r));
        }
    }
    PauliKind bk = basis_kind(spec.basis);
    for (const auto &s : exp.layout.lattice.stabilizers_at(exp.final_phase)) {
        if (s.kind != bk) continue;
        AffineBit target;
        for (auto k : data_support_meas(exp, s.support)) target.xor_with(an.measurements[k]);
        rel.final.push_back(local_relation(exp, an, target, s.ancilla, rel.rounds));
    }
    return rel;
}

void attach_three_cx(MemoryExperiment &exp) {
    const auto &spec = exp.spec;
    const auto &L = exp.layout.lattice;
    Circuit &c = exp.circuit;
    PauliKind bk = basis_kind(spec.basis);
    int R = static_cast<int>(exp.rounds.size());
    std::vector<Stabilizer> final_stabs;
    for (auto &s : L.stabilizers_at(exp.final_phase)) {
        if (s.kind == bk) final_stabs.push_back(std::move(s));
    }
    if (spec.scheme == Scheme::Boundary) {
        auto on_edge = [&](Coord a) {
            Edge e = L.edge_of(a);
            return e == Edge::Right || e == Edge::Bottom;
        };
        for (int r = exp.first_noisy; r < R; r++) {
            for (const auto &m : exp.rounds[r].meas) {
                if (!on_edge(m.site)) continue;
                const auto *prev = exp.rounds[r - 2].find(m.site);
                c.detector({m.index, prev->index}, {m.site.x, m.site.y, r}, "b");
            }
        }
        for (const auto &s : final_stabs) {
            if (!on_edge(s.ancilla)) continue;
            auto refs = data_support_meas(exp, s.support);
            refs.push_back(exp.rounds.back().find(s.ancilla)->index);
            c.detector(xor_reduce(refs), {s.ancilla.x, s.ancilla.y, R}, "final");
        }
        return;
    }
    auto rel = derive_three_cx_relations(spec);
    int tail = spec.effective_tail();
    auto template_round = [&](int r) {
        if (r < exp.first_noisy + 2) return r;
        int from_end = R - r;
        if (from_end <= tail) return rel.rounds - from_end;
        return exp.first_noisy + 2 + (r - exp.first_noisy) % 2;
    };
    auto resolve = [&](const std::vector<RelRef> &refs, int r) {
        std::vector<size_t> out;
        for (const auto &x : refs) out.push_back(exp.rounds[r - x.back].find(x.site)->index);
        return out;
    };
    for (int r = exp.first_noisy; r < R; r++) {
        const auto &tr = rel.per_round[template_round(r)];
        const auto &ms = exp.rounds[r].meas;
        for (size_t k = 0; k < ms.size(); k++) {
            auto refs = resolve(tr[k], r);
            refs.push_back(ms[k].index);
            c.detector(xor_reduce(refs), {ms[k].site.x, ms[k].site.y, r}, "a");
        }
    }
    for (size_t k = 0; k < final_stabs.size(); k++) {
        auto refs = resolve(rel.final[k], R);
        auto dm = data_support_meas(exp, final_stabs[k].support);
        refs.insert(refs.end(), dm.begin(), dm.end());
        c.detector(xor_reduce(refs), {final_stabs[k].ancilla.x, final_stabs[k].ancilla.y, R}, "final");
    }
}

}  // namespace

void attach_detectors(MemoryExperiment &exp) {
    const auto &L = exp.layout.lattice;
    if (exp.spec.circuit == CircuitKind::Standard) {
        attach_standard(exp);
    } else {
        attach_three_cx(exp);
    }
    const auto &support = exp.spec.basis == Basis::Z ? L.logical_z_support : L.logical_x_support;
    exp.circuit.observable(xor_reduce(data_support_meas(exp, support)), 0);
}

MemoryExperiment build_memory_experiment(const ExperimentSpec &spec) {
    auto exp = build_memory_circuit(spec);
    attach_detectors(exp);
    return exp;
}

size_t detectors_per_round(Scheme scheme, int d) {
    switch (scheme) {
        case Scheme::Areal: return static_cast<size_t>(d * d - 1);
        case Scheme::RowColumn: return static_cast<size_t>(2 * (d - 1));
        case Scheme::Boundary: {
            Lattice L = Lattice::build(d);
            // Right and bottom sites alternate, so half of each edge is live
            // in any one half round.
            return (L.right_boundary_ancillas.size() + L.bottom_boundary_ancillas.size()) / 2;
        }
    }
    return 0;
}

}  // namespace infodec
