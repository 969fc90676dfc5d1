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

#include "infodec/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <thread>

#include "infodec/rng.h"
#include "infodec/sim.h"

namespace infodec {

double combine_logical(double p_lz, double p_lx) { return p_lz + p_lx - p_lz * p_lx; }

double wilson_halfwidth(size_t failures, size_t shots) {
    if (shots == 0) return 0;
    double n = static_cast<double>(shots);
    double p = static_cast<double>(failures) / n;
    const double z = 1.0;
    return z / (1 + z * z / n) * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n));
}

namespace {

// Runs fn(chunk_index) for every chunk over a small thread pool. Exceptions
// from workers are rethrown on the caller.
template <class Fn>
void parallel_chunks(size_t chunks, int workers, Fn &&fn) {
    size_t nw = std::min<size_t>(static_cast<size_t>(std::max(1, workers)), std::max<size_t>(1, chunks));
    if (nw <= 1) {
        for (size_t c = 0; c < chunks; c++) fn(c, 0);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(nw);
    std::vector<std::thread> pool;
    for (size_t t = 0; t < nw; t++) {
        pool.emplace_back([&, t] {
            try {
                for (size_t c = next++; c < chunks; c = next++) fn(c, t);
            } catch (...) {
                errors[t] = std::current_exception();
                next = chunks;
            }
        });
    }
    for (auto &th : pool) th.join();
    for (auto &e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

BasisStats run_basis(const ExperimentSpec &spec, size_t shots, uint64_t seed, int workers) {
    auto exp = build_memory_experiment(spec);
    const Circuit &c = exp.circuit;
    auto graph = build_matching_graph(c);
    FrameSampler sampler(c);
    size_t chunks = (shots + kChunk - 1) / kChunk;
    size_t nw = static_cast<size_t>(std::max(1, workers));
    std::vector<size_t> fails(nw, 0);
    std::vector<std::unique_ptr<Decoder>> decoders(nw);
    parallel_chunks(chunks, workers, [&](size_t chunk, size_t t) {
        if (!decoders[t]) decoders[t] = std::make_unique<Decoder>(graph);
        size_t first = chunk * kChunk;
        size_t n = std::min(kChunk, shots - first);
        auto batch = sampler.sample(n, seed, first);
        for (size_t s = 0; s < n; s++) {
            if (decoders[t]->predict(batch.fired(s)) != batch.obs_mask(s)) fails[t]++;
        }
    });
    BasisStats st;
    st.shots = shots;
    for (auto f : fails) st.failures += f;
    return st;
}

ExperimentStats run_memory(ExperimentSpec spec, size_t shots, uint64_t seed, int workers) {
    if (shots == 0) throw std::invalid_argument("shots must be at least 1");
    auto t0 = std::chrono::steady_clock::now();
    ExperimentStats out;
    out.shots = shots;
    spec.basis = Basis::Z;
    auto z = run_basis(spec, shots, mix_seed(seed, 0), workers);
    spec.basis = Basis::X;
    auto x = run_basis(spec, shots, mix_seed(seed, 1), workers);
    out.fail_z = z.failures;
    out.fail_x = x.failures;
    double n = static_cast<double>(shots);
    out.p_lz = static_cast<double>(z.failures) / n;
    out.p_lx = static_cast<double>(x.failures) / n;
    out.p_l = combine_logical(out.p_lz, out.p_lx);
    double sz = wilson_halfwidth(z.failures, shots), sx = wilson_halfwidth(x.failures, shots);
    out.stderr_l = std::hypot((1 - out.p_lx) * sz, (1 - out.p_lz) * sx);
    out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

BandwidthReport bandwidth(const ExperimentSpec &spec) {
    ExperimentSpec s = spec;
    if (s.scheme == Scheme::Areal) s.circuit = CircuitKind::Standard;
    s.noisy_rounds = 6;
    s.p = 0;
    s.forced.clear();
    s.basis = Basis::Z;
    auto exp = build_memory_experiment(s);
    double probe = exp.first_noisy + 2;
    size_t count = 0;
    for (const auto &ins : exp.circuit.instructions()) {
        if (ins.op == Op::Detector && ins.coords.size() >= 3 && ins.coords[2] == probe) count++;
    }
    BandwidthReport r;
    r.scheme = spec.scheme;
    r.d = spec.d;
    r.bits_per_round = count;
    r.ratio_vs_areal = count ? static_cast<double>(spec.d * spec.d - 1) / static_cast<double>(count) : 0;
    return r;
}

namespace {

std::string mechanism_line(const DetectorErrorModel &dem, size_t k) {
    DetectorErrorModel one;
    one.mechanisms.push_back(dem.mechanisms[k]);
    auto s = one.to_text();
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

ExperimentSpec with_dem_noise(ExperimentSpec s) {
    if (s.p <= 0) s.p = 1e-3;
    s.forced.clear();
    return s;
}

std::string symptom_text(const Symptom &s) {
    std::ostringstream out;
    for (auto d : s.detectors) out << " D" << d;
    for (size_t o = 0; o < 64; o++) {
        if ((s.observables >> o) & 1) out << " L" << o;
    }
    return out.str();
}

}  // namespace

DistanceReport verify_distance(const ExperimentSpec &spec) {
    auto exp = build_memory_experiment(with_dem_noise(spec));
    auto dem = extract_dem(exp.circuit);
    auto graph = build_matching_graph(dem, decompose_graphlike(dem));
    auto cd = circuit_distance(graph);
    DistanceReport r;
    r.distance = cd.value;
    r.pass = cd.value == spec.d;
    for (auto k : cd.witness_mechanisms) r.witness.push_back(mechanism_line(dem, k));
    return r;
}

FaultReport verify_faults(const ExperimentSpec &spec, int max_weight, bool full_pairs,
                          const MatchingGraph *graph_override, size_t max_counterexamples) {
    if (max_weight < 1 || max_weight > 2) throw std::invalid_argument("max_weight must be 1 or 2");
    auto exp = build_memory_experiment(with_dem_noise(spec));
    auto dem = extract_dem(exp.circuit);
    MatchingGraph own;
    if (!graph_override) own = build_matching_graph(dem, decompose_graphlike(dem));
    const MatchingGraph &g = graph_override ? *graph_override : own;
    Decoder dec(g);
    FaultReport rep;
    size_t m = dem.mechanisms.size();
    rep.mechanisms = m;
    auto fail = [&](const std::string &what) {
        rep.pass = false;
        if (rep.counterexamples.size() < max_counterexamples) rep.counterexamples.push_back(what);
    };
    std::vector<uint64_t> single_pred(m);
    for (size_t k = 0; k < m; k++) {
        const auto &s = dem.mechanisms[k].symptom;
        single_pred[k] = dec.predict(s.detectors);
        rep.singles_checked++;
        if (single_pred[k] != s.observables) {
            fail("mechanism " + std::to_string(k) + " [" + mechanism_line(dem, k) + "] predicted L mask " +
                 std::to_string(single_pred[k]));
        }
    }
    if (max_weight < 2) return rep;
    rep.pairs_total = m * (m - 1) / 2;

    auto check_pair = [&](size_t a, size_t b) {
        const auto &sa = dem.mechanisms[a].symptom, &sb = dem.mechanisms[b].symptom;
        std::vector<uint32_t> dets;
        std::set_symmetric_difference(sa.detectors.begin(), sa.detectors.end(), sb.detectors.begin(),
                                      sb.detectors.end(), std::back_inserter(dets));
        uint64_t actual = sa.observables ^ sb.observables;
        uint64_t pred = dec.predict(dets);
        rep.pairs_checked++;
        if (pred != actual) {
            Symptom comb{dets, actual};
            fail("mechanisms " + std::to_string(a) + " + " + std::to_string(b) + " [" + mechanism_line(dem, a) +
                 " | " + mechanism_line(dem, b) + "] combined" + symptom_text(comb) + " predicted L mask " +
                 std::to_string(pred));
        }
    };
    if (full_pairs) {
        for (size_t a = 0; a < m; a++) {
            for (size_t b = a + 1; b < m; b++) check_pair(a, b);
        }
        return rep;
    }

    // Detectors whose pairing can be cheaper than two boundary matches.
    size_t nd = g.num_detectors;
    std::vector<int64_t> bdist(g.num_nodes(), kNoPath);
    using Item = std::pair<int64_t, uint32_t>;
    {
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        bdist[g.boundary()] = 0;
        pq.push({0, g.boundary()});
        while (!pq.empty()) {
            auto [du, u] = pq.top();
            pq.pop();
            if (du != bdist[u]) continue;
            for (auto [v, e] : g.adj[u]) {
                int64_t nd2 = du + dec.edge_units(e);
                if (nd2 < bdist[v]) {
                    bdist[v] = nd2;
                    pq.push({nd2, v});
                }
            }
        }
    }
    int64_t bmax = 0;
    for (size_t v = 0; v < nd; v++) bmax = std::max(bmax, bdist[v]);
    std::vector<std::vector<uint32_t>> near(nd);
    std::vector<int64_t> dist(g.num_nodes(), kNoPath);
    std::vector<uint32_t> touched;
    for (uint32_t u = 0; u < nd; u++) {
        int64_t limit = bdist[u] >= kNoPath || bmax >= kNoPath ? kNoPath : bdist[u] + bmax;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[u] = 0;
        touched.push_back(u);
        pq.push({0, u});
        while (!pq.empty()) {
            auto [du, x] = pq.top();
            pq.pop();
            if (du != dist[x]) continue;
            if (du >= limit) break;
            if (x != u && (bdist[u] >= kNoPath || bdist[x] >= kNoPath || du < bdist[u] + bdist[x])) {
                near[u].push_back(x);
            }
            for (auto [v, e] : g.adj[x]) {
                if (v == g.boundary()) continue;
                int64_t nd2 = du + dec.edge_units(e);
                if (nd2 < dist[v]) {
                    if (dist[v] == kNoPath) touched.push_back(v);
                    dist[v] = nd2;
                    pq.push({nd2, v});
                }
            }
        }
        for (auto t : touched) dist[t] = kNoPath;
        touched.clear();
    }
    std::vector<std::vector<uint32_t>> mechs_at(nd);
    for (size_t k = 0; k < m; k++) {
        for (auto d : dem.mechanisms[k].symptom.detectors) mechs_at[d].push_back(static_cast<uint32_t>(k));
    }
    std::vector<uint32_t> mark(m, 0);
    uint32_t epoch = 0;
    for (size_t a = 0; a < m; a++) {
        epoch++;
        const auto &sa = dem.mechanisms[a].symptom;
        if (sa.detectors.empty()) continue;  // already a weight-1 failure
        for (auto u : sa.detectors) {
            auto visit = [&](uint32_t v) {
                for (auto b : mechs_at[v]) {
                    if (b > a && mark[b] != epoch) {
                        mark[b] = epoch;
                        check_pair(a, b);
                    }
                }
            };
            visit(u);
            for (auto v : near[u]) visit(v);
        }
    }
    return rep;
}

ForcedOutcome run_forced(ExperimentSpec spec, double p_graph) {
    ExperimentSpec noisy = spec;
    noisy.forced.clear();
    noisy.p = p_graph;
    auto gexp = build_memory_experiment(noisy);
    auto graph = build_matching_graph(gexp.circuit);
    spec.p = 0;
    auto exp = build_memory_experiment(spec);
    if (exp.circuit.num_detectors() != graph.num_detectors) {
        throw std::logic_error("forced and noisy experiments disagree on detector count");
    }
    auto batch = frame_sample(exp.circuit, 1, 0);
    ForcedOutcome out;
    out.fired = batch.fired(0);
    out.actual = batch.obs_mask(0);
    Decoder dec(graph);
    out.predicted = dec.predict(out.fired);
    return out;
}

// ---------------------------------------------------------------------------
// Sweeps and CSV.

const char *const kCsvHeader =
    "circuit,scheme,d,rounds,p,shots,fail_z,fail_x,p_lz,p_lx,p_l,stderr,bits_per_round,wall_s";

std::string csv_row(const SweepRow &r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%d,%.6g,%zu,%zu,%zu,%.8g,%.8g,%.8g,%.8g,%zu,%.3f",
                  to_string(r.cell.circuit).c_str(), to_string(r.cell.scheme).c_str(), r.cell.d, r.rounds,
                  r.cell.p, r.stats.shots, r.stats.fail_z, r.stats.fail_x, r.stats.p_lz, r.stats.p_lx,
                  r.stats.p_l, r.stats.stderr_l, r.bits_per_round, r.stats.wall_s);
    return buf;
}

std::vector<SweepRow> sweep(const std::vector<SweepCell> &cells, size_t shots, uint64_t seed, int rounds_mult,
                            int workers, bool record_wall_time) {
    std::vector<SweepRow> rows;
    for (size_t i = 0; i < cells.size(); i++) {
        const auto &cell = cells[i];
        ExperimentSpec spec;
        spec.d = cell.d;
        spec.circuit = cell.circuit;
        spec.scheme = cell.scheme;
        spec.p = cell.p;
        spec.noisy_rounds = rounds_mult * cell.d;
        spec.validate();
        SweepRow row;
        row.cell = cell;
        row.rounds = spec.noisy_rounds;
        row.stats = run_memory(spec, shots, mix_seed(seed, i), workers);
        if (!record_wall_time) row.stats.wall_s = 0;
        row.bits_per_round = bandwidth(spec).bits_per_round;
        rows.push_back(row);
    }
    return rows;
}

void write_csv(std::ostream &out, const std::vector<SweepRow> &rows) {
    out << kCsvHeader << "\n";
    for (const auto &r : rows) out << csv_row(r) << "\n";
}

std::vector<SweepRow> read_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw std::runtime_error("CSV header does not match: expected '" + std::string(kCsvHeader) + "'");
    }
    std::vector<SweepRow> rows;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 14) throw std::runtime_error("CSV line " + std::to_string(lineno) + ": expected 14 fields");
        SweepRow r;
        r.cell.circuit = parse_circuit_kind(f[0]);
        r.cell.scheme = parse_scheme(f[1]);
        r.cell.d = std::stoi(f[2]);
        r.rounds = std::stoi(f[3]);
        r.cell.p = std::stod(f[4]);
        r.stats.shots = std::stoull(f[5]);
        r.stats.fail_z = std::stoull(f[6]);
        r.stats.fail_x = std::stoull(f[7]);
        r.stats.p_lz = std::stod(f[8]);
        r.stats.p_lx = std::stod(f[9]);
        r.stats.p_l = std::stod(f[10]);
        r.stats.stderr_l = std::stod(f[11]);
        r.bits_per_round = std::stoull(f[12]);
        r.stats.wall_s = std::stod(f[13]);
        rows.push_back(r);
    }
    return rows;
}

double crossing_point(const std::vector<SweepRow> &rows, CircuitKind circuit, Scheme scheme, int d_small,
                      int d_large) {
    std::map<double, double> small, large;
    for (const auto &r : rows) {
        if (r.cell.circuit != circuit || r.cell.scheme != scheme || r.stats.p_l <= 0) continue;
        if (r.cell.d == d_small) small[r.cell.p] = r.stats.p_l;
        if (r.cell.d == d_large) large[r.cell.p] = r.stats.p_l;
    }
    std::vector<std::pair<double, double>> diff;  // (log p, log large - log small)
    for (auto [p, ps] : small) {
        auto it = large.find(p);
        if (it != large.end()) diff.push_back({std::log(p), std::log(it->second) - std::log(ps)});
    }
    for (size_t i = 0; i + 1 < diff.size(); i++) {
        auto [x0, y0] = diff[i];
        auto [x1, y1] = diff[i + 1];
        if (y0 < 0 && y1 >= 0) return std::exp(x0 + (x1 - x0) * (-y0) / (y1 - y0));
    }
    return -1;
}

double loglog_slope(const std::vector<SweepRow> &rows, CircuitKind circuit, Scheme scheme, int d) {
    std::vector<std::pair<double, double>> pts;
    for (const auto &r : rows) {
        if (r.cell.circuit == circuit && r.cell.scheme == scheme && r.cell.d == d && r.stats.p_l > 0) {
            pts.push_back({std::log(r.cell.p), std::log(r.stats.p_l)});
        }
    }
    if (pts.size() < 2) return std::nan("");
    double mx = 0, my = 0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxy = 0, sxx = 0;
    for (auto [x, y] : pts) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    return sxy / sxx;
}

}  // namespace infodec
