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

#include "infodec/dem.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

namespace infodec {

double merge_probability(double q1, double q2) { return q1 * (1 - q2) + q2 * (1 - q1); }

std::string DetectorErrorModel::to_text() const {
    std::ostringstream out;
    char buf[64];
    for (const auto &m : mechanisms) {
        std::snprintf(buf, sizeof(buf), "error(%.10g)", m.p);
        out << buf;
        for (auto k : m.symptom.detectors) out << " D" << k;
        for (size_t o = 0; o < 64; o++) {
            if ((m.symptom.observables >> o) & 1) out << " L" << o;
        }
        out << "\n";
    }
    return out.str();
}

DetectorErrorModel extract_dem(const Circuit &c) {
    auto sites = enumerate_fault_sites(c);
    auto symptoms = propagate_faults(c, sites);
    std::map<Symptom, double> merged;
    std::vector<uint8_t> sector(c.num_detectors(), 0);
    const auto &ins = c.instructions();
    for (size_t i = 0; i < sites.size(); i++) {
        if (symptoms[i].empty()) continue;
        uint8_t comp = sites[i].component;
        uint8_t bit = 0;
        if (ins[sites[i].instr].op == Op::Depolarize2) {
            uint8_t a = comp >> 2, b = comp & 3;
            if ((a | b) == 1) bit = kSectorX;
            else if ((a == 0 || a == 3) && (b == 0 || b == 3)) bit = kSectorZ;
        } else {
            bit = comp == 1 ? kSectorX : comp == 3 ? kSectorZ : 0;
        }
        for (auto k : symptoms[i].detectors) sector[k] |= bit;
        auto [it, fresh] = merged.emplace(std::move(symptoms[i]), sites[i].p);
        if (!fresh) it->second = merge_probability(it->second, sites[i].p);
    }
    DetectorErrorModel dem;
    dem.num_detectors = c.num_detectors();
    dem.num_observables = c.num_observables();
    dem.detector_sector = std::move(sector);
    for (auto &[s, p] : merged) {
        if (p > 0) dem.mechanisms.push_back({p, s});
    }
    return dem;
}

namespace {

struct Candidate {
    double p;
    uint64_t obs;
};

class Decomposer {
   public:
    explicit Decomposer(const DetectorErrorModel &dem) {
        for (const auto &m : dem.mechanisms) {
            const auto &d = m.symptom.detectors;
            if (d.empty() || d.size() > 2) continue;
            uint64_t key = d.size() == 1 ? key_of(d[0], kNone) : key_of(d[0], d[1]);
            table_[key].push_back({m.p, m.symptom.observables});
        }
        for (auto &[k, v] : table_) {
            std::stable_sort(v.begin(), v.end(), [](const Candidate &a, const Candidate &b) { return a.p > b.p; });
        }
    }

    bool has(const Symptom &s) const {
        const auto &d = s.detectors;
        if (d.empty() || d.size() > 2) return false;
        auto *cs = lookup(d[0], d.size() == 1 ? kNone : d[1]);
        if (!cs) return false;
        for (const auto &c : *cs) {
            if (c.obs == s.observables) return true;
        }
        return false;
    }

    bool split(const Symptom &s, std::vector<Symptom> &parts) {
        target_ = s.observables;
        dets_ = s.detectors;
        used_.assign(dets_.size(), 0);
        parts.clear();
        return search(parts, 0);
    }

   private:
    static constexpr uint32_t kNone = 0xFFFFFFFFu;
    std::map<uint64_t, std::vector<Candidate>> table_;
    uint64_t target_ = 0;
    std::vector<uint32_t> dets_;
    std::vector<uint8_t> used_;

    static uint64_t key_of(uint32_t a, uint32_t b) { return (uint64_t{a} << 32) | b; }

    const std::vector<Candidate> *lookup(uint32_t a, uint32_t b) const {
        auto it = table_.find(key_of(a, b));
        return it == table_.end() ? nullptr : &it->second;
    }

    bool search(std::vector<Symptom> &parts, uint64_t obs) {
        size_t i = 0;
        while (i < dets_.size() && used_[i]) i++;
        if (i == dets_.size()) return obs == target_;
        used_[i] = 1;
        // Pair options first, likelier ones first.
        std::vector<std::pair<double, size_t>> pairs;
        for (size_t j = i + 1; j < dets_.size(); j++) {
            if (used_[j]) continue;
            if (auto *c = lookup(dets_[i], dets_[j])) pairs.push_back({c->front().p, j});
        }
        std::stable_sort(pairs.begin(), pairs.end(), [](auto &a, auto &b) { return a.first > b.first; });
        for (auto [p, j] : pairs) {
            used_[j] = 1;
            for (const auto &c : *lookup(dets_[i], dets_[j])) {
                parts.push_back({{dets_[i], dets_[j]}, c.obs});
                if (search(parts, obs ^ c.obs)) return true;
                parts.pop_back();
            }
            used_[j] = 0;
        }
        if (auto *cs = lookup(dets_[i], kNone)) {
            for (const auto &c : *cs) {
                parts.push_back({{dets_[i]}, c.obs});
                if (search(parts, obs ^ c.obs)) return true;
                parts.pop_back();
            }
        }
        used_[i] = 0;
        return false;
    }
};

// Splits a symptom whose detectors are all in a single X or Z sector, and
// touch both, into its X part and its Z part. Every way of sharing the
// observables between the parts is tried; each part must itself be a known
// graph-like symptom or split into known ones.
bool sector_split(Decomposer &dec, const std::vector<uint8_t> &sector, const Symptom &s,
                  std::vector<Symptom> &parts) {
    if (sector.empty() || s.detectors.size() < 2) return false;
    Symptom xs, zs;
    for (auto k : s.detectors) {
        if (sector[k] == kSectorX) xs.detectors.push_back(k);
        else if (sector[k] == kSectorZ) zs.detectors.push_back(k);
        else return false;
    }
    if (xs.detectors.empty() || zs.detectors.empty()) return false;
    std::vector<int> bits;
    for (int o = 0; o < 64; o++) {
        if ((s.observables >> o) & 1) bits.push_back(o);
    }
    if (bits.size() > 8) return false;
    auto place = [&](const Symptom &part, std::vector<Symptom> &out) {
        if (part.detectors.size() <= 2) {
            if (!dec.has(part)) return false;
            out.push_back(part);
            return true;
        }
        std::vector<Symptom> sub;
        if (!dec.split(part, sub)) return false;
        out.insert(out.end(), sub.begin(), sub.end());
        return true;
    };
    for (uint32_t m = 0; m < (1u << bits.size()); m++) {
        uint64_t ox = 0;
        for (size_t b = 0; b < bits.size(); b++) {
            if ((m >> b) & 1) ox |= uint64_t{1} << bits[b];
        }
        xs.observables = ox;
        zs.observables = s.observables ^ ox;
        std::vector<Symptom> out;
        if (place(xs, out) && place(zs, out)) {
            parts = std::move(out);
            return true;
        }
    }
    return false;
}

}  // namespace

std::vector<Decomposition> decompose_graphlike(const DetectorErrorModel &dem) {
    Decomposer dec(dem);
    std::vector<Decomposition> out;
    for (size_t k = 0; k < dem.mechanisms.size(); k++) {
        const auto &s = dem.mechanisms[k].symptom;
        Decomposition d{k, {}};
        if (sector_split(dec, dem.detector_sector, s, d.parts)) {
            // done
        } else if (s.detectors.size() <= 2) {
            d.parts.assign(1, s);
        } else if (!dec.split(s, d.parts)) {
            std::ostringstream msg;
            msg << "mechanism with detectors";
            for (auto x : s.detectors) msg << " D" << x;
            msg << " has no decomposition into graph-like symptoms";
            throw DecompositionError(msg.str());
        }
        out.push_back(std::move(d));
    }
    return out;
}

void MatchingGraph::rebuild_adjacency() {
    adj.assign(num_nodes(), {});
    for (size_t e = 0; e < edges.size(); e++) {
        adj[edges[e].a].push_back({edges[e].b, static_cast<uint32_t>(e)});
        if (edges[e].b != edges[e].a) adj[edges[e].b].push_back({edges[e].a, static_cast<uint32_t>(e)});
    }
}

void MatchingGraph::remove_edge(size_t index) {
    edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(index));
    rebuild_adjacency();
}

MatchingGraph build_matching_graph(const DetectorErrorModel &dem,
                                   const std::vector<Decomposition> &decomposition) {
    MatchingGraph g;
    g.num_detectors = dem.num_detectors;
    g.num_observables = dem.num_observables;
    std::map<std::tuple<uint32_t, uint32_t, uint64_t>, size_t> index;
    for (const auto &d : decomposition) {
        double p = dem.mechanisms[d.source].p;
        for (const auto &part : d.parts) {
            if (part.detectors.empty()) {
                g.undetectable.push_back(d.source);
                continue;
            }
            uint32_t a = part.detectors[0];
            uint32_t b = part.detectors.size() == 2 ? part.detectors[1] : g.boundary();
            auto key = std::make_tuple(a, b, part.observables);
            auto it = index.find(key);
            if (it == index.end()) {
                index.emplace(key, g.edges.size());
                GraphEdge e;
                e.a = a;
                e.b = b;
                e.q = p;
                e.observables = part.observables;
                e.provenance.push_back(d.source);
                g.edges.push_back(std::move(e));
            } else {
                auto &e = g.edges[it->second];
                e.q = merge_probability(e.q, p);
                e.provenance.push_back(d.source);
            }
        }
    }
    for (auto &e : g.edges) {
        if (!(e.q > 0 && e.q < 0.5)) {
            throw std::domain_error("edge probability " + std::to_string(e.q) +
                                    " outside (0, 0.5); weight would not be positive");
        }
        e.weight = std::log((1 - e.q) / e.q);
    }
    g.rebuild_adjacency();
    return g;
}

MatchingGraph build_matching_graph(const Circuit &c) {
    auto dem = extract_dem(c);
    return build_matching_graph(dem, decompose_graphlike(dem));
}

namespace {

// BFS over (node, parity) from (s, 0) looking for (s, 1), up to max_depth.
// Returns the edge list of the odd closed walk, or empty.
std::vector<size_t> odd_cycle_through(const MatchingGraph &g, uint32_t s, int max_depth,
                                      std::vector<int> &dist, std::vector<int64_t> &parent,
                                      std::vector<size_t> &touched) {
    auto state = [](uint32_t v, int par) { return 2 * static_cast<size_t>(v) + par; };
    for (auto t : touched) dist[t] = -1;
    touched.clear();
    std::deque<size_t> queue;
    size_t start = state(s, 0), goal = state(s, 1);
    dist[start] = 0;
    parent[start] = -1;
    touched.push_back(start);
    queue.push_back(start);
    while (!queue.empty()) {
        size_t cur = queue.front();
        queue.pop_front();
        if (cur == goal) break;
        if (dist[cur] >= max_depth) continue;
        uint32_t v = static_cast<uint32_t>(cur / 2);
        int par = static_cast<int>(cur % 2);
        for (auto [w, e] : g.adj[v]) {
            size_t nxt = state(w, par ^ static_cast<int>(g.edges[e].observables & 1));
            if (dist[nxt] != -1) continue;
            dist[nxt] = dist[cur] + 1;
            parent[nxt] = static_cast<int64_t>(e);
            touched.push_back(nxt);
            queue.push_back(nxt);
        }
    }
    std::vector<size_t> path;
    if (dist[goal] == -1) return path;
    size_t cur = goal;
    while (cur != start) {
        size_t e = static_cast<size_t>(parent[cur]);
        path.push_back(e);
        const auto &ed = g.edges[e];
        uint32_t v = static_cast<uint32_t>(cur / 2);
        uint32_t u = ed.a == v ? ed.b : ed.a;
        cur = state(u, static_cast<int>(cur % 2) ^ static_cast<int>(ed.observables & 1));
    }
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace

CircuitDistance circuit_distance(const MatchingGraph &g) {
    CircuitDistance out;
    if (!g.undetectable.empty()) {
        out.value = 1;
        out.witness_mechanisms = {g.undetectable.front()};
        return out;
    }
    size_t states = 2 * g.num_nodes();
    std::vector<int> dist(states, -1);
    std::vector<int64_t> parent(states, -1);
    std::vector<size_t> touched;
    int best = std::numeric_limits<int>::max();
    auto consider = [&](std::vector<size_t> path) {
        if (!path.empty() && static_cast<int>(path.size()) < best) {
            best = static_cast<int>(path.size());
            out.witness_edges = std::move(path);
        }
    };
    consider(odd_cycle_through(g, g.boundary(), std::numeric_limits<int>::max(), dist, parent, touched));
    for (uint32_t s = 0; s < g.num_detectors; s++) {
        if (best <= 1) break;
        consider(odd_cycle_through(g, s, best - 1, dist, parent, touched));
    }
    if (best == std::numeric_limits<int>::max()) return out;
    out.value = best;
    for (auto e : out.witness_edges) {
        if (!g.edges[e].provenance.empty()) out.witness_mechanisms.push_back(g.edges[e].provenance.front());
    }
    return out;
}

}  // namespace infodec
