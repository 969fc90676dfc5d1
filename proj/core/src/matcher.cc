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

#include "infodec/matcher.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <thread>

namespace infodec {

int64_t quantize_weight(double w) { return static_cast<int64_t>(std::llround(w * kWeightScale)); }

// ---------------------------------------------------------------------------
// Blossom. Follows the classic primal-dual formulation (Galil's survey) with
// S/T labels, blossom shrinking/expansion and four kinds of dual update.
// Endpoints are numbered 2k / 2k+1 for edge k; labels: 1 = S, 2 = T.

namespace {

class Blossom {
   public:
    Blossom(uint32_t n, const std::vector<WeightedEdge> &edges, bool maxcard)
        : n_(static_cast<int>(n)), edges_(edges), maxcard_(maxcard) {}

    std::vector<int> run();

   private:
    int n_;
    const std::vector<WeightedEdge> &edges_;
    bool maxcard_;

    std::vector<int> endpoint_;
    std::vector<std::vector<int>> neighbend_;
    std::vector<int> mate_, label_, labelend_, inblossom_, blossomparent_, blossombase_, bestedge_;
    std::vector<std::vector<int>> blossomchilds_, blossomendps_, blossombestedges_;
    std::vector<char> has_bbe_;
    std::vector<int> unused_;
    std::vector<int64_t> dual_;
    std::vector<char> allowedge_;
    std::vector<int> queue_;

    int64_t slack(int k) const {
        const auto &e = edges_[k];
        return dual_[e.u] + dual_[e.v] - 2 * e.w;
    }

    void leaves(int b, std::vector<int> &out) const {
        if (b < n_) {
            out.push_back(b);
            return;
        }
        for (int t : blossomchilds_[b]) leaves(t, out);
    }
    std::vector<int> leaves(int b) const {
        std::vector<int> out;
        leaves(b, out);
        return out;
    }

    void assign_label(int w, int t, int p);
    int scan_blossom(int v, int w);
    void add_blossom(int base, int k);
    void expand_blossom(int b, bool endstage);
    void augment_blossom(int b, int v);
    void augment_matching(int k);
};

void Blossom::assign_label(int w, int t, int p) {
    int b = inblossom_[w];
    assert(label_[w] == 0 && label_[b] == 0);
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
        leaves(b, queue_);
    } else if (t == 2) {
        int base = blossombase_[b];
        assert(mate_[base] >= 0);
        assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
    }
}

// Walks up from v and w alternately; returns the base of a new blossom or
// -1 if the two trees are distinct (augmenting path).
int Blossom::scan_blossom(int v, int w) {
    std::vector<int> path;
    int base = -1;
    while (v != -1 || w != -1) {
        int b = inblossom_[v];
        if (label_[b] & 4) {
            base = blossombase_[b];
            break;
        }
        assert(label_[b] == 1);
        path.push_back(b);
        label_[b] = 5;
        if (labelend_[b] == -1) {
            v = -1;
        } else {
            v = endpoint_[labelend_[b]];
            b = inblossom_[v];
            assert(label_[b] == 2);
            v = endpoint_[labelend_[b]];
        }
        if (w != -1) std::swap(v, w);
    }
    for (int b : path) label_[b] = 1;
    return base;
}

void Blossom::add_blossom(int base, int k) {
    int v = static_cast<int>(edges_[k].u), w = static_cast<int>(edges_[k].v);
    int bb = inblossom_[base], bv = inblossom_[v], bw = inblossom_[w];
    int b = unused_.back();
    unused_.pop_back();
    blossombase_[b] = base;
    blossomparent_[b] = -1;
    blossomparent_[bb] = b;
    auto &path = blossomchilds_[b];
    auto &endps = blossomendps_[b];
    path.clear();
    endps.clear();
    while (bv != bb) {
        blossomparent_[bv] = b;
        path.push_back(bv);
        endps.push_back(labelend_[bv]);
        v = endpoint_[labelend_[bv]];
        bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
        blossomparent_[bw] = b;
        path.push_back(bw);
        endps.push_back(labelend_[bw] ^ 1);
        w = endpoint_[labelend_[bw]];
        bw = inblossom_[w];
    }
    assert(label_[bb] == 1);
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dual_[b] = 0;
    for (int x : leaves(b)) {
        if (label_[inblossom_[x]] == 2) queue_.push_back(x);
        inblossom_[x] = b;
    }
    std::vector<int> bestedgeto(2 * n_, -1);
    for (int sub : path) {
        std::vector<std::vector<int>> nblists;
        if (!has_bbe_[sub]) {
            for (int x : leaves(sub)) {
                std::vector<int> l;
                for (int p : neighbend_[x]) l.push_back(p / 2);
                nblists.push_back(std::move(l));
            }
        } else {
            nblists.push_back(blossombestedges_[sub]);
        }
        for (const auto &nb : nblists) {
            for (int kk : nb) {
                int i = static_cast<int>(edges_[kk].u), j = static_cast<int>(edges_[kk].v);
                if (inblossom_[j] == b) std::swap(i, j);
                int bj = inblossom_[j];
                if (bj != b && label_[bj] == 1 &&
                    (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj]))) {
                    bestedgeto[bj] = kk;
                }
            }
        }
        has_bbe_[sub] = 0;
        blossombestedges_[sub].clear();
        bestedge_[sub] = -1;
    }
    blossombestedges_[b].clear();
    for (int kk : bestedgeto) {
        if (kk != -1) blossombestedges_[b].push_back(kk);
    }
    has_bbe_[b] = 1;
    bestedge_[b] = -1;
    for (int kk : blossombestedges_[b]) {
        if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b])) bestedge_[b] = kk;
    }
}

void Blossom::expand_blossom(int b, bool endstage) {
    std::vector<int> childs = blossomchilds_[b];
    for (int s : childs) {
        blossomparent_[s] = -1;
        if (s < n_) {
            inblossom_[s] = s;
        } else if (endstage && dual_[s] == 0) {
            expand_blossom(s, endstage);
        } else {
            for (int x : leaves(s)) inblossom_[x] = s;
        }
    }
    if (!endstage && label_[b] == 2) {
        const auto &ch = blossomchilds_[b];
        const auto &ep = blossomendps_[b];
        int len = static_cast<int>(ch.size());
        auto at = [len](const std::vector<int> &v, int j) { return v[((j % len) + len) % len]; };
        int entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
        int j = static_cast<int>(std::find(ch.begin(), ch.end(), entrychild) - ch.begin());
        int jstep, endptrick;
        if (j & 1) {
            j -= len;
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        int p = labelend_[b];
        while (j != 0) {
            label_[endpoint_[p ^ 1]] = 0;
            label_[endpoint_[at(ep, j - endptrick) ^ endptrick ^ 1]] = 0;
            assign_label(endpoint_[p ^ 1], 2, p);
            allowedge_[at(ep, j - endptrick) / 2] = 1;
            j += jstep;
            p = at(ep, j - endptrick) ^ endptrick;
            allowedge_[p / 2] = 1;
            j += jstep;
        }
        int bv = at(ch, j);
        label_[endpoint_[p ^ 1]] = label_[bv] = 2;
        labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
        bestedge_[bv] = -1;
        j += jstep;
        while (at(ch, j) != entrychild) {
            bv = at(ch, j);
            if (label_[bv] == 1) {
                j += jstep;
                continue;
            }
            int found = -1;
            for (int x : leaves(bv)) {
                if (label_[x] != 0) {
                    found = x;
                    break;
                }
            }
            if (found != -1) {
                assert(label_[found] == 2 && inblossom_[found] == bv);
                label_[found] = 0;
                label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
                assign_label(found, 2, labelend_[found]);
            }
            j += jstep;
        }
    }
    label_[b] = labelend_[b] = -1;
    blossomchilds_[b].clear();
    blossomendps_[b].clear();
    blossombase_[b] = -1;
    blossombestedges_[b].clear();
    has_bbe_[b] = 0;
    bestedge_[b] = -1;
    unused_.push_back(b);
}

// Swaps matched/unmatched edges inside blossom b so that v becomes its base.
void Blossom::augment_blossom(int b, int v) {
    int t = v;
    while (blossomparent_[t] != b) t = blossomparent_[t];
    if (t >= n_) augment_blossom(t, v);
    auto &ch = blossomchilds_[b];
    auto &ep = blossomendps_[b];
    int len = static_cast<int>(ch.size());
    auto at = [len](const std::vector<int> &vec, int j) { return vec[((j % len) + len) % len]; };
    int i = static_cast<int>(std::find(ch.begin(), ch.end(), t) - ch.begin());
    int j = i;
    int jstep, endptrick;
    if (i & 1) {
        j -= len;
        jstep = 1;
        endptrick = 0;
    } else {
        jstep = -1;
        endptrick = 1;
    }
    while (j != 0) {
        j += jstep;
        t = at(ch, j);
        int p = at(ep, j - endptrick) ^ endptrick;
        if (t >= n_) augment_blossom(t, endpoint_[p]);
        j += jstep;
        t = at(ch, j);
        if (t >= n_) augment_blossom(t, endpoint_[p ^ 1]);
        mate_[endpoint_[p]] = p ^ 1;
        mate_[endpoint_[p ^ 1]] = p;
    }
    std::rotate(ch.begin(), ch.begin() + i, ch.end());
    std::rotate(ep.begin(), ep.begin() + i, ep.end());
    blossombase_[b] = blossombase_[ch[0]];
    assert(blossombase_[b] == v);
}

void Blossom::augment_matching(int k) {
    int v = static_cast<int>(edges_[k].u), w = static_cast<int>(edges_[k].v);
    std::pair<int, int> starts[2] = {{v, 2 * k + 1}, {w, 2 * k}};
    for (auto [s, p] : starts) {
        while (true) {
            int bs = inblossom_[s];
            assert(label_[bs] == 1);
            if (bs >= n_) augment_blossom(bs, s);
            mate_[s] = p;
            if (labelend_[bs] == -1) break;
            int t = endpoint_[labelend_[bs]];
            int bt = inblossom_[t];
            assert(label_[bt] == 2);
            s = endpoint_[labelend_[bt]];
            int j = endpoint_[labelend_[bt] ^ 1];
            if (bt >= n_) augment_blossom(bt, j);
            mate_[j] = labelend_[bt];
            p = labelend_[bt] ^ 1;
        }
    }
}

std::vector<int> Blossom::run() {
    int nedge = static_cast<int>(edges_.size());
    if (nedge == 0 || n_ == 0) return std::vector<int>(n_, -1);
    int64_t maxweight = 0;
    for (const auto &e : edges_) maxweight = std::max(maxweight, e.w);
    endpoint_.resize(2 * nedge);
    neighbend_.assign(n_, {});
    for (int k = 0; k < nedge; k++) {
        endpoint_[2 * k] = static_cast<int>(edges_[k].u);
        endpoint_[2 * k + 1] = static_cast<int>(edges_[k].v);
        neighbend_[edges_[k].u].push_back(2 * k + 1);
        neighbend_[edges_[k].v].push_back(2 * k);
    }
    mate_.assign(n_, -1);
    label_.assign(2 * n_, 0);
    labelend_.assign(2 * n_, -1);
    inblossom_.resize(n_);
    std::iota(inblossom_.begin(), inblossom_.end(), 0);
    blossomparent_.assign(2 * n_, -1);
    blossomchilds_.assign(2 * n_, {});
    blossomendps_.assign(2 * n_, {});
    blossombase_.assign(2 * n_, -1);
    for (int v = 0; v < n_; v++) blossombase_[v] = v;
    bestedge_.assign(2 * n_, -1);
    blossombestedges_.assign(2 * n_, {});
    has_bbe_.assign(2 * n_, 0);
    unused_.clear();
    for (int b = 2 * n_ - 1; b >= n_; b--) unused_.push_back(b);
    std::reverse(unused_.begin(), unused_.end());
    dual_.assign(2 * n_, 0);
    for (int v = 0; v < n_; v++) dual_[v] = maxweight;
    allowedge_.assign(nedge, 0);

    for (int stage = 0; stage < n_; stage++) {
        std::fill(label_.begin(), label_.end(), 0);
        std::fill(bestedge_.begin(), bestedge_.end(), -1);
        for (int b = n_; b < 2 * n_; b++) {
            blossombestedges_[b].clear();
            has_bbe_[b] = 0;
        }
        std::fill(allowedge_.begin(), allowedge_.end(), 0);
        queue_.clear();
        for (int v = 0; v < n_; v++) {
            if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);
        }
        bool augmented = false;
        while (true) {
            while (!queue_.empty() && !augmented) {
                int v = queue_.back();
                queue_.pop_back();
                assert(label_[inblossom_[v]] == 1);
                for (int p : neighbend_[v]) {
                    int k = p / 2;
                    int w = endpoint_[p];
                    if (inblossom_[v] == inblossom_[w]) continue;
                    int64_t kslack = 0;
                    if (!allowedge_[k]) {
                        kslack = slack(k);
                        if (kslack <= 0) allowedge_[k] = 1;
                    }
                    if (allowedge_[k]) {
                        if (label_[inblossom_[w]] == 0) {
                            assign_label(w, 2, p ^ 1);
                        } else if (label_[inblossom_[w]] == 1) {
                            int base = scan_blossom(v, w);
                            if (base >= 0) {
                                add_blossom(base, k);
                            } else {
                                augment_matching(k);
                                augmented = true;
                                break;
                            }
                        } else if (label_[w] == 0) {
                            assert(label_[inblossom_[w]] == 2);
                            label_[w] = 2;
                            labelend_[w] = p ^ 1;
                        }
                    } else if (label_[inblossom_[w]] == 1) {
                        int b = inblossom_[v];
                        if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
                    } else if (label_[w] == 0) {
                        if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
                    }
                }
            }
            if (augmented) break;

            int deltatype = -1, deltaedge = -1, deltablossom = -1;
            int64_t delta = 0;
            if (!maxcard_) {
                deltatype = 1;
                delta = *std::min_element(dual_.begin(), dual_.begin() + n_);
            }
            for (int v = 0; v < n_; v++) {
                if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
                    int64_t d = slack(bestedge_[v]);
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 2;
                        deltaedge = bestedge_[v];
                    }
                }
            }
            for (int b = 0; b < 2 * n_; b++) {
                if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
                    int64_t ks = slack(bestedge_[b]);
                    assert(ks % 2 == 0);
                    int64_t d = ks / 2;
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 3;
                        deltaedge = bestedge_[b];
                    }
                }
            }
            for (int b = n_; b < 2 * n_; b++) {
                if (blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 &&
                    (deltatype == -1 || dual_[b] < delta)) {
                    delta = dual_[b];
                    deltatype = 4;
                    deltablossom = b;
                }
            }
            if (deltatype == -1) {
                deltatype = 1;
                delta = std::max<int64_t>(0, *std::min_element(dual_.begin(), dual_.begin() + n_));
            }
            for (int v = 0; v < n_; v++) {
                int l = label_[inblossom_[v]];
                if (l == 1) {
                    dual_[v] -= delta;
                } else if (l == 2) {
                    dual_[v] += delta;
                }
            }
            for (int b = n_; b < 2 * n_; b++) {
                if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
                    if (label_[b] == 1) {
                        dual_[b] += delta;
                    } else if (label_[b] == 2) {
                        dual_[b] -= delta;
                    }
                }
            }
            if (deltatype == 1) break;
            if (deltatype == 2) {
                allowedge_[deltaedge] = 1;
                int i = static_cast<int>(edges_[deltaedge].u), j = static_cast<int>(edges_[deltaedge].v);
                if (label_[inblossom_[i]] == 0) std::swap(i, j);
                queue_.push_back(i);
            } else if (deltatype == 3) {
                allowedge_[deltaedge] = 1;
                queue_.push_back(static_cast<int>(edges_[deltaedge].u));
            } else {
                expand_blossom(deltablossom, false);
            }
        }
        if (!augmented) break;
        for (int b = n_; b < 2 * n_; b++) {
            if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 && dual_[b] == 0) {
                expand_blossom(b, true);
            }
        }
    }
    std::vector<int> out(n_, -1);
    for (int v = 0; v < n_; v++) {
        if (mate_[v] >= 0) out[v] = endpoint_[mate_[v]];
    }
    return out;
}

}  // namespace

std::vector<int> max_weight_matching(uint32_t num_vertices, const std::vector<WeightedEdge> &edges,
                                     bool max_cardinality) {
    for (const auto &e : edges) {
        if (e.u >= num_vertices || e.v >= num_vertices || e.u == e.v) {
            throw std::invalid_argument("max_weight_matching: bad edge endpoints");
        }
    }
    Blossom b(num_vertices, edges, max_cardinality);
    return b.run();
}

// ---------------------------------------------------------------------------
// Metric.

namespace {

// Dijkstra from `src` over g with quantized weights; fills dist/mask for all
// nodes. Ties are broken by node id through the heap key. Paths from a
// detector do not pass through the boundary node.
void dijkstra_full(const MatchingGraph &g, const std::vector<int64_t> &w, uint32_t src,
                   std::vector<int64_t> &dist, std::vector<uint64_t> &mask) {
    dist.assign(g.num_nodes(), kNoPath);
    mask.assign(g.num_nodes(), 0);
    using Item = std::pair<int64_t, uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[src] = 0;
    pq.push({0, src});
    while (!pq.empty()) {
        auto [du, u] = pq.top();
        pq.pop();
        if (du != dist[u]) continue;
        if (u == g.boundary() && u != src) continue;
        for (auto [v, e] : g.adj[u]) {
            int64_t nd = du + w[e];
            if (nd < dist[v]) {
                dist[v] = nd;
                mask[v] = mask[u] ^ g.edges[e].observables;
                pq.push({nd, v});
            }
        }
    }
}

std::vector<int64_t> quantized(const MatchingGraph &g) {
    std::vector<int64_t> w(g.edges.size());
    for (size_t e = 0; e < g.edges.size(); e++) {
        w[e] = quantize_weight(g.edges[e].weight);
        if (w[e] <= 0) throw MatchingError("matching graph has a nonpositive edge weight");
    }
    return w;
}

}  // namespace

DefectMetric all_pairs_defect_metric(const MatchingGraph &g, const std::vector<uint32_t> &defects) {
    auto w = quantized(g);
    DefectMetric m;
    m.defects = defects;
    size_t n = defects.size();
    m.dist.assign(n * n, kNoPath);
    m.mask.assign(n * n, 0);
    m.boundary_dist.assign(n, kNoPath);
    m.boundary_mask.assign(n, 0);
    std::vector<int64_t> dist;
    std::vector<uint64_t> mask;
    for (size_t i = 0; i < n; i++) {
        if (defects[i] >= g.num_detectors) throw MatchingError("defect id out of range");
        dijkstra_full(g, w, defects[i], dist, mask);
        bool reach = false;
        for (size_t j = 0; j < n; j++) {
            if (j == i) continue;
            m.dist[i * n + j] = dist[defects[j]];
            m.mask[i * n + j] = mask[defects[j]];
            reach |= dist[defects[j]] < kNoPath;
        }
        m.boundary_dist[i] = dist[g.boundary()];
        m.boundary_mask[i] = mask[g.boundary()];
        reach |= m.boundary_dist[i] < kNoPath;
        if (!reach) {
            throw MatchingError("defect D" + std::to_string(defects[i]) +
                                " reaches neither another defect nor the boundary");
        }
    }
    return m;
}

MatchResult mwpm(const DefectMetric &metric, uint32_t boundary_id) {
    MatchResult r;
    size_t n = metric.size();
    if (n == 0) return r;
    // Costs are turned into weights C - cost; with maximum cardinality every
    // perfect matching has n edges, so maximizing weight minimizes cost.
    int64_t maxc = 0;
    for (size_t i = 0; i < n; i++) {
        if (metric.boundary_dist[i] < kNoPath) maxc = std::max(maxc, metric.boundary_dist[i]);
        for (size_t j = i + 1; j < n; j++) {
            if (metric.d(i, j) < kNoPath) maxc = std::max(maxc, metric.d(i, j));
        }
    }
    int64_t C = maxc + 1;
    std::vector<WeightedEdge> edges;
    auto twin = [n](size_t i) { return static_cast<uint32_t>(n + i); };
    for (size_t i = 0; i < n; i++) {
        for (size_t j = i + 1; j < n; j++) {
            if (metric.d(i, j) < kNoPath) {
                edges.push_back({static_cast<uint32_t>(i), static_cast<uint32_t>(j), C - metric.d(i, j)});
            }
        }
    }
    for (size_t i = 0; i < n; i++) {
        if (metric.boundary_dist[i] < kNoPath) {
            edges.push_back({static_cast<uint32_t>(i), twin(i), C - metric.boundary_dist[i]});
        }
    }
    // Twins mirror the defect-defect edges at zero cost. Defects paired with
    // each other leave their twins to pair along the same edge, so a sparse
    // mirror is enough and avoids the large blossoms of a full twin clique.
    size_t mirrored = edges.size();
    for (size_t k = 0; k < mirrored; k++) {
        if (edges[k].v < n) edges.push_back({twin(edges[k].u), twin(edges[k].v), C});
    }
    auto mate = max_weight_matching(static_cast<uint32_t>(2 * n), edges, true);
    for (size_t i = 0; i < n; i++) {
        int j = mate[i];
        if (j < 0) throw MatchingError("no perfect matching exists for the defect set");
        size_t uj = static_cast<size_t>(j);
        if (uj < n) {
            if (uj < i) continue;
            r.pairs.push_back({std::min(metric.defects[i], metric.defects[uj]),
                               std::max(metric.defects[i], metric.defects[uj])});
            r.weight_units += metric.d(i, uj);
            r.observables ^= metric.m(i, uj);
        } else {
            r.pairs.push_back({metric.defects[i], boundary_id});
            r.weight_units += metric.boundary_dist[i];
            r.observables ^= metric.boundary_mask[i];
        }
    }
    std::sort(r.pairs.begin(), r.pairs.end());
    r.weight = static_cast<double>(r.weight_units) / kWeightScale;
    return r;
}

// ---------------------------------------------------------------------------
// Decoder.

Decoder::Decoder(const MatchingGraph &g) : g_(g), w_(quantized(g)) {
    dijkstra_full(g_, w_, g_.boundary(), bdist_, bmask_);
    // Detector-to-detector arcs only; boundary edges enter through bdist_.
    off_.assign(g_.num_nodes() + 1, 0);
    for (uint32_t u = 0; u < g_.num_detectors; u++) {
        for (auto [v, e] : g_.adj[u]) {
            if (v != g_.boundary()) off_[u + 1]++;
        }
    }
    for (size_t u = 0; u < g_.num_nodes(); u++) off_[u + 1] += off_[u];
    arcs_.resize(off_.back());
    std::vector<uint32_t> fill(off_.begin(), off_.end() - 1);
    for (uint32_t u = 0; u < g_.num_detectors; u++) {
        for (auto [v, e] : g_.adj[u]) {
            if (v != g_.boundary()) arcs_[fill[u]++] = {v, w_[e], g_.edges[e].observables};
        }
    }
    dist_.assign(g_.num_nodes(), kNoPath);
    pmask_.assign(g_.num_nodes(), 0);
    stamp_.assign(g_.num_nodes(), 0);
    slot_.assign(g_.num_nodes(), -1);
}

MatchResult Decoder::decode(const std::vector<uint32_t> &defects) {
    size_t n = defects.size();
    MatchResult out;
    if (n == 0) return out;
    for (size_t i = 0; i < n; i++) {
        if (defects[i] >= g_.num_detectors) throw MatchingError("defect id out of range");
        slot_[defects[i]] = static_cast<int32_t>(i);
    }
    // Useful pairs: strictly cheaper than sending both ends to the boundary.
    struct Pair {
        uint32_t i, j;
        int64_t d;
        uint64_t m;
    };
    std::vector<Pair> pairs;
    // Each pair is found from the end with the larger boundary distance, so
    // the search from defect i only has to reach b(i) + max b of the rest.
    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        int64_t ba = bdist_[defects[a]], bb = bdist_[defects[b]];
        return ba != bb ? ba > bb : defects[a] < defects[b];
    });
    std::vector<int32_t> rank(n);
    for (size_t r = 0; r < n; r++) rank[order[r]] = static_cast<int32_t>(r);
    std::vector<int64_t> rest_max(n + 1, 0);
    for (size_t r = n; r-- > 0;) rest_max[r] = std::max(rest_max[r + 1], bdist_[defects[order[r]]]);
    using Item = std::pair<int64_t, uint32_t>;
    auto &heap = heap_;
    auto cmp = std::greater<Item>();
    for (size_t r = 0; r < n; r++) {
        size_t i = order[r];
        uint32_t src = defects[i];
        int64_t bi = bdist_[src];
        int64_t later = r + 1 < n ? rest_max[r + 1] : 0;
        int64_t limit = (bi >= kNoPath || later >= kNoPath) ? kNoPath : bi + later;
        if (++epoch_ == 0) {
            std::fill(stamp_.begin(), stamp_.end(), 0);
            epoch_ = 1;
        }
        dist_[src] = 0;
        pmask_[src] = 0;
        stamp_[src] = epoch_;
        heap.clear();
        heap.push_back({0, src});
        bool reach = bi < kNoPath;
        while (!heap.empty()) {
            std::pop_heap(heap.begin(), heap.end(), cmp);
            auto [du, u] = heap.back();
            heap.pop_back();
            if (du != dist_[u]) continue;
            if (du >= limit) break;
            int64_t bu = bdist_[u];
            if (u != src && slot_[u] >= 0) {
                size_t j = static_cast<size_t>(slot_[u]);
                reach = true;
                bool useful = bi >= kNoPath || bu >= kNoPath || du < bi + bu;
                if (rank[j] > static_cast<int32_t>(r) && useful) {
                    pairs.push_back({static_cast<uint32_t>(std::min(i, j)), static_cast<uint32_t>(std::max(i, j)),
                                     du, pmask_[u]});
                }
            }
            // A useful partner v has b(v) <= b(x) + d(x, v) for every x on
            // its shortest path, so d(src, x) < b(src) + b(x) must hold there.
            if (u != src && bi < kNoPath && bu < kNoPath && du >= bi + bu) continue;
            for (uint32_t a = off_[u]; a < off_[u + 1]; a++) {
                const Arc &arc = arcs_[a];
                int64_t nd = du + arc.w;
                uint32_t v = arc.to;
                if (stamp_[v] != epoch_ || nd < dist_[v]) {
                    stamp_[v] = epoch_;
                    dist_[v] = nd;
                    pmask_[v] = pmask_[u] ^ arc.obs;
                    heap.push_back({nd, v});
                    std::push_heap(heap.begin(), heap.end(), cmp);
                }
            }
        }
        if (!reach) {
            for (auto d : defects) slot_[d] = -1;
            throw MatchingError("defect D" + std::to_string(src) +
                                " reaches neither another defect nor the boundary");
        }
    }
    for (auto d : defects) slot_[d] = -1;

    // Clusters of defects linked by useful pairs.
    std::vector<uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto &p : pairs) {
        uint32_t a = find(p.i), b = find(p.j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<std::vector<uint32_t>> members(n);
    for (uint32_t i = 0; i < n; i++) members[find(i)].push_back(i);
    std::vector<std::vector<size_t>> pairs_of(n);
    for (size_t k = 0; k < pairs.size(); k++) pairs_of[find(pairs[k].i)].push_back(k);

    for (uint32_t root = 0; root < n; root++) {
        const auto &mem = members[root];
        if (mem.empty()) continue;
        if (mem.size() == 1) {
            uint32_t d = defects[mem[0]];
            out.pairs.push_back({d, g_.boundary()});
            out.weight_units += bdist_[d];
            out.observables ^= bmask_[d];
            continue;
        }
        DefectMetric m;
        size_t k = mem.size();
        std::vector<int32_t> local(n, -1);
        for (size_t a = 0; a < k; a++) {
            local[mem[a]] = static_cast<int32_t>(a);
            m.defects.push_back(defects[mem[a]]);
            m.boundary_dist.push_back(bdist_[defects[mem[a]]]);
            m.boundary_mask.push_back(bmask_[defects[mem[a]]]);
        }
        m.dist.assign(k * k, kNoPath);
        m.mask.assign(k * k, 0);
        for (auto pk : pairs_of[root]) {
            const auto &p = pairs[pk];
            size_t a = static_cast<size_t>(local[p.i]), b = static_cast<size_t>(local[p.j]);
            m.dist[a * k + b] = m.dist[b * k + a] = p.d;
            m.mask[a * k + b] = m.mask[b * k + a] = p.m;
        }
        auto r = mwpm(m, g_.boundary());
        out.pairs.insert(out.pairs.end(), r.pairs.begin(), r.pairs.end());
        out.weight_units += r.weight_units;
        out.observables ^= r.observables;
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    out.weight = static_cast<double>(out.weight_units) / kWeightScale;
    return out;
}

std::vector<uint64_t> decode_batch(const MatchingGraph &g, const ShotBatch &batch, int workers) {
    if (batch.num_detectors != g.num_detectors) {
        throw std::invalid_argument("shot batch has " + std::to_string(batch.num_detectors) +
                                    " detectors, graph has " + std::to_string(g.num_detectors));
    }
    std::vector<uint64_t> pred(batch.num_shots, 0);
    size_t nw = static_cast<size_t>(std::max(1, workers));
    nw = std::min(nw, std::max<size_t>(1, batch.num_shots));
    auto work = [&](size_t first, size_t last) {
        Decoder dec(g);
        for (size_t s = first; s < last; s++) pred[s] = dec.predict(batch.fired(s));
    };
    if (nw == 1) {
        work(0, batch.num_shots);
        return pred;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nw);
    size_t chunk = (batch.num_shots + nw - 1) / nw;
    for (size_t t = 0; t < nw; t++) {
        size_t a = std::min(batch.num_shots, t * chunk), b = std::min(batch.num_shots, a + chunk);
        pool.emplace_back([&, a, b, t] {
            try {
                work(a, b);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto &th : pool) th.join();
    for (auto &e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return pred;
}

std::vector<uint8_t> pack_predictions(const std::vector<uint64_t> &pred, size_t num_observables) {
    size_t bits = pred.size() * num_observables;
    std::vector<uint8_t> out((bits + 7) / 8, 0);
    size_t k = 0;
    for (auto p : pred) {
        for (size_t o = 0; o < num_observables; o++, k++) {
            if ((p >> o) & 1) out[k / 8] |= static_cast<uint8_t>(1u << (k % 8));
        }
    }
    return out;
}

}  // namespace infodec
