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

#include "infodec/sim.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

namespace infodec {

namespace {

// Phase exponent contribution of multiplying row (x1, z1) into (x2, z2),
// summed over one word: +1 and -1 counts of the g function.
inline int g_word(uint64_t x1, uint64_t z1, uint64_t x2, uint64_t z2) {
    uint64_t y = x1 & z1, xo = x1 & ~z1, zo = ~x1 & z1;
    uint64_t plus = (y & z2 & ~x2) | (xo & z2 & x2) | (zo & x2 & ~z2);
    uint64_t minus = (y & x2 & ~z2) | (xo & z2 & ~x2) | (zo & x2 & z2);
    return std::popcount(plus) - std::popcount(minus);
}

inline void pauli_bits(uint8_t code, bool &x, bool &z) {
    x = code == 1 || code == 2;
    z = code == 2 || code == 3;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tableau

Tableau::Tableau(uint32_t n) : n_(n), w_((n + 63) / 64) {
    x_.assign((2 * n + 1) * w_, 0);
    z_.assign((2 * n + 1) * w_, 0);
    r_.assign(2 * n + 1, 0);
    for (uint32_t i = 0; i < n; i++) {
        xr(i)[i / 64] |= uint64_t{1} << (i % 64);
        zr(n + i)[i / 64] |= uint64_t{1} << (i % 64);
    }
}

void Tableau::h(uint32_t q) {
    size_t w = q / 64;
    uint64_t m = uint64_t{1} << (q % 64);
    for (size_t row = 0; row < 2 * n_; row++) {
        uint64_t &xw = xr(row)[w];
        uint64_t &zw = zr(row)[w];
        bool xb = xw & m, zb = zw & m;
        r_[row] ^= xb & zb;
        if (xb != zb) {
            xw ^= m;
            zw ^= m;
        }
    }
}

void Tableau::cx(uint32_t c, uint32_t t) {
    for (size_t row = 0; row < 2 * n_; row++) {
        bool xc = getx(row, c), zc = getz(row, c), xt = getx(row, t), zt = getz(row, t);
        r_[row] ^= xc & zt & (xt ^ zc ^ 1);
        if (xc) xr(row)[t / 64] ^= uint64_t{1} << (t % 64);
        if (zt) zr(row)[c / 64] ^= uint64_t{1} << (c % 64);
    }
}

void Tableau::x(uint32_t q) {
    for (size_t row = 0; row < 2 * n_; row++) r_[row] ^= getz(row, q);
}

void Tableau::z(uint32_t q) {
    for (size_t row = 0; row < 2 * n_; row++) r_[row] ^= getx(row, q);
}

void Tableau::rowsum(size_t h, size_t i) {
    int sum = 2 * r_[h] + 2 * r_[i];
    for (size_t k = 0; k < w_; k++) sum += g_word(xr(i)[k], zr(i)[k], xr(h)[k], zr(h)[k]);
    r_[h] = ((sum % 4) + 4) % 4 == 2;
    for (size_t k = 0; k < w_; k++) {
        xr(h)[k] ^= xr(i)[k];
        zr(h)[k] ^= zr(i)[k];
    }
}

bool Tableau::measure_z(uint32_t q, ShotRng &rng) {
    size_t p = 2 * n_;
    for (size_t row = n_; row < 2 * n_; row++) {
        if (getx(row, q)) {
            p = row;
            break;
        }
    }
    if (p < 2 * n_) {
        for (size_t row = 0; row < 2 * n_; row++) {
            if (row != p && getx(row, q)) rowsum(row, p);
        }
        std::copy(xr(p), xr(p) + w_, xr(p - n_));
        std::copy(zr(p), zr(p) + w_, zr(p - n_));
        r_[p - n_] = r_[p];
        std::fill(xr(p), xr(p) + w_, 0);
        std::fill(zr(p), zr(p) + w_, 0);
        zr(p)[q / 64] |= uint64_t{1} << (q % 64);
        r_[p] = rng.next_u64() & 1;
        return r_[p];
    }
    size_t s = 2 * n_;
    std::fill(xr(s), xr(s) + w_, 0);
    std::fill(zr(s), zr(s) + w_, 0);
    r_[s] = 0;
    for (size_t i = 0; i < n_; i++) {
        if (getx(i, q)) rowsum(s, i + n_);
    }
    return r_[s];
}

int Tableau::peek_z(uint32_t q) const {
    for (size_t row = n_; row < 2 * n_; row++) {
        if (getx(row, q)) return -1;
    }
    Tableau copy = *this;
    ShotRng dummy(0, 0);
    return copy.measure_z(q, dummy);
}

bool Tableau::measure_x(uint32_t q, ShotRng &rng) {
    h(q);
    bool m = measure_z(q, rng);
    h(q);
    return m;
}

void Tableau::reset_z(uint32_t q, ShotRng &rng) {
    if (measure_z(q, rng)) x(q);
}

void Tableau::reset_x(uint32_t q, ShotRng &rng) {
    h(q);
    reset_z(q, rng);
    h(q);
}

bool Tableau::check_invariants() const {
    auto anti = [&](size_t a, size_t b) {
        int c = 0;
        for (size_t k = 0; k < w_; k++) {
            c += std::popcount((xr(a)[k] & zr(b)[k]) ^ (zr(a)[k] & xr(b)[k]));
        }
        return c % 2 == 1;
    };
    for (size_t i = 0; i < n_; i++) {
        for (size_t j = 0; j < n_; j++) {
            if (anti(n_ + i, n_ + j)) return false;
            if (anti(i, n_ + j) != (i == j)) return false;
        }
    }
    return true;
}

namespace {

void apply_pauli(Tableau &t, uint32_t q, uint8_t code) {
    bool x, z;
    pauli_bits(code, x, z);
    if (x) t.x(q);
    if (z) t.z(q);
}

TableauResult run_tableau(const Circuit &c, uint64_t seed, uint64_t shot, bool noisy) {
    Tableau t(c.num_qubits());
    ShotRng rng(seed, shot);
    TableauResult res;
    res.observables.assign(c.num_observables(), 0);
    auto &meas = res.measurements;
    for (const auto &ins : c.instructions()) {
        const auto &tg = ins.targets;
        switch (ins.op) {
            case Op::ResetZ:
                for (auto q : tg) t.reset_z(q, rng);
                break;
            case Op::ResetX:
                for (auto q : tg) t.reset_x(q, rng);
                break;
            case Op::H:
                for (auto q : tg) t.h(q);
                break;
            case Op::CX:
                for (size_t i = 0; i + 1 < tg.size(); i += 2) t.cx(tg[i], tg[i + 1]);
                break;
            case Op::MeasureZ:
                for (auto q : tg) meas.push_back(t.measure_z(q, rng));
                break;
            case Op::MeasureX:
                for (auto q : tg) meas.push_back(t.measure_x(q, rng));
                break;
            case Op::Depolarize1:
                for (auto q : tg) {
                    if (noisy && rng.uniform_open0() <= ins.p) {
                        apply_pauli(t, q, 1 + rng.below(3));
                    }
                }
                break;
            case Op::Depolarize2:
                for (size_t i = 0; i + 1 < tg.size(); i += 2) {
                    if (noisy && rng.uniform_open0() <= ins.p) {
                        uint8_t comp = 1 + rng.below(15);
                        apply_pauli(t, tg[i], comp >> 2);
                        apply_pauli(t, tg[i + 1], comp & 3);
                    }
                }
                break;
            case Op::FlipX:
            case Op::FlipZ:
                for (auto q : tg) {
                    if (noisy && rng.uniform_open0() <= ins.p) {
                        apply_pauli(t, q, ins.op == Op::FlipX ? 1 : 3);
                    }
                }
                break;
            case Op::Tick:
                break;
            case Op::Detector: {
                uint8_t v = 0;
                for (auto lb : ins.lookback) v ^= meas[meas.size() - lb];
                res.detectors.push_back(v);
                break;
            }
            case Op::ObservableInclude: {
                uint8_t v = 0;
                for (auto lb : ins.lookback) v ^= meas[meas.size() - lb];
                res.observables[ins.observable] ^= v;
                break;
            }
        }
    }
    return res;
}

}  // namespace

TableauResult tableau_run(const Circuit &c, uint64_t seed, uint64_t shot) {
    return run_tableau(c, seed, shot, true);
}

TableauSampler::TableauSampler(const Circuit &c) : c_(c) {
    auto ref = run_tableau(c, 0, 0, false);
    ref_det_ = ref.detectors;
    ref_obs_ = ref.observables;
}

void TableauSampler::sample(uint64_t seed, uint64_t shot, std::vector<uint8_t> &events,
                            std::vector<uint8_t> &obs_flips) const {
    auto r = run_tableau(c_, seed, shot, true);
    events.resize(r.detectors.size());
    for (size_t k = 0; k < events.size(); k++) events[k] = r.detectors[k] ^ ref_det_[k];
    obs_flips.resize(r.observables.size());
    for (size_t k = 0; k < obs_flips.size(); k++) obs_flips[k] = r.observables[k] ^ ref_obs_[k];
}

// ---------------------------------------------------------------------------
// Reference analysis

bool AffineBit::has_coins() const {
    for (auto w : coins) {
        if (w) return true;
    }
    return false;
}

void AffineBit::xor_with(const AffineBit &o) {
    constant ^= o.constant;
    if (coins.size() < o.coins.size()) coins.resize(o.coins.size(), 0);
    for (size_t k = 0; k < o.coins.size(); k++) coins[k] ^= o.coins[k];
}

bool AffineBit::operator==(const AffineBit &o) const {
    if (constant != o.constant) return false;
    size_t n = std::max(coins.size(), o.coins.size());
    for (size_t k = 0; k < n; k++) {
        uint64_t a = k < coins.size() ? coins[k] : 0;
        uint64_t b = k < o.coins.size() ? o.coins[k] : 0;
        if (a != b) return false;
    }
    return true;
}

bool ReferenceAnalysis::detectors_deterministic() const {
    return nondeterministic_detectors().empty();
}

bool ReferenceAnalysis::observables_deterministic() const {
    for (const auto &o : observables) {
        if (o.has_coins()) return false;
    }
    return true;
}

std::vector<size_t> ReferenceAnalysis::nondeterministic_detectors() const {
    std::vector<size_t> out;
    for (size_t k = 0; k < detectors.size(); k++) {
        if (detectors[k].has_coins()) out.push_back(k);
    }
    return out;
}

namespace {

// Tableau whose sign bits are affine functions of coins.
class SymbolicTableau {
   public:
    explicit SymbolicTableau(uint32_t n) : n_(n), w_((n + 63) / 64) {
        x_.assign((2 * n + 1) * w_, 0);
        z_.assign((2 * n + 1) * w_, 0);
        r_.resize(2 * n + 1);
        for (uint32_t i = 0; i < n; i++) {
            x_[i * w_ + i / 64] |= uint64_t{1} << (i % 64);
            z_[(n + i) * w_ + i / 64] |= uint64_t{1} << (i % 64);
        }
    }
    size_t num_coins = 0;

    void h(uint32_t q) {
        uint64_t m = uint64_t{1} << (q % 64);
        for (size_t row = 0; row < 2 * n_; row++) {
            uint64_t &xw = x_[row * w_ + q / 64];
            uint64_t &zw = z_[row * w_ + q / 64];
            bool xb = xw & m, zb = zw & m;
            r_[row].constant ^= xb & zb;
            if (xb != zb) {
                xw ^= m;
                zw ^= m;
            }
        }
    }
    void cx(uint32_t c, uint32_t t) {
        for (size_t row = 0; row < 2 * n_; row++) {
            bool xc = gx(row, c), zc = gz(row, c), xt = gx(row, t), zt = gz(row, t);
            r_[row].constant ^= xc & zt & (xt ^ zc ^ 1);
            if (xc) x_[row * w_ + t / 64] ^= uint64_t{1} << (t % 64);
            if (zt) z_[row * w_ + c / 64] ^= uint64_t{1} << (c % 64);
        }
    }
    // Conditionally apply X (or Z) on q, controlled by `e`.
    void flip_signs(uint32_t q, bool pauli_x, const AffineBit &e) {
        for (size_t row = 0; row < 2 * n_; row++) {
            if (pauli_x ? gz(row, q) : gx(row, q)) r_[row].xor_with(e);
        }
    }
    AffineBit new_coin() {
        AffineBit b;
        b.coins.assign(num_coins / 64 + 1, 0);
        b.coins[num_coins / 64] |= uint64_t{1} << (num_coins % 64);
        num_coins++;
        return b;
    }
    AffineBit measure_z(uint32_t q) {
        size_t p = 2 * n_;
        for (size_t row = n_; row < 2 * n_; row++) {
            if (gx(row, q)) {
                p = row;
                break;
            }
        }
        if (p < 2 * n_) {
            for (size_t row = 0; row < 2 * n_; row++) {
                if (row != p && gx(row, q)) rowsum(row, p);
            }
            std::copy(&x_[p * w_], &x_[p * w_] + w_, &x_[(p - n_) * w_]);
            std::copy(&z_[p * w_], &z_[p * w_] + w_, &z_[(p - n_) * w_]);
            r_[p - n_] = r_[p];
            std::fill(&x_[p * w_], &x_[p * w_] + w_, 0);
            std::fill(&z_[p * w_], &z_[p * w_] + w_, 0);
            z_[p * w_ + q / 64] |= uint64_t{1} << (q % 64);
            r_[p] = new_coin();
            return r_[p];
        }
        size_t s = 2 * n_;
        std::fill(&x_[s * w_], &x_[s * w_] + w_, 0);
        std::fill(&z_[s * w_], &z_[s * w_] + w_, 0);
        r_[s] = AffineBit{};
        for (size_t i = 0; i < n_; i++) {
            if (gx(i, q)) rowsum(s, i + n_);
        }
        return r_[s];
    }

   private:
    uint32_t n_, w_;
    std::vector<uint64_t> x_, z_;
    std::vector<AffineBit> r_;
    bool gx(size_t row, uint32_t q) const { return (x_[row * w_ + q / 64] >> (q % 64)) & 1; }
    bool gz(size_t row, uint32_t q) const { return (z_[row * w_ + q / 64] >> (q % 64)) & 1; }
    void rowsum(size_t h, size_t i) {
        int sum = 0;
        for (size_t k = 0; k < w_; k++) {
            sum += g_word(x_[i * w_ + k], z_[i * w_ + k], x_[h * w_ + k], z_[h * w_ + k]);
        }
        r_[h].xor_with(r_[i]);
        r_[h].constant ^= ((sum % 4) + 4) % 4 == 2;
        for (size_t k = 0; k < w_; k++) {
            x_[h * w_ + k] ^= x_[i * w_ + k];
            z_[h * w_ + k] ^= z_[i * w_ + k];
        }
    }
};

}  // namespace

ReferenceAnalysis analyze_reference(const Circuit &c, const std::vector<uint32_t> &unknown_after_reset,
                                    const std::vector<PauliFrameInsertion> &pauli_frames) {
    SymbolicTableau t(c.num_qubits());
    std::vector<uint8_t> pending(c.num_qubits(), 0);
    for (auto q : unknown_after_reset) pending.at(q) = 1;
    ReferenceAnalysis a;
    auto &meas = a.measurements;
    a.observables.resize(c.num_observables());
    auto reset = [&](uint32_t q, bool xbasis) {
        if (xbasis) t.h(q);
        AffineBit m = t.measure_z(q);
        t.flip_signs(q, true, m);
        if (xbasis) t.h(q);
        if (pending[q]) {
            pending[q] = 0;
            t.flip_signs(q, !xbasis, t.new_coin());
        }
    };
    size_t next_frame = 0;
    const auto &ins_list = c.instructions();
    for (size_t k = 0; k <= ins_list.size(); k++) {
        while (next_frame < pauli_frames.size() && pauli_frames[next_frame].before == k) {
            size_t first = t.num_coins;
            for (auto q : pauli_frames[next_frame].qubits) {
                t.flip_signs(q, true, t.new_coin());
                t.flip_signs(q, false, t.new_coin());
            }
            a.frame_coins.push_back({first, t.num_coins});
            next_frame++;
        }
        if (k == ins_list.size()) break;
        const auto &ins = ins_list[k];
        const auto &tg = ins.targets;
        switch (ins.op) {
            case Op::ResetZ:
            case Op::ResetX:
                for (auto q : tg) reset(q, ins.op == Op::ResetX);
                break;
            case Op::H:
                for (auto q : tg) t.h(q);
                break;
            case Op::CX:
                for (size_t i = 0; i + 1 < tg.size(); i += 2) t.cx(tg[i], tg[i + 1]);
                break;
            case Op::MeasureZ:
                for (auto q : tg) meas.push_back(t.measure_z(q));
                break;
            case Op::MeasureX:
                for (auto q : tg) {
                    t.h(q);
                    meas.push_back(t.measure_z(q));
                    t.h(q);
                }
                break;
            case Op::Detector: {
                AffineBit v;
                for (auto lb : ins.lookback) v.xor_with(meas[meas.size() - lb]);
                a.detectors.push_back(std::move(v));
                break;
            }
            case Op::ObservableInclude:
                for (auto lb : ins.lookback) a.observables[ins.observable].xor_with(meas[meas.size() - lb]);
                break;
            default:
                break;  // noise and ticks
        }
    }
    a.num_coins = t.num_coins;
    return a;
}

// ---------------------------------------------------------------------------
// ShotBatch

std::vector<uint32_t> ShotBatch::fired(size_t shot) const {
    std::vector<uint32_t> out;
    size_t W = det_words();
    const uint64_t *row = &det_bits[shot * W];
    for (size_t k = 0; k < W; k++) {
        uint64_t w = row[k];
        while (w) {
            out.push_back(static_cast<uint32_t>(k * 64 + std::countr_zero(w)));
            w &= w - 1;
        }
    }
    return out;
}

namespace {

void put_u64(std::ostream &out, uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; i++) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

uint64_t get_u64(std::istream &in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char *>(b), 8);
    if (!in) throw std::runtime_error("truncated shot batch");
    uint64_t v = 0;
    for (int i = 0; i < 8; i++) v |= uint64_t{b[i]} << (8 * i);
    return v;
}

}  // namespace

void ShotBatch::write(std::ostream &out) const {
    out.write("IDSB", 4);
    const char ver[4] = {1, 0, 0, 0};
    out.write(ver, 4);
    put_u64(out, num_shots);
    put_u64(out, num_detectors);
    put_u64(out, num_observables);
    for (auto w : det_bits) put_u64(out, w);
    for (auto w : obs_bits) put_u64(out, w);
}

ShotBatch ShotBatch::read(std::istream &in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 4) != "IDSB" || magic[4] != 1) {
        throw std::runtime_error("not a shot batch file (bad magic or version)");
    }
    ShotBatch b;
    b.num_shots = get_u64(in);
    b.num_detectors = get_u64(in);
    b.num_observables = get_u64(in);
    b.det_bits.resize(b.num_shots * b.det_words());
    b.obs_bits.resize(b.num_shots * b.obs_words());
    for (auto &w : b.det_bits) w = get_u64(in);
    for (auto &w : b.obs_bits) w = get_u64(in);
    return b;
}

// ---------------------------------------------------------------------------
// Frame simulation core

namespace {

struct FrameEvent {
    uint32_t instr;
    uint32_t slot;
    uint32_t bit;
    uint8_t component;
    bool operator<(const FrameEvent &o) const {
        return instr != o.instr ? instr < o.instr : slot < o.slot;
    }
};

// Sweeps instructions [start, end) on 64 parallel frames. Detector words
// are written to det[k] for global detector index k.
struct FrameState {
    std::vector<uint64_t> x, z, rec, det, obs;
};

void sweep(const Circuit &c, size_t start, size_t meas0, size_t det0, const std::vector<FrameEvent> &ev,
           FrameState &st) {
    const auto &ins_list = c.instructions();
    size_t m = meas0, dk = det0, e = 0;
    auto inject = [&](uint32_t q, uint8_t code, uint64_t bit) {
        bool bx, bz;
        pauli_bits(code, bx, bz);
        if (bx) st.x[q] ^= bit;
        if (bz) st.z[q] ^= bit;
    };
    while (e < ev.size() && ev[e].instr < start) e++;
    for (size_t k = start; k < ins_list.size(); k++) {
        const auto &ins = ins_list[k];
        const auto &tg = ins.targets;
        switch (ins.op) {
            case Op::ResetZ:
            case Op::ResetX:
                for (auto q : tg) st.x[q] = st.z[q] = 0;
                break;
            case Op::H:
                for (auto q : tg) std::swap(st.x[q], st.z[q]);
                break;
            case Op::CX:
                for (size_t i = 0; i + 1 < tg.size(); i += 2) {
                    st.x[tg[i + 1]] ^= st.x[tg[i]];
                    st.z[tg[i]] ^= st.z[tg[i + 1]];
                }
                break;
            case Op::MeasureZ:
                for (auto q : tg) st.rec[m++] = st.x[q];
                break;
            case Op::MeasureX:
                for (auto q : tg) st.rec[m++] = st.z[q];
                break;
            case Op::Depolarize1:
            case Op::Depolarize2:
            case Op::FlipX:
            case Op::FlipZ:
                for (; e < ev.size() && ev[e].instr == k; e++) {
                    uint64_t bit = uint64_t{1} << ev[e].bit;
                    if (ins.op == Op::Depolarize2) {
                        inject(tg[2 * ev[e].slot], ev[e].component >> 2, bit);
                        inject(tg[2 * ev[e].slot + 1], ev[e].component & 3, bit);
                    } else {
                        inject(tg[ev[e].slot], ev[e].component, bit);
                    }
                }
                break;
            case Op::Tick:
                break;
            case Op::Detector: {
                uint64_t v = 0;
                for (auto lb : ins.lookback) v ^= st.rec[m - lb];
                st.det[dk++] = v;
                break;
            }
            case Op::ObservableInclude: {
                uint64_t v = 0;
                for (auto lb : ins.lookback) v ^= st.rec[m - lb];
                st.obs[ins.observable] ^= v;
                break;
            }
        }
    }
}

void reset_state(const Circuit &c, FrameState &st) {
    st.x.assign(c.num_qubits(), 0);
    st.z.assign(c.num_qubits(), 0);
    st.rec.assign(c.num_measurements(), 0);
    st.det.assign(c.num_detectors(), 0);
    st.obs.assign(c.num_observables(), 0);
}

}  // namespace

FrameSampler::FrameSampler(const Circuit &c, bool check_determinism) : c_(c) {
    if (check_determinism) {
        auto a = analyze_reference(c);
        auto bad = a.nondeterministic_detectors();
        if (!bad.empty()) {
            throw NondeterministicCircuit("detector " + std::to_string(bad[0]) +
                                          " is not deterministic without noise (" +
                                          std::to_string(bad.size()) + " in total)");
        }
        if (!a.observables_deterministic()) {
            throw NondeterministicCircuit("observable is not deterministic without noise");
        }
    }
    std::map<double, size_t> by_p;
    const auto &ins_list = c.instructions();
    for (size_t k = 0; k < ins_list.size(); k++) {
        const auto &ins = ins_list[k];
        if (!is_noise(ins.op) || ins.p <= 0) continue;
        size_t slots = ins.op == Op::Depolarize2 ? ins.targets.size() / 2 : ins.targets.size();
        auto it = by_p.find(ins.p);
        if (it == by_p.end()) {
            it = by_p.emplace(ins.p, groups_.size()).first;
            groups_.push_back({ins.p, {}});
        }
        for (size_t s = 0; s < slots; s++) {
            groups_[it->second].sites.push_back({static_cast<uint32_t>(k), static_cast<uint32_t>(s)});
        }
    }
}

ShotBatch FrameSampler::sample(size_t shots, uint64_t seed, uint64_t first_shot) const {
    ShotBatch b;
    b.num_shots = shots;
    b.num_detectors = c_.num_detectors();
    b.num_observables = c_.num_observables();
    size_t W = b.det_words(), OW = b.obs_words();
    b.det_bits.assign(shots * W, 0);
    b.obs_bits.assign(shots * OW, 0);
    const auto &ins_list = c_.instructions();
    FrameState st;
    std::vector<FrameEvent> ev;
    for (size_t base = 0; base < shots; base += 64) {
        size_t lanes = std::min<size_t>(64, shots - base);
        ev.clear();
        for (size_t lane = 0; lane < lanes; lane++) {
            ShotRng rng(seed, first_shot + base + lane);
            for (const auto &g : groups_) {
                size_t n = g.sites.size();
                auto add = [&](size_t idx) {
                    const auto &site = g.sites[idx];
                    Op op = ins_list[site.instr].op;
                    uint8_t comp = op == Op::Depolarize1   ? 1 + rng.below(3)
                                   : op == Op::Depolarize2 ? 1 + rng.below(15)
                                   : op == Op::FlipX       ? 1
                                                           : 3;
                    ev.push_back({site.instr, site.slot, static_cast<uint32_t>(lane), comp});
                };
                if (g.p >= 1) {
                    for (size_t i = 0; i < n; i++) add(i);
                    continue;
                }
                double lq = std::log1p(-g.p);
                double pos = -1;
                while (true) {
                    pos += 1 + std::floor(std::log(rng.uniform_open0()) / lq);
                    if (pos >= static_cast<double>(n)) break;
                    add(static_cast<size_t>(pos));
                }
            }
        }
        std::sort(ev.begin(), ev.end());
        reset_state(c_, st);
        sweep(c_, 0, 0, 0, ev, st);
        for (size_t k = 0; k < st.det.size(); k++) {
            uint64_t w = st.det[k];
            while (w) {
                size_t lane = std::countr_zero(w);
                w &= w - 1;
                b.det_bits[(base + lane) * W + k / 64] |= uint64_t{1} << (k % 64);
            }
        }
        for (size_t o = 0; o < st.obs.size(); o++) {
            uint64_t w = st.obs[o];
            while (w) {
                size_t lane = std::countr_zero(w);
                w &= w - 1;
                b.obs_bits[(base + lane) * OW + o / 64] |= uint64_t{1} << (o % 64);
            }
        }
    }
    return b;
}

ShotBatch frame_sample(const Circuit &c, size_t shots, uint64_t seed) {
    return FrameSampler(c).sample(shots, seed);
}

// ---------------------------------------------------------------------------
// Fault propagation

Symptom xor_symptoms(const Symptom &a, const Symptom &b) {
    Symptom s;
    std::set_symmetric_difference(a.detectors.begin(), a.detectors.end(), b.detectors.begin(),
                                  b.detectors.end(), std::back_inserter(s.detectors));
    s.observables = a.observables ^ b.observables;
    return s;
}

std::vector<FaultSite> enumerate_fault_sites(const Circuit &c) {
    std::vector<FaultSite> out;
    const auto &ins_list = c.instructions();
    for (size_t k = 0; k < ins_list.size(); k++) {
        const auto &ins = ins_list[k];
        if (!is_noise(ins.op) || ins.p <= 0) continue;
        auto i = static_cast<uint32_t>(k);
        switch (ins.op) {
            case Op::Depolarize1:
                for (uint32_t s = 0; s < ins.targets.size(); s++) {
                    for (uint8_t comp = 1; comp <= 3; comp++) out.push_back({i, s, comp, ins.p / 3});
                }
                break;
            case Op::Depolarize2:
                for (uint32_t s = 0; s < ins.targets.size() / 2; s++) {
                    for (uint8_t comp = 1; comp <= 15; comp++) out.push_back({i, s, comp, ins.p / 15});
                }
                break;
            case Op::FlipX:
                for (uint32_t s = 0; s < ins.targets.size(); s++) out.push_back({i, s, 1, ins.p});
                break;
            case Op::FlipZ:
                for (uint32_t s = 0; s < ins.targets.size(); s++) out.push_back({i, s, 3, ins.p});
                break;
            default:
                break;
        }
    }
    return out;
}

namespace {

struct Prefix {
    std::vector<size_t> meas, det;
};

Prefix prefix_counts(const Circuit &c) {
    Prefix p;
    size_t m = 0, d = 0;
    for (const auto &ins : c.instructions()) {
        p.meas.push_back(m);
        p.det.push_back(d);
        if (is_measurement(ins.op)) m += ins.targets.size();
        if (ins.op == Op::Detector) d++;
    }
    p.meas.push_back(m);
    p.det.push_back(d);
    return p;
}

}  // namespace

std::vector<Symptom> propagate_faults(const Circuit &c, const std::vector<FaultSite> &faults) {
    std::vector<Symptom> out(faults.size());
    std::vector<size_t> order(faults.size());
    for (size_t i = 0; i < order.size(); i++) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return faults[a].instr < faults[b].instr; });
    Prefix pre = prefix_counts(c);
    FrameState st;
    std::vector<FrameEvent> ev;
    for (size_t base = 0; base < order.size(); base += 64) {
        size_t lanes = std::min<size_t>(64, order.size() - base);
        ev.clear();
        for (size_t lane = 0; lane < lanes; lane++) {
            const auto &f = faults[order[base + lane]];
            ev.push_back({f.instr, f.slot, static_cast<uint32_t>(lane), f.component});
        }
        std::sort(ev.begin(), ev.end());
        size_t start = ev.front().instr;
        reset_state(c, st);
        sweep(c, start, pre.meas[start], pre.det[start], ev, st);
        for (size_t k = pre.det[start]; k < st.det.size(); k++) {
            uint64_t w = st.det[k];
            while (w) {
                size_t lane = std::countr_zero(w);
                w &= w - 1;
                out[order[base + lane]].detectors.push_back(static_cast<uint32_t>(k));
            }
        }
        for (size_t o = 0; o < st.obs.size(); o++) {
            uint64_t w = st.obs[o];
            while (w) {
                size_t lane = std::countr_zero(w);
                w &= w - 1;
                out[order[base + lane]].observables |= uint64_t{1} << o;
            }
        }
    }
    return out;
}

Symptom propagate_fault(const Circuit &c, const FaultSite &f) { return propagate_faults(c, {f})[0]; }

Symptom propagate_fault_set(const Circuit &c, const std::vector<FaultSite> &faults) {
    Symptom s;
    if (faults.empty()) return s;
    std::vector<FrameEvent> ev;
    for (const auto &f : faults) ev.push_back({f.instr, f.slot, 0, f.component});
    std::sort(ev.begin(), ev.end());
    FrameState st;
    reset_state(c, st);
    sweep(c, 0, 0, 0, ev, st);
    for (size_t k = 0; k < st.det.size(); k++) {
        if (st.det[k] & 1) s.detectors.push_back(static_cast<uint32_t>(k));
    }
    for (size_t o = 0; o < st.obs.size(); o++) {
        if (st.obs[o] & 1) s.observables |= uint64_t{1} << o;
    }
    return s;
}

std::vector<Symptom> merged_symptoms(const Circuit &c) {
    auto all = propagate_faults(c, enumerate_fault_sites(c));
    std::set<Symptom> uniq;
    for (auto &s : all) {
        if (!s.empty()) uniq.insert(std::move(s));
    }
    return {uniq.begin(), uniq.end()};
}

void enumerate_faults(const std::vector<Symptom> &mechanisms, int max_weight,
                      const std::function<void(const FaultSetView &)> &fn) {
    if (max_weight != 1 && max_weight != 2) throw std::invalid_argument("max_weight must be 1 or 2");
    FaultSetView v;
    for (size_t i = 0; i < mechanisms.size(); i++) {
        if (max_weight == 1) {
            v.members = {i};
            v.symptom = mechanisms[i];
            fn(v);
            continue;
        }
        for (size_t j = i + 1; j < mechanisms.size(); j++) {
            v.members = {i, j};
            v.symptom = xor_symptoms(mechanisms[i], mechanisms[j]);
            fn(v);
        }
    }
}

}  // namespace infodec
