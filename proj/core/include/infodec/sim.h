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

#ifndef INFODEC_SIM_H_
#define INFODEC_SIM_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "infodec/circuit.h"
#include "infodec/rng.h"

namespace infodec {

// ---------------------------------------------------------------------------
// Stabilizer tableau (Aaronson-Gottesman) with concrete sign bits.

class Tableau {
   public:
    explicit Tableau(uint32_t n);

    uint32_t num_qubits() const { return n_; }
    void h(uint32_t q);
    void cx(uint32_t c, uint32_t t);
    void x(uint32_t q);  // Pauli X applied to the state
    void z(uint32_t q);
    bool measure_z(uint32_t q, ShotRng &rng);
    bool measure_x(uint32_t q, ShotRng &rng);
    void reset_z(uint32_t q, ShotRng &rng);
    void reset_x(uint32_t q, ShotRng &rng);
    // Peek: returns 0/1 if Z_q is deterministic, -1 otherwise.
    int peek_z(uint32_t q) const;
    // Generators commute pairwise and destabilizer i anticommutes only with
    // stabilizer i.
    bool check_invariants() const;

   private:
    uint32_t n_, w_;
    std::vector<uint64_t> x_, z_;
    std::vector<uint8_t> r_;
    uint64_t *xr(size_t row) { return &x_[row * w_]; }
    uint64_t *zr(size_t row) { return &z_[row * w_]; }
    const uint64_t *xr(size_t row) const { return &x_[row * w_]; }
    const uint64_t *zr(size_t row) const { return &z_[row * w_]; }
    bool getx(size_t row, uint32_t q) const { return (x_[row * w_ + q / 64] >> (q % 64)) & 1; }
    bool getz(size_t row, uint32_t q) const { return (z_[row * w_ + q / 64] >> (q % 64)) & 1; }
    void rowsum(size_t h, size_t i);
    friend struct TableauTestAccess;
};

struct TableauResult {
    std::vector<uint8_t> measurements;
    std::vector<uint8_t> detectors;    // raw parities
    std::vector<uint8_t> observables;  // raw parities
};

// Full stabilizer simulation of one shot, noise sampled from (seed, shot).
TableauResult tableau_run(const Circuit &c, uint64_t seed, uint64_t shot = 0);

// Tableau sampler reporting detection events and observable flips relative
// to a noiseless reference, so its output is comparable with frame_sample.
class TableauSampler {
   public:
    explicit TableauSampler(const Circuit &c);
    void sample(uint64_t seed, uint64_t shot, std::vector<uint8_t> &events,
                std::vector<uint8_t> &obs_flips) const;

   private:
    const Circuit &c_;
    std::vector<uint8_t> ref_det_, ref_obs_;
};

// ---------------------------------------------------------------------------
// Noiseless reference analysis. Every measurement outcome is an affine
// function over GF(2) of independent fair coins; a detector or observable is
// deterministic iff its function has no coin terms.

struct AffineBit {
    bool constant = false;
    std::vector<uint64_t> coins;  // bitset, may be shorter than num_coins

    bool has_coins() const;
    void xor_with(const AffineBit &o);
    bool operator==(const AffineBit &o) const;
};

struct ReferenceAnalysis {
    size_t num_coins = 0;
    // Coin range [first, second) of each entry of `pauli_frames`.
    std::vector<std::pair<size_t, size_t>> frame_coins;
    std::vector<AffineBit> measurements;
    std::vector<AffineBit> detectors;
    std::vector<AffineBit> observables;

    bool detectors_deterministic() const;
    bool observables_deterministic() const;
    std::vector<size_t> nondeterministic_detectors() const;
};

// Random Pauli (independent X and Z coins per qubit) applied just before
// instruction `before`.
struct PauliFrameInsertion {
    size_t before = 0;
    std::vector<uint32_t> qubits;
};

// `unknown_after_reset` lists qubits whose state after their first reset is
// replaced by a uniformly random eigenstate of the reset basis.
// `pauli_frames` must be sorted by position. Detector construction uses both
// to find relations that hold for any encoded state and any earlier error.
ReferenceAnalysis analyze_reference(const Circuit &c,
                                    const std::vector<uint32_t> &unknown_after_reset = {},
                                    const std::vector<PauliFrameInsertion> &pauli_frames = {});

// ---------------------------------------------------------------------------
// Packed shot data. Rows are shot-major; each row is ceil(n/64) words.

struct ShotBatch {
    size_t num_shots = 0;
    size_t num_detectors = 0;
    size_t num_observables = 0;
    std::vector<uint64_t> det_bits;
    std::vector<uint64_t> obs_bits;

    size_t det_words() const { return (num_detectors + 63) / 64; }
    size_t obs_words() const { return (num_observables + 63) / 64; }
    bool det(size_t shot, size_t k) const {
        return (det_bits[shot * det_words() + k / 64] >> (k % 64)) & 1;
    }
    uint64_t obs_mask(size_t shot) const { return num_observables ? obs_bits[shot * obs_words()] : 0; }
    std::vector<uint32_t> fired(size_t shot) const;

    // Binary layout (little endian): magic "IDSB", u32 version = 1,
    // u64 shots, u64 detectors, u64 observables, then det_bits, then
    // obs_bits, each as u64 words in row order.
    void write(std::ostream &out) const;
    static ShotBatch read(std::istream &in);
};

class NondeterministicCircuit : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// Pauli-frame sampler. Construction checks noiseless determinism once.
class FrameSampler {
   public:
    explicit FrameSampler(const Circuit &c, bool check_determinism = true);
    // Samples shots [first_shot, first_shot + shots) of stream `seed`.
    ShotBatch sample(size_t shots, uint64_t seed, uint64_t first_shot = 0) const;

   private:
    struct NoiseSite {
        uint32_t instr;
        uint32_t slot;  // target index (pair index for two-qubit ops)
    };
    struct Group {
        double p;
        std::vector<NoiseSite> sites;
    };
    const Circuit &c_;
    std::vector<Group> groups_;
};

ShotBatch frame_sample(const Circuit &c, size_t shots, uint64_t seed);

// ---------------------------------------------------------------------------
// Single-fault propagation.

// Pauli code: 1 = X, 2 = Y, 3 = Z. Two-qubit components are 4 * first + second.
struct FaultSite {
    uint32_t instr = 0;
    uint32_t slot = 0;
    uint8_t component = 0;
    double p = 0;
    bool operator==(const FaultSite &) const = default;
};

struct Symptom {
    std::vector<uint32_t> detectors;  // sorted
    uint64_t observables = 0;
    bool empty() const { return detectors.empty() && observables == 0; }
    bool operator==(const Symptom &) const = default;
    auto operator<=>(const Symptom &) const = default;
};

Symptom xor_symptoms(const Symptom &a, const Symptom &b);

// Every component of every noise channel, in circuit order.
std::vector<FaultSite> enumerate_fault_sites(const Circuit &c);

Symptom propagate_fault(const Circuit &c, const FaultSite &f);
// Batched version: 64 faults per frame sweep.
std::vector<Symptom> propagate_faults(const Circuit &c, const std::vector<FaultSite> &faults);
// Symptom of a fixed set of simultaneous faults.
Symptom propagate_fault_set(const Circuit &c, const std::vector<FaultSite> &faults);

// Weight 1: each raw fault site with its symptom. Weight 2: each unordered
// pair of distinct merged mechanisms (faults grouped by identical symptom),
// with the XOR of their symptoms; the indices refer to `mechanisms`.
struct FaultSetView {
    std::vector<size_t> members;
    Symptom symptom;
};
void enumerate_faults(const std::vector<Symptom> &mechanisms, int max_weight,
                      const std::function<void(const FaultSetView &)> &fn);
// Distinct nonempty symptoms of all fault sites, sorted.
std::vector<Symptom> merged_symptoms(const Circuit &c);

}  // namespace infodec

#endif  // INFODEC_SIM_H_
