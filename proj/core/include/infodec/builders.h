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

#ifndef INFODEC_BUILDERS_H_
#define INFODEC_BUILDERS_H_

#include <array>
#include <string>
#include <vector>

#include "infodec/circuit.h"
#include "infodec/lattice.h"

namespace infodec {

enum class CircuitKind : uint8_t { Standard, ThreeCX };
enum class Scheme : uint8_t { Areal, RowColumn, Boundary };
enum class Basis : uint8_t { Z, X };

std::string to_string(CircuitKind k);
std::string to_string(Scheme s);
std::string to_string(Basis b);
CircuitKind parse_circuit_kind(const std::string &s);  // "standard", "3cx"
Scheme parse_scheme(const std::string &s);             // "areal", "rowcolumn", "boundary"
Basis parse_basis(const std::string &s);

// A Pauli forced onto a data qubit at the start of noisy round `round`
// (0-based among the noisy rounds). pauli is 'X', 'Y' or 'Z'.
struct ForcedFault {
    int round = 0;
    Coord data;
    char pauli = 'X';
};

struct ExperimentSpec {
    int d = 3;
    CircuitKind circuit = CircuitKind::Standard;
    Scheme scheme = Scheme::Areal;
    Basis basis = Basis::Z;
    int noisy_rounds = 60;
    double p = 0;
    int flush_rounds = -1;  // -1: d for Boundary, 1 for 3CX Areal, 0 otherwise
    int tail_rounds = -1;   // noiseless rounds at the end; -1: d for Boundary, 1 otherwise
    std::vector<ForcedFault> forced;

    // Throws std::invalid_argument naming the violated constraint.
    void validate() const;
    int effective_flush() const;
    int effective_tail() const;
};

// For the 3CX circuit a "round" is one half (A or B) of the hex-grid cycle;
// each half measures d^2 - 1 stabilizers.
struct NoiseModel {
    double p = 0;
};

struct SiteMeasurement {
    Coord site;
    PauliKind kind;  // basis of the ancilla measurement
    size_t index;    // absolute measurement index
};

struct RoundRecord {
    size_t start = 0;  // index of the round's first instruction
    int phase = 0;
    bool noisy = false;
    std::vector<SiteMeasurement> meas;
    const SiteMeasurement *find(Coord site) const;
};

// Qubit numbering: data row-major in [0, d^2), then one ancilla per
// lattice site in `sites` order.
struct Layout {
    Lattice lattice;
    explicit Layout(int d) : lattice(Lattice::build(d)) {}
    uint32_t data_qubit(Coord c) const { return static_cast<uint32_t>(lattice.data_index(c)); }
    uint32_t ancilla_qubit(Coord site) const;
    uint32_t num_qubits() const {
        return static_cast<uint32_t>(lattice.data.size() + lattice.sites.size());
    }
};

// Local CNOT step of the 3CX plaquette schedule: corner index and direction.
struct ThreeCxStep {
    int corner;
    bool ancilla_controls;
};
// A: ancilla prepared in X, measured in Z. B is the mirror with X and Z swapped.
std::array<ThreeCxStep, 4> three_cx_schedule(char half);

// Appends one standard SE round (all stabilizers of the static code).
RoundRecord build_standard_round(Circuit &c, const Layout &lay, const NoiseModel &noise, bool noisy);

// Appends one 3CX half round starting from coloring `phase`. X-colored bulk
// squares run A, Z-colored ones run B. Afterwards the code is the coloring
// phase + 1, whose right and bottom half-plaquettes are measured in two
// trailing CNOT layers.
RoundRecord build_3cx_halfround(Circuit &c, const Layout &lay, int phase, const NoiseModel &noise,
                                bool noisy);

// Five-qubit circuit of one bulk plaquette running half `half` ('A' or 'B'):
// data qubits 0..3 are local corners 1..4, qubit 4 is the ancilla.
Circuit build_3cx_plaquette(char half);

struct MemoryExperiment {
    ExperimentSpec spec;
    Layout layout;
    Circuit circuit;
    std::vector<RoundRecord> rounds;
    int first_noisy = 0;  // index into rounds
    std::vector<size_t> data_meas;  // per data qubit, row-major
    size_t data_meas_start = 0;     // instruction index
    int final_phase = 0;
    explicit MemoryExperiment(const ExperimentSpec &s) : spec(s), layout(s.d) {}
};

// Memory circuit without annotations: data reset, flush and reference
// rounds, noisy rounds, noiseless tail rounds, data measurement.
MemoryExperiment build_memory_circuit(const ExperimentSpec &spec);
// Appends detectors and the observable for spec.scheme / spec.basis.
void attach_detectors(MemoryExperiment &exp);
MemoryExperiment build_memory_experiment(const ExperimentSpec &spec);

// Detectors fed by one bulk round under the scheme.
size_t detectors_per_round(Scheme scheme, int d);

}  // namespace infodec

#endif  // INFODEC_BUILDERS_H_
