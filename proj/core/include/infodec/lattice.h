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

#ifndef INFODEC_LATTICE_H_
#define INFODEC_LATTICE_H_

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace infodec {

// Doubled coordinates. Data qubits sit at (2i, 2j), ancillas at odd-odd
// points. x grows to the right, y grows downward.
struct Coord {
    int x = 0;
    int y = 0;
    auto operator<=>(const Coord &) const = default;
};

enum class PauliKind : uint8_t { X, Z };

char pauli_char(PauliKind k);

// Square with upper-left data corner (i, j); i, j range over [-1, d-1].
// Local corner labels: 1 = upper-left, 2 = upper-right, 3 = lower-left,
// 4 = lower-right.
Coord square_ancilla(int i, int j);
Coord corner_of(Coord ancilla, int local_index);

enum class Edge : uint8_t { Bulk, Top, Bottom, Left, Right, Corner };

struct Stabilizer {
    PauliKind kind;
    Coord ancilla;
    std::vector<Coord> support;     // sorted
    std::vector<int> local_index;   // parallel to support
};

class Lattice {
   public:
    static Lattice build(int d);

    int d = 0;
    int t() const { return (d - 1) / 2; }

    std::vector<Coord> data;               // row-major
    std::vector<Stabilizer> stabilizers;   // initial coloring
    std::vector<Coord> logical_x_support;  // leftmost column
    std::vector<Coord> logical_z_support;  // topmost row
    std::vector<std::vector<Coord>> z_rows;  // Z ancillas per data-row gap
    std::vector<std::vector<Coord>> x_cols;  // X ancillas per data-column gap
    // Every weight-2 ancilla site on the right / bottom edge. The dynamic
    // circuit activates each site on alternate half rounds, so these hold
    // d-1 sites each even though only half are stabilizers at any moment.
    std::vector<Coord> right_boundary_ancillas;
    std::vector<Coord> bottom_boundary_ancillas;
    // All ancilla sites used by either circuit family (no corner sites).
    std::vector<Coord> sites;

    Edge edge_of(Coord ancilla) const;
    bool is_data(Coord c) const;
    int data_index(Coord c) const;  // -1 if not a data coordinate
    // Plaquette kind of a site under coloring `phase`. Phase 0 is the
    // static code; the dynamic circuit flips every site each half round.
    PauliKind kind_at(Coord ancilla, int phase) const;
    // Stabilizers present under coloring `phase`, ordered like `sites`.
    std::vector<Stabilizer> stabilizers_at(int phase) const;
    Stabilizer make_stabilizer(Coord ancilla, PauliKind kind) const;

    // Text grid: '.' data, 'x' / 'z' ancillas, ' ' elsewhere.
    std::string dump() const;
};

// Symplectic check between two single-type Pauli products.
bool commutes(const std::vector<Coord> &a, PauliKind ka, const std::vector<Coord> &b,
              PauliKind kb);

}  // namespace infodec

#endif  // INFODEC_LATTICE_H_
