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

#include "infodec/lattice.h"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace infodec {

char pauli_char(PauliKind k) { return k == PauliKind::X ? 'X' : 'Z'; }

Coord square_ancilla(int i, int j) { return {2 * i + 1, 2 * j + 1}; }

Coord corner_of(Coord a, int local_index) {
    switch (local_index) {
        case 1: return {a.x - 1, a.y - 1};
        case 2: return {a.x + 1, a.y - 1};
        case 3: return {a.x - 1, a.y + 1};
        case 4: return {a.x + 1, a.y + 1};
    }
    throw std::invalid_argument("local index must be 1..4");
}

Lattice Lattice::build(int d) {
    if (d < 3 || d % 2 == 0) {
        throw std::invalid_argument("distance must be odd and >= 3, got " + std::to_string(d));
    }
    Lattice L;
    L.d = d;
    for (int j = 0; j < d; j++) {
        for (int i = 0; i < d; i++) L.data.push_back({2 * i, 2 * j});
    }
    for (int j = -1; j < d; j++) {
        for (int i = -1; i < d; i++) {
            Coord a = square_ancilla(i, j);
            if (L.edge_of(a) != Edge::Corner) L.sites.push_back(a);
        }
    }
    L.stabilizers = L.stabilizers_at(0);
    for (int j = 0; j < d; j++) L.logical_x_support.push_back({0, 2 * j});
    for (int i = 0; i < d; i++) L.logical_z_support.push_back({2 * i, 0});

    L.z_rows.resize(d - 1);
    L.x_cols.resize(d - 1);
    for (const auto &s : L.stabilizers) {
        if (s.kind == PauliKind::Z) {
            L.z_rows[(s.ancilla.y - 1) / 2].push_back(s.ancilla);
        } else {
            L.x_cols[(s.ancilla.x - 1) / 2].push_back(s.ancilla);
        }
    }
    for (const auto &a : L.sites) {
        Edge e = L.edge_of(a);
        if (e == Edge::Right) L.right_boundary_ancillas.push_back(a);
        if (e == Edge::Bottom) L.bottom_boundary_ancillas.push_back(a);
    }
    return L;
}

Edge Lattice::edge_of(Coord a) const {
    int i = (a.x - 1) / 2;
    int j = (a.y - 1) / 2;
    bool in_i = 0 <= i && i < d - 1;
    bool in_j = 0 <= j && j < d - 1;
    if (in_i && in_j) return Edge::Bulk;
    if (!in_i && !in_j) return Edge::Corner;
    if (j == -1) return Edge::Top;
    if (j == d - 1) return Edge::Bottom;
    if (i == -1) return Edge::Left;
    return Edge::Right;
}

bool Lattice::is_data(Coord c) const {
    return c.x >= 0 && c.y >= 0 && c.x <= 2 * (d - 1) && c.y <= 2 * (d - 1) && c.x % 2 == 0 &&
           c.y % 2 == 0;
}

int Lattice::data_index(Coord c) const {
    if (!is_data(c)) return -1;
    return (c.y / 2) * d + c.x / 2;
}

PauliKind Lattice::kind_at(Coord a, int phase) const {
    int i = (a.x - 1) / 2;
    int j = (a.y - 1) / 2;
    return ((i + j + phase) % 2 + 2) % 2 == 0 ? PauliKind::X : PauliKind::Z;
}

Stabilizer Lattice::make_stabilizer(Coord a, PauliKind kind) const {
    Stabilizer s{kind, a, {}, {}};
    for (int k = 1; k <= 4; k++) {
        Coord c = corner_of(a, k);
        if (is_data(c)) {
            s.support.push_back(c);
            s.local_index.push_back(k);
        }
    }
    return s;
}

std::vector<Stabilizer> Lattice::stabilizers_at(int phase) const {
    std::vector<Stabilizer> out;
    for (const auto &a : sites) {
        PauliKind k = kind_at(a, phase);
        Edge e = edge_of(a);
        bool keep = e == Edge::Bulk;
        // X half-plaquettes on the top and bottom edges, Z ones on the sides,
        // so X_L runs down the left column and Z_L along the top row.
        if ((e == Edge::Top || e == Edge::Bottom) && k == PauliKind::X) keep = true;
        if ((e == Edge::Left || e == Edge::Right) && k == PauliKind::Z) keep = true;
        if (keep) out.push_back(make_stabilizer(a, k));
    }
    return out;
}

std::string Lattice::dump() const {
    int n = 2 * d + 1;
    std::vector<std::string> grid(n, std::string(n, ' '));
    for (const auto &c : data) grid[c.y + 1][c.x + 1] = '.';
    for (const auto &s : stabilizers) {
        grid[s.ancilla.y + 1][s.ancilla.x + 1] = s.kind == PauliKind::X ? 'x' : 'z';
    }
    std::string out;
    for (auto &row : grid) {
        while (!row.empty() && row.back() == ' ') row.pop_back();
        out += row;
        out += '\n';
    }
    return out;
}

bool commutes(const std::vector<Coord> &a, PauliKind ka, const std::vector<Coord> &b,
              PauliKind kb) {
    if (ka == kb) return true;
    std::set<Coord> sa(a.begin(), a.end());
    int overlap = 0;
    for (const auto &c : std::set<Coord>(b.begin(), b.end())) overlap += sa.count(c);
    return overlap % 2 == 0;
}

}  // namespace infodec
