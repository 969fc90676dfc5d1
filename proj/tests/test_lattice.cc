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

#include <map>
#include <set>

#include "doctest.h"
#include "infodec/lattice.h"

using namespace infodec;

TEST_CASE("lattice sizes") {
    for (int d : {3, 5, 7, 9, 11}) {
        auto L = Lattice::build(d);
        CAPTURE(d);
        CHECK(L.data.size() == size_t(d * d));
        CHECK(L.stabilizers.size() == size_t(d * d - 1));
        CHECK(L.z_rows.size() == size_t(d - 1));
        CHECK(L.x_cols.size() == size_t(d - 1));
        CHECK(L.t() == (d - 1) / 2);
        CHECK(L.logical_x_support.size() == size_t(d));
        CHECK(L.logical_z_support.size() == size_t(d));
        CHECK(L.right_boundary_ancillas.size() == size_t(d - 1));
        CHECK(L.bottom_boundary_ancillas.size() == size_t(d - 1));
    }
}

TEST_CASE("rejects bad distances") {
    CHECK_THROWS(Lattice::build(4));
    CHECK_THROWS(Lattice::build(1));
}

TEST_CASE("coordinates and supports") {
    auto L = Lattice::build(5);
    for (const auto &c : L.data) {
        CHECK(c.x % 2 == 0);
        CHECK(c.y % 2 == 0);
    }
    int bulk = 0, edge = 0;
    for (const auto &s : L.stabilizers) {
        CHECK(s.ancilla.x % 2 != 0);
        CHECK(s.ancilla.y % 2 != 0);
        CHECK(s.support.size() == s.local_index.size());
        for (const auto &q : s.support) {
            CHECK(std::abs(q.x - s.ancilla.x) == 1);
            CHECK(std::abs(q.y - s.ancilla.y) == 1);
        }
        if (s.support.size() == 4) {
            bulk++;
            CHECK(L.edge_of(s.ancilla) == Edge::Bulk);
        } else {
            REQUIRE(s.support.size() == 2);
            edge++;
        }
    }
    CHECK(bulk == 16);
    CHECK(edge == 8);
}

TEST_CASE("checkerboard coloring") {
    auto L = Lattice::build(7);
    std::map<Coord, PauliKind> kind;
    for (const auto &s : L.stabilizers) kind[s.ancilla] = s.kind;
    for (const auto &s : L.stabilizers) {
        for (Coord n : {Coord{s.ancilla.x + 2, s.ancilla.y}, Coord{s.ancilla.x, s.ancilla.y + 2}}) {
            auto it = kind.find(n);
            if (it != kind.end()) CHECK(it->second != s.kind);
        }
    }
}

TEST_CASE("stabilizers commute and logicals behave") {
    for (int d : {3, 5, 7, 9, 11}) {
        auto L = Lattice::build(d);
        CAPTURE(d);
        for (size_t i = 0; i < L.stabilizers.size(); i++) {
            const auto &a = L.stabilizers[i];
            for (size_t j = i + 1; j < L.stabilizers.size(); j++) {
                const auto &b = L.stabilizers[j];
                REQUIRE(commutes(a.support, a.kind, b.support, b.kind));
            }
            CHECK(commutes(a.support, a.kind, L.logical_x_support, PauliKind::X));
            CHECK(commutes(a.support, a.kind, L.logical_z_support, PauliKind::Z));
        }
        CHECK_FALSE(commutes(L.logical_x_support, PauliKind::X, L.logical_z_support, PauliKind::Z));
        std::set<Coord> xs(L.logical_x_support.begin(), L.logical_x_support.end());
        int both = 0;
        for (const auto &c : L.logical_z_support) both += xs.count(c);
        CHECK(both == 1);
    }
}

TEST_CASE("commutes on disjoint supports") {
    CHECK(commutes({{0, 0}}, PauliKind::X, {{2, 0}}, PauliKind::Z));
    CHECK_FALSE(commutes({{0, 0}}, PauliKind::X, {{0, 0}}, PauliKind::Z));
    CHECK(commutes({{0, 0}}, PauliKind::X, {{0, 0}}, PauliKind::X));
}

TEST_CASE("local index convention") {
    auto L = Lattice::build(5);
    // 1 upper-left, 2 upper-right, 3 lower-left, 4 lower-right.
    for (const auto &s : L.stabilizers) {
        for (size_t k = 0; k < s.support.size(); k++) {
            CHECK(corner_of(s.ancilla, s.local_index[k]) == s.support[k]);
        }
    }
    CHECK(corner_of({3, 3}, 1) == Coord{2, 2});
    CHECK(corner_of({3, 3}, 2) == Coord{4, 2});
    CHECK(corner_of({3, 3}, 3) == Coord{2, 4});
    CHECK(corner_of({3, 3}, 4) == Coord{4, 4});
    // Each data qubit carries a given label in at most one plaquette.
    std::map<std::pair<Coord, int>, int> uses;
    for (const auto &s : L.stabilizers) {
        for (size_t k = 0; k < s.support.size(); k++) uses[{s.support[k], s.local_index[k]}]++;
    }
    for (const auto &[key, n] : uses) CHECK(n == 1);
}

TEST_CASE("row and column sets partition the bulk ancillas") {
    for (int d : {3, 5, 7}) {
        auto L = Lattice::build(d);
        std::set<Coord> zs, xs;
        for (size_t r = 0; r < L.z_rows.size(); r++) {
            for (const auto &a : L.z_rows[r]) {
                CHECK(a.y == int(2 * r + 1));
                CHECK(zs.insert(a).second);
            }
        }
        for (size_t c = 0; c < L.x_cols.size(); c++) {
            for (const auto &a : L.x_cols[c]) {
                CHECK(a.x == int(2 * c + 1));
                CHECK(xs.insert(a).second);
            }
        }
        size_t nz = 0, nx = 0;
        for (const auto &s : L.stabilizers) {
            if (s.kind == PauliKind::Z) {
                nz++;
                CHECK(zs.count(s.ancilla) == 1);
            } else {
                nx++;
                CHECK(xs.count(s.ancilla) == 1);
            }
        }
        CHECK(zs.size() == nz);
        CHECK(xs.size() == nx);
    }
}

TEST_CASE("boundary sets touch the right and bottom edges") {
    auto L = Lattice::build(7);
    for (const auto &a : L.right_boundary_ancillas) {
        CHECK(a.x == 2 * 7 - 1);
        CHECK(L.edge_of(a) == Edge::Right);
    }
    for (const auto &a : L.bottom_boundary_ancillas) {
        CHECK(a.y == 2 * 7 - 1);
        CHECK(L.edge_of(a) == Edge::Bottom);
    }
}

TEST_CASE("colorings alternate") {
    auto L = Lattice::build(5);
    auto s0 = L.stabilizers_at(0);
    auto s2 = L.stabilizers_at(2);
    REQUIRE(s0.size() == s2.size());
    for (size_t i = 0; i < s0.size(); i++) {
        CHECK(s0[i].ancilla == s2[i].ancilla);
        CHECK(s0[i].kind == s2[i].kind);
    }
    for (const auto &s : L.stabilizers_at(1)) {
        if (L.edge_of(s.ancilla) == Edge::Bulk) CHECK(L.kind_at(s.ancilla, 0) != s.kind);
    }
}
