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

#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "infodec/builders.h"
#include "infodec/circuit.h"

using namespace infodec;

namespace {

std::string read_file(const std::string &path) {
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), "cannot open " << path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentSpec spec_of(int d, CircuitKind c, Scheme s, Basis b, int rounds, double p) {
    ExperimentSpec e;
    e.d = d;
    e.circuit = c;
    e.scheme = s;
    e.basis = b;
    e.noisy_rounds = rounds;
    e.p = p;
    return e;
}

}  // namespace

TEST_CASE("empty circuit validates") { CHECK(Circuit().validate().empty()); }

TEST_CASE("unresolvable record is reported at its instruction") {
    auto c = Circuit::from_text("QUBITS 3\nMZ 0\nMZ 1\nMZ 2\nDETECTOR(0) rec[-5]\n");
    auto errs = c.validate();
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].instruction == 3);
}

TEST_CASE("validate catches qubits, probabilities and reused qubits") {
    CHECK(Circuit::from_text("QUBITS 2\nH 2\n").validate().size() == 1);
    CHECK(Circuit::from_text("QUBITS 2\nX_ERROR(1.5) 0\n").validate().size() == 1);
    CHECK(Circuit::from_text("QUBITS 3\nCX 0 1 1 2\n").validate().size() >= 1);
    CHECK(Circuit::from_text("QUBITS 3\nCX 0 1\nTICK\nCX 1 2\n").validate().empty());
}

TEST_CASE("parse errors name line and token") {
    try {
        Circuit::from_text("QUBITS 2\nH 0\nFOO 1\n");
        FAIL("expected a parse error");
    } catch (const ParseError &e) {
        CHECK(e.line == 3);
        CHECK(e.token == "FOO");
        CHECK(std::string(e.what()).find("FOO") != std::string::npos);
    }
    CHECK_THROWS_AS(Circuit::from_text("H x\n"), ParseError);
    CHECK_THROWS_AS(Circuit::from_text("DEPOLARIZE1 0\n"), ParseError);
    CHECK_THROWS_AS(Circuit::from_text("MZ 0\nDETECTOR(1,2) rec[-a]\n"), ParseError);
    CHECK_THROWS_AS(Circuit::from_text("H rec[-1]\n"), ParseError);
}

TEST_CASE("comments and blank lines are ignored") {
    auto c = Circuit::from_text("# header\nQUBITS 2\n\nH 0  # trailing\nMZ 0\n");
    CHECK(c.instructions().size() == 2);
    CHECK(c.num_measurements() == 1);
}

TEST_CASE("counts follow the instructions") {
    Circuit c(3);
    c.gate(Op::ResetZ, {0, 1, 2});
    c.tick();
    c.gate(Op::CX, {0, 1}, 0);
    c.tick();
    auto m0 = c.measure(Op::MeasureZ, 0);
    auto m1 = c.measure(Op::MeasureX, 1, 0.01);
    c.detector({m0, m1}, {0, 0, 0}, "pair");
    c.observable({m1}, 0);
    CHECK(c.num_measurements() == 2);
    CHECK(c.num_detectors() == 1);
    CHECK(c.num_observables() == 1);
    CHECK(c.validate().empty());
}

TEST_CASE("round trip of generated circuits") {
    for (int d : {3, 5}) {
        for (auto ck : {CircuitKind::Standard, CircuitKind::ThreeCX}) {
            for (auto sc : {Scheme::Areal, Scheme::RowColumn, Scheme::Boundary}) {
                for (auto b : {Basis::Z, Basis::X}) {
                    auto spec = spec_of(d, ck, sc, b, 2 * d, 1e-3);
                    try {
                        spec.validate();
                    } catch (const std::invalid_argument &) {
                        continue;
                    }
                    auto exp = build_memory_experiment(spec);
                    CAPTURE(exp.circuit.num_detectors());
                    CHECK(exp.circuit.validate().empty());
                    auto text = exp.circuit.to_text();
                    auto back = Circuit::from_text(text);
                    CHECK(back == exp.circuit);
                    CHECK(back.to_text() == text);
                }
            }
        }
    }
}

TEST_CASE("golden circuits") {
    struct Golden {
        const char *file;
        ExperimentSpec spec;
    };
    Golden goldens[] = {
        {"standard_areal_d3_z.circuit", spec_of(3, CircuitKind::Standard, Scheme::Areal, Basis::Z, 2, 1e-3)},
        {"standard_rowcolumn_d3_x.circuit",
         spec_of(3, CircuitKind::Standard, Scheme::RowColumn, Basis::X, 2, 1e-3)},
        {"3cx_boundary_d3_z.circuit", spec_of(3, CircuitKind::ThreeCX, Scheme::Boundary, Basis::Z, 2, 1e-3)},
    };
    for (const auto &g : goldens) {
        CAPTURE(g.file);
        auto text = read_file(std::string(INFODEC_TEST_DATA_DIR) + "/" + g.file);
        CHECK(build_memory_experiment(g.spec).circuit.to_text() == text);
        CHECK(Circuit::from_text(text).to_text() == text);
    }
}
