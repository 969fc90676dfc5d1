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

#ifndef INFODEC_CIRCUIT_H_
#define INFODEC_CIRCUIT_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace infodec {

enum class Op : uint8_t {
    ResetZ,
    ResetX,
    H,
    CX,
    MeasureZ,
    MeasureX,
    Depolarize1,
    Depolarize2,
    FlipX,
    FlipZ,
    Tick,
    Detector,
    ObservableInclude,
};

std::string_view op_name(Op op);
bool is_noise(Op op);
bool is_measurement(Op op);

struct Instruction {
    Op op = Op::Tick;
    // Qubit targets. CX and Depolarize2 take consecutive pairs; measurements
    // take exactly one target.
    std::vector<uint32_t> targets;
    double p = 0;
    // Detector / ObservableInclude: rec[-k] look-backs, k >= 1, relative to
    // the number of measurements issued before this instruction.
    std::vector<uint32_t> lookback;
    uint32_t observable = 0;
    std::vector<int> coords;  // detector coordinates (x, y, round)
    std::string label;        // detector label, no whitespace

    bool operator==(const Instruction &) const = default;
};

struct ValidationError {
    size_t instruction;
    std::string message;
};

class ParseError : public std::runtime_error {
   public:
    ParseError(size_t line, std::string token, const std::string &what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what + " '" + token + "'"),
          line(line),
          token(std::move(token)) {}
    size_t line;
    std::string token;
};

class Circuit {
   public:
    explicit Circuit(uint32_t num_qubits = 0) : num_qubits_(num_qubits) {}

    void append(Instruction ins);
    // Convenience emitters.
    void gate(Op op, std::vector<uint32_t> targets, double p = 0);
    size_t measure(Op op, uint32_t qubit, double flip_p = 0);  // returns absolute index
    void tick() { gate(Op::Tick, {}); }
    void detector(const std::vector<size_t> &abs_meas, std::vector<int> coords,
                  std::string label);
    void observable(const std::vector<size_t> &abs_meas, uint32_t obs = 0);

    uint32_t num_qubits() const { return num_qubits_; }
    void set_num_qubits(uint32_t n) { num_qubits_ = n; }
    size_t num_measurements() const { return num_measurements_; }
    size_t num_detectors() const { return num_detectors_; }
    size_t num_observables() const { return num_observables_; }
    const std::vector<Instruction> &instructions() const { return instructions_; }

    std::vector<ValidationError> validate() const;

    std::string to_text() const;
    static Circuit from_text(std::string_view text);

    bool operator==(const Circuit &) const = default;

   private:
    uint32_t num_qubits_;
    std::vector<Instruction> instructions_;
    size_t num_measurements_ = 0;
    size_t num_detectors_ = 0;
    size_t num_observables_ = 0;
};

}  // namespace infodec

#endif  // INFODEC_CIRCUIT_H_
