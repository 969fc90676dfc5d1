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

#include "infodec/circuit.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>

namespace infodec {

namespace {

struct OpInfo {
    Op op;
    std::string_view name;
};

constexpr OpInfo kOps[] = {
    {Op::ResetZ, "RZ"},
    {Op::ResetX, "RX"},
    {Op::H, "H"},
    {Op::CX, "CX"},
    {Op::MeasureZ, "MZ"},
    {Op::MeasureX, "MX"},
    {Op::Depolarize1, "DEPOLARIZE1"},
    {Op::Depolarize2, "DEPOLARIZE2"},
    {Op::FlipX, "X_ERROR"},
    {Op::FlipZ, "Z_ERROR"},
    {Op::Tick, "TICK"},
    {Op::Detector, "DETECTOR"},
    {Op::ObservableInclude, "OBSERVABLE_INCLUDE"},
};

bool is_pair_op(Op op) { return op == Op::CX || op == Op::Depolarize2; }

bool is_gate(Op op) {
    return op == Op::ResetZ || op == Op::ResetX || op == Op::H || op == Op::CX || is_measurement(op);
}

std::string format_p(double p) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", p);
    return buf;
}

}  // namespace

std::string_view op_name(Op op) {
    for (const auto &o : kOps) {
        if (o.op == op) return o.name;
    }
    return "?";
}

bool is_noise(Op op) {
    return op == Op::Depolarize1 || op == Op::Depolarize2 || op == Op::FlipX || op == Op::FlipZ;
}

bool is_measurement(Op op) { return op == Op::MeasureZ || op == Op::MeasureX; }

void Circuit::append(Instruction ins) {
    if (is_measurement(ins.op)) num_measurements_ += ins.targets.size();
    if (ins.op == Op::Detector) num_detectors_++;
    if (ins.op == Op::ObservableInclude) {
        num_observables_ = std::max<size_t>(num_observables_, ins.observable + 1);
    }
    for (auto q : ins.targets) num_qubits_ = std::max(num_qubits_, q + 1);
    instructions_.push_back(std::move(ins));
}

void Circuit::gate(Op op, std::vector<uint32_t> targets, double p) {
    Instruction ins;
    ins.op = op;
    ins.targets = std::move(targets);
    ins.p = p;
    append(std::move(ins));
}

size_t Circuit::measure(Op op, uint32_t qubit, double flip_p) {
    if (flip_p > 0) gate(op == Op::MeasureZ ? Op::FlipX : Op::FlipZ, {qubit}, flip_p);
    gate(op, {qubit});
    return num_measurements_ - 1;
}

void Circuit::detector(const std::vector<size_t> &abs_meas, std::vector<int> coords,
                       std::string label) {
    Instruction ins;
    ins.op = Op::Detector;
    for (auto m : abs_meas) ins.lookback.push_back(static_cast<uint32_t>(num_measurements_ - m));
    std::sort(ins.lookback.begin(), ins.lookback.end());
    ins.coords = std::move(coords);
    ins.label = std::move(label);
    append(std::move(ins));
}

void Circuit::observable(const std::vector<size_t> &abs_meas, uint32_t obs) {
    Instruction ins;
    ins.op = Op::ObservableInclude;
    for (auto m : abs_meas) ins.lookback.push_back(static_cast<uint32_t>(num_measurements_ - m));
    std::sort(ins.lookback.begin(), ins.lookback.end());
    ins.observable = obs;
    append(std::move(ins));
}

std::vector<ValidationError> Circuit::validate() const {
    std::vector<ValidationError> errs;
    size_t meas = 0;
    std::set<uint32_t> layer;
    for (size_t k = 0; k < instructions_.size(); k++) {
        const auto &ins = instructions_[k];
        auto err = [&](const std::string &m) { errs.push_back({k, m}); };
        for (auto q : ins.targets) {
            if (q >= num_qubits_) {
                err("qubit " + std::to_string(q) + " out of range (num_qubits " +
                    std::to_string(num_qubits_) + ")");
            }
        }
        if (is_noise(ins.op) && !(ins.p >= 0 && ins.p <= 1)) {
            err("probability " + format_p(ins.p) + " outside [0, 1]");
        }
        if (is_pair_op(ins.op)) {
            if (ins.targets.size() % 2 != 0) err("odd number of targets for a two-qubit op");
            for (size_t i = 0; i + 1 < ins.targets.size(); i += 2) {
                if (ins.targets[i] == ins.targets[i + 1]) err("two-qubit op on a single qubit");
            }
        }
        if (is_measurement(ins.op) && ins.targets.size() != 1) {
            err("measurement must have exactly one target");
        }
        if ((ins.op == Op::Tick || ins.op == Op::Detector || ins.op == Op::ObservableInclude) &&
            !ins.targets.empty()) {
            err("annotation takes no qubit targets");
        }
        if (ins.op == Op::Detector || ins.op == Op::ObservableInclude) {
            for (auto lb : ins.lookback) {
                if (lb == 0 || lb > meas) {
                    err("rec[-" + std::to_string(lb) + "] does not resolve (" +
                        std::to_string(meas) + " measurements so far)");
                }
            }
        }
        if (ins.op == Op::Tick) layer.clear();
        if (is_gate(ins.op)) {
            for (auto q : ins.targets) {
                if (!layer.insert(q).second) {
                    err("qubit " + std::to_string(q) + " used twice in one tick layer");
                }
            }
        }
        if (is_measurement(ins.op)) meas += ins.targets.size();
    }
    return errs;
}

std::string Circuit::to_text() const {
    std::ostringstream out;
    out << "QUBITS " << num_qubits_ << "\n";
    for (const auto &ins : instructions_) {
        out << op_name(ins.op);
        if (is_noise(ins.op)) out << "(" << format_p(ins.p) << ")";
        if (ins.op == Op::Detector) {
            out << "(";
            for (size_t i = 0; i < ins.coords.size(); i++) out << (i ? "," : "") << ins.coords[i];
            out << ")";
            if (!ins.label.empty()) out << " " << ins.label;
        }
        if (ins.op == Op::ObservableInclude) out << "(" << ins.observable << ")";
        for (auto q : ins.targets) out << " " << q;
        for (auto lb : ins.lookback) out << " rec[-" << lb << "]";
        out << "\n";
    }
    return out.str();
}

namespace {

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) i++;
        size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') j++;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
bool parse_num(std::string_view s, T &v) {
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

}  // namespace

Circuit Circuit::from_text(std::string_view text) {
    Circuit c;
    std::optional<uint32_t> declared;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        line_no++;
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        auto toks = split_ws(line);
        if (toks.empty()) {
            if (nl == text.size()) break;
            continue;
        }
        std::string head = toks[0];
        std::string name = head;
        std::string arg;
        bool has_arg = false;
        if (auto lp = head.find('('); lp != std::string::npos) {
            if (head.back() != ')') throw ParseError(line_no, head, "unterminated argument list");
            name = head.substr(0, lp);
            arg = head.substr(lp + 1, head.size() - lp - 2);
            has_arg = true;
        }
        if (name == "QUBITS") {
            uint32_t n;
            if (toks.size() != 2 || !parse_num(toks[1], n)) {
                throw ParseError(line_no, toks.size() > 1 ? toks[1] : head, "bad qubit count");
            }
            declared = n;
            continue;
        }
        Instruction ins;
        bool found = false;
        for (const auto &o : kOps) {
            if (o.name == name) {
                ins.op = o.op;
                found = true;
            }
        }
        if (!found) throw ParseError(line_no, name, "unknown opcode");
        bool wants_arg = is_noise(ins.op) || ins.op == Op::Detector || ins.op == Op::ObservableInclude;
        if (wants_arg != has_arg) throw ParseError(line_no, head, "argument list mismatch");
        if (is_noise(ins.op)) {
            if (!parse_num(arg, ins.p)) throw ParseError(line_no, arg, "bad probability");
        } else if (ins.op == Op::Detector) {
            std::string cur;
            std::istringstream ss(arg);
            while (!arg.empty() && std::getline(ss, cur, ',')) {
                int v;
                if (!parse_num(cur, v)) throw ParseError(line_no, cur, "bad detector coordinate");
                ins.coords.push_back(v);
            }
        } else if (ins.op == Op::ObservableInclude) {
            if (!parse_num(arg, ins.observable)) throw ParseError(line_no, arg, "bad observable id");
        }
        size_t k = 1;
        if (ins.op == Op::Detector && k < toks.size() && toks[k].rfind("rec[", 0) != 0) {
            ins.label = toks[k++];
        }
        for (; k < toks.size(); k++) {
            const auto &t = toks[k];
            if (t.rfind("rec[-", 0) == 0 && t.back() == ']') {
                uint32_t lb;
                if (!parse_num(std::string_view(t).substr(5, t.size() - 6), lb)) {
                    throw ParseError(line_no, t, "bad measurement record");
                }
                if (ins.op != Op::Detector && ins.op != Op::ObservableInclude) {
                    throw ParseError(line_no, t, "record target on a gate");
                }
                ins.lookback.push_back(lb);
            } else {
                uint32_t q;
                if (!parse_num(t, q)) throw ParseError(line_no, t, "bad target");
                if (ins.op == Op::Detector || ins.op == Op::ObservableInclude || ins.op == Op::Tick) {
                    throw ParseError(line_no, t, "qubit target on an annotation");
                }
                ins.targets.push_back(q);
            }
        }
        c.append(std::move(ins));
        if (nl == text.size()) break;
    }
    if (declared) c.num_qubits_ = *declared;
    return c;
}

}  // namespace infodec
