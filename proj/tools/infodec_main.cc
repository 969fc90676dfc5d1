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

// infodec command-line tool.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "infodec/builders.h"
#include "infodec/dem.h"
#include "infodec/harness.h"
#include "infodec/matcher.h"
#include "infodec/sim.h"

namespace {

using namespace infodec;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string circuit = "standard";
    std::string scheme = "areal";
    std::string basis = "Z";
    int d = 3;
    double p = 1e-3;
    size_t shots = 10000;
    uint64_t seed = 0;
    int rounds_mult = 20;
    int rounds = 0;  // explicit noisy rounds, 0 = rounds_mult * d
    int max_weight = 2;
    std::string out;
    std::string in;
    int workers = 0;
    bool no_wall_time = false;
    bool full_pairs = false;
    // sweep
    std::vector<std::string> circuits{"standard", "3cx"};
    std::vector<std::string> schemes{"areal", "rowcolumn", "boundary"};
    std::vector<int> ds{3, 5};
    std::vector<double> ps{2e-3, 5e-3, 1e-2};
};

int default_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n ? static_cast<int>(n) : 1;
}

ExperimentSpec make_spec(const Config &cfg, int default_mult) {
    ExperimentSpec s;
    s.d = cfg.d;
    s.circuit = parse_circuit_kind(cfg.circuit);
    s.scheme = parse_scheme(cfg.scheme);
    s.basis = parse_basis(cfg.basis);
    s.p = cfg.p;
    int mult = cfg.rounds_mult > 0 ? cfg.rounds_mult : default_mult;
    s.noisy_rounds = cfg.rounds > 0 ? cfg.rounds : mult * cfg.d;
    s.validate();
    return s;
}

// Writes to --out when given, stdout otherwise.
class Output {
   public:
    explicit Output(const std::string &path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw UsageError("cannot open --out file '" + path + "' for writing");
        }
    }
    std::ostream &stream() { return file_.is_open() ? file_ : std::cout; }

   private:
    std::ofstream file_;
};

int cmd_run(const Config &cfg) {
    ExperimentSpec spec = make_spec(cfg, 20);
    Output out(cfg.out);
    int workers = cfg.workers > 0 ? cfg.workers : default_workers();
    SweepRow row;
    row.cell = {spec.circuit, spec.scheme, spec.d, spec.p};
    row.rounds = spec.noisy_rounds;
    row.stats = run_memory(spec, cfg.shots, cfg.seed, workers);
    if (cfg.no_wall_time) row.stats.wall_s = 0;
    row.bits_per_round = bandwidth(spec).bits_per_round;
    write_csv(out.stream(), {row});
    return kExitOk;
}

int cmd_sweep(const Config &cfg) {
    std::vector<SweepCell> cells;
    for (const auto &cs : cfg.circuits) {
        CircuitKind ck = parse_circuit_kind(cs);
        for (const auto &ss : cfg.schemes) {
            Scheme sc = parse_scheme(ss);
            for (int d : cfg.ds) {
                for (double p : cfg.ps) {
                    ExperimentSpec s;
                    s.circuit = ck;
                    s.scheme = sc;
                    s.d = d;
                    s.p = p;
                    try {
                        s.validate();
                    } catch (const std::invalid_argument &e) {
                        // Invalid circuit/scheme combinations are skipped; bad
                        // d or p are errors.
                        std::string m = e.what();
                        if (m.find("requires") != std::string::npos) continue;
                        throw;
                    }
                    cells.push_back({ck, sc, d, p});
                }
            }
        }
    }
    if (cells.empty()) throw UsageError("sweep: no valid (circuit, scheme) combination selected");
    if (cfg.rounds_mult < 1) throw UsageError("--rounds-mult must be >= 1");
    Output out(cfg.out);
    int workers = cfg.workers > 0 ? cfg.workers : default_workers();
    auto rows = sweep(cells, cfg.shots, cfg.seed, cfg.rounds_mult, workers, !cfg.no_wall_time);
    write_csv(out.stream(), rows);
    return kExitOk;
}

int cmd_verify_distance(const Config &cfg) {
    bool ok = true;
    for (Basis b : {Basis::Z, Basis::X}) {
        ExperimentSpec spec = make_spec(cfg, 4);
        spec.basis = b;
        auto rep = verify_distance(spec);
        std::printf("%s %s d=%d basis=%s rounds=%d: circuit distance %d (expected %d) %s\n",
                    cfg.circuit.c_str(), cfg.scheme.c_str(), spec.d, to_string(b).c_str(),
                    spec.noisy_rounds, rep.distance, spec.d, rep.pass ? "PASS" : "FAIL");
        if (!rep.pass) {
            ok = false;
            for (const auto &w : rep.witness) std::printf("  witness: %s\n", w.c_str());
        }
    }
    return ok ? kExitOk : kExitFail;
}

int cmd_verify_faults(const Config &cfg) {
    if (cfg.max_weight < 1 || cfg.max_weight > 2) throw UsageError("--max-weight must be 1 or 2");
    bool ok = true;
    for (Basis b : {Basis::Z, Basis::X}) {
        ExperimentSpec spec = make_spec(cfg, 4);
        spec.basis = b;
        auto rep = verify_faults(spec, cfg.max_weight, cfg.full_pairs);
        std::printf(
            "%s %s d=%d basis=%s rounds=%d weight<=%d: %zu mechanisms, %zu singles, %zu/%zu pairs "
            "decoded %s\n",
            cfg.circuit.c_str(), cfg.scheme.c_str(), spec.d, to_string(b).c_str(), spec.noisy_rounds,
            cfg.max_weight, rep.mechanisms, rep.singles_checked, rep.pairs_checked, rep.pairs_total,
            rep.pass ? "PASS" : "FAIL");
        if (!rep.pass) {
            ok = false;
            for (const auto &c : rep.counterexamples) std::printf("  counterexample: %s\n", c.c_str());
        }
    }
    return ok ? kExitOk : kExitFail;
}

int cmd_bandwidth(const Config &cfg) {
    ExperimentSpec spec = make_spec(cfg, 20);
    auto rep = bandwidth(spec);
    Output out(cfg.out);
    out.stream() << "scheme,d,bits_per_round,ratio_vs_areal\n"
                 << to_string(rep.scheme) << ',' << rep.d << ',' << rep.bits_per_round << ','
                 << rep.ratio_vs_areal << '\n';
    return kExitOk;
}

int cmd_export(const Config &cfg) {
    ExperimentSpec spec = make_spec(cfg, 20);
    auto exp = build_memory_experiment(spec);
    Output out(cfg.out);
    out.stream() << exp.circuit.to_text();
    return kExitOk;
}

int cmd_sample(const Config &cfg) {
    if (cfg.out.empty()) throw UsageError("sample: --out is required (binary output)");
    ExperimentSpec spec = make_spec(cfg, 20);
    auto exp = build_memory_experiment(spec);
    auto batch = frame_sample(exp.circuit, cfg.shots, cfg.seed);
    Output out(cfg.out);
    batch.write(out.stream());
    return kExitOk;
}

int cmd_replay(const Config &cfg) {
    if (cfg.in.empty()) throw UsageError("replay: --in is required");
    if (cfg.out.empty()) throw UsageError("replay: --out is required (binary output)");
    ExperimentSpec spec = make_spec(cfg, 20);
    std::ifstream in(cfg.in, std::ios::binary);
    if (!in) throw UsageError("cannot open --in file '" + cfg.in + "'");
    ShotBatch batch = ShotBatch::read(in);
    auto exp = build_memory_experiment(spec);
    auto g = build_matching_graph(exp.circuit);
    if (batch.num_detectors != g.num_detectors || batch.num_observables != g.num_observables) {
        throw UsageError("replay: batch has " + std::to_string(batch.num_detectors) + " detectors and " +
                         std::to_string(batch.num_observables) + " observables, circuit has " +
                         std::to_string(g.num_detectors) + " and " + std::to_string(g.num_observables) +
                         "; pass the flags used for `sample`");
    }
    int workers = cfg.workers > 0 ? cfg.workers : default_workers();
    auto pred = decode_batch(g, batch, workers);
    auto bytes = pack_predictions(pred, batch.num_observables);
    Output out(cfg.out);
    out.stream().write(reinterpret_cast<const char *>(bytes.data()),
                       static_cast<std::streamsize>(bytes.size()));
    size_t fails = 0;
    for (size_t s = 0; s < batch.num_shots; ++s) fails += pred[s] != batch.obs_mask(s);
    std::fprintf(stderr, "decoded %zu shots, %zu logical errors\n", batch.num_shots, fails);
    return kExitOk;
}

void add_spec_flags(CLI::App *sub, Config &cfg, bool with_p, bool with_basis, int default_mult) {
    sub->add_option("--circuit", cfg.circuit, "Circuit kind: standard or 3cx")
        ->capture_default_str()
        ->check(CLI::IsMember({"standard", "3cx"}));
    sub->add_option("--scheme", cfg.scheme, "Detector scheme: areal, rowcolumn (standard only) or boundary (3cx only)")
        ->capture_default_str()
        ->check(CLI::IsMember({"areal", "rowcolumn", "boundary"}));
    sub->add_option("--d", cfg.d, "Code distance, odd and >= 3")->capture_default_str();
    if (with_p) {
        sub->add_option("--p", cfg.p, "Physical error rate, e.g. 1e-3")->capture_default_str();
    }
    if (with_basis) {
        sub->add_option("--basis", cfg.basis, "Memory basis: Z or X")
            ->capture_default_str()
            ->check(CLI::IsMember({"Z", "X", "z", "x"}));
    }
    sub->add_option("--rounds-mult", cfg.rounds_mult,
                    "Noisy rounds = rounds-mult * d (default " + std::to_string(default_mult) + ")");
    sub->add_option("--rounds", cfg.rounds, "Explicit number of noisy rounds; overrides --rounds-mult");
}

}  // namespace

int main(int argc, char **argv) {
    Config cfg;
    CLI::App app{"Syndrome-extraction memory experiments, verification and decoding"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    auto *run = app.add_subcommand("run", "Memory experiment (Z and X); one CSV row");
    add_spec_flags(run, cfg, true, false, 20);
    cfg.rounds_mult = 0;

    auto *sw = app.add_subcommand("sweep", "Grid of memory experiments; CSV");
    sw->add_option("--circuit", cfg.circuits, "Circuit kinds, comma separated")
        ->delimiter(',')
        ->capture_default_str()
        ->check(CLI::IsMember({"standard", "3cx"}));
    sw->add_option("--scheme", cfg.schemes, "Schemes, comma separated; invalid pairings are skipped")
        ->delimiter(',')
        ->capture_default_str()
        ->check(CLI::IsMember({"areal", "rowcolumn", "boundary"}));
    sw->add_option("--d", cfg.ds, "Distances, comma separated")->delimiter(',')->capture_default_str();
    sw->add_option("--p", cfg.ps, "Physical error rates, comma separated")->delimiter(',')->capture_default_str();
    sw->add_option("--rounds-mult", cfg.rounds_mult, "Noisy rounds = rounds-mult * d (default 20)");

    auto *vd = app.add_subcommand("verify-distance", "Circuit distance of both memory bases; exit 1 unless d");
    add_spec_flags(vd, cfg, false, false, 4);

    auto *vf = app.add_subcommand("verify-faults", "Decode every fault set up to --max-weight; exit 1 on a miss");
    add_spec_flags(vf, cfg, false, false, 4);
    vf->add_option("--max-weight", cfg.max_weight, "Largest fault set size, 1 or 2")->capture_default_str();
    vf->add_flag("--full-pairs", cfg.full_pairs, "Decode every pair, without the non-interacting pair shortcut");

    auto *bw = app.add_subcommand("bandwidth", "Syndrome bits per bulk round");
    add_spec_flags(bw, cfg, false, false, 20);

    auto *ex = app.add_subcommand("export-circuit", "Write the memory circuit in text form");
    add_spec_flags(ex, cfg, true, true, 20);

    auto *sa = app.add_subcommand("sample", "Sample shots to a binary ShotBatch dump");
    add_spec_flags(sa, cfg, true, true, 20);

    auto *rp = app.add_subcommand("replay", "Decode a ShotBatch dump; packed prediction bits");
    add_spec_flags(rp, cfg, true, true, 20);
    rp->add_option("--in", cfg.in, "ShotBatch dump written by `sample`");

    for (auto *sub : {run, sw, vd, vf, bw, ex, sa, rp}) {
        sub->add_option("--out", cfg.out, "Output file (default: standard output)");
    }
    for (auto *sub : {run, sw, sa}) {
        sub->add_option("--shots", cfg.shots, "Shots per memory basis")->capture_default_str();
        sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    }
    for (auto *sub : {run, sw, rp}) {
        sub->add_option("--workers", cfg.workers, "Worker threads (default: available parallelism)");
    }
    for (auto *sub : {run, sw}) {
        sub->add_flag("--no-wall-time", cfg.no_wall_time, "Write wall_s as 0 so output is byte-reproducible");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }
    if (cfg.workers < 0 || cfg.rounds_mult < 0 || cfg.rounds < 0) {
        std::cerr << "error: --workers, --rounds-mult and --rounds must not be negative\n";
        return kExitUsage;
    }

    try {
        if (*run) return cmd_run(cfg);
        if (*sw) {
            if (cfg.rounds_mult == 0) cfg.rounds_mult = 20;
            return cmd_sweep(cfg);
        }
        if (*vd) return cmd_verify_distance(cfg);
        if (*vf) return cmd_verify_faults(cfg);
        if (*bw) return cmd_bandwidth(cfg);
        if (*ex) return cmd_export(cfg);
        if (*sa) return cmd_sample(cfg);
        if (*rp) return cmd_replay(cfg);
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFail;
    }
    return kExitUsage;
}
