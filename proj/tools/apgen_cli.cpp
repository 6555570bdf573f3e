// Command-line entry points for data generation, training, evaluation,
// decoding and the machine-simulation checks.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "apgen/decode.hpp"
#include "apgen/efasp/bridge.hpp"
#include "apgen/io.hpp"
#include "apgen/manifest.hpp"
#include "apgen/model/denoiser.hpp"
#include "apgen/model/train.hpp"
#include "apgen/pram/machine.hpp"
#include "apgen/pram/suite.hpp"
#include "apgen/tasks/arm.hpp"
#include "apgen/tasks/dyck.hpp"
#include "apgen/tasks/graph.hpp"
#include "apgen/tasks/parity.hpp"
#include "apgen/tasks/sudoku.hpp"

using namespace apgen;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string task;
    std::uint64_t seed = 0;
    std::string out;
    std::string manifest;
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const auto t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

void write_manifest(const CommonArgs& c, const std::string& command, const json& config,
                    const std::vector<std::string>& inputs, const std::vector<std::string>& outputs,
                    double wall) {
    RunManifest m;
    m.command = command;
    m.config_json = config.dump();
    m.seed = c.seed;
    m.inputs = inputs;
    m.outputs = outputs;
    m.wall_seconds = wall;
    std::string path = c.manifest.empty()
                           ? (c.out.empty() ? command + ".manifest.json" : c.out + ".manifest.json")
                           : c.manifest;
    m.write(path);
}

void emit_metrics(const json& summary, const std::string& path) {
    if (!path.empty()) {
        std::ofstream f(path);
        f << summary.dump(2) << '\n';
    }
    // Human-readable table.
    std::cout << "metric                         value\n";
    std::cout << "-----------------------------  --------------\n";
    for (auto it = summary.begin(); it != summary.end(); ++it) {
        if (it->is_structured()) continue;
        std::ostringstream v;
        v << *it;
        std::cout << it.key();
        for (std::size_t i = it.key().size(); i < 31; ++i) std::cout << ' ';
        std::cout << v.str() << '\n';
    }
}

std::vector<int> random_bits(int len, Rng& rng) {
    std::vector<int> bits(static_cast<std::size_t>(len));
    std::uniform_int_distribution<int> bit(0, 1);
    for (int& b : bits) b = bit(rng);
    return bits;
}

model::ModelConfig task_model_config(const std::string& task) {
    model::ModelConfig mc;
    if (task == "parity") {
        mc.layers = 1;
        mc.heads = 1;
        mc.d = 4;
        mc.dff = 16;
        mc.max_seq = 1024;
    } else if (task == "graph") {
        mc.layers = 2;
        mc.heads = 4;
        mc.d = 64;
        mc.dff = 256;
        mc.max_seq = 512;
    } else if (task == "sudoku") {
        mc.layers = 6;
        mc.heads = 4;
        mc.d = 256;
        mc.dff = 1024;
        mc.max_seq = 400;
    } else {
        throw ContractError("no trained-model configuration for task " + task);
    }
    return mc;
}

int run_gen_data(const CommonArgs& c, int n, int len, bool canonical, int size) {
    double t0 = now_seconds();
    std::ofstream f(c.out);
    if (!f) {
        std::cerr << "cannot open output " << c.out << "\n";
        return 1;
    }
    Rng rng(c.seed);
    json cfg{{"task", c.task}, {"n", n}, {"len", len}, {"canonical", canonical}, {"size", size}};
    if (c.task == "parity") {
        tasks::Parity par;
        if (canonical) {
            Trajectory tr;
            tr.steps = par.canonical_training_tuples();
            // Canonical tuples are independent single-step episodes.
            for (std::size_t i = 0; i < tr.steps.size(); ++i) {
                Trajectory one;
                one.steps = {tr.steps[i]};
                one.final_state =
                    apply_transition(par.vocab, tr.steps[i].x, tr.steps[i].as_output());
                write_trajectory_jsonl(f, par.vocab, one, static_cast<int>(i), "parity");
            }
        } else {
            for (int e = 0; e < n; ++e) {
                auto bits = random_bits(len, rng);
                Trajectory tr = par.trajectory(bits);
                write_trajectory_jsonl(f, par.vocab, tr, e, "parity");
            }
        }
    } else if (c.task == "graph") {
        tasks::GraphTask gt;
        for (int e = 0; e < n; ++e) {
            tasks::GraphInstance g = tasks::random_graph_instance(size, rng);
            Trajectory tr = gt.trajectory(g, rng);
            json meta{{"n", g.n}, {"s", g.s}, {"t", g.t}, {"mincut", tasks::mincut_oracle(g)}};
            write_trajectory_jsonl(f, gt.vocab(), tr, e, "graph", meta.dump());
        }
    } else if (c.task == "sudoku") {
        tasks::SudokuTask st;
        for (int e = 0; e < n; ++e) {
            auto [puzzle, solution] = tasks::sudoku_generate(rng);
            Trajectory tr = st.trajectory(puzzle, rng);
            json meta{{"puzzle", tasks::sudoku_format_line(puzzle)},
                      {"solution", tasks::sudoku_format_line(solution)}};
            write_trajectory_jsonl(f, st.vocab(), tr, e, "sudoku", meta.dump());
        }
    } else if (c.task == "dyck") {
        tasks::DyckConfig dc;
        tasks::Dyck dyck(dc);
        for (int e = 0; e < n; ++e) {
            auto res = dyck.sample(c.seed + static_cast<std::uint64_t>(e) * 1315423911ull);
            json rec;
            rec["episode"] = e;
            rec["ok"] = res.ok;
            rec["resamples"] = res.resamples;
            json w = json::array();
            for (TokenId t : res.word) w.push_back(dyck.vocab().name(t));
            rec["word"] = w;
            rec["member"] = res.ok && dyck.member(res.word);
            f << rec.dump() << '\n';
        }
    } else {
        std::cerr << "unknown task " << c.task << "\n";
        return 1;
    }
    write_manifest(c, "gen-data", cfg, {}, {c.out}, now_seconds() - t0);
    return 0;
}

const Vocab& task_vocab_singleton(const std::string& task) {
    static tasks::Parity par;
    static tasks::GraphTask gt;
    static tasks::SudokuTask st;
    if (task == "parity") return par.vocab;
    if (task == "graph") return gt.vocab();
    if (task == "sudoku") return st.vocab();
    throw ContractError("no vocabulary for task " + task);
}

int run_train(const CommonArgs& c, const std::string& data_path, const std::string& ckpt,
              int steps, int batch, double lr) {
    double t0 = now_seconds();
    const Vocab& vocab = task_vocab_singleton(c.task);
    std::ifstream f(data_path);
    if (!f) {
        std::cerr << "cannot open data file " << data_path << "\n";
        return 1;
    }
    auto records = read_trajectory_jsonl(f, vocab);
    std::vector<StepTuple> tuples;
    for (auto& r : records) tuples.push_back(std::move(r.tuple));
    if (tuples.empty()) {
        std::cerr << "no training tuples in " << data_path << "\n";
        return 1;
    }

    model::ModelConfig mc = task_model_config(c.task);
    model::TrainConfig tc;
    tc.seed = c.seed;
    tc.steps = steps;
    tc.batch = batch;
    tc.lr = lr;
    model::TrainResult res = model::train(tuples, mc, vocab, tc);
    model::save_checkpoint(res.params, vocab, ckpt);
    model::write_curves_csv(res.curves, ckpt + ".curves.csv");

    json cfg{{"task", c.task}, {"steps", steps}, {"batch", batch}, {"lr", lr},
             {"tuples", tuples.size()}, {"diverged", res.diverged},
             {"final_loss", res.final_loss}};
    emit_metrics(cfg, c.out);
    write_manifest(c, "train", cfg, {data_path}, {ckpt, ckpt + ".curves.csv"},
                   now_seconds() - t0);
    return res.diverged ? 2 : 0;
}

int run_eval(const CommonArgs& c, const std::string& ckpt, const std::string& puzzles, int n,
             int len, int size, bool oracle) {
    double t0 = now_seconds();
    Rng rng(c.seed);
    json summary;
    int exit_code = 0;

    if (c.task == "parity") {
        tasks::Parity par;
        Denoiser den;
        model::ModelParams params;
        if (oracle) {
            den = par.denoiser();
        } else {
            params = model::load_checkpoint(ckpt);
            den = model::neural_denoiser(params);
        }
        int correct = 0;
        for (int e = 0; e < n; ++e) {
            auto bits = random_bits(len, rng);
            int want = 0;
            for (int b : bits) want ^= b;
            DecodeOptions opts;
            opts.max_steps = 4 * len + 16;
            Trace tr = decode(par.vocab, den, par.encode(bits), StopCriterion::fixpoint(),
                              c.seed + static_cast<std::uint64_t>(e), opts);
            if (par.classify(tr.final_state()) == want) ++correct;
        }
        summary = {{"task", "parity"}, {"len", len}, {"total", n}, {"solved", correct},
                   {"accuracy", static_cast<double>(correct) / n}};
    } else if (c.task == "sudoku") {
        tasks::SudokuTask st;
        std::vector<tasks::SudokuGrid> grids;
        if (!puzzles.empty()) {
            std::ifstream pf(puzzles);
            std::string line;
            while (std::getline(pf, line))
                if (line.size() >= 81) grids.push_back(tasks::sudoku_parse_line(line));
        } else {
            for (int e = 0; e < n; ++e) grids.push_back(tasks::sudoku_generate(rng).first);
        }
        model::ModelParams params;
        if (!oracle) params = model::load_checkpoint(ckpt);
        int solved = 0;
        for (std::size_t e = 0; e < grids.size(); ++e) {
            auto solution = tasks::sudoku_solve(grids[e]);
            if (!solution) continue;
            Trace tr;
            if (oracle) {
                Trajectory traj = st.trajectory(grids[e], rng);
                std::size_t cursor = 0;
                Denoiser replay = [&](const SeqState& s, Rng&) -> DenoiserOutput {
                    if (cursor < traj.steps.size() && s == traj.steps[cursor].x)
                        return traj.steps[cursor++].as_output();
                    DenoiserOutput idle;
                    idle.y.resize(s.size());
                    idle.controls.assign(s.size(), Controls{});
                    for (std::size_t i = 0; i < s.size(); ++i)
                        idle.y[i] = st.vocab().is_mask(s.tokens[i]) ? st.vocab().id("EMPTY")
                                                                    : s.tokens[i];
                    return idle;
                };
                DecodeOptions opts;
                opts.max_steps = static_cast<int>(traj.steps.size()) + 8;
                tr = decode(st.vocab(), replay, st.encode_puzzle(grids[e]),
                            StopCriterion::fixpoint(), c.seed, opts);
            } else {
                DecodeOptions opts;
                opts.max_steps = 4096;
                tr = decode(st.vocab(), model::neural_denoiser(params),
                            st.encode_puzzle(grids[e]), StopCriterion::fixpoint(), c.seed, opts);
            }
            if (st.is_solved_as(tr.final_state(), *solution)) ++solved;
        }
        summary = {{"task", "sudoku"}, {"total", grids.size()}, {"solved", solved},
                   {"accuracy", grids.empty() ? 0.0 : static_cast<double>(solved) / grids.size()}};
    } else if (c.task == "graph") {
        tasks::GraphTask gt;
        model::ModelParams params;
        if (!oracle) params = model::load_checkpoint(ckpt);
        json rows = json::array();
        int solved = 0, total = 0;
        for (int e = 0; e < n; ++e) {
            tasks::GraphInstance g = tasks::random_graph_instance(size, rng);
            int want = tasks::mincut_oracle(g);
            Trace tr;
            if (oracle) {
                Trajectory traj = gt.trajectory(g, rng);
                std::size_t cursor = 0;
                Denoiser replay = [&](const SeqState& s, Rng&) -> DenoiserOutput {
                    if (cursor < traj.steps.size() && s == traj.steps[cursor].x)
                        return traj.steps[cursor++].as_output();
                    DenoiserOutput idle;
                    idle.y.resize(s.size());
                    idle.controls.assign(s.size(), Controls{});
                    for (std::size_t i = 0; i < s.size(); ++i)
                        idle.y[i] = gt.vocab().is_mask(s.tokens[i]) ? gt.vocab().id("FB")
                                                                    : s.tokens[i];
                    return idle;
                };
                DecodeOptions opts;
                opts.max_steps = static_cast<int>(traj.steps.size()) + 8;
                tr = decode(gt.vocab(), replay, gt.encode_prompt(g), StopCriterion::eos(gt.eos()),
                            c.seed, opts);
            } else {
                DecodeOptions opts;
                opts.max_steps = 512;
                opts.max_state_len = 480;
                tr = decode(gt.vocab(), model::neural_denoiser(params), gt.encode_prompt(g),
                            StopCriterion::eos(gt.eos()), c.seed, opts);
            }
            auto fin = gt.parse_final(tr.final_state());
            bool ok = fin && gt.disconnected(*fin) &&
                      static_cast<int>(g.edges.size() - fin->edges.size()) == want;
            solved += ok ? 1 : 0;
            ++total;
        }
        rows.push_back({{"size", size}, {"total", total}, {"solved", solved}});
        summary = {{"task", "graph"}, {"size", size}, {"total", total}, {"solved", solved},
                   {"accuracy", total ? static_cast<double>(solved) / total : 0.0},
                   {"rows", rows}};
    } else {
        std::cerr << "eval supports tasks parity, sudoku, graph\n";
        return 1;
    }

    emit_metrics(summary, c.out);
    json cfg{{"task", c.task}, {"oracle", oracle}, {"n", n}, {"len", len}, {"size", size}};
    write_manifest(c, "eval", cfg, ckpt.empty() ? std::vector<std::string>{} :
                                                  std::vector<std::string>{ckpt},
                   c.out.empty() ? std::vector<std::string>{} : std::vector<std::string>{c.out},
                   now_seconds() - t0);
    return exit_code;
}

int run_pram_cmd(const CommonArgs& c, const std::string& path, std::uint64_t max_rounds) {
    double t0 = now_seconds();
    std::ifstream f(path);
    if (!f) {
        std::cerr << "cannot open " << path << "\n";
        return 1;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    pram::Program prog = pram::assemble(ss.str());
    pram::Machine machine(prog, std::max(6, prog.max_register() + 1));
    pram::RunMetrics m = machine.run(max_rounds);
    json summary{{"rounds", m.rounds},
                 {"work", m.work},
                 {"terminated", m.terminated},
                 {"trapped", m.trap.has_value()},
                 {"output", machine.output()}};
    if (m.trap) {
        summary["trap_kind"] = static_cast<int>(m.trap->kind);
        summary["trap_round"] = m.trap->round;
    }
    emit_metrics(summary, c.out);
    write_manifest(c, "run-pram", json{{"program", path}}, {path}, {}, now_seconds() - t0);
    return m.trap ? 2 : 0;
}

int run_verify_sim(const CommonArgs& c, const std::string& path, const std::string& variant_name,
                   bool builtin_suite) {
    double t0 = now_seconds();
    efasp::SimVariant variant =
        variant_name == "rewrite" ? efasp::SimVariant::REWRITE : efasp::SimVariant::AO;

    std::vector<std::pair<std::string, std::string>> sources;
    if (builtin_suite) {
        Rng rng(c.seed);
        std::uniform_int_distribution<int> small(1, 15);
        std::vector<pram::Word> v8, v16, pm;
        for (int i = 0; i < 8; ++i) v8.push_back(static_cast<pram::Word>(small(rng)));
        for (int i = 0; i < 16; ++i) v16.push_back(static_cast<pram::Word>(small(rng)));
        for (int i = 0; i < 8; ++i) pm.push_back(static_cast<pram::Word>(small(rng)));
        sources.emplace_back("broadcast", pram::broadcast_source(8, 9));
        sources.emplace_back(variant == efasp::SimVariant::AO ? "treesum8" : "treesum16",
                             variant == efasp::SimVariant::AO ? pram::treesum_source(v8)
                                                              : pram::treesum_source(v16));
        sources.emplace_back("prefixmax", pram::prefixmax_source(pm));
        if (variant == efasp::SimVariant::REWRITE)
            sources.emplace_back("counter", pram::counter_source(24));
    } else {
        std::ifstream f(path);
        if (!f) {
            std::cerr << "cannot open " << path << "\n";
            return 1;
        }
        std::stringstream ss;
        ss << f.rdbuf();
        sources.emplace_back(path, ss.str());
    }

    bool all_ok = true;
    json rows = json::array();
    for (auto& [name, text] : sources) {
        pram::Program prog = pram::assemble(text);
        efasp::CompiledProgram sim = efasp::load_sim_program(variant, prog.word_bits);
        efasp::SimReport rep = efasp::verify_simulation(sim, prog, variant);
        all_ok = all_ok && rep.ok;
        json row{{"program", name},
                 {"ok", rep.ok},
                 {"rounds", rep.rounds},
                 {"decode_steps", rep.decode_steps},
                 {"ratio", rep.steps_per_round},
                 {"context_tokens", rep.context_tokens},
                 {"context_limit", rep.context_limit},
                 {"machine_output", rep.machine_output},
                 {"decoded_output", rep.decoded_output}};
        rows.push_back(row);
        std::cout << (rep.ok ? "[ok]   " : "[FAIL] ") << name << "  rounds=" << rep.rounds
                  << " steps=" << rep.decode_steps << " ctx=" << rep.context_tokens << "/"
                  << rep.context_limit << "\n";
    }
    json summary{{"variant", variant_name}, {"ok", all_ok}, {"programs", rows}};
    emit_metrics(summary, c.out);
    write_manifest(c, "verify-sim", json{{"variant", variant_name}}, {},
                   c.out.empty() ? std::vector<std::string>{} : std::vector<std::string>{c.out},
                   now_seconds() - t0);
    return all_ok ? 0 : 2;
}

int run_efasp_cmd(const CommonArgs& c, const std::string& path, int word_bits,
                  const std::string& tokens) {
    double t0 = now_seconds();
    efasp::ProgramParams params;
    params.word_bits = word_bits;
    efasp::CompiledProgram prog = efasp::parse_program_file(path, params);
    efasp::PramCodec codec(word_bits);
    SeqState x;
    std::stringstream ss(tokens);
    std::string tok;
    while (ss >> tok) x.tokens.push_back(codec.vocab.id(tok));
    if (x.tokens.empty()) {
        std::cerr << "run-efasp needs --tokens\n";
        return 1;
    }
    efasp::EvalContext ctx;
    ctx.x = &x;
    ctx.token_info = &codec.token_info;
    auto cols = efasp::eval_columns(prog, ctx);
    for (std::size_t i = 0; i < cols.size(); ++i)
        std::cout << i + 1 << ": " << efasp::value_str(cols[i]) << "\n";
    write_manifest(c, "run-efasp", json{{"program", path}}, {path}, {}, now_seconds() - t0);
    return 0;
}

int run_decode_cmd(const CommonArgs& c, const std::string& ckpt, const std::string& input,
                   const std::string& stop_name, int max_steps) {
    double t0 = now_seconds();
    Vocab vocab;
    model::ModelParams params = model::load_checkpoint(ckpt, &vocab);
    SeqState x;
    std::stringstream ss(input);
    std::string tok;
    while (ss >> tok) x.tokens.push_back(vocab.id(tok));
    StopCriterion stop = StopCriterion::fixpoint();
    if (stop_name == "eos") {
        if (!vocab.contains("EOS")) throw ContractError("vocabulary has no EOS token");
        stop = StopCriterion::eos(vocab.id("EOS"));
    } else if (stop_name == "max") {
        stop = StopCriterion::max_steps(max_steps);
    }
    DecodeOptions opts;
    opts.max_steps = max_steps;
    Trace tr = decode(vocab, model::neural_denoiser(params), x, stop, c.seed, opts);
    if (c.out.empty()) {
        write_trace_jsonl(std::cout, vocab, tr);
    } else {
        std::ofstream f(c.out);
        write_trace_jsonl(f, vocab, tr);
    }
    write_manifest(c, "decode", json{{"stop", stop_name}}, {ckpt},
                   c.out.empty() ? std::vector<std::string>{} : std::vector<std::string>{c.out},
                   now_seconds() - t0);
    return 0;
}

int run_dyck_cmd(const CommonArgs& c, int k, int n) {
    double t0 = now_seconds();
    tasks::DyckConfig dc;
    dc.k = k;
    tasks::Dyck dyck(dc);
    int members = 0, failures = 0, resamples = 0;
    std::size_t total_len = 0;
    std::ofstream f;
    if (!c.out.empty()) f.open(c.out);
    for (int e = 0; e < n; ++e) {
        auto res = dyck.sample(c.seed + static_cast<std::uint64_t>(e) * 2654435761ull);
        resamples += res.resamples;
        if (!res.ok) {
            ++failures;
            continue;
        }
        members += dyck.member(res.word) ? 1 : 0;
        total_len += res.word.size();
        if (f.is_open()) {
            json w = json::array();
            for (TokenId t : res.word) w.push_back(dyck.vocab().name(t));
            f << json{{"episode", e}, {"word", w}}.dump() << '\n';
        }
    }
    json summary{{"k", k},
                 {"samples", n},
                 {"members", members},
                 {"failures", failures},
                 {"resamples", resamples},
                 {"mean_len", n - failures > 0 ? static_cast<double>(total_len) / (n - failures) : 0.0}};
    emit_metrics(summary, "");
    write_manifest(c, "dyck-sample", summary, {},
                   c.out.empty() ? std::vector<std::string>{} : std::vector<std::string>{c.out},
                   now_seconds() - t0);
    return members == n - failures ? 0 : 2;
}

int run_selftest() {
    // Condensed smoke checks; the full acceptance suite lives in ctest.
    tasks::Parity par;
    Trace tr = decode(par.vocab, par.denoiser(), par.encode({1, 0, 1}),
                      StopCriterion::fixpoint(), 0);
    bool ok = par.classify(tr.final_state()) == 0;

    tasks::DyckConfig dc;
    tasks::Dyck dyck(dc);
    for (int e = 0; e < 50 && ok; ++e) {
        auto res = dyck.sample(static_cast<std::uint64_t>(e));
        ok = ok && res.ok && dyck.member(res.word);
    }

    pram::Program prog = pram::assemble(pram::broadcast_source(4, 5));
    pram::Machine machine(prog);
    machine.run(100);
    ok = ok && machine.output() == 5;

    std::cout << (ok ? "selftest: ok\n" : "selftest: FAILED\n");
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"any-process sequence generation laboratory"};
    app.require_subcommand(1);

    CommonArgs c;
    app.add_option("--seed", c.seed, "random seed")->capture_default_str();

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate trajectory datasets");
    int gen_n = 4, gen_len = 8, gen_size = 4;
    bool gen_canonical = false;
    gen->add_option("--task", c.task, "sudoku|parity|graph|dyck")->required();
    gen->add_option("--out", c.out, "output jsonl path")->required();
    gen->add_option("--n", gen_n, "episode count");
    gen->add_option("--len", gen_len, "parity input length");
    gen->add_option("--size", gen_size, "graph node count");
    gen->add_flag("--canonical", gen_canonical, "emit the canonical parity training tuples");

    // train
    auto* trn = app.add_subcommand("train", "train the denoiser on a trajectory file");
    std::string trn_data, trn_ckpt;
    int trn_steps = 2000, trn_batch = 32;
    double trn_lr = 1e-4;
    trn->add_option("--task", c.task)->required();
    trn->add_option("--data", trn_data, "trajectory jsonl")->required();
    trn->add_option("--ckpt", trn_ckpt, "checkpoint output")->required();
    trn->add_option("--steps", trn_steps);
    trn->add_option("--batch", trn_batch);
    trn->add_option("--lr", trn_lr);
    trn->add_option("--out", c.out, "metrics json path");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint or the scripted oracle");
    std::string ev_ckpt, ev_puzzles;
    int ev_n = 100, ev_len = 8, ev_size = 4;
    bool ev_oracle = false;
    ev->add_option("--task", c.task)->required();
    ev->add_option("--ckpt", ev_ckpt);
    ev->add_option("--puzzles", ev_puzzles, "sudoku instance file (81-char lines)");
    ev->add_option("--n", ev_n);
    ev->add_option("--len", ev_len);
    ev->add_option("--size", ev_size);
    ev->add_flag("--oracle", ev_oracle, "use the scripted task oracle");
    ev->add_option("--out", c.out, "metrics json path");

    // decode
    auto* dec = app.add_subcommand("decode", "decode a prompt with a trained checkpoint");
    std::string dec_ckpt, dec_input, dec_stop = "fixpoint";
    int dec_steps = 512;
    dec->add_option("--ckpt", dec_ckpt)->required();
    dec->add_option("--input", dec_input, "space-separated token names")->required();
    dec->add_option("--stop", dec_stop, "fixpoint|eos|max");
    dec->add_option("--steps", dec_steps);
    dec->add_option("--out", c.out, "trace jsonl path");

    // run-pram
    auto* rp = app.add_subcommand("run-pram", "assemble and run a machine program");
    std::string rp_path;
    std::uint64_t rp_rounds = 100000;
    rp->add_option("--program", rp_path)->required();
    rp->add_option("--max-rounds", rp_rounds);
    rp->add_option("--out", c.out, "metrics json path");

    // run-efasp
    auto* re = app.add_subcommand("run-efasp", "evaluate a sequence program on tokens");
    std::string re_path, re_tokens;
    int re_bits = 8;
    re->add_option("--program", re_path)->required();
    re->add_option("--tokens", re_tokens, "space-separated codec tokens (V3 SEP M ...)")->required();
    re->add_option("--word-bits", re_bits);

    // verify-sim
    auto* vs = app.add_subcommand("verify-sim", "check the machine simulation theorems");
    std::string vs_path, vs_variant = "ao";
    bool vs_suite = false;
    vs->add_option("--program", vs_path, "machine assembly file");
    vs->add_option("--variant", vs_variant, "ao|rewrite");
    vs->add_flag("--suite", vs_suite, "run the built-in verification suite");
    vs->add_option("--out", c.out, "metrics json path");

    // dyck-sample
    auto* ds = app.add_subcommand("dyck-sample", "sample bracket strings");
    int ds_k = 2, ds_n = 100;
    ds->add_option("--k", ds_k);
    ds->add_option("--n", ds_n);
    ds->add_option("--out", c.out, "samples jsonl path");

    auto* st = app.add_subcommand("selftest", "quick smoke checks");
    (void)st;

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_gen_data(c, gen_n, gen_len, gen_canonical, gen_size);
        if (trn->parsed()) return run_train(c, trn_data, trn_ckpt, trn_steps, trn_batch, trn_lr);
        if (ev->parsed()) return run_eval(c, ev_ckpt, ev_puzzles, ev_n, ev_len, ev_size, ev_oracle);
        if (dec->parsed()) return run_decode_cmd(c, dec_ckpt, dec_input, dec_stop, dec_steps);
        if (rp->parsed()) return run_pram_cmd(c, rp_path, rp_rounds);
        if (re->parsed()) return run_efasp_cmd(c, re_path, re_bits, re_tokens);
        if (vs->parsed()) return run_verify_sim(c, vs_path, vs_variant, vs_suite);
        if (ds->parsed()) return run_dyck_cmd(c, ds_k, ds_n);
        return run_selftest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
