// Acceptance gate: runs every criterion at its stated tolerance and prints
// one pass/fail line each.  Exit code 0 only when everything passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "apgen/decode.hpp"
#include "apgen/efasp/bridge.hpp"
#include "apgen/model/denoiser.hpp"
#include "apgen/model/train.hpp"
#include "apgen/pram/suite.hpp"
#include "apgen/tasks/arm.hpp"
#include "apgen/tasks/dyck.hpp"
#include "apgen/tasks/graph.hpp"
#include "apgen/tasks/parity.hpp"
#include "apgen/tasks/sudoku.hpp"

using namespace apgen;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Independent per-position interpreter for the Algorithm-1 case table.
SeqState case_table_transition(const Vocab& v, const SeqState& x, const DenoiserOutput& out) {
    SeqState res;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool m = v.is_mask(x.tokens[i]);
        const Controls c = out.controls[i];
        if (m && c.erase) continue;
        if (c.remask)
            res.tokens.push_back(v.primary_mask());
        else if (m)
            res.tokens.push_back(out.y[i]);
        else
            res.tokens.push_back(x.tokens[i]);
        if (c.insert)
            res.tokens.push_back(out.insert_token.empty() ? v.primary_mask() : out.insert_token[i]);
    }
    return res;
}

void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    Vocab v;
    v.add("M", true);
    for (int i = 0; i < 8; ++i) v.add("s" + std::to_string(i));
    Rng rng(1001);
    std::uniform_int_distribution<int> len_d(0, 64);
    std::uniform_int_distribution<TokenId> tok_d(0, 8);
    std::uniform_int_distribution<TokenId> base_d(1, 8);
    std::uniform_int_distribution<int> bit(0, 1);

    bool ok = true;
    std::string why;
    for (int trial = 0; trial < 100000 && ok; ++trial) {
        const int n = len_d(rng);
        SeqState x;
        DenoiserOutput out;
        long long deleted = 0, inserted = 0;
        for (int i = 0; i < n; ++i) {
            x.tokens.push_back(tok_d(rng));
            out.y.push_back(base_d(rng));
            Controls c{bit(rng) != 0, bit(rng) != 0, bit(rng) != 0};
            out.controls.push_back(c);
            const bool m = v.is_mask(x.tokens.back());
            if (m && c.erase)
                ++deleted;
            else if (c.insert)
                ++inserted;
        }
        SeqState next = apply_transition(v, x, out);
        if (static_cast<long long>(next.size()) !=
            static_cast<long long>(x.size()) - deleted + inserted) {
            ok = false;
            why = "length law";
            break;
        }
        if (!(next == case_table_transition(v, x, out))) {
            ok = false;
            why = "case-table equivalence";
            break;
        }
        // replay soundness: reapplying the recorded output reproduces next
        if (!(apply_transition(v, x, out) == next)) {
            ok = false;
            why = "replay";
            break;
        }
        // AO non-erasure on the same state
        if (n > 0) {
            DenoiserOutput ao_in = out;
            ao_in.confidence.assign(x.size(), 0.5);
            DenoiserOutput ao = ao_constrain(ao_in, x, v, 1 + trial % 4, SelectPolicy::top_prob);
            SeqState an = apply_transition(v, x, ao);
            std::vector<TokenId> before, after;
            for (TokenId t : x.tokens)
                if (!v.is_mask(t)) before.push_back(t);
            for (TokenId t : an.tokens)
                if (!v.is_mask(t)) after.push_back(t);
            // the original non-mask tokens must appear as a prefix-ordered
            // subsequence (in fact AO keeps them all, in order)
            std::size_t pos = 0;
            bool contained = true;
            for (TokenId t : before) {
                bool found = false;
                while (pos < after.size())
                    if (after[pos++] == t) {
                        found = true;
                        break;
                    }
                contained = contained && found;
            }
            if (!contained || an.size() != x.size()) {
                ok = false;
                why = "ao non-erasure";
                break;
            }
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "1e5 random instances in %.1fs%s%s", seconds_since(t0),
                  why.empty() ? "" : ", failed: ", why.c_str());
    report(1, "transition calculus property suite", ok, buf);
}

void criterion_2() {
    Vocab v;
    v.add("M", true);
    for (int i = 0; i < 6; ++i) v.add("s" + std::to_string(i));
    Rng rng(1002);
    std::uniform_int_distribution<int> len_d(0, 32);
    std::uniform_int_distribution<TokenId> tok_d(1, 6);
    bool ok = true;
    for (int trial = 0; trial < 10000 && ok; ++trial) {
        int n = len_d(rng);
        SeqState x;
        std::vector<TokenId> y;
        std::vector<bool> r;
        for (int i = 0; i < n; ++i) {
            x.tokens.push_back(tok_d(rng));
            y.push_back(tok_d(rng));
            r.push_back(rng() % 2 == 0);
        }
        SeqState want = rewrite_step(v, x, y, r);
        SeqState got = x;
        for (const auto& st : rewrite_as_apmdm(v, x, y, r)) {
            if (!(got == st.state)) ok = false;
            got = apply_transition(v, got, st.out);
        }
        ok = ok && got == want;
    }
    report(2, "three-step rewrite expansion lemma", ok, "1e4 random instances up to length 32");
}

void criterion_3() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;

    // exhaustive w=8 conformance against a wide-integer oracle
    const char* ops[] = {"ADD", "SUB", "AND", "XOR", "SHL", "SHR"};
    for (const char* op : ops) {
        std::string src = ".word 8\n.memsize 8\n.out 2\n";
        src += "LOADI R3, 0\nLOAD R1, [R3]\nLOADI R3, 1\nLOAD R2, [R3]\n";
        src += std::string("  ") + op + " R1, R2\n";
        src += "LOADI R3, 2\nSTORE [R3], R1\nHALT\n";
        pram::Program prog = pram::assemble(src);
        for (int a = 0; a < 256 && ok; ++a) {
            for (int b = 0; b < 256; ++b) {
                prog.init_mem = {{0, static_cast<pram::Word>(a)}, {1, static_cast<pram::Word>(b)}};
                pram::Machine m(prog);
                m.run(20);
                unsigned long long ua = static_cast<unsigned>(a), ub = static_cast<unsigned>(b);
                unsigned long long wide = 0;
                std::string o = op;
                if (o == "ADD") wide = ua + ub;
                if (o == "SUB") wide = ua - ub;
                if (o == "AND") wide = ua & ub;
                if (o == "XOR") wide = ua ^ ub;
                if (o == "SHL") wide = ua << (ub % 8);
                if (o == "SHR") wide = ua >> (ub % 8);
                if (m.output() != (wide & 0xff)) {
                    ok = false;
                    why = std::string("arith mismatch ") + op;
                    break;
                }
            }
        }
    }

    // CREW conflict trap
    {
        pram::Program p = pram::assemble(".procs 3\nLOADI R1, 7\nSTORE [R1], R0\nHALT");
        pram::Machine m(p);
        auto met = m.run(10);
        if (!met.trap || met.trap->kind != pram::TrapKind::write_conflict ||
            met.trap->pids.size() != 3) {
            ok = false;
            why = "missing write-conflict trap";
        }
    }

    // Brent bound over a 5-program suite (T_inf proxied by the fastest run
    // in each family)
    {
        auto measure = [&](const std::string& src) {
            pram::Program p = pram::assemble(src);
            pram::Machine m(p);
            auto met = m.run(200000);
            return std::tuple<std::uint64_t, std::uint64_t, int>(met.rounds, met.work, p.procs);
        };
        std::vector<std::vector<std::tuple<std::uint64_t, std::uint64_t, int>>> fams;
        fams.push_back({measure(pram::treesum_source({1, 2, 3, 4, 5, 6, 7, 8})),
                        measure(pram::treesum_source({1, 2, 3, 4, 5, 6, 7, 8, 1, 2, 3, 4, 5, 6, 7, 8}))});
        fams.push_back({measure(pram::broadcast_source(2, 7)), measure(pram::broadcast_source(8, 7))});
        fams.push_back({measure(pram::prefixmax_source({5, 3, 9, 1})),
                        measure(pram::prefixmax_source({5, 3, 9, 1, 2, 8, 4, 6}))});
        fams.push_back({measure(pram::counter_source(8)), measure(pram::counter_source(32))});
        fams.push_back({measure(pram::treesum_source({9, 9, 9, 9})),
                        measure(pram::treesum_source({1, 1, 1, 1, 1, 1, 1, 1}))});
        for (auto& fam : fams) {
            std::uint64_t t_inf = UINT64_MAX;
            for (auto& [rounds, work, procs] : fam) t_inf = std::min(t_inf, rounds);
            for (auto& [rounds, work, procs] : fam) {
                std::uint64_t bound =
                    (work + static_cast<std::uint64_t>(procs) - 1) / static_cast<std::uint64_t>(procs) +
                    t_inf;
                if (rounds > bound) {
                    ok = false;
                    why = "brent bound";
                }
            }
        }
    }

    // P=1 agreement with the sequential interpreter
    {
        pram::Program p = pram::assemble(pram::counter_source(20));
        pram::Machine m(p);
        pram::SeqResult ref = pram::run_sequential(p, 100000);
        std::size_t step = 0;
        while (!m.all_halted() && step < ref.steps.size()) {
            if (m.pc(0) != ref.steps[step].pc) {
                ok = false;
                why = "sequential pc divergence";
                break;
            }
            m.step_round();
            for (std::size_t r = 0; r < ref.steps[step].regs_after.size(); ++r)
                if (m.reg(0, static_cast<int>(r)) != ref.steps[step].regs_after[r]) {
                    ok = false;
                    why = "sequential register divergence";
                }
            ++step;
        }
        if (step != ref.steps.size() || !ref.halted) {
            ok = false;
            if (why.empty()) why = "sequential step count";
        }
    }

    char buf[96];
    std::snprintf(buf, sizeof buf, "exhaustive w=8 + traps + Brent + P=1 in %.1fs%s%s",
                  seconds_since(t0), why.empty() ? "" : ", failed: ", why.c_str());
    report(3, "machine conformance", ok, buf);
}

void criterion_4() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;

    // dual evaluation: derived vs primitive compositions on random inputs
    {
        efasp::PramCodec codec(8);
        efasp::ProgramParams params;
        params.word_bits = 8;
        const std::vector<std::pair<std::string, std::string>> pairs = {
            {"(leq a b)", "(minus (relu (add (minus b a) 1)) (relu (minus b a)))"},
            {"(geq a b)", "(leq b a)"},
            {"(eq a b)", "(and (leq a b) (leq b a))"},
            {"(lt a b)", "(leq a (minus b 1))"},
            {"(gt a b)", "(lt b a)"},
            {"(and a01 b01)", "(min a01 b01)"},
            {"(or a01 b01)", "(not (and (not a01) (not b01)))"},
            {"(xor a01 b01)", "(minus (add a01 b01) (multi 2 (multi a01 b01)))"},
            {"(max a b)", "(add a (relu (minus b a)))"},
            {"(min a b)", "(minus a (relu (minus a b)))"},
            {"(ite a01 a b)", "(add (multi a01 a) (multi (minus 1 a01) b))"},
            {"(seq_and a01)", "(seq_min a01)"},
            {"(seq_or a01)", "(seq_max a01)"},
            {"(seq_avg a)", "(multi (seq_sum a) (inv_seq_len))"},
            {"(relu a)", "(reglu 1 a)"},
            {"(multi a b)", "(minus (reglu a b) (reglu a (minus 0 b)))"},
            {"(seq_len)", "(seq_max PE)"},
            {"(is_first)", "(eq PE 1)"},
            {"(val_int)", "(linear ((1 2 4 8 16 32 64 128 0 0 0)) TE)"},
        };
        const std::string defs =
            "(def a (val_int)) (def b (rightmost_exact_match 1 (is_first) (val_int)))"
            "(def a01 (imod a 2)) (def b01 (imod b 2))";
        std::vector<std::pair<efasp::CompiledProgram, efasp::CompiledProgram>> compiled;
        for (const auto& [lhs, rhs] : pairs)
            compiled.emplace_back(efasp::parse_program(defs + "(return " + lhs + ")", params),
                                  efasp::parse_program(defs + "(return " + rhs + ")", params));
        Rng rng(1004);
        int checks = 0;
        for (int trial = 0; trial < 140 && ok; ++trial) {
            int n = 2 + static_cast<int>(rng() % 6);
            SeqState s;
            for (int i = 0; i < n; ++i)
                s.tokens.push_back(codec.value_token(static_cast<long long>(rng() % 200)));
            efasp::EvalContext ctx;
            ctx.x = &s;
            ctx.token_info = &codec.token_info;
            for (auto& [pl, pr] : compiled) {
                auto cl = efasp::eval_columns(pl, ctx, false);
                auto cr = efasp::eval_columns(pr, ctx, false);
                for (std::size_t i = 0; i < s.size(); ++i) {
                    ++checks;
                    if (!(cl[i] == cr[i])) {
                        ok = false;
                        why = "dual evaluation mismatch";
                        break;
                    }
                }
            }
        }
        if (ok && checks < 10000) {
            ok = false;
            why = "dual evaluation under-sampled";
        }
    }

    // exhaustive bitwise m=8 checks against modular arithmetic
    if (ok) {
        efasp::PramCodec codec(8);
        efasp::ProgramParams params;
        params.word_bits = 8;
        SeqState s;
        for (int a = 0; a < 256; ++a) s.tokens.push_back(codec.value_token(a));
        efasp::EvalContext ctx;
        ctx.x = &s;
        ctx.token_info = &codec.token_info;
        for (int b = 0; b < 256 && ok; ++b) {
            std::string bl = "#b";
            for (int r = 7; r >= 0; --r) bl += ((b >> r) & 1) ? '1' : '0';
            efasp::CompiledProgram prog = efasp::parse_program(
                "(return (concat (bit_add (val_bits) " + bl + ") (bit_minus (val_bits) " + bl +
                    ") (shift_left (val_bits) " + bl + ") (shift_right (val_bits) " + bl + ")))",
                params);
            auto cols = efasp::eval_columns(prog, ctx, true);
            for (int a = 0; a < 256; ++a) {
                const efasp::Value& v = cols[static_cast<std::size_t>(a)];
                auto lane = [&](int base) {
                    long long acc = 0;
                    for (int r = 0; r < 8; ++r) acc += v[static_cast<std::size_t>(base + r)].num() << r;
                    return acc;
                };
                long long add = (a + b) & 0xff;
                long long sub = (a - b) & 0xff;
                long long shl = b <= 8 ? ((static_cast<long long>(a) << b) & 0xff) : 0;
                long long shr = b <= 8 ? (static_cast<long long>(a) >> std::min(b, 62)) : 0;
                if (lane(0) != add || lane(8) != sub || lane(16) != shl || lane(24) != shr) {
                    ok = false;
                    why = "bitwise exhaustive mismatch";
                    break;
                }
            }
        }
    }

    char buf[96];
    std::snprintf(buf, sizeof buf, "dual eval + exhaustive m=8 in %.1fs%s%s", seconds_since(t0),
                  why.empty() ? "" : ", failed: ", why.c_str());
    report(4, "sequence-program operator library", ok, buf);
}

void criterion_5() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(1005);
    std::uniform_int_distribution<int> val(1, 15);
    bool ok = true;
    std::string why;

    std::vector<std::pair<std::string, std::string>> sources;
    {
        std::vector<pram::Word> v8, pm;
        for (int i = 0; i < 8; ++i) v8.push_back(static_cast<pram::Word>(val(rng)));
        for (int i = 0; i < 8; ++i) pm.push_back(static_cast<pram::Word>(val(rng)));
        sources.emplace_back("treesum n=8 P=4", pram::treesum_source(v8));
        sources.emplace_back("prefixmax n=8 P=8", pram::prefixmax_source(pm));
        sources.emplace_back("broadcast P=8", pram::broadcast_source(8, 11));
    }
    for (auto& [name, src] : sources) {
        pram::Program prog = pram::assemble(src);
        efasp::CompiledProgram sim = efasp::load_sim_program(efasp::SimVariant::AO, prog.word_bits);
        efasp::SimReport rep = efasp::verify_simulation(sim, prog, efasp::SimVariant::AO);
        std::printf("       AO %-18s rounds=%llu steps=%zu ratio=%.2f ctx=%zu/%zu out=%lld\n",
                    name.c_str(), static_cast<unsigned long long>(rep.rounds), rep.decode_steps,
                    rep.steps_per_round, rep.context_tokens, rep.context_limit,
                    rep.decoded_output);
        if (!rep.ok || rep.steps_per_round > 4.0 || rep.context_tokens > rep.context_limit) {
            ok = false;
            why = name + ": " + (rep.detail.empty() ? "budget exceeded" : rep.detail);
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "AO decode matches machine output in %.1fs%s%s",
                  seconds_since(t0), why.empty() ? "" : ", failed: ", why.c_str());
    report(5, "machine-trace simulation desk check", ok, buf);
}

void criterion_6() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(1006);
    std::uniform_int_distribution<int> val(1, 15);
    bool ok = true;
    std::string why;

    std::vector<std::pair<std::string, std::string>> sources;
    {
        std::vector<pram::Word> v16, pm;
        for (int i = 0; i < 16; ++i) v16.push_back(static_cast<pram::Word>(val(rng)));
        for (int i = 0; i < 8; ++i) pm.push_back(static_cast<pram::Word>(val(rng)));
        sources.emplace_back("treesum n=16 P=8", pram::treesum_source(v16));
        sources.emplace_back("prefixmax n=8 P=8", pram::prefixmax_source(pm));
        sources.emplace_back("broadcast P=8", pram::broadcast_source(8, 13));
    }
    for (auto& [name, src] : sources) {
        pram::Program prog = pram::assemble(src);
        efasp::CompiledProgram sim =
            efasp::load_sim_program(efasp::SimVariant::REWRITE, prog.word_bits);
        efasp::SimReport rep = efasp::verify_simulation(sim, prog, efasp::SimVariant::REWRITE);
        std::printf("       RW %-18s rounds=%llu steps=%zu ctx=%zu/%zu out=%lld\n", name.c_str(),
                    static_cast<unsigned long long>(rep.rounds), rep.decode_steps,
                    rep.context_tokens, rep.context_limit, rep.decoded_output);
        if (!rep.ok || rep.context_tokens > 4 * prog.memsize) {
            ok = false;
            why = name + ": " + (rep.detail.empty() ? "context budget" : rep.detail);
        }
    }

    // space law: 4x the rounds, identical context
    {
        pram::Program small = pram::assemble(pram::counter_source(16));
        pram::Program big = pram::assemble(pram::counter_source(64));
        efasp::CompiledProgram sim =
            efasp::load_sim_program(efasp::SimVariant::REWRITE, small.word_bits);
        efasp::SimReport rs = efasp::verify_simulation(sim, small, efasp::SimVariant::REWRITE);
        efasp::SimReport rb = efasp::verify_simulation(sim, big, efasp::SimVariant::REWRITE);
        std::printf("       RW counter: rounds %llu -> %llu, ctx %zu -> %zu\n",
                    static_cast<unsigned long long>(rs.rounds),
                    static_cast<unsigned long long>(rb.rounds), rs.context_tokens,
                    rb.context_tokens);
        if (!rs.ok || !rb.ok || rb.rounds < 3 * rs.rounds ||
            rs.context_tokens != rb.context_tokens || rb.context_tokens > 4 * big.memsize) {
            ok = false;
            why = "space law";
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "rewrite decode, context <= 4S, space law in %.1fs%s%s",
                  seconds_since(t0), why.empty() ? "" : ", failed: ", why.c_str());
    report(6, "space-optimal simulation desk check", ok, buf);
}

void criterion_7() {
    auto t0 = std::chrono::steady_clock::now();
    tasks::Parity par;
    auto tuples = par.canonical_training_tuples();

    // The reference configuration: one layer, one head, d=4, and a maximum
    // sequence length that only covers the BOS x1 x2 EOS window.  Decoding
    // runs the model on the front window of longer states.
    model::ModelConfig mc;
    mc.layers = 1;
    mc.heads = 1;
    mc.d = 4;
    mc.dff = 16;
    mc.max_seq = 4;

    model::TrainConfig tc;
    tc.steps = 20000;
    tc.batch = 4;
    tc.lr = 1e-3;
    tc.warmup = 250;
    tc.weight_decay = 0.02;
    tc.seed = 2;
    tc.log_every = 5000;

    model::TrainResult res = model::train(tuples, mc, par.vocab, tc);
    std::size_t nparams = res.params.w.size();

    bool ok = !res.diverged;
    std::string why = ok ? "" : "training diverged";
    Denoiser inner = model::neural_denoiser(res.params);
    Denoiser den = par.front_window_denoiser(inner);

    // Decode agreement with the scripted denoiser on every length-2 input.
    for (int code = 0; code < 4 && ok; ++code) {
        std::vector<int> bits = {code & 1, (code >> 1) & 1};
        Trace a = decode(par.vocab, den, par.encode(bits), StopCriterion::fixpoint(), 0);
        Trace b = decode(par.vocab, par.denoiser(), par.encode(bits), StopCriterion::fixpoint(), 0);
        if (!(a.final_state() == b.final_state()) || a.states.size() != b.states.size()) {
            ok = false;
            why = "disagrees with the scripted denoiser at length 2";
        }
    }

    Rng rng(1007);
    for (int len : {2, 8, 64, 256}) {
        if (!ok) break;
        int correct = 0;
        for (int e = 0; e < 1000; ++e) {
            std::vector<int> bits;
            int want = 0;
            for (int i = 0; i < len; ++i) {
                bits.push_back(static_cast<int>(rng() % 2));
                want ^= bits.back();
            }
            DecodeOptions opts;
            opts.max_steps = 4 * len + 16;
            Trace tr = decode(par.vocab, den, par.encode(bits), StopCriterion::fixpoint(),
                              static_cast<std::uint64_t>(e), opts);
            correct += par.classify(tr.final_state()) == want ? 1 : 0;
        }
        std::printf("       parity len=%3d: %d/1000\n", len, correct);
        if (correct != 1000) {
            ok = false;
            why = "length " + std::to_string(len) + ": " + std::to_string(correct) + "/1000";
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu params, 4 tuples, train loss %.2e, %.0fs%s%s", nparams,
                  res.final_loss, seconds_since(t0), why.empty() ? "" : ", failed: ", why.c_str());
    report(7, "parity reproduction (trained)", ok, buf);
}

bool graph_decode_ok(const tasks::GraphTask& gt, const tasks::GraphInstance& g, Trace& tr) {
    auto fin = gt.parse_final(tr.final_state());
    if (!fin) return false;
    int want = tasks::mincut_oracle(g);
    return gt.disconnected(*fin) &&
           static_cast<int>(g.edges.size() - fin->edges.size()) == want;
}

void criterion_8() {
    auto t0 = std::chrono::steady_clock::now();
    tasks::GraphTask gt;
    bool ok = true;
    std::string why;

    Rng rng(1008);
    for (int n = 4; n <= 10 && ok; ++n) {
        int good = 0;
        for (int e = 0; e < 1000; ++e) {
            tasks::GraphInstance g = tasks::random_graph_instance(n, rng);
            Trajectory traj = gt.trajectory(g, rng);
            std::size_t cursor = 0;
            Denoiser replay = [&](const SeqState& s, Rng&) -> DenoiserOutput {
                if (cursor < traj.steps.size() && s == traj.steps[cursor].x)
                    return traj.steps[cursor++].as_output();
                DenoiserOutput idle;
                idle.y.resize(s.size());
                idle.controls.assign(s.size(), Controls{});
                for (std::size_t i = 0; i < s.size(); ++i)
                    idle.y[i] = gt.vocab().is_mask(s.tokens[i]) ? gt.vocab().id("FB") : s.tokens[i];
                return idle;
            };
            DecodeOptions opts;
            opts.max_steps = static_cast<int>(traj.steps.size()) + 4;
            Trace tr = decode(gt.vocab(), replay, gt.encode_prompt(g), StopCriterion::eos(gt.eos()),
                              0, opts);
            good += graph_decode_ok(gt, g, tr) ? 1 : 0;
        }
        std::printf("       graph oracle n=%2d: %d/1000\n", n, good);
        if (good != 1000) {
            ok = false;
            why = "oracle n=" + std::to_string(n);
        }
    }

    // trained desk-scale substitute at n=4
    double train_acc = 0.0;
    if (ok) {
        Rng drng(77);
        std::vector<StepTuple> data;
        for (int e = 0; e < 48; ++e) {
            tasks::GraphInstance g = tasks::random_graph_instance(4, drng);
            Trajectory tr = gt.trajectory(g, drng);
            for (auto& s : tr.steps) data.push_back(std::move(s));
        }
        model::ModelConfig mc;
        mc.layers = 2;
        mc.heads = 4;
        mc.d = 64;
        mc.dff = 256;
        mc.max_seq = 128;
        model::TrainConfig tc;
        tc.steps = 1200;
        tc.batch = 16;
        tc.lr = 1e-3;
        tc.warmup = 100;
        tc.seed = 5;
        tc.log_every = 200;
        model::TrainResult res = model::train(data, mc, gt.vocab(), tc);

        Denoiser den = model::neural_denoiser(res.params);
        int good = 0;
        const int total = 200;
        for (int e = 0; e < total; ++e) {
            tasks::GraphInstance g = tasks::random_graph_instance(4, drng);
            DecodeOptions opts;
            opts.max_steps = 64;
            opts.max_state_len = 120;
            Trace tr = decode(gt.vocab(), den, gt.encode_prompt(g), StopCriterion::eos(gt.eos()),
                              0, opts);
            good += graph_decode_ok(gt, g, tr) ? 1 : 0;
        }
        train_acc = static_cast<double>(good) / total;
        std::printf("       graph trained n=4: %d/%d (train loss %.2e)\n", good, total,
                    res.final_loss);
        if (train_acc < 0.99) {
            ok = false;
            why = "trained n=4 accuracy " + std::to_string(train_acc);
        }
    }

    char buf[128];
    std::snprintf(buf, sizeof buf, "oracle 100%% n=4..10, trained n=4 %.1f%%, %.0fs%s%s",
                  train_acc * 100, seconds_since(t0), why.empty() ? "" : ", failed: ",
                  why.c_str());
    report(8, "graph editing", ok, buf);
}

void criterion_9() {
    auto t0 = std::chrono::steady_clock::now();
    tasks::SudokuTask st;
    Rng rng(1009);
    bool ok = true;
    int solved = 0;
    for (int e = 0; e < 100; ++e) {
        auto [puzzle, solution] = tasks::sudoku_generate(rng);
        Trajectory traj = st.trajectory(puzzle, rng);
        std::size_t cursor = 0;
        Denoiser replay = [&](const SeqState& s, Rng&) -> DenoiserOutput {
            if (cursor < traj.steps.size() && s == traj.steps[cursor].x)
                return traj.steps[cursor++].as_output();
            DenoiserOutput idle;
            idle.y.resize(s.size());
            idle.controls.assign(s.size(), Controls{});
            for (std::size_t i = 0; i < s.size(); ++i)
                idle.y[i] = st.vocab().is_mask(s.tokens[i]) ? st.vocab().id("EMPTY") : s.tokens[i];
            return idle;
        };
        DecodeOptions opts;
        opts.max_steps = static_cast<int>(traj.steps.size()) + 4;
        Trace tr = decode(st.vocab(), replay, st.encode_puzzle(puzzle), StopCriterion::fixpoint(),
                          0, opts);
        bool good = st.is_solved_as(tr.final_state(), solution) && replay_trace(st.vocab(), tr);
        solved += good ? 1 : 0;
    }
    ok = solved == 100;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d/100 generated hard puzzles in %.0fs", solved,
                  seconds_since(t0));
    report(9, "sudoku oracle decode (replay acceptance)", ok, buf);
}

void criterion_10() {
    auto t0 = std::chrono::steady_clock::now();
    tasks::DyckConfig cfg;
    tasks::Dyck dyck(cfg);
    bool ok = true;
    std::string why;
    int member_count = 0;
    for (int e = 0; e < 10000; ++e) {
        auto res = dyck.sample(static_cast<std::uint64_t>(e) * 1099511628211ull + 17);
        if (!res.ok || !dyck.member(res.word)) {
            ok = false;
            why = "sample " + std::to_string(e);
            break;
        }
        ++member_count;
    }

    int witnesses = 0;
    if (ok) {
        TokenId first = dyck.vocab().id("a1");
        for (int len : {0, 2, 4}) {
            int total = 1;
            for (int i = 0; i < len; ++i) total *= 4;
            for (int code = 0; code < total; ++code) {
                std::vector<TokenId> w(static_cast<std::size_t>(len));
                int c = code;
                for (int i = 0; i < len; ++i) {
                    w[static_cast<std::size_t>(i)] = first + c % 4;
                    c /= 4;
                }
                bool is_member = dyck.member(w);
                auto wit = dyck.witness(w);
                if (wit.has_value() != is_member) {
                    ok = false;
                    why = "witness existence mismatch";
                    break;
                }
                if (wit) {
                    ++witnesses;
                    if (!replay_trace(dyck.vocab(), *wit) ||
                        !(dyck.strip(wit->final_state()) == w)) {
                        ok = false;
                        why = "witness replay";
                        break;
                    }
                }
            }
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d/10000 members, %d witnesses <= len 4, %.1fs%s%s",
                  member_count, witnesses, seconds_since(t0),
                  why.empty() ? "" : ", failed: ", why.c_str());
    report(10, "two-sided bracket sampler support", ok, buf);
}

void criterion_11() {
    auto t0 = std::chrono::steady_clock::now();
    tasks::GraphTask gt;
    tasks::ArmVocab av(gt.vocab(), 512);
    Rng rng(1011);
    double apmdm_total = 0, arm_total = 0;
    const int trials = 200;
    for (int e = 0; e < trials; ++e) {
        tasks::GraphInstance g = tasks::random_graph_instance(4, rng);
        Trajectory tr = gt.trajectory(g, rng);
        apmdm_total += static_cast<double>(tr.final_state.size());
        SeqState arm = tasks::arm_sequentialize(av, tr, tasks::ArmFormat::TRIPLET);
        arm_total += static_cast<double>(arm.size());
    }
    double apmdm_mean = apmdm_total / trials;
    double arm_mean = arm_total / trials;
    bool ok_ap = apmdm_mean >= 0.8 * 56 && apmdm_mean <= 1.2 * 56;
    bool ok_arm = arm_mean >= 0.8 * 932 && arm_mean <= 1.2 * 932;
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "mean final %.1f (target 56 +/- 20%%), triplet mean %.1f (target 932 +/- 20%%), %.0fs",
                  apmdm_mean, arm_mean, seconds_since(t0));
    report(11, "sequence-length statistics", ok_ap && ok_arm, buf);
}

void criterion_12() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;

    // finite differences on a tiny config
    {
        Vocab v;
        v.add("M", true);
        for (int i = 0; i < 5; ++i) v.add("t" + std::to_string(i));
        model::ModelConfig cfg;
        cfg.layers = 2;
        cfg.heads = 2;
        cfg.d = 8;
        cfg.dff = 32;
        cfg.max_seq = 16;
        model::ModelParams p = model::ModelParams::init(cfg, v, 11);
        Rng prng(15);
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        for (double& x : p.w) x = u(prng);

        StepTuple t;
        t.x.tokens = {v.id("t0"), v.id("M"), v.id("t2"), v.id("M"), v.id("t4")};
        t.y = {v.id("t0"), v.id("t1"), v.id("t2"), v.id("t3"), v.id("t4")};
        t.c.assign(5, Controls{});
        t.c[0].insert = true;
        t.c[3].erase = true;
        t.c[4].remask = true;
        model::LossWeights w{1.2, 0.8, 1.5};

        std::vector<double> d_token, d_control, grad(p.w.size(), 0.0);
        model::TapeHandle tape = model::forward_tape(p, t.x);
        model::supervised_loss(p, tape.out, t, w, {}, &d_token, &d_control);
        model::backward_tape(p, t.x, tape, d_token, d_control, grad);

        Rng rng(12);
        const double eps = 1e-5;
        double worst = 0.0;
        for (const auto& e : p.layout.entries) {
            for (int probe = 0; probe < 8; ++probe) {
                std::size_t i = e.offset + rng() % (e.rows * e.cols);
                double saved = p.w[i];
                p.w[i] = saved + eps;
                model::ForwardOut up = model::forward(p, t.x);
                double lu = model::supervised_loss(p, up, t, w).total(w);
                p.w[i] = saved - eps;
                model::ForwardOut dn = model::forward(p, t.x);
                double ld = model::supervised_loss(p, dn, t, w).total(w);
                p.w[i] = saved;
                double num = (lu - ld) / (2 * eps);
                double rel =
                    std::abs(num - grad[i]) / std::max({1e-8, std::abs(num), std::abs(grad[i])});
                if (std::abs(num) > 1e-12 || std::abs(grad[i]) > 1e-12)
                    worst = std::max(worst, rel);
            }
        }
        if (worst >= 1e-4) {
            ok = false;
            why = "gradient relative error " + std::to_string(worst);
        }
    }

    // single-batch overfit below 1e-3
    double loss = 1.0;
    if (ok) {
        tasks::Parity par;
        auto tuples = par.canonical_training_tuples();
        model::ModelConfig mc;
        mc.layers = 1;
        mc.heads = 1;
        mc.d = 4;
        mc.dff = 16;
        mc.max_seq = 16;
        model::TrainConfig tc;
        tc.steps = 1500;
        tc.batch = 4;
        tc.lr = 3e-2;
        tc.warmup = 0;
        tc.weight_decay = 0.0;
        tc.seed = 1;
        model::TrainResult res = model::train(tuples, mc, par.vocab, tc);
        loss = res.final_loss;
        if (res.diverged || loss >= 1e-3) {
            ok = false;
            why = "overfit loss " + std::to_string(loss);
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "gradcheck 1e-4, overfit %.1e, %.0fs%s%s", loss,
                  seconds_since(t0), why.empty() ? "" : ", failed: ", why.c_str());
    report(12, "model numerics", ok, buf);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    if (g_failures == 0)
        std::printf("acceptance: all criteria passed\n");
    else
        std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
