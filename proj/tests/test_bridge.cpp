#include <doctest.h>

#include "apgen/efasp/bridge.hpp"
#include "apgen/pram/suite.hpp"

using namespace apgen;
using namespace apgen::efasp;

TEST_CASE("bridge encoding layouts") {
    PramCodec codec(8);
    pram::Program prog = pram::assemble(".procs 2\n.mem 1 3\n.mem 2 9\nHALT");

    SeqState ao = pram_bridge_encode(codec, prog, SimVariant::AO, 16);
    REQUIRE(ao.size() == 16);
    CHECK(ao.tokens[0] == codec.value_token(2));  // processor count
    CHECK(ao.tokens[1] == codec.value_token(1));
    CHECK(ao.tokens[2] == codec.value_token(3));
    CHECK(ao.tokens[3] == codec.value_token(2));
    CHECK(ao.tokens[4] == codec.value_token(9));
    CHECK(ao.tokens[5] == codec.sep);
    for (std::size_t i = 6; i < 16; ++i) CHECK(ao.tokens[i] == codec.mask);

    SeqState rw = pram_bridge_encode(codec, prog, SimVariant::REWRITE);
    CHECK(rw.size() == 1 + prog.memsize + 8);
    CHECK(rw.tokens[0] == codec.value_token(2));
    CHECK(rw.tokens[1] == codec.value_token(0));  // address 0 (zero value, still in range)
    CHECK(rw.tokens[2] == codec.value_token(3));
    CHECK(rw.tokens[3] == codec.value_token(9));
    CHECK(rw.tokens[4] == codec.mask);

    // empty memory: count token then separator/mask padding only
    pram::Program empty = pram::assemble(".procs 1\nHALT");
    SeqState ao0 = pram_bridge_encode(codec, empty, SimVariant::AO, 12);
    CHECK(ao0.tokens[0] == codec.value_token(1));
    CHECK(ao0.tokens[1] == codec.sep);
    CHECK(ao0.tokens[2] == codec.mask);
}

TEST_CASE("halt-only program agrees immediately in both variants") {
    pram::Program prog = pram::assemble(".procs 2\n.mem 0 7\n.out 0\nHALT");
    for (SimVariant variant : {SimVariant::AO, SimVariant::REWRITE}) {
        CompiledProgram sim = load_sim_program(variant, prog.word_bits);
        SimReport rep = verify_simulation(sim, prog, variant);
        CHECK(rep.ok);
        CHECK(rep.machine_output == 7);
        CHECK(rep.decoded_output == 7);
    }
}

TEST_CASE("store/load round trip through the trace") {
    // one processor writes then reads back through memory
    std::string src = R"(
.procs 1
.mem 0 5
.out 3
  LOADI R1, 2
  LOADI R2, 11
  STORE [R1], R2    ; M[2] = 11
  LOAD  R2, [R1]    ; read back
  LOADI R1, 3
  STORE [R1], R2    ; M[3] = 11
  HALT
)";
    pram::Program prog = pram::assemble(src);
    for (SimVariant variant : {SimVariant::AO, SimVariant::REWRITE}) {
        CompiledProgram sim = load_sim_program(variant, prog.word_bits);
        SimReport rep = verify_simulation(sim, prog, variant);
        INFO(rep.detail);
        CHECK(rep.ok);
        CHECK(rep.decoded_output == 11);
    }
}

TEST_CASE("per-round blocks mirror the reference machine") {
    // two processors, distinct stores; check the decoded round blocks carry
    // (pc, registers, store address, store value) after each round
    std::string src = R"(
.procs 2
.out 4
  LOADI R1, 4
  ADD   R1, R0
  LOADI R2, 6
  ADD   R2, R0
  STORE [R1], R2
  HALT
)";
    pram::Program prog = pram::assemble(src);
    CompiledProgram sim = load_sim_program(SimVariant::AO, prog.word_bits);
    PramCodec codec(prog.word_bits);
    std::size_t ctx = 2 + 17 * 10;
    SeqState x0 = pram_bridge_encode(codec, prog, SimVariant::AO, ctx);
    Denoiser den = symbolic_denoiser(sim, SimVariant::AO, codec, prog);
    DecodeOptions opts;
    opts.max_steps = 64;
    Trace tr = decode(codec.vocab, den, x0, StopCriterion::fixpoint(), 0, opts);

    pram::Machine machine(prog);
    const std::size_t first_sep = 1;  // 0-based index of the input SEP
    // block b occupies [first_sep+1 + b*17, ...+16), then a SEP
    for (int round = 1; round <= 6; ++round) {
        machine.step_round();
        std::size_t base = first_sep + 1 + static_cast<std::size_t>(round) * 17;
        const SeqState& fin = tr.final_state();
        REQUIRE(base + 16 < fin.size());
        for (int pid = 0; pid < 2; ++pid) {
            std::size_t pb = base + static_cast<std::size_t>(pid) * 8;
            long long pc_tok = codec.token_value(fin.tokens[pb]);
            long long want_pc = machine.pc(pid) == pram::kHaltPc ? 255 : machine.pc(pid);
            CHECK(pc_tok == want_pc);
            for (int r = 0; r < 5; ++r)
                CHECK(codec.token_value(fin.tokens[pb + 1 + static_cast<std::size_t>(r)]) ==
                      static_cast<long long>(machine.reg(pid, r)));
        }
    }
    CHECK(machine.all_halted());
}

TEST_CASE("verification suite: outputs, step ratio, context budgets") {
    Rng rng(2026);
    std::uniform_int_distribution<int> val(1, 15);

    SUBCASE("rewrite variant, including the space law") {
        std::vector<pram::Word> v16;
        for (int i = 0; i < 16; ++i) v16.push_back(static_cast<pram::Word>(val(rng)));
        std::vector<pram::Word> pm = {9, 3, 7, 1, 12, 5, 2, 8};

        std::vector<std::string> sources = {
            pram::broadcast_source(8, 9),
            pram::treesum_source(v16),
            pram::prefixmax_source(pm),
        };
        for (const std::string& src : sources) {
            pram::Program prog = pram::assemble(src);
            CompiledProgram sim = load_sim_program(SimVariant::REWRITE, prog.word_bits);
            SimReport rep = verify_simulation(sim, prog, SimVariant::REWRITE);
            INFO(rep.detail);
            CHECK(rep.ok);
            CHECK(rep.context_tokens <= rep.context_limit);
        }

        // space law: quadrupling the round count leaves the context alone
        pram::Program small = pram::assemble(pram::counter_source(12));
        pram::Program big = pram::assemble(pram::counter_source(48));
        CompiledProgram sim = load_sim_program(SimVariant::REWRITE, small.word_bits);
        SimReport rs = verify_simulation(sim, small, SimVariant::REWRITE);
        SimReport rb = verify_simulation(sim, big, SimVariant::REWRITE);
        CHECK(rs.ok);
        CHECK(rb.ok);
        CHECK(rb.rounds >= 3 * rs.rounds);
        CHECK(rs.context_tokens == rb.context_tokens);
        CHECK(rb.context_tokens <= 4 * big.memsize);
    }

    SUBCASE("any-order variant on the small instances") {
        std::vector<pram::Word> v8;
        for (int i = 0; i < 8; ++i) v8.push_back(static_cast<pram::Word>(val(rng)));
        std::vector<std::string> sources = {
            pram::broadcast_source(8, 13),
            pram::treesum_source(v8),
        };
        for (const std::string& src : sources) {
            pram::Program prog = pram::assemble(src);
            CompiledProgram sim = load_sim_program(SimVariant::AO, prog.word_bits);
            SimReport rep = verify_simulation(sim, prog, SimVariant::AO);
            INFO(rep.detail);
            CHECK(rep.ok);
            CHECK(rep.steps_per_round <= 4.0);
            CHECK(rep.context_tokens <= 16 * 8 * rep.rounds);
        }
    }
}
