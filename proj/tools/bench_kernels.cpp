// Serial-vs-parallel comparison for the three hot kernels: machine rounds,
// sequence-program column evaluation, and the encoder forward pass.

#include <chrono>
#include <iostream>

#include "apgen/efasp/bridge.hpp"
#include "apgen/model/net.hpp"
#include "apgen/pram/machine.hpp"
#include "apgen/pram/suite.hpp"

using namespace apgen;

namespace {

template <typename F>
double time_ms(F&& f, int reps) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void row(const std::string& name, double serial_ms, double parallel_ms) {
    std::printf("%-28s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx\n", name.c_str(),
                serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
    {
        // Many processors hammering disjoint cells.
        std::string src = ".procs 4096\n.memsize 8192\n.word 16\n.out 0\n";
        src += "  LOADI R1, 1\n  ADD R1, R0\n";
        for (int i = 0; i < 24; ++i) src += "  ADD R2, R1\n  XOR R2, R0\n  STORE [R1], R2\n";
        src += "  HALT\n";
        pram::Program prog = pram::assemble(src);
        auto run = [&](bool parallel) {
            pram::Machine m(prog);
            m.run(1000, parallel);
        };
        double s = time_ms([&] { run(false); }, 3);
        double p = time_ms([&] { run(true); }, 3);
        row("pram rounds (P=4096)", s, p);
    }
    {
        pram::Program prog = pram::assemble(pram::treesum_source(
            {3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3}));
        efasp::CompiledProgram sim = efasp::load_sim_program(efasp::SimVariant::REWRITE, 8);
        efasp::PramCodec codec(8);
        SeqState x = efasp::pram_bridge_encode(codec, prog, efasp::SimVariant::REWRITE);
        efasp::EvalContext ctx;
        ctx.x = &x;
        ctx.token_info = &codec.token_info;
        ctx.machine_program = &prog;
        double s = time_ms([&] { efasp::eval_columns(sim, ctx, false); }, 5);
        double p = time_ms([&] { efasp::eval_columns(sim, ctx, true); }, 5);
        row("efasp columns (ctx=289)", s, p);
    }
    {
        Vocab v;
        v.add("M", true);
        for (int i = 0; i < 60; ++i) v.add("t" + std::to_string(i));
        model::ModelConfig mc;
        mc.layers = 4;
        mc.heads = 4;
        mc.d = 128;
        mc.dff = 512;
        mc.max_seq = 512;
        model::ModelParams p = model::ModelParams::init(mc, v, 1);
        SeqState x;
        Rng rng(7);
        std::uniform_int_distribution<TokenId> pick(0, 60);
        for (int i = 0; i < 256; ++i) x.tokens.push_back(pick(rng));
        int threads_env = 0;
#ifdef _OPENMP
        threads_env = 1;
#endif
        (void)threads_env;
        double t = time_ms([&] { model::forward(p, x); }, 5);
        std::printf("%-28s forward %8.3f ms (OpenMP inside matmuls)\n", "encoder fwd (256x128)", t);
    }
    return 0;
}
