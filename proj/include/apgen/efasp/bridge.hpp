#pragma once

#include "apgen/decode.hpp"
#include "apgen/efasp/eval.hpp"
#include "apgen/efasp/parse.hpp"
#include "apgen/pram/machine.hpp"

namespace apgen::efasp {

enum class SimVariant { AO, REWRITE };

// Token codec for the machine-state sequences: one token per word value
// ("V<k>"), plus SEP, NOLOG (empty store-log slot) and the mask.
struct PramCodec {
    explicit PramCodec(int word_bits);

    int word_bits;
    Vocab vocab;
    TokenId mask, sep, nolog;
    TokenId first_value;
    std::vector<TokenInfo> token_info;

    TokenId value_token(long long v) const;
    long long token_value(TokenId t) const;
};

// Initial sequence for a machine with the program's .procs/.mem directives:
//   AO:      phi(P), (addr, value) pairs of the nonzero initial memory, SEP,
//            mask padding to ctx_len
//   REWRITE: phi(P), memory value tokens for addresses 0..n-1, mask padding
//            to memsize + 4P + 1
SeqState pram_bridge_encode(const PramCodec& codec, const pram::Program& prog, SimVariant variant,
                            std::size_t ctx_len = 0);

// Wraps a compiled sequence program as a denoiser.
//   AO:      program output (emit, kind, value, score); flagged masked
//            positions unmask (kind 0 = value token, 1 = SEP, 2 = NOLOG),
//            all other masks stay put.
//   REWRITE: program output (value, rewrite); drives rewrite-mode decoding.
Denoiser symbolic_denoiser(const CompiledProgram& program, SimVariant variant,
                           const PramCodec& codec, const pram::Program& machine_prog,
                           bool parallel = true);

struct SimReport {
    bool ok = false;               // outputs agree and nothing diverged
    bool machine_terminated = false;
    pram::Word machine_output = 0;
    bool decoded_output_valid = false;
    long long decoded_output = -1;
    std::uint64_t rounds = 0;      // reference machine rounds
    std::size_t decode_steps = 0;  // denoiser applications in the decode
    std::size_t context_tokens = 0;  // highest token index touched
    std::size_t context_limit = 0;   // the variant's budget for this run
    double steps_per_round = 0.0;
    std::string detail;
};

// Runs the reference machine and the symbolic-denoiser decode and compares
// outputs, step counts and context usage.
SimReport verify_simulation(const CompiledProgram& program, const pram::Program& machine_prog,
                            SimVariant variant, std::uint64_t max_rounds = 100000,
                            bool parallel = true);

// Loads a shipped program asset (assets/efasp/<name>) with the right width.
CompiledProgram load_sim_program(SimVariant variant, int word_bits);

}  // namespace apgen::efasp
