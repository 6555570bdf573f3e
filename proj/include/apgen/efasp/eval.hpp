#pragma once

#include "apgen/efasp/ast.hpp"
#include "apgen/pram/isa.hpp"
#include "apgen/state.hpp"

namespace apgen::efasp {

enum class PosVariant { SEQ, BiPE };

struct TokenInfo {
    bool is_mask = false;
    bool is_sep = false;
    bool numeric = false;
    long long value = 0;
};

// Everything evaluation needs besides the program: the token sequence, the
// vocabulary-to-bits codec, the positional variant, and (for the simulation
// programs) the assembled machine program behind the instruction accessors.
struct EvalContext {
    const SeqState* x = nullptr;
    const std::vector<TokenInfo>* token_info = nullptr;
    PosVariant pos_variant = PosVariant::SEQ;
    const pram::Program* machine_program = nullptr;

    std::size_t length() const { return x->size(); }
    const TokenInfo& info_at(std::size_t i) const {
        TokenId t = x->tokens[i];
        return (*token_info)[static_cast<std::size_t>(t)];
    }
};

// Direct per-position semantics (the serial reference).  Positions are
// 1-indexed as in the operator definitions.
Value eval_reference(const CompiledProgram& prog, const EvalContext& ctx, std::size_t i);

// Whole-sequence evaluation, one column per slot, parallelized over
// positions with OpenMP when `parallel` is set.  Must agree with
// eval_reference at every position.
std::vector<Value> eval_columns(const CompiledProgram& prog, const EvalContext& ctx,
                                bool parallel = true);

}  // namespace apgen::efasp
