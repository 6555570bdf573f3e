#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "apgen/vocab.hpp"

namespace apgen {

using Rng = std::mt19937_64;

// Variable-length sequence of vocab indices; the object edited each step.
struct SeqState {
    std::vector<TokenId> tokens;

    SeqState() = default;
    explicit SeqState(std::vector<TokenId> t) : tokens(std::move(t)) {}

    std::size_t size() const { return tokens.size(); }
    bool operator==(const SeqState&) const = default;
};

// Per-position 3-bit control driving the transition function.
struct Controls {
    bool remask = false;
    bool insert = false;
    bool erase = false;  // the delete bit

    bool operator==(const Controls&) const = default;
};

// Single-step denoiser result: mask-free token proposal plus controls per
// position.  `confidence` is optional (empty when the denoiser has none) and
// `insert_token` optionally names which mask token an insert produces when
// the vocab has more than one.
struct DenoiserOutput {
    std::vector<TokenId> y;
    std::vector<Controls> controls;
    std::vector<double> confidence;
    std::vector<TokenId> insert_token;

    std::size_t size() const { return y.size(); }
};

using Denoiser = std::function<DenoiserOutput(const SeqState&, Rng&)>;

struct StopCriterion {
    enum class Kind { fixpoint, end_token, all_unmasked, max_steps };

    Kind kind = Kind::fixpoint;
    TokenId end_token = -1;
    int step_limit = 0;  // used when kind == max_steps

    static StopCriterion fixpoint() { return {Kind::fixpoint, -1, 0}; }
    static StopCriterion eos(TokenId tok) { return {Kind::end_token, tok, 0}; }
    static StopCriterion all_unmasked() { return {Kind::all_unmasked, -1, 0}; }
    static StopCriterion max_steps(int limit) {
        if (limit <= 0) throw ContractError("max-steps limit must be positive");
        return {Kind::max_steps, -1, limit};
    }
};

enum class StopReason { fixpoint, end_token, all_unmasked, step_limit, truncated };

// Full decode episode: every visited state plus the per-step outputs that
// produced it.  states[i+1] == apply_transition(states[i], outputs[i]).
struct Trace {
    std::vector<SeqState> states;
    std::vector<DenoiserOutput> outputs;
    StopReason stop_reason = StopReason::fixpoint;

    const SeqState& final_state() const { return states.back(); }
    std::size_t steps() const { return outputs.size(); }
    bool truncated() const { return stop_reason == StopReason::truncated; }
};

const char* stop_reason_name(StopReason r);

}  // namespace apgen
