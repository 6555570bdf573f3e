#pragma once

#include "apgen/transition.hpp"

namespace apgen {

struct DecodeOptions {
    // Hard budget on denoiser applications, applied on top of any criterion.
    int max_steps = 4096;
    // States growing past this many tokens truncate the trace (0 = no cap).
    std::size_t max_state_len = 0;
    // When true, each step applies rewrite_step semantics driven by the
    // remask bit instead of the full editing transition (Rewrite-MDM).
    bool rewrite_mode = false;
};

// Iterative decoding: repeatedly apply the denoiser and the transition
// function until the stopping criterion fires.  Deterministic given seed.
// Hitting the step budget before the criterion yields a truncated trace,
// not an error.
Trace decode(const Vocab& vocab, const Denoiser& denoiser, const SeqState& x0,
             const StopCriterion& stop, std::uint64_t seed, DecodeOptions opts = {});

// Re-applies every recorded output and checks that each recorded state is
// reproduced exactly.  Returns false at the first divergence.
bool replay_trace(const Vocab& vocab, const Trace& trace, bool rewrite_mode = false);

// Restricts a denoiser to the leading `window` positions: the inner denoiser
// sees only that prefix and everything beyond it is kept unchanged.  This is
// how a model with a tiny maximum sequence length drives arbitrarily long
// states when the editing procedure works at the front of the sequence.
Denoiser windowed_denoiser(const Vocab& vocab, Denoiser inner, std::size_t window);

}  // namespace apgen
