#pragma once

#include <optional>
#include <string>

#include "apgen/transition.hpp"

namespace apgen {

// Supervised training unit: one recorded edit step.  Replaying
// (x, y, c) through apply_transition yields the next recorded state.
struct StepTuple {
    SeqState x;
    std::vector<TokenId> y;
    std::vector<Controls> c;
    std::vector<TokenId> insert_token;  // optional, for two-mask vocabularies

    DenoiserOutput as_output() const {
        DenoiserOutput out;
        out.y = y;
        out.controls = c;
        out.insert_token = insert_token;
        return out;
    }
};

struct Trajectory {
    std::vector<StepTuple> steps;
    SeqState final_state;

    const SeqState& initial_state() const {
        if (steps.empty()) return final_state;
        return steps.front().x;
    }
};

// Replays every tuple from the trajectory start and checks each recorded
// intermediate state bit-exactly.  Returns the index of the first bad step,
// or nullopt when the whole trajectory replays cleanly onto final_state.
std::optional<std::size_t> replay_mismatch(const Vocab& vocab, const Trajectory& tr);

}  // namespace apgen
