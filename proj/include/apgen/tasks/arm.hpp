#pragma once

#include "apgen/trajectory.hpp"

namespace apgen::tasks {

enum class ArmFormat { PAIR, TRIPLET };

// Extension of a task vocabulary with the serialization tokens: POSE<k>
// position tokens, the op tokens, STEP/ANSWER/NONE markers and a SEP for
// the pair format.
struct ArmVocab {
    Vocab vocab;  // copy of the task vocab plus the extension tokens
    TokenId sep, step, answer, none;
    TokenId op_unmask, op_remask, op_insert, op_delete;
    TokenId first_pose;
    int max_pos;

    ArmVocab(const Vocab& task_vocab, int max_positions);
    TokenId pose(std::size_t position) const;
};

struct ArmFormatError : ContractError {
    using ContractError::ContractError;
};

// Left-to-right serialization of a trajectory.
//   PAIR:    x0-prefix, then (position, content) per unmask event in
//            chronological order, mask padding to 2S - n - 1 (requires an
//            unmask-only trajectory of constant length S with n+1 leading
//            non-mask tokens).
//   TRIPLET: initial state, then per step STEP followed by (position, op,
//            value) triplets (value NONE for valueless ops), then ANSWER and
//            the final state.
SeqState arm_sequentialize(const ArmVocab& av, const Trajectory& tr, ArmFormat format);

// Replays a TRIPLET sequence through the transition function; returns the
// reconstructed final state.
SeqState arm_triplet_replay(const ArmVocab& av, const Vocab& task_vocab, const SeqState& arm);

}  // namespace apgen::tasks
