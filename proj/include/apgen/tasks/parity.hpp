#pragma once

#include "apgen/decode.hpp"
#include "apgen/trajectory.hpp"

namespace apgen::tasks {

// Parity by elimination: remask the zeros, delete the masks, then cancel
// ones pairwise at the front of the sequence until BOS EOS (even) or
// BOS 1 EOS (odd) remains.
struct Parity {
    Vocab vocab;
    TokenId bos, eos, mask, zero, one;

    Parity();

    SeqState encode(const std::vector<int>& bits) const;

    // Deterministic one-step elimination policy (the scripted denoiser).
    DenoiserOutput policy(const SeqState& x) const;
    Denoiser denoiser() const;

    // Runs a short-context denoiser on the EOS-terminated front window
    // (BOS x1 x2 EOS) and keeps everything beyond the two front slots
    // unchanged, mirroring the tiny maximum sequence length the trained
    // model uses.  The inner denoiser must outlive the result.
    Denoiser front_window_denoiser(const Denoiser& inner) const;

    // Full supervised trajectory for one input; alternating remask/delete
    // tuples ending at the terminal state.
    Trajectory trajectory(const std::vector<int>& bits) const;

    // The four canonical training tuples covering patterns
    // {00, 01/10, 11, terminal-delete} at input length 2.
    std::vector<StepTuple> canonical_training_tuples() const;

    // Classifies a terminal state: 0 = even, 1 = odd, -1 = not terminal.
    int classify(const SeqState& terminal) const;
};

}  // namespace apgen::tasks
