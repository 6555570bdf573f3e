#pragma once

#include "apgen/state.hpp"
#include "apgen/vocab.hpp"

namespace apgen {

// One step of the editing calculus, applied coordinate-wise over x.
// Per position, in order:
//   * a masked position with the delete bit set is removed outright and its
//     insert bit is ignored,
//   * otherwise the kept value is M when remask is set, y_i when x_i is a
//     mask, and x_i unchanged otherwise,
//   * an insert bit then appends a fresh mask after the kept value.
// Throws ContractError on length mismatch or a mask token inside y.
SeqState apply_transition(const Vocab& vocab, const SeqState& x, const DenoiserOutput& out);

// Length-preserving restricted editor: position i becomes y_i where the
// rewrite bit is set, x_i otherwise.
SeqState rewrite_step(const Vocab& vocab, const SeqState& x, const std::vector<TokenId>& y,
                      const std::vector<bool>& rewrite);

// Expansion of one rewrite step into three editing steps (insert everywhere,
// remask-originals/unmask-copies, delete leftover masks).  Replaying the
// returned (state, output) pairs through apply_transition reproduces
// rewrite_step on the same inputs.
struct ExpandedStep {
    SeqState state;  // state the output is applied to
    DenoiserOutput out;
};
std::vector<ExpandedStep> rewrite_as_apmdm(const Vocab& vocab, const SeqState& x,
                                           const std::vector<TokenId>& y,
                                           const std::vector<bool>& rewrite);

enum class SelectPolicy { top_prob, top_prob_margin, left_to_right };

// Restricts a denoiser output to pure any-order decoding: no inserts, no
// deletes, no remasking of decoded tokens, and at most k masked positions
// unmask this step.  Masked positions not selected keep their mask via the
// remask bit (the only way the transition function leaves a mask in place).
// Confidence policies require `out.confidence`; ties break toward the lowest
// position index.
DenoiserOutput ao_constrain(const DenoiserOutput& out, const SeqState& x, const Vocab& vocab,
                            int k, SelectPolicy policy);

}  // namespace apgen
