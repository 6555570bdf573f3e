#pragma once

#include "apgen/trajectory.hpp"

namespace apgen::model {

// Self-supervised corruption kinds; each trains one head.
enum class CorruptKind { unmask_forward, remask_shuffle, insert_deflate, delete_inflate };

struct CorruptionSpec {
    CorruptKind kind = CorruptKind::unmask_forward;
    double rate = 0.5;  // alpha_t for masking kinds, delta / gamma otherwise
    std::uint64_t seed = 0;
};

// Applies the corruption to a clean (mask-free) sequence and returns the
// (input, labels) pair as a StepTuple.  `pool` is the batch context for
// remask-shuffle: a canonically sorted multiset of batch tokens, so labels
// per sample do not depend on batch order.
StepTuple corrupt(const Vocab& vocab, const SeqState& clean, const CorruptionSpec& spec,
                  const std::vector<TokenId>& pool = {});

}  // namespace apgen::model
