#include "apgen/trajectory.hpp"

namespace apgen {

std::optional<std::size_t> replay_mismatch(const Vocab& vocab, const Trajectory& tr) {
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
        SeqState next = apply_transition(vocab, tr.steps[i].x, tr.steps[i].as_output());
        const SeqState& expected =
            i + 1 < tr.steps.size() ? tr.steps[i + 1].x : tr.final_state;
        if (!(next == expected)) return i;
    }
    return std::nullopt;
}

}  // namespace apgen
