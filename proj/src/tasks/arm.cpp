#include "apgen/tasks/arm.hpp"

namespace apgen::tasks {

ArmVocab::ArmVocab(const Vocab& task_vocab, int max_positions) : max_pos(max_positions) {
    for (TokenId t = 0; t < static_cast<TokenId>(task_vocab.size()); ++t)
        vocab.add(task_vocab.name(t), task_vocab.is_mask(t));
    sep = vocab.contains("SEP") ? vocab.id("SEP") : vocab.add("SEP");
    step = vocab.add("STEP");
    answer = vocab.add("ANSWER");
    none = vocab.add("NONE");
    op_unmask = vocab.add("UNMASK");
    op_remask = vocab.add("REMASK");
    op_insert = vocab.add("INSERT");
    op_delete = vocab.add("DELETE");
    first_pose = static_cast<TokenId>(vocab.size());
    for (int i = 0; i < max_positions; ++i) vocab.add("POSE" + std::to_string(i));
}

TokenId ArmVocab::pose(std::size_t position) const {
    if (position >= static_cast<std::size_t>(max_pos))
        throw ArmFormatError("position exceeds the POSE token range");
    return first_pose + static_cast<TokenId>(position);
}

SeqState arm_sequentialize(const ArmVocab& av, const Trajectory& tr, ArmFormat format) {
    SeqState out;
    const SeqState& x0 = tr.initial_state();

    if (format == ArmFormat::PAIR) {
        const std::size_t S = x0.size();
        std::size_t lead = 0;
        while (lead < S && !av.vocab.is_mask(x0.tokens[lead])) ++lead;
        for (const StepTuple& t : tr.steps) {
            if (t.x.size() != S)
                throw ArmFormatError("pair format requires a fixed-length trajectory");
            for (std::size_t i = 0; i < t.x.size(); ++i) {
                const Controls& c = t.c[i];
                if (c.insert || c.erase || (c.remask && !av.vocab.is_mask(t.x.tokens[i])))
                    throw ArmFormatError("pair format requires an unmask-only trajectory");
            }
        }
        out.tokens.assign(x0.tokens.begin(), x0.tokens.begin() + static_cast<std::ptrdiff_t>(lead));
        for (const StepTuple& t : tr.steps) {
            for (std::size_t i = 0; i < t.x.size(); ++i) {
                if (av.vocab.is_mask(t.x.tokens[i]) && !t.c[i].remask) {
                    out.tokens.push_back(av.pose(i));
                    out.tokens.push_back(t.y[i]);
                }
            }
        }
        const std::size_t total = 2 * S - lead;
        if (out.tokens.size() > total) throw ArmFormatError("pair serialization overflow");
        out.tokens.resize(total, av.vocab.primary_mask());
        return out;
    }

    // TRIPLET
    out.tokens = x0.tokens;
    for (const StepTuple& t : tr.steps) {
        out.tokens.push_back(av.step);
        for (std::size_t i = 0; i < t.x.size(); ++i) {
            const Controls& c = t.c[i];
            const bool masked = av.vocab.is_mask(t.x.tokens[i]);
            if (masked && c.erase) {
                out.tokens.push_back(av.pose(i));
                out.tokens.push_back(av.op_delete);
                out.tokens.push_back(av.none);
                continue;  // delete suppresses the insert
            }
            if (c.remask && !masked) {
                out.tokens.push_back(av.pose(i));
                out.tokens.push_back(av.op_remask);
                out.tokens.push_back(av.none);
            } else if (masked && !c.remask) {
                out.tokens.push_back(av.pose(i));
                out.tokens.push_back(av.op_unmask);
                out.tokens.push_back(t.y[i]);
            }
            // a remasked mask just holds its place; no operation to record
            if (c.insert) {
                out.tokens.push_back(av.pose(i));
                out.tokens.push_back(av.op_insert);
                out.tokens.push_back(t.insert_token.empty() ? av.none : t.insert_token[i]);
            }
        }
    }
    out.tokens.push_back(av.answer);
    out.tokens.insert(out.tokens.end(), tr.final_state.tokens.begin(), tr.final_state.tokens.end());
    return out;
}

SeqState arm_triplet_replay(const ArmVocab& av, const Vocab& task_vocab, const SeqState& arm) {
    // Split into x0, per-step triplet groups, and the trailing answer.
    std::size_t i = 0;
    SeqState state;
    while (i < arm.tokens.size() && arm.tokens[i] != av.step && arm.tokens[i] != av.answer)
        state.tokens.push_back(arm.tokens[i++]);

    auto is_pose = [&](TokenId t) {
        return t >= av.first_pose && t < av.first_pose + av.max_pos;
    };

    while (i < arm.tokens.size() && arm.tokens[i] == av.step) {
        ++i;
        DenoiserOutput out;
        out.y.resize(state.size());
        out.controls.assign(state.size(), Controls{});
        out.insert_token.assign(state.size(), task_vocab.primary_mask());
        TokenId filler = -1;
        for (TokenId t = 0; t < static_cast<TokenId>(task_vocab.size()); ++t)
            if (!task_vocab.is_mask(t)) {
                filler = t;
                break;
            }
        for (std::size_t k = 0; k < state.size(); ++k) {
            if (task_vocab.is_mask(state.tokens[k])) {
                out.y[k] = filler;
                out.controls[k].remask = true;  // unmentioned masks hold their place
            } else {
                out.y[k] = state.tokens[k];
            }
        }

        while (i + 2 < arm.tokens.size() && is_pose(arm.tokens[i])) {
            std::size_t pos = static_cast<std::size_t>(arm.tokens[i] - av.first_pose);
            TokenId op = arm.tokens[i + 1];
            TokenId val = arm.tokens[i + 2];
            i += 3;
            if (pos >= state.size()) throw ArmFormatError("triplet position out of range");
            if (op == av.op_delete) {
                out.controls[pos].erase = true;
                out.controls[pos].remask = false;
            } else if (op == av.op_remask) {
                out.controls[pos].remask = true;
            } else if (op == av.op_unmask) {
                out.y[pos] = val;
                out.controls[pos].remask = false;
            } else if (op == av.op_insert) {
                out.controls[pos].insert = true;
                if (val != av.none) out.insert_token[pos] = val;
            } else {
                throw ArmFormatError("unknown op token in triplet");
            }
        }
        state = apply_transition(task_vocab, state, out);
    }
    return state;
}

}  // namespace apgen::tasks
