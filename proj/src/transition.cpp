#include "apgen/transition.hpp"

#include <algorithm>
#include <numeric>

namespace apgen {

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::fixpoint: return "fixpoint";
        case StopReason::end_token: return "end_token";
        case StopReason::all_unmasked: return "all_unmasked";
        case StopReason::step_limit: return "step_limit";
        case StopReason::truncated: return "truncated";
    }
    return "unknown";
}

static void check_output(const Vocab& vocab, const SeqState& x, const DenoiserOutput& out) {
    if (out.y.size() != x.size() || out.controls.size() != x.size())
        throw ContractError("denoiser output length does not match state length");
    if (!out.confidence.empty() && out.confidence.size() != x.size())
        throw ContractError("confidence vector length does not match state length");
    if (!out.insert_token.empty() && out.insert_token.size() != x.size())
        throw ContractError("insert_token vector length does not match state length");
    for (TokenId t : out.y) {
        vocab.check(t);
        if (vocab.is_mask(t)) throw ContractError("denoiser y contains a mask token");
    }
}

SeqState apply_transition(const Vocab& vocab, const SeqState& x, const DenoiserOutput& out) {
    check_output(vocab, x, out);
    SeqState next;
    next.tokens.reserve(x.size() + x.size() / 2);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const TokenId xi = x.tokens[i];
        vocab.check(xi);
        const Controls& c = out.controls[i];
        const bool masked = vocab.is_mask(xi);
        if (masked && c.erase) continue;  // delete suppresses insert too
        TokenId kept;
        if (c.remask)
            kept = vocab.primary_mask();
        else if (masked)
            kept = out.y[i];
        else
            kept = xi;
        next.tokens.push_back(kept);
        if (c.insert) {
            TokenId m = out.insert_token.empty() ? vocab.primary_mask() : out.insert_token[i];
            if (!vocab.is_mask(m)) throw ContractError("insert_token must be a mask token");
            next.tokens.push_back(m);
        }
    }
    return next;
}

static void check_rewrite_args(const SeqState& x, const std::vector<TokenId>& y,
                               const std::vector<bool>& rewrite) {
    if (y.size() != x.size() || rewrite.size() != x.size())
        throw ContractError("rewrite arguments must match state length");
}

SeqState rewrite_step(const Vocab& vocab, const SeqState& x, const std::vector<TokenId>& y,
                      const std::vector<bool>& rewrite) {
    check_rewrite_args(x, y, rewrite);
    SeqState next = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (rewrite[i]) {
            vocab.check(y[i]);
            if (vocab.is_mask(y[i])) throw ContractError("rewrite value is a mask token");
            next.tokens[i] = y[i];
        }
    }
    return next;
}

std::vector<ExpandedStep> rewrite_as_apmdm(const Vocab& vocab, const SeqState& x,
                                           const std::vector<TokenId>& y,
                                           const std::vector<bool>& rewrite) {
    check_rewrite_args(x, y, rewrite);
    const std::size_t n = x.size();
    TokenId plain = -1;  // any non-mask token; y slots the transition never reads
    for (TokenId t = 0; t < static_cast<TokenId>(vocab.size()); ++t)
        if (!vocab.is_mask(t)) { plain = t; break; }
    if (plain < 0) throw ContractError("vocab has no non-mask token");
    auto filler = [&](TokenId t) { return vocab.is_mask(t) ? plain : t; };

    std::vector<ExpandedStep> steps(3);

    // Step 1: insert a mask after every position.
    steps[0].state = x;
    steps[0].out.y.resize(n);
    steps[0].out.controls.assign(n, Controls{false, true, false});
    for (std::size_t i = 0; i < n; ++i) steps[0].out.y[i] = filler(x.tokens[i]);
    SeqState u1 = apply_transition(vocab, steps[0].state, steps[0].out);

    // Step 2: remask every original position, unmask each inserted copy to
    // the rewritten content (y_i when flagged, x_i otherwise).
    steps[1].state = u1;
    const std::size_t n2 = u1.size();
    steps[1].out.y.resize(n2);
    steps[1].out.controls.assign(n2, Controls{});
    for (std::size_t i = 0; i < n; ++i) {
        steps[1].out.controls[2 * i].remask = true;
        steps[1].out.y[2 * i] = filler(x.tokens[i]);
        TokenId content = rewrite[i] ? y[i] : x.tokens[i];
        if (vocab.is_mask(content))
            throw ContractError("cannot expand a rewrite over a masked source position");
        steps[1].out.y[2 * i + 1] = content;
    }
    SeqState u2 = apply_transition(vocab, steps[1].state, steps[1].out);

    // Step 3: delete the masks left at original positions.
    steps[2].state = u2;
    steps[2].out.y.resize(n2);
    steps[2].out.controls.assign(n2, Controls{});
    for (std::size_t i = 0; i < n2; ++i) {
        steps[2].out.y[i] = filler(u2.tokens[i]);
        if (i % 2 == 0) steps[2].out.controls[i].erase = true;
    }
    return steps;
}

DenoiserOutput ao_constrain(const DenoiserOutput& out, const SeqState& x, const Vocab& vocab,
                            int k, SelectPolicy policy) {
    if (k < 1) throw ContractError("ao_constrain requires k >= 1");
    check_output(vocab, x, out);

    std::vector<std::size_t> masked;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (vocab.is_mask(x.tokens[i])) masked.push_back(i);

    DenoiserOutput res;
    res.y = out.y;
    res.confidence = out.confidence;
    res.controls.assign(x.size(), Controls{});
    if (masked.empty()) return res;  // identity on mask-free states

    std::vector<std::size_t> order = masked;
    if (policy != SelectPolicy::left_to_right) {
        if (out.confidence.empty())
            throw ContractError("confidence policy requires denoiser confidences");
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return out.confidence[a] > out.confidence[b];  // ties keep lowest index first
        });
    }
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    std::vector<bool> selected(x.size(), false);
    for (std::size_t j = 0; j < take; ++j) selected[order[j]] = true;

    // Unselected masks stay masked: the transition function only keeps a mask
    // in place when the remask bit is set.
    for (std::size_t i : masked)
        if (!selected[i]) res.controls[i].remask = true;
    return res;
}

}  // namespace apgen
