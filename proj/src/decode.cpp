#include "apgen/decode.hpp"

#include <algorithm>

namespace apgen {

static bool any_mask(const Vocab& vocab, const SeqState& s) {
    return std::any_of(s.tokens.begin(), s.tokens.end(),
                       [&](TokenId t) { return vocab.is_mask(t); });
}

static bool has_token(const SeqState& s, TokenId t) {
    return std::find(s.tokens.begin(), s.tokens.end(), t) != s.tokens.end();
}

static SeqState step_once(const Vocab& vocab, const SeqState& x, const DenoiserOutput& out,
                          bool rewrite_mode) {
    if (!rewrite_mode) return apply_transition(vocab, x, out);
    std::vector<bool> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = out.controls[i].remask;
    return rewrite_step(vocab, x, out.y, r);
}

Trace decode(const Vocab& vocab, const Denoiser& denoiser, const SeqState& x0,
             const StopCriterion& stop, std::uint64_t seed, DecodeOptions opts) {
    if (x0.size() == 0) throw ContractError("decode requires a nonempty initial state");
    Rng rng(seed);
    Trace trace;
    trace.states.push_back(x0);

    const int budget = stop.kind == StopCriterion::Kind::max_steps
                           ? std::min(stop.step_limit, opts.max_steps)
                           : opts.max_steps;

    // Criteria on the initial state (a prompt may already satisfy them).
    if (stop.kind == StopCriterion::Kind::end_token && has_token(x0, stop.end_token)) {
        trace.stop_reason = StopReason::end_token;
        return trace;
    }
    if (stop.kind == StopCriterion::Kind::all_unmasked && !any_mask(vocab, x0)) {
        trace.stop_reason = StopReason::all_unmasked;
        return trace;
    }

    for (int step = 0; step < budget; ++step) {
        const SeqState& cur = trace.states.back();
        DenoiserOutput out = denoiser(cur, rng);
        SeqState next = step_once(vocab, cur, out, opts.rewrite_mode);
        trace.outputs.push_back(std::move(out));
        trace.states.push_back(std::move(next));
        const SeqState& now = trace.states.back();
        const SeqState& prev = trace.states[trace.states.size() - 2];
        if (opts.max_state_len > 0 && now.size() > opts.max_state_len) {
            trace.stop_reason = StopReason::truncated;
            return trace;
        }
        switch (stop.kind) {
            case StopCriterion::Kind::fixpoint:
                if (now == prev) {
                    trace.stop_reason = StopReason::fixpoint;
                    return trace;
                }
                break;
            case StopCriterion::Kind::end_token:
                if (has_token(now, stop.end_token)) {
                    trace.stop_reason = StopReason::end_token;
                    return trace;
                }
                break;
            case StopCriterion::Kind::all_unmasked:
                if (!any_mask(vocab, now)) {
                    trace.stop_reason = StopReason::all_unmasked;
                    return trace;
                }
                break;
            case StopCriterion::Kind::max_steps:
                break;
        }
    }
    trace.stop_reason = stop.kind == StopCriterion::Kind::max_steps ? StopReason::step_limit
                                                                    : StopReason::truncated;
    return trace;
}

Denoiser windowed_denoiser(const Vocab& vocab, Denoiser inner, std::size_t window) {
    if (window == 0) throw ContractError("window must be nonempty");
    return [&vocab, inner = std::move(inner), window](const SeqState& x, Rng& rng) {
        const std::size_t w = std::min(window, x.size());
        SeqState head;
        head.tokens.assign(x.tokens.begin(), x.tokens.begin() + static_cast<std::ptrdiff_t>(w));
        DenoiserOutput inner_out = inner(head, rng);
        DenoiserOutput out;
        out.y.resize(x.size());
        out.controls.assign(x.size(), Controls{});
        if (!inner_out.insert_token.empty()) out.insert_token.assign(x.size(), vocab.primary_mask());
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (i < w) {
                out.y[i] = inner_out.y[i];
                out.controls[i] = inner_out.controls[i];
                if (!inner_out.insert_token.empty()) out.insert_token[i] = inner_out.insert_token[i];
            } else if (vocab.is_mask(x.tokens[i])) {
                out.y[i] = inner_out.y.empty() ? 0 : inner_out.y[0];
                out.controls[i].remask = true;  // untouched masks hold their place
            } else {
                out.y[i] = x.tokens[i];
            }
        }
        return out;
    };
}

bool replay_trace(const Vocab& vocab, const Trace& trace, bool rewrite_mode) {
    if (trace.states.size() != trace.outputs.size() + 1) return false;
    for (std::size_t i = 0; i < trace.outputs.size(); ++i) {
        SeqState re = step_once(vocab, trace.states[i], trace.outputs[i], rewrite_mode);
        if (!(re == trace.states[i + 1])) return false;
    }
    return true;
}

}  // namespace apgen
