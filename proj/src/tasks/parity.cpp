#include "apgen/tasks/parity.hpp"

namespace apgen::tasks {

Parity::Parity() {
    bos = vocab.add("BOS");
    eos = vocab.add("EOS");
    mask = vocab.add("M", /*is_mask=*/true);
    zero = vocab.add("0");
    one = vocab.add("1");
}

SeqState Parity::encode(const std::vector<int>& bits) const {
    SeqState s;
    s.tokens.push_back(bos);
    for (int b : bits) s.tokens.push_back(b ? one : zero);
    s.tokens.push_back(eos);
    return s;
}

DenoiserOutput Parity::policy(const SeqState& x) const {
    const std::size_t n = x.size();
    DenoiserOutput out;
    out.controls.assign(n, Controls{});
    out.y.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.y[i] = x.tokens[i] == mask ? zero : x.tokens[i];

    // All elimination happens at the two slots after BOS: masks there are
    // deleted; otherwise a zero is remasked, and a pair of ones is remasked
    // together.  Everything further right waits its turn, so the rule is a
    // function of the front window at every sequence length.
    if (n < 2) return out;
    TokenId t1 = x.tokens[1];
    TokenId t2 = n > 2 ? x.tokens[2] : eos;
    bool deleting = t1 == mask || t2 == mask;
    for (std::size_t i = 1; i <= 2 && i < n; ++i) {
        TokenId self = x.tokens[i];
        TokenId other = i == 1 ? t2 : t1;
        if (deleting) {
            if (self == mask) out.controls[i].erase = true;
        } else if (self == zero) {
            out.controls[i].remask = true;
        } else if (self == one && other == one) {
            out.controls[i].remask = true;
        }
    }
    return out;
}

Denoiser Parity::denoiser() const {
    return [*this](const SeqState& x, Rng&) { return policy(x); };
}

Denoiser Parity::front_window_denoiser(const Denoiser& inner) const {
    return [*this, &inner](const SeqState& x, Rng& rng) {
        DenoiserOutput out;
        out.y.resize(x.size());
        out.controls.assign(x.size(), Controls{});
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x.tokens[i] == mask) {
                out.y[i] = zero;
                out.controls[i].remask = true;  // hold by default
            } else {
                out.y[i] = x.tokens[i];
            }
        }
        if (x.size() < 3) return out;  // BOS EOS: nothing left to edit

        SeqState head;
        head.tokens.push_back(bos);
        std::size_t slots = std::min<std::size_t>(2, x.size() - 2);
        for (std::size_t i = 1; i <= slots; ++i) head.tokens.push_back(x.tokens[i]);
        head.tokens.push_back(eos);
        DenoiserOutput win = inner(head, rng);
        for (std::size_t i = 1; i <= slots; ++i) {
            out.controls[i] = win.controls[i];
            out.controls[i].insert = false;  // the elimination never inserts
            if (x.tokens[i] == mask && !win.controls[i].erase) out.controls[i].remask = true;
            if (x.tokens[i] != mask) out.controls[i].erase = false;
            out.y[i] = x.tokens[i] == mask ? zero : x.tokens[i];
        }
        return out;
    };
}

Trajectory Parity::trajectory(const std::vector<int>& bits) const {
    Trajectory tr;
    SeqState cur = encode(bits);
    for (int guard = 0; guard < 4 * static_cast<int>(bits.size()) + 8; ++guard) {
        DenoiserOutput out = policy(cur);
        SeqState next = apply_transition(vocab, cur, out);
        if (next == cur) break;
        StepTuple t;
        t.x = cur;
        t.y = out.y;
        t.c = out.controls;
        tr.steps.push_back(std::move(t));
        cur = std::move(next);
    }
    tr.final_state = cur;
    return tr;
}

std::vector<StepTuple> Parity::canonical_training_tuples() const {
    std::vector<StepTuple> out;
    auto add = [&](const SeqState& x) {
        DenoiserOutput o = policy(x);
        out.push_back(StepTuple{x, o.y, o.controls, {}});
    };
    add(encode({0, 0}));
    add(encode({0, 1}));
    add(encode({1, 1}));
    add(SeqState{{bos, one, mask, eos}});  // the step that reaches a terminal state
    return out;
}

int Parity::classify(const SeqState& s) const {
    if (s.tokens == std::vector<TokenId>{bos, eos}) return 0;
    if (s.tokens == std::vector<TokenId>{bos, one, eos}) return 1;
    return -1;
}

}  // namespace apgen::tasks
