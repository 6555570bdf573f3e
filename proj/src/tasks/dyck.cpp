#include "apgen/tasks/dyck.hpp"

#include <algorithm>

namespace apgen::tasks {

Dyck::Dyck(const DyckConfig& cfg) : cfg_(cfg) {
    if (cfg_.k < 2) throw ContractError("two-sided Dyck requires k >= 2");
    if (cfg_.insert_prob <= 0.0 || cfg_.insert_prob >= 1.0)
        throw ContractError("insert probability must lie in (0,1)");
    if (cfg_.stop_prob <= 0.0 || cfg_.stop_prob >= 1.0)
        throw ContractError("stop probability must lie in (0,1)");
    bos_ = vocab_.add("BOS");
    eos_ = vocab_.add("EOS");
    m1_ = vocab_.add("M1", /*is_mask=*/true);
    m2_ = vocab_.add("M2", /*is_mask=*/true);
    first_bracket_ = static_cast<TokenId>(vocab_.size());
    for (int i = 1; i <= cfg_.k; ++i) {
        vocab_.add("a" + std::to_string(i));   // a_i
        vocab_.add("A" + std::to_string(i));   // a_i^{-1}
    }
}

TokenId Dyck::partner(TokenId t) const {
    if (!is_bracket(t)) throw ContractError("partner of a non-bracket token");
    TokenId off = t - first_bracket_;
    return first_bracket_ + (off ^ 1);
}

static bool word_is_member(const Dyck& d, std::vector<TokenId> w) {
    // Repeated adjacent-pair elimination; the reduction is confluent so any
    // elimination order reaches the same normal form.
    bool changed = true;
    while (changed && !w.empty()) {
        changed = false;
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            if (d.partner(w[i]) == w[i + 1]) {
                w.erase(w.begin() + static_cast<std::ptrdiff_t>(i),
                        w.begin() + static_cast<std::ptrdiff_t>(i) + 2);
                changed = true;
                break;
            }
        }
    }
    return w.empty();
}

bool Dyck::member(const std::vector<TokenId>& word) const {
    for (TokenId t : word)
        if (!is_bracket(t)) return false;  // foreign symbol
    return word_is_member(*this, word);
}

bool Dyck::member_names(const std::vector<std::string>& names) const {
    std::vector<TokenId> w;
    for (const std::string& n : names) {
        if (!vocab_.contains(n)) return false;
        w.push_back(vocab_.id(n));
    }
    return member(w);
}

DenoiserOutput Dyck::policy(const SeqState& x, const DyckChoices& choices) const {
    const std::size_t n = x.size();
    DenoiserOutput out;
    out.controls.assign(n, Controls{});
    out.y.resize(n);
    out.insert_token.assign(n, m1_);
    for (std::size_t i = 0; i < n; ++i)
        out.y[i] = vocab_.is_mask(x.tokens[i]) ? eos_ : x.tokens[i];

    bool has_m1 = false, has_m2 = false;
    for (TokenId t : x.tokens) {
        has_m1 |= t == m1_;
        has_m2 |= t == m2_;
    }

    if (has_m1) {
        // Resolve every M1 to a fresh bracket and force an M2 right after
        // it.  Reachable states never hold M1 and M2 together; a stray M2 is
        // resolved by the left-neighbour rule below to stay total.
        std::size_t bi = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (x.tokens[i] == m1_) {
                if (bi >= choices.brackets.size())
                    throw ContractError("missing bracket choice for an M1 position");
                out.y[i] = choices.brackets[bi++];
                out.controls[i].insert = true;
                out.insert_token[i] = m2_;
            } else if (x.tokens[i] == m2_) {
                TokenId left = i > 0 ? x.tokens[i - 1] : bos_;
                out.y[i] = is_bracket(left) ? partner(left) : eos_;
            }
        }
        return out;
    }
    if (has_m2) {
        // Pair masks take the bracket matching their left neighbour; the
        // terminal mask (last position, mask-free prefix in the language)
        // resolves to EOS.
        for (std::size_t i = 0; i < n; ++i) {
            if (x.tokens[i] != m2_) continue;
            bool last = i + 1 == n;
            if (last) {
                std::vector<TokenId> prefix;
                bool clean = true;
                for (std::size_t j = 1; j + 1 < n; ++j) {
                    if (vocab_.is_mask(x.tokens[j])) { clean = false; break; }
                    if (x.tokens[j] != bos_ && x.tokens[j] != eos_) prefix.push_back(x.tokens[j]);
                }
                if (clean && member(prefix)) {
                    out.y[i] = eos_;
                    continue;
                }
            }
            TokenId left = i > 0 ? x.tokens[i - 1] : bos_;
            out.y[i] = is_bracket(left) ? partner(left) : eos_;
        }
        return out;
    }

    // Mask-free state: either start termination or spawn pairs.
    if (choices.terminate) {
        out.controls[n - 1].insert = true;
        out.insert_token[n - 1] = m2_;
        return out;
    }
    for (std::size_t pos : choices.grow) {
        if (pos >= n || x.tokens[pos] == eos_)
            throw ContractError("illegal growth slot in dyck choices");
        out.controls[pos].insert = true;
        out.insert_token[pos] = m1_;
    }
    return out;
}

DyckChoices Dyck::draw_choices(const SeqState& x, Rng& rng) const {
    DyckChoices ch;
    std::size_t m1_count = 0;
    for (TokenId t : x.tokens) m1_count += t == m1_ ? 1 : 0;
    if (m1_count > 0) {
        std::uniform_int_distribution<int> pick(0, 2 * cfg_.k - 1);
        for (std::size_t i = 0; i < m1_count; ++i)
            ch.brackets.push_back(first_bracket_ + pick(rng));
        return ch;
    }
    bool any_mask = std::any_of(x.tokens.begin(), x.tokens.end(),
                                [&](TokenId t) { return vocab_.is_mask(t); });
    if (any_mask) return ch;  // M2 resolution is forced
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < cfg_.stop_prob) {
        ch.terminate = true;
        return ch;
    }
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x.tokens[i] != eos_ && coin(rng) < cfg_.insert_prob) ch.grow.push_back(i);
    return ch;
}

Denoiser Dyck::denoiser() const {
    return [*this](const SeqState& x, Rng& rng) { return policy(x, draw_choices(x, rng)); };
}

std::vector<TokenId> Dyck::strip(const SeqState& terminal) const {
    std::vector<TokenId> w;
    for (TokenId t : terminal.tokens)
        if (t != bos_ && t != eos_) w.push_back(t);
    return w;
}

DyckSampleResult Dyck::sample(std::uint64_t seed, int max_attempts) const {
    DyckSampleResult res;
    SeqState x0{{bos_}};
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        DecodeOptions opts;
        opts.max_steps = cfg_.max_steps;
        opts.max_state_len = static_cast<std::size_t>(cfg_.max_len);
        Trace tr = decode(vocab_, denoiser(), x0, StopCriterion::eos(eos_),
                          seed + static_cast<std::uint64_t>(attempt) * 0x9e3779b97f4a7c15ull, opts);
        if (tr.truncated()) {
            ++res.resamples;
            continue;
        }
        res.word = strip(tr.final_state());
        res.trace = std::move(tr);
        res.ok = true;
        return res;
    }
    return res;
}

std::optional<Trace> Dyck::witness(const std::vector<TokenId>& word) const {
    if (!member(word)) return std::nullopt;

    // Reverse-peel adjacent cancelling pairs; forward-inserting them one pair
    // per round rebuilds the word.
    struct Insertion {
        std::size_t slot;  // word index the pair lands at
        TokenId open;
    };
    std::vector<Insertion> plan;
    std::vector<TokenId> w = word;
    while (!w.empty()) {
        bool found = false;
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            if (partner(w[i]) == w[i + 1]) {
                plan.push_back({i, w[i]});
                w.erase(w.begin() + static_cast<std::ptrdiff_t>(i),
                        w.begin() + static_cast<std::ptrdiff_t>(i) + 2);
                found = true;
                break;
            }
        }
        if (!found) return std::nullopt;  // cannot happen for members
    }
    std::reverse(plan.begin(), plan.end());

    Trace tr;
    tr.states.push_back(SeqState{{bos_}});
    auto run_step = [&](const DyckChoices& ch) {
        DenoiserOutput out = policy(tr.states.back(), ch);
        SeqState next = apply_transition(vocab_, tr.states.back(), out);
        tr.outputs.push_back(std::move(out));
        tr.states.push_back(std::move(next));
    };
    for (const Insertion& ins : plan) {
        DyckChoices grow;
        grow.grow = {ins.slot};  // state position: slot brackets to the right of BOS
        run_step(grow);
        DyckChoices pick;
        pick.brackets = {ins.open};
        run_step(pick);  // M1 -> bracket, forced M2 insert
        run_step({});    // M2 -> partner
    }
    DyckChoices done;
    done.terminate = true;
    run_step(done);  // terminal M2 appears
    run_step({});    // resolves to EOS
    tr.stop_reason = StopReason::end_token;

    std::vector<TokenId> got = strip(tr.final_state());
    if (got != word) throw ContractError("dyck witness replay mismatch");
    return tr;
}

}  // namespace apgen::tasks
