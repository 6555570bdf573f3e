#pragma once

#include <optional>

#include "apgen/decode.hpp"
#include "apgen/trajectory.hpp"

namespace apgen::tasks {

struct DyckConfig {
    int k = 2;                  // bracket types
    double insert_prob = 0.35;  // per-position chance of spawning a pair
    double stop_prob = 0.25;    // chance a mask-free round starts termination
    int max_len = 512;
    int max_steps = 4096;
};

// Explicit choice record for one policy step, so the same policy serves both
// stochastic sampling (choices drawn from the rng) and witness construction
// (choices prescribed by a search).
struct DyckChoices {
    bool terminate = false;          // mask-free state: begin termination
    std::vector<std::size_t> grow;   // mask-free state: positions that get an M1 after them
    std::vector<TokenId> brackets;   // one bracket per M1, in position order
};

struct DyckSampleResult {
    std::vector<TokenId> word;  // bracket tokens, BOS/EOS stripped
    bool ok = false;            // false when every attempt hit max_len/max_steps
    int resamples = 0;          // attempts discarded for exceeding the limits
    Trace trace;                // trace of the successful attempt
};

class Dyck {
public:
    explicit Dyck(const DyckConfig& cfg);

    const Vocab& vocab() const { return vocab_; }
    const DyckConfig& config() const { return cfg_; }
    TokenId bos() const { return bos_; }
    TokenId eos() const { return eos_; }
    TokenId mask1() const { return m1_; }
    TokenId mask2() const { return m2_; }
    bool is_bracket(TokenId t) const { return t >= first_bracket_ && t < first_bracket_ + 2 * cfg_.k; }
    TokenId partner(TokenId t) const;

    // One policy step given explicit choices (only consulted in mask-free
    // states; mask resolution is forced).
    DenoiserOutput policy(const SeqState& x, const DyckChoices& choices) const;

    // The stochastic denoiser of the sampler: draws DyckChoices from the rng.
    Denoiser denoiser() const;

    // Runs the sampler under decode with an EOS stop; resamples with derived
    // seeds when a run exceeds max_len or the step budget.
    DyckSampleResult sample(std::uint64_t seed, int max_attempts = 64) const;

    // Two-sided membership: true iff the word reduces to the empty word by
    // repeatedly deleting adjacent a a^-1 or a^-1 a factors.
    bool member(const std::vector<TokenId>& word) const;
    bool member_names(const std::vector<std::string>& names) const;

    // Constructive reachability: a per-round choice script that makes the
    // sampler emit exactly `word`, or nullopt when the word is not in the
    // language.  The final trace is produced by running the real policy on
    // the scripted choices.
    std::optional<Trace> witness(const std::vector<TokenId>& word) const;

    std::vector<TokenId> strip(const SeqState& terminal) const;

private:
    DyckChoices draw_choices(const SeqState& x, Rng& rng) const;

    DyckConfig cfg_;
    Vocab vocab_;
    TokenId bos_, eos_, m1_, m2_;
    TokenId first_bracket_;
};

}  // namespace apgen::tasks
