#include "apgen/model/corrupt.hpp"

#include <algorithm>

namespace apgen::model {

StepTuple corrupt(const Vocab& vocab, const SeqState& clean, const CorruptionSpec& spec,
                  const std::vector<TokenId>& pool) {
    if (spec.rate < 0.0 || spec.rate > 1.0) throw ContractError("corruption rate outside [0,1]");
    for (TokenId t : clean.tokens)
        if (vocab.is_mask(t)) throw ContractError("corrupt expects a mask-free sequence");

    Rng rng(spec.seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const TokenId mask = vocab.primary_mask();
    StepTuple out;

    switch (spec.kind) {
        case CorruptKind::unmask_forward: {
            // Forward masking with signal ratio alpha = rate.
            out.x = clean;
            out.y.assign(clean.tokens.begin(), clean.tokens.end());
            out.c.assign(clean.size(), Controls{});
            for (std::size_t i = 0; i < clean.size(); ++i)
                if (coin(rng) > spec.rate) out.x.tokens[i] = mask;
            break;
        }
        case CorruptKind::remask_shuffle: {
            if (pool.empty()) throw ContractError("remask-shuffle needs the batch token pool");
            std::vector<TokenId> sorted_pool = pool;
            std::sort(sorted_pool.begin(), sorted_pool.end());
            out.x = clean;
            out.y.assign(clean.tokens.begin(), clean.tokens.end());
            out.c.assign(clean.size(), Controls{});
            std::uniform_int_distribution<std::size_t> pick(0, sorted_pool.size() - 1);
            for (std::size_t i = 0; i < clean.size(); ++i) {
                if (coin(rng) > spec.rate) {
                    TokenId sub = sorted_pool[pick(rng)];
                    out.x.tokens[i] = sub;
                    out.c[i].remask = sub != clean.tokens[i];
                }
            }
            break;
        }
        case CorruptKind::insert_deflate: {
            // Remove positions with probability rate; surviving positions
            // whose successor vanished get the insert label.
            std::vector<bool> removed(clean.size(), false);
            for (std::size_t i = 0; i < clean.size(); ++i) removed[i] = coin(rng) < spec.rate;
            for (std::size_t i = 0; i < clean.size(); ++i) {
                if (removed[i]) continue;
                out.x.tokens.push_back(clean.tokens[i]);
                out.y.push_back(clean.tokens[i]);
                Controls c;
                c.insert = i + 1 < clean.size() && removed[i + 1];
                out.c.push_back(c);
            }
            break;
        }
        case CorruptKind::delete_inflate: {
            // Two-step masking: forward masking first (delete labels 0),
            // then extra inserted masks that carry the delete label.
            const double gamma = spec.rate;
            for (std::size_t i = 0; i < clean.size(); ++i) {
                TokenId base = coin(rng) > spec.rate ? mask : clean.tokens[i];
                out.x.tokens.push_back(base);
                out.y.push_back(clean.tokens[i]);
                out.c.push_back(Controls{});
                if (coin(rng) < gamma) {
                    out.x.tokens.push_back(mask);
                    out.y.push_back(clean.tokens[i]);  // filler target, never unmasked
                    Controls c;
                    c.erase = true;
                    out.c.push_back(c);
                }
            }
            break;
        }
    }
    return out;
}

}  // namespace apgen::model
