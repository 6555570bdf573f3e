#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "apgen/trajectory.hpp"

namespace apgen::model {

struct ModelConfig {
    int layers = 1;
    int heads = 1;
    int d = 4;
    int dff = 16;  // 4d
    int max_seq = 512;
    int vocab = 0;       // full vocabulary size, masks included
    int targets = 0;     // unmask head width: non-mask tokens
    bool rotary = true;  // rotary positions; false = learned absolute table
    double rope_base = 10000.0;
    bool layernorm = true;  // pre-norm blocks plus a final norm
    double tau_r = 0.5, tau_i = 0.5, tau_d = 0.5;

    void validate() const {
        if (d % heads != 0) throw ContractError("hidden width must divide into heads");
        if (tau_r <= 0 || tau_r >= 1 || tau_i <= 0 || tau_i >= 1 || tau_d <= 0 || tau_d >= 1)
            throw ContractError("control thresholds must lie in (0,1)");
    }
};

// Parameters live in one flat vector; the layout gives named offsets so the
// optimizer, serializer and finite-difference checks all see the same thing.
struct ParamLayout {
    struct Entry {
        std::string name;
        std::size_t offset;
        std::size_t rows, cols;  // cols == 1 for vectors
    };
    std::vector<Entry> entries;
    std::size_t total = 0;

    static ParamLayout build(const ModelConfig& cfg);
    const Entry& find(const std::string& name) const;
};

struct ModelParams {
    ModelConfig cfg;
    ParamLayout layout;
    std::vector<double> w;
    // Maps between token ids and unmask-head rows (non-mask tokens only).
    std::vector<TokenId> target_tokens;
    std::vector<int> target_index;  // per token id; -1 for masks

    static ModelParams init(const ModelConfig& cfg, const Vocab& vocab, std::uint64_t seed);

    double* at(const std::string& name) { return w.data() + layout.find(name).offset; }
    const double* at(const std::string& name) const { return w.data() + layout.find(name).offset; }
};

// Per-position outputs: unmask logits (targets wide) and the three control
// logits (pre-sigmoid).
struct ForwardOut {
    int n = 0;
    std::vector<double> token_logits;    // n x targets
    std::vector<double> control_logits;  // n x 3
};

struct ForwardCache;  // activations, defined in net.cpp

ForwardOut forward(const ModelParams& p, const SeqState& x);

// Forward keeping activations, then backward from output-logit gradients.
// Returns d(loss)/d(params) accumulated into `grad` (same layout as p.w).
struct TapeHandle {
    ForwardOut out;
    std::shared_ptr<ForwardCache> cache;
};
TapeHandle forward_tape(const ModelParams& p, const SeqState& x);
void backward_tape(const ModelParams& p, const SeqState& x, const TapeHandle& tape,
                   const std::vector<double>& d_token_logits,
                   const std::vector<double>& d_control_logits, std::vector<double>& grad);

void save_checkpoint(const ModelParams& p, const Vocab& vocab, const std::string& path);
ModelParams load_checkpoint(const std::string& path, Vocab* vocab_out = nullptr);

}  // namespace apgen::model
