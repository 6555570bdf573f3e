#pragma once

#include "apgen/model/net.hpp"

namespace apgen::model {

struct LossWeights {
    double remask = 1.0, insert = 1.0, erase = 1.0;
};

struct LossBreakdown {
    double unmask = 0.0, remask = 0.0, insert = 0.0, erase = 0.0;
    double total(const LossWeights& w) const {
        return unmask + w.remask * remask + w.insert * insert + w.erase * erase;
    }
};

// Combined supervised objective for one state-transition tuple: token
// cross-entropy averaged over the masked positions (0 when none are masked)
// plus per-bit binary cross-entropies averaged over all valid positions.
// `valid` restricts both terms (empty = every position valid).  Gradients
// w.r.t. the raw logits go to d_token/d_control when non-null.
LossBreakdown supervised_loss(const ModelParams& p, const ForwardOut& out, const StepTuple& t,
                              const LossWeights& w, const std::vector<bool>& valid = {},
                              std::vector<double>* d_token = nullptr,
                              std::vector<double>* d_control = nullptr);

}  // namespace apgen::model
