#pragma once

#include "apgen/model/loss.hpp"

namespace apgen::model {

struct TrainConfig {
    double lr = 1e-4;
    double beta1 = 0.9, beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
    int batch = 256;
    int warmup = 250;
    double clip = 1.0;
    LossWeights lambda;
    std::uint64_t seed = 0;
    int steps = 1000;
    int log_every = 25;

    void validate() const {
        if (lr <= 0) throw ContractError("learning rate must be positive");
        if (lambda.remask < 0 || lambda.insert < 0 || lambda.erase < 0)
            throw ContractError("loss weights must be nonnegative");
    }
};

struct CurveRow {
    int step;
    std::string term;
    double value;
};

struct TrainResult {
    ModelParams params;
    std::vector<CurveRow> curves;
    bool diverged = false;
    double final_loss = 0.0;
};

// AdamW with a constant schedule after linear warmup; gradient accumulation
// is sequential over the batch so a fixed seed reproduces parameters
// bit-exactly.  On a non-finite loss the last finite parameters are kept.
TrainResult train(const std::vector<StepTuple>& data, const ModelConfig& cfg, const Vocab& vocab,
                  const TrainConfig& tc);

void write_curves_csv(const std::vector<CurveRow>& rows, const std::string& path);

}  // namespace apgen::model
