#pragma once

#include "apgen/model/net.hpp"
#include "apgen/transition.hpp"

namespace apgen::model {

// Wraps trained parameters as a single-step denoiser: y is the argmax of
// the token logits, control bits come from thresholded sigmoids, and the
// per-position confidence follows the selection policy (max softmax
// probability, or top1-top2 margin).  The params object must outlive the
// returned denoiser.
Denoiser neural_denoiser(const ModelParams& p,
                         SelectPolicy policy = SelectPolicy::top_prob);

}  // namespace apgen::model
