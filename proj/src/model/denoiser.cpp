#include "apgen/model/denoiser.hpp"

#include <cmath>

namespace apgen::model {

Denoiser neural_denoiser(const ModelParams& p, SelectPolicy policy) {
    return [&p, policy](const SeqState& x, Rng&) -> DenoiserOutput {
        ForwardOut out = forward(p, x);
        const int n = out.n;
        const int T = p.cfg.targets;
        DenoiserOutput d;
        d.y.resize(static_cast<std::size_t>(n));
        d.controls.assign(static_cast<std::size_t>(n), Controls{});
        d.confidence.assign(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            const double* row =
                &out.token_logits[static_cast<std::size_t>(i) * static_cast<std::size_t>(T)];
            int best = 0;
            for (int k = 1; k < T; ++k)
                if (row[k] > row[best]) best = k;
            d.y[static_cast<std::size_t>(i)] = p.target_tokens[static_cast<std::size_t>(best)];

            double mx = row[best];
            double z = 0.0;
            for (int k = 0; k < T; ++k) z += std::exp(row[k] - mx);
            double top1 = 1.0 / z;  // exp(0)/z
            if (policy == SelectPolicy::top_prob_margin && T > 1) {
                int second = best == 0 ? 1 : 0;
                for (int k = 0; k < T; ++k)
                    if (k != best && row[k] > row[second]) second = k;
                double p2 = std::exp(row[second] - mx) / z;
                d.confidence[static_cast<std::size_t>(i)] = top1 - p2;
            } else {
                d.confidence[static_cast<std::size_t>(i)] = top1;
            }

            auto sig = [](double zz) {
                return zz >= 0 ? 1.0 / (1.0 + std::exp(-zz)) : std::exp(zz) / (1.0 + std::exp(zz));
            };
            const double* cl = &out.control_logits[static_cast<std::size_t>(i) * 3];
            d.controls[static_cast<std::size_t>(i)].remask = sig(cl[0]) >= p.cfg.tau_r;
            d.controls[static_cast<std::size_t>(i)].insert = sig(cl[1]) >= p.cfg.tau_i;
            d.controls[static_cast<std::size_t>(i)].erase = sig(cl[2]) >= p.cfg.tau_d;
        }
        return d;
    };
}

}  // namespace apgen::model
