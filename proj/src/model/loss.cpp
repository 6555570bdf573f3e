#include "apgen/model/loss.hpp"

#include <cmath>

namespace apgen::model {

namespace {

double log_sigmoid(double z) { return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }
double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

}  // namespace

LossBreakdown supervised_loss(const ModelParams& p, const ForwardOut& out, const StepTuple& t,
                              const LossWeights& w, const std::vector<bool>& valid,
                              std::vector<double>* d_token, std::vector<double>* d_control) {
    const int n = out.n;
    const int T = p.cfg.targets;
    if (static_cast<int>(t.x.size()) != n || t.y.size() != t.x.size() || t.c.size() != t.x.size())
        throw ContractError("tuple does not match the forward output length");
    if (!valid.empty() && static_cast<int>(valid.size()) != n)
        throw ContractError("valid mask length mismatch");
    if (d_token) d_token->assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(T), 0.0);
    if (d_control) d_control->assign(static_cast<std::size_t>(n) * 3, 0.0);

    auto is_valid = [&](int i) { return valid.empty() || valid[static_cast<std::size_t>(i)]; };

    LossBreakdown lb;

    // Token CE over masked positions.
    int masked = 0;
    for (int i = 0; i < n; ++i)
        if (is_valid(i) && t.x.tokens[static_cast<std::size_t>(i)] >= 0 &&
            p.target_index[static_cast<std::size_t>(t.x.tokens[static_cast<std::size_t>(i)])] < 0)
            ++masked;
    if (masked > 0) {
        const double inv = 1.0 / masked;
        for (int i = 0; i < n; ++i) {
            if (!is_valid(i)) continue;
            TokenId xi = t.x.tokens[static_cast<std::size_t>(i)];
            if (p.target_index[static_cast<std::size_t>(xi)] >= 0) continue;  // not masked
            int target = p.target_index[static_cast<std::size_t>(t.y[static_cast<std::size_t>(i)])];
            if (target < 0) throw ContractError("target token is a mask");
            const double* row =
                &out.token_logits[static_cast<std::size_t>(i) * static_cast<std::size_t>(T)];
            double mx = row[0];
            for (int k = 1; k < T; ++k) mx = std::max(mx, row[k]);
            double z = 0.0;
            for (int k = 0; k < T; ++k) z += std::exp(row[k] - mx);
            double logp = row[target] - mx - std::log(z);
            lb.unmask -= inv * logp;
            if (d_token) {
                double* drow =
                    &(*d_token)[static_cast<std::size_t>(i) * static_cast<std::size_t>(T)];
                for (int k = 0; k < T; ++k) {
                    double soft = std::exp(row[k] - mx) / z;
                    drow[k] += inv * (soft - (k == target ? 1.0 : 0.0));
                }
            }
        }
    }

    // Control BCEs over valid positions.
    int nvalid = 0;
    for (int i = 0; i < n; ++i) nvalid += is_valid(i) ? 1 : 0;
    if (nvalid > 0) {
        const double inv = 1.0 / nvalid;
        for (int i = 0; i < n; ++i) {
            if (!is_valid(i)) continue;
            const Controls& c = t.c[static_cast<std::size_t>(i)];
            const double tgt[3] = {c.remask ? 1.0 : 0.0, c.insert ? 1.0 : 0.0, c.erase ? 1.0 : 0.0};
            double* acc[3] = {&lb.remask, &lb.insert, &lb.erase};
            const double lam[3] = {w.remask, w.insert, w.erase};
            for (int b = 0; b < 3; ++b) {
                double z = out.control_logits[static_cast<std::size_t>(i) * 3 +
                                              static_cast<std::size_t>(b)];
                // BCE with logits: -(t log s + (1-t) log(1-s))
                double l = -(tgt[b] * log_sigmoid(z) + (1.0 - tgt[b]) * log_sigmoid(-z));
                *acc[b] += inv * l;
                if (d_control)
                    (*d_control)[static_cast<std::size_t>(i) * 3 + static_cast<std::size_t>(b)] +=
                        lam[b] * inv * (sigmoid(z) - tgt[b]);
            }
        }
    }
    return lb;
}

}  // namespace apgen::model
