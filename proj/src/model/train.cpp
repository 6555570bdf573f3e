#include "apgen/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace apgen::model {

TrainResult train(const std::vector<StepTuple>& data, const ModelConfig& cfg, const Vocab& vocab,
                  const TrainConfig& tc) {
    if (data.empty()) throw ContractError("training needs a nonempty dataset");
    tc.validate();

    TrainResult res;
    res.params = ModelParams::init(cfg, vocab, tc.seed);
    ModelParams& p = res.params;

    std::vector<double> grad(p.w.size(), 0.0);
    std::vector<double> m(p.w.size(), 0.0), v(p.w.size(), 0.0);
    std::vector<double> last_finite = p.w;

    Rng rng(tc.seed ^ 0x5eed5eed12345678ull);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t cursor = order.size();

    std::vector<double> d_token, d_control;

    for (int step = 1; step <= tc.steps; ++step) {
        std::fill(grad.begin(), grad.end(), 0.0);
        LossBreakdown acc;
        const int bs = std::min<int>(tc.batch, static_cast<int>(data.size()));
        for (int b = 0; b < bs; ++b) {
            if (cursor >= order.size()) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            const StepTuple& t = data[order[cursor++]];
            TapeHandle tape = forward_tape(p, t.x);
            LossBreakdown lb = supervised_loss(p, tape.out, t, tc.lambda, {}, &d_token, &d_control);
            acc.unmask += lb.unmask;
            acc.remask += lb.remask;
            acc.insert += lb.insert;
            acc.erase += lb.erase;
            backward_tape(p, t.x, tape, d_token, d_control, grad);
        }
        const double inv_bs = 1.0 / bs;
        acc.unmask *= inv_bs;
        acc.remask *= inv_bs;
        acc.insert *= inv_bs;
        acc.erase *= inv_bs;
        const double total = acc.total(tc.lambda);
        if (!std::isfinite(total)) {
            p.w = last_finite;
            res.diverged = true;
            break;
        }
        last_finite = p.w;
        res.final_loss = total;

        double norm2 = 0.0;
        for (double& gv : grad) {
            gv *= inv_bs;
            norm2 += gv * gv;
        }
        double norm = std::sqrt(norm2);
        if (tc.clip > 0 && norm > tc.clip) {
            double scale = tc.clip / norm;
            for (double& gv : grad) gv *= scale;
        }

        const double lr = tc.warmup > 0 && step <= tc.warmup
                              ? tc.lr * static_cast<double>(step) / tc.warmup
                              : tc.lr;
        const double bc1 = 1.0 - std::pow(tc.beta1, step);
        const double bc2 = 1.0 - std::pow(tc.beta2, step);
        for (std::size_t i = 0; i < p.w.size(); ++i) {
            m[i] = tc.beta1 * m[i] + (1.0 - tc.beta1) * grad[i];
            v[i] = tc.beta2 * v[i] + (1.0 - tc.beta2) * grad[i] * grad[i];
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            p.w[i] -= lr * (mhat / (std::sqrt(vhat) + tc.eps) + tc.weight_decay * p.w[i]);
        }

        if (step % tc.log_every == 0 || step == 1 || step == tc.steps) {
            res.curves.push_back({step, "unmask", acc.unmask});
            res.curves.push_back({step, "remask", acc.remask});
            res.curves.push_back({step, "insert", acc.insert});
            res.curves.push_back({step, "delete", acc.erase});
            res.curves.push_back({step, "total", total});
        }
    }
    return res;
}

void write_curves_csv(const std::vector<CurveRow>& rows, const std::string& path) {
    std::ofstream f(path);
    f << "step,term,value\n";
    for (const auto& r : rows) f << r.step << ',' << r.term << ',' << r.value << '\n';
}

}  // namespace apgen::model
