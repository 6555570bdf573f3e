#include "apgen/model/net.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <json.hpp>

namespace apgen::model {

ParamLayout ParamLayout::build(const ModelConfig& cfg) {
    ParamLayout lay;
    auto add = [&](const std::string& name, std::size_t rows, std::size_t cols) {
        lay.entries.push_back({name, lay.total, rows, cols});
        lay.total += rows * cols;
    };
    const auto d = static_cast<std::size_t>(cfg.d);
    const auto dff = static_cast<std::size_t>(cfg.dff);
    add("emb", static_cast<std::size_t>(cfg.vocab), d);
    if (!cfg.rotary) add("pos", static_cast<std::size_t>(cfg.max_seq), d);
    for (int l = 0; l < cfg.layers; ++l) {
        std::string p = "l" + std::to_string(l) + ".";
        if (cfg.layernorm) {
            add(p + "ln1g", d, 1);
            add(p + "ln1b", d, 1);
        }
        add(p + "wq", d, d);
        add(p + "wk", d, d);
        add(p + "wv", d, d);
        add(p + "wo", d, d);
        if (cfg.layernorm) {
            add(p + "ln2g", d, 1);
            add(p + "ln2b", d, 1);
        }
        add(p + "w1", dff, d);
        add(p + "b1", dff, 1);
        add(p + "w2", d, dff);
        add(p + "b2", d, 1);
    }
    if (cfg.layernorm) {
        add("lnfg", d, 1);
        add("lnfb", d, 1);
    }
    add("wu", static_cast<std::size_t>(cfg.targets), d);
    add("bu", static_cast<std::size_t>(cfg.targets), 1);
    add("wr", d, 1);
    add("br", 1, 1);
    add("wi", d, 1);
    add("bi", 1, 1);
    add("wd", d, 1);
    add("bd", 1, 1);
    return lay;
}

const ParamLayout::Entry& ParamLayout::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return e;
    throw ContractError("no parameter tensor named " + name);
}

ModelParams ModelParams::init(const ModelConfig& cfg, const Vocab& vocab, std::uint64_t seed) {
    ModelConfig c = cfg;
    c.vocab = static_cast<int>(vocab.size());
    c.targets = 0;
    ModelParams p;
    p.target_index.assign(vocab.size(), -1);
    for (TokenId t = 0; t < static_cast<TokenId>(vocab.size()); ++t) {
        if (!vocab.is_mask(t)) {
            p.target_index[static_cast<std::size_t>(t)] = c.targets++;
            p.target_tokens.push_back(t);
        }
    }
    c.validate();
    p.cfg = c;
    p.layout = ParamLayout::build(c);
    p.w.resize(p.layout.total);
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (const auto& e : p.layout.entries) {
        const bool is_ln_gain = e.name.size() >= 3 && e.name.substr(e.name.size() - 3) == "n1g";
        const bool ln_gain = is_ln_gain || e.name.ends_with("ln2g") || e.name.ends_with("lnfg") ||
                             e.name.ends_with("ln1g");
        double scale = e.cols > 1 ? 1.0 / std::sqrt(static_cast<double>(e.cols)) : 0.0;
        if (e.name == "emb" || e.name == "pos") scale = 0.02;
        for (std::size_t i = 0; i < e.rows * e.cols; ++i) {
            if (ln_gain)
                p.w[e.offset + i] = 1.0;
            else
                p.w[e.offset + i] = e.cols == 1 ? 0.0 : gauss(rng) * scale;
        }
    }
    return p;
}

namespace {

constexpr double kLnEps = 1e-5;

void matvec(const double* M, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        const double* row = M + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] += acc;
    }
}

// Gradients of y = M x:  dM[r,c] += dy[r]*x[c],  dx[c] += M[r,c]*dy[r]
void matvec_bwd(const double* M, const double* x, const double* dy, double* dM, double* dx,
                std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = dy[r];
        const double* row = M + r * cols;
        double* drow = dM + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
            drow[c] += g * x[c];
            if (dx) dx[c] += row[c] * g;
        }
    }
}

// y = g * (x - mu)/sqrt(var + eps) + b; xhat cached for the backward pass.
void layernorm_fwd(const double* x, const double* g, const double* b, double* y, double* xhat,
                   std::size_t d) {
    double mu = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += x[c];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (x[c] - mu) * (x[c] - mu);
    var /= static_cast<double>(d);
    double inv = 1.0 / std::sqrt(var + kLnEps);
    for (std::size_t c = 0; c < d; ++c) {
        xhat[c] = (x[c] - mu) * inv;
        y[c] = g[c] * xhat[c] + b[c];
    }
}

void layernorm_bwd(const double* x, const double* g, const double* xhat, const double* dy,
                   double* dx, double* dg, double* db, std::size_t d) {
    double mu = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += x[c];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (x[c] - mu) * (x[c] - mu);
    var /= static_cast<double>(d);
    double inv = 1.0 / std::sqrt(var + kLnEps);

    double sum_dyg = 0.0, sum_dyg_xhat = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
        double dyg = dy[c] * g[c];
        sum_dyg += dyg;
        sum_dyg_xhat += dyg * xhat[c];
        dg[c] += dy[c] * xhat[c];
        db[c] += dy[c];
    }
    const double nd = static_cast<double>(d);
    for (std::size_t c = 0; c < d; ++c) {
        double dyg = dy[c] * g[c];
        dx[c] += inv * (dyg - sum_dyg / nd - xhat[c] * sum_dyg_xhat / nd);
    }
}

void rope_angles(int head_dim, int pos, double base, std::vector<double>& cs,
                 std::vector<double>& sn) {
    const int half = head_dim / 2;
    cs.resize(static_cast<std::size_t>(half));
    sn.resize(static_cast<std::size_t>(half));
    for (int j = 0; j < half; ++j) {
        double inv = std::pow(base, -2.0 * j / head_dim);
        double a = pos * inv;
        cs[static_cast<std::size_t>(j)] = std::cos(a);
        sn[static_cast<std::size_t>(j)] = std::sin(a);
    }
}

void rope_apply(double* v, int head_dim, const std::vector<double>& cs,
                const std::vector<double>& sn) {
    for (int j = 0; j < head_dim / 2; ++j) {
        double a = v[2 * j], b = v[2 * j + 1];
        v[2 * j] = a * cs[static_cast<std::size_t>(j)] - b * sn[static_cast<std::size_t>(j)];
        v[2 * j + 1] = a * sn[static_cast<std::size_t>(j)] + b * cs[static_cast<std::size_t>(j)];
    }
}

// The rotation is orthogonal: backward rotates by the negative angle.
void rope_apply_inv(double* v, int head_dim, const std::vector<double>& cs,
                    const std::vector<double>& sn) {
    for (int j = 0; j < head_dim / 2; ++j) {
        double a = v[2 * j], b = v[2 * j + 1];
        v[2 * j] = a * cs[static_cast<std::size_t>(j)] + b * sn[static_cast<std::size_t>(j)];
        v[2 * j + 1] = -a * sn[static_cast<std::size_t>(j)] + b * cs[static_cast<std::size_t>(j)];
    }
}

}  // namespace

struct ForwardCache {
    struct Layer {
        std::vector<double> h_in;            // residual stream entering the layer
        std::vector<double> ln1_out, ln1_xhat;
        std::vector<double> q, k, v, att, att_proj, h_mid;
        std::vector<double> ln2_out, ln2_xhat;
        std::vector<double> ff_pre, ff_act;
        std::vector<double> weights;  // heads x n x n softmax rows
    };
    std::vector<Layer> layers;
    std::vector<double> h_res;    // stream before the final norm
    std::vector<double> h_final;  // heads input
    std::vector<double> lnf_xhat;
};

static void run_forward(const ModelParams& p, const SeqState& x, ForwardOut& out,
                        ForwardCache* cache) {
    const ModelConfig& cfg = p.cfg;
    const int n = static_cast<int>(x.size());
    if (n > cfg.max_seq) throw ContractError("sequence exceeds the model's maximum length");
    const auto d = static_cast<std::size_t>(cfg.d);
    const auto dff = static_cast<std::size_t>(cfg.dff);
    const int H = cfg.heads;
    const int hd = cfg.d / H;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));
    const auto nn = static_cast<std::size_t>(n);

    std::vector<double> h(nn * d);
    const double* emb = p.at("emb");
    for (int i = 0; i < n; ++i) {
        TokenId t = x.tokens[static_cast<std::size_t>(i)];
        if (t < 0 || t >= cfg.vocab) throw ContractError("token outside the model vocabulary");
        std::memcpy(&h[static_cast<std::size_t>(i) * d], emb + static_cast<std::size_t>(t) * d,
                    d * sizeof(double));
    }
    if (!cfg.rotary) {
        const double* pos = p.at("pos");
        for (int i = 0; i < n; ++i)
            for (std::size_t c = 0; c < d; ++c)
                h[static_cast<std::size_t>(i) * d + c] += pos[static_cast<std::size_t>(i) * d + c];
    }

    if (cache) cache->layers.resize(static_cast<std::size_t>(cfg.layers));
    std::vector<double> cs, sn;

    for (int l = 0; l < cfg.layers; ++l) {
        std::string pre = "l" + std::to_string(l) + ".";
        const double* wq = p.at(pre + "wq");
        const double* wk = p.at(pre + "wk");
        const double* wv = p.at(pre + "wv");
        const double* wo = p.at(pre + "wo");
        const double* w1 = p.at(pre + "w1");
        const double* b1 = p.at(pre + "b1");
        const double* w2 = p.at(pre + "w2");
        const double* b2 = p.at(pre + "b2");

        // pre-norm attention input
        std::vector<double> ln1_out(nn * d), ln1_xhat(nn * d);
        if (cfg.layernorm) {
            const double* g = p.at(pre + "ln1g");
            const double* b = p.at(pre + "ln1b");
            for (int i = 0; i < n; ++i)
                layernorm_fwd(&h[static_cast<std::size_t>(i) * d], g, b,
                              &ln1_out[static_cast<std::size_t>(i) * d],
                              &ln1_xhat[static_cast<std::size_t>(i) * d], d);
        } else {
            ln1_out = h;
        }

        std::vector<double> q(nn * d, 0.0), k(nn * d, 0.0), v(nn * d, 0.0);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            const double* hi = &ln1_out[static_cast<std::size_t>(i) * d];
            matvec(wq, hi, &q[static_cast<std::size_t>(i) * d], d, d);
            matvec(wk, hi, &k[static_cast<std::size_t>(i) * d], d, d);
            matvec(wv, hi, &v[static_cast<std::size_t>(i) * d], d, d);
        }
        if (cfg.rotary) {
            for (int i = 0; i < n; ++i) {
                rope_angles(hd, i, cfg.rope_base, cs, sn);
                for (int hh = 0; hh < H; ++hh) {
                    rope_apply(&q[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(hh * hd)],
                               hd, cs, sn);
                    rope_apply(&k[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(hh * hd)],
                               hd, cs, sn);
                }
            }
        }

        std::vector<double> att(nn * d, 0.0);
        std::vector<double> weights(static_cast<std::size_t>(H) * nn * nn, 0.0);
#pragma omp parallel for schedule(static) collapse(2)
        for (int hh = 0; hh < H; ++hh) {
            for (int i = 0; i < n; ++i) {
                const double* qi =
                    &q[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(hh * hd)];
                double* row =
                    &weights[(static_cast<std::size_t>(hh) * nn + static_cast<std::size_t>(i)) * nn];
                double mx = -1e300;
                for (int j = 0; j < n; ++j) {
                    const double* kj =
                        &k[static_cast<std::size_t>(j) * d + static_cast<std::size_t>(hh * hd)];
                    double s = 0.0;
                    for (int c = 0; c < hd; ++c) s += qi[c] * kj[c];
                    row[j] = s * inv_sqrt;
                    mx = std::max(mx, row[j]);
                }
                double z = 0.0;
                for (int j = 0; j < n; ++j) {
                    row[j] = std::exp(row[j] - mx);
                    z += row[j];
                }
                double* ai =
                    &att[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(hh * hd)];
                for (int j = 0; j < n; ++j) {
                    row[j] /= z;
                    const double* vj =
                        &v[static_cast<std::size_t>(j) * d + static_cast<std::size_t>(hh * hd)];
                    for (int c = 0; c < hd; ++c) ai[c] += row[j] * vj[c];
                }
            }
        }

        std::vector<double> att_proj(nn * d, 0.0);
        std::vector<double> h_mid(nn * d);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            matvec(wo, &att[static_cast<std::size_t>(i) * d],
                   &att_proj[static_cast<std::size_t>(i) * d], d, d);
            for (std::size_t c = 0; c < d; ++c)
                h_mid[static_cast<std::size_t>(i) * d + c] =
                    h[static_cast<std::size_t>(i) * d + c] +
                    att_proj[static_cast<std::size_t>(i) * d + c];
        }

        // pre-norm feed-forward input
        std::vector<double> ln2_out(nn * d), ln2_xhat(nn * d);
        if (cfg.layernorm) {
            const double* g = p.at(pre + "ln2g");
            const double* b = p.at(pre + "ln2b");
            for (int i = 0; i < n; ++i)
                layernorm_fwd(&h_mid[static_cast<std::size_t>(i) * d], g, b,
                              &ln2_out[static_cast<std::size_t>(i) * d],
                              &ln2_xhat[static_cast<std::size_t>(i) * d], d);
        } else {
            ln2_out = h_mid;
        }

        std::vector<double> ff_pre(nn * dff, 0.0), ff_act(nn * dff, 0.0);
        std::vector<double> h_out(nn * d);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            double* fp = &ff_pre[static_cast<std::size_t>(i) * dff];
            matvec(w1, &ln2_out[static_cast<std::size_t>(i) * d], fp, dff, d);
            for (std::size_t c = 0; c < dff; ++c) {
                fp[c] += b1[c];
                ff_act[static_cast<std::size_t>(i) * dff + c] = fp[c] > 0 ? fp[c] : 0.0;
            }
            double* ho = &h_out[static_cast<std::size_t>(i) * d];
            for (std::size_t c = 0; c < d; ++c)
                ho[c] = h_mid[static_cast<std::size_t>(i) * d + c] + b2[c];
            matvec(w2, &ff_act[static_cast<std::size_t>(i) * dff], ho, d, dff);
        }

        if (cache) {
            ForwardCache::Layer& cl = cache->layers[static_cast<std::size_t>(l)];
            cl.h_in = h;
            cl.ln1_out = ln1_out;
            cl.ln1_xhat = ln1_xhat;
            cl.q = q;
            cl.k = k;
            cl.v = v;
            cl.att = att;
            cl.att_proj = att_proj;
            cl.h_mid = h_mid;
            cl.ln2_out = ln2_out;
            cl.ln2_xhat = ln2_xhat;
            cl.ff_pre = ff_pre;
            cl.ff_act = ff_act;
            cl.weights = std::move(weights);
        }
        h = std::move(h_out);
    }

    std::vector<double> h_heads(nn * d), lnf_xhat(nn * d);
    if (cfg.layernorm) {
        const double* g = p.at("lnfg");
        const double* b = p.at("lnfb");
        for (int i = 0; i < n; ++i)
            layernorm_fwd(&h[static_cast<std::size_t>(i) * d], g, b,
                          &h_heads[static_cast<std::size_t>(i) * d],
                          &lnf_xhat[static_cast<std::size_t>(i) * d], d);
    } else {
        h_heads = h;
    }

    out.n = n;
    out.token_logits.assign(nn * static_cast<std::size_t>(cfg.targets), 0.0);
    out.control_logits.assign(nn * 3, 0.0);
    const double* wu = p.at("wu");
    const double* bu = p.at("bu");
    const double* wr = p.at("wr");
    const double* wi = p.at("wi");
    const double* wd = p.at("wd");
    const double br = *p.at("br"), bi = *p.at("bi"), bd = *p.at("bd");
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const double* hi = &h_heads[static_cast<std::size_t>(i) * d];
        double* tl =
            &out.token_logits[static_cast<std::size_t>(i) * static_cast<std::size_t>(cfg.targets)];
        for (int t = 0; t < cfg.targets; ++t) tl[t] = bu[t];
        matvec(wu, hi, tl, static_cast<std::size_t>(cfg.targets), d);
        double r = br, ii = bi, dd = bd;
        for (std::size_t c = 0; c < d; ++c) {
            r += wr[c] * hi[c];
            ii += wi[c] * hi[c];
            dd += wd[c] * hi[c];
        }
        out.control_logits[static_cast<std::size_t>(i) * 3 + 0] = r;
        out.control_logits[static_cast<std::size_t>(i) * 3 + 1] = ii;
        out.control_logits[static_cast<std::size_t>(i) * 3 + 2] = dd;
    }
    if (cache) {
        cache->h_res = std::move(h);
        cache->h_final = std::move(h_heads);
        cache->lnf_xhat = std::move(lnf_xhat);
    }
}

ForwardOut forward(const ModelParams& p, const SeqState& x) {
    ForwardOut out;
    run_forward(p, x, out, nullptr);
    return out;
}

TapeHandle forward_tape(const ModelParams& p, const SeqState& x) {
    TapeHandle t;
    t.cache = std::make_shared<ForwardCache>();
    run_forward(p, x, t.out, t.cache.get());
    return t;
}

void backward_tape(const ModelParams& p, const SeqState& x, const TapeHandle& tape,
                   const std::vector<double>& d_token_logits,
                   const std::vector<double>& d_control_logits, std::vector<double>& grad) {
    const ModelConfig& cfg = p.cfg;
    const ForwardCache& cache = *tape.cache;
    const int n = tape.out.n;
    const auto nn = static_cast<std::size_t>(n);
    const auto d = static_cast<std::size_t>(cfg.d);
    const auto dff = static_cast<std::size_t>(cfg.dff);
    const int H = cfg.heads;
    const int hd = cfg.d / H;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));
    if (grad.size() != p.w.size()) grad.assign(p.w.size(), 0.0);

    auto g = [&](const std::string& name) { return grad.data() + p.layout.find(name).offset; };

    // Heads, then the final norm.
    std::vector<double> dh_heads(nn * d, 0.0);
    {
        const double* wu = p.at("wu");
        const double* wr = p.at("wr");
        const double* wi = p.at("wi");
        const double* wd = p.at("wd");
        double* gwu = g("wu");
        double* gbu = g("bu");
        double* gwr = g("wr");
        double* gbr = g("br");
        double* gwi = g("wi");
        double* gbi = g("bi");
        double* gwd = g("wd");
        double* gbd = g("bd");
        for (int i = 0; i < n; ++i) {
            const double* hi = &cache.h_final[static_cast<std::size_t>(i) * d];
            const double* dtl = &d_token_logits[static_cast<std::size_t>(i) *
                                                static_cast<std::size_t>(cfg.targets)];
            double* dhi = &dh_heads[static_cast<std::size_t>(i) * d];
            matvec_bwd(wu, hi, dtl, gwu, dhi, static_cast<std::size_t>(cfg.targets), d);
            for (int t = 0; t < cfg.targets; ++t) gbu[t] += dtl[t];
            const double dr = d_control_logits[static_cast<std::size_t>(i) * 3 + 0];
            const double di = d_control_logits[static_cast<std::size_t>(i) * 3 + 1];
            const double dd2 = d_control_logits[static_cast<std::size_t>(i) * 3 + 2];
            for (std::size_t c = 0; c < d; ++c) {
                gwr[c] += dr * hi[c];
                gwi[c] += di * hi[c];
                gwd[c] += dd2 * hi[c];
                dhi[c] += dr * wr[c] + di * wi[c] + dd2 * wd[c];
            }
            *gbr += dr;
            *gbi += di;
            *gbd += dd2;
        }
    }

    std::vector<double> dh(nn * d, 0.0);
    if (cfg.layernorm) {
        const double* gf = p.at("lnfg");
        double* ggf = g("lnfg");
        double* gbf = g("lnfb");
        for (int i = 0; i < n; ++i)
            layernorm_bwd(&cache.h_res[static_cast<std::size_t>(i) * d], gf,
                          &cache.lnf_xhat[static_cast<std::size_t>(i) * d],
                          &dh_heads[static_cast<std::size_t>(i) * d],
                          &dh[static_cast<std::size_t>(i) * d], ggf, gbf, d);
    } else {
        dh = dh_heads;
    }

    std::vector<double> cs, sn;
    for (int l = cfg.layers - 1; l >= 0; --l) {
        const ForwardCache::Layer& cl = cache.layers[static_cast<std::size_t>(l)];
        std::string pre = "l" + std::to_string(l) + ".";
        const double* wq = p.at(pre + "wq");
        const double* wk = p.at(pre + "wk");
        const double* wv = p.at(pre + "wv");
        const double* wo = p.at(pre + "wo");
        const double* w1 = p.at(pre + "w1");
        const double* w2 = p.at(pre + "w2");
        double* gwq = g(pre + "wq");
        double* gwk = g(pre + "wk");
        double* gwv = g(pre + "wv");
        double* gwo = g(pre + "wo");
        double* gw1 = g(pre + "w1");
        double* gb1 = g(pre + "b1");
        double* gw2 = g(pre + "w2");
        double* gb2 = g(pre + "b2");

        // FF block: h_out = h_mid + W2 relu(W1 ln2(h_mid) + b1) + b2
        std::vector<double> dh_mid(nn * d, 0.0);
        std::vector<double> dln2(nn * d, 0.0);
        for (int i = 0; i < n; ++i) {
            const double* dho = &dh[static_cast<std::size_t>(i) * d];
            double* dhm = &dh_mid[static_cast<std::size_t>(i) * d];
            for (std::size_t c = 0; c < d; ++c) {
                dhm[c] += dho[c];
                gb2[c] += dho[c];
            }
            std::vector<double> dact(dff, 0.0);
            matvec_bwd(w2, &cl.ff_act[static_cast<std::size_t>(i) * dff], dho, gw2, dact.data(),
                       d, dff);
            for (std::size_t c = 0; c < dff; ++c) {
                if (cl.ff_pre[static_cast<std::size_t>(i) * dff + c] <= 0) dact[c] = 0.0;
                gb1[c] += dact[c];
            }
            matvec_bwd(w1, &cl.ln2_out[static_cast<std::size_t>(i) * d], dact.data(), gw1,
                       &dln2[static_cast<std::size_t>(i) * d], dff, d);
        }
        if (cfg.layernorm) {
            const double* g2 = p.at(pre + "ln2g");
            double* gg2 = g(pre + "ln2g");
            double* gb2n = g(pre + "ln2b");
            for (int i = 0; i < n; ++i)
                layernorm_bwd(&cl.h_mid[static_cast<std::size_t>(i) * d], g2,
                              &cl.ln2_xhat[static_cast<std::size_t>(i) * d],
                              &dln2[static_cast<std::size_t>(i) * d],
                              &dh_mid[static_cast<std::size_t>(i) * d], gg2, gb2n, d);
        } else {
            for (std::size_t i = 0; i < nn * d; ++i) dh_mid[i] += dln2[i];
        }

        // Residual + attention projection: h_mid = h_in + Wo att
        std::vector<double> datt(nn * d, 0.0);
        std::vector<double> dh_in(nn * d, 0.0);
        for (int i = 0; i < n; ++i) {
            const double* dhm = &dh_mid[static_cast<std::size_t>(i) * d];
            for (std::size_t c = 0; c < d; ++c) dh_in[static_cast<std::size_t>(i) * d + c] += dhm[c];
            matvec_bwd(wo, &cl.att[static_cast<std::size_t>(i) * d], dhm, gwo,
                       &datt[static_cast<std::size_t>(i) * d], d, d);
        }

        // Attention backward.
        std::vector<double> dq(nn * d, 0.0), dk(nn * d, 0.0), dv(nn * d, 0.0);
        for (int hh = 0; hh < H; ++hh) {
            for (int i = 0; i < n; ++i) {
                const double* row =
                    &cl.weights[(static_cast<std::size_t>(hh) * nn + static_cast<std::size_t>(i)) *
                                nn];
                const double* dai =
                    &datt[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(hh * hd)];
                std::vector<double> dscore(nn, 0.0);
                double dot_sum = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double* vj =
                        &cl.v[static_cast<std::size_t>(j) * d + static_cast<std::size_t>(hh * hd)];
                    double* dvj =
                        &dv[static_cast<std::size_t>(j) * d + static_cast<std::size_t>(hh * hd)];
                    double dotv = 0.0;
                    for (int c = 0; c < hd; ++c) {
                        dvj[c] += row[j] * dai[c];
                        dotv += vj[c] * dai[c];
                    }
                    dscore[static_cast<std::size_t>(j)] = dotv;
                    dot_sum += dotv * row[j];
                }
                const double* qi =
                    &cl.q[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(hh * hd)];
                double* dqi =
                    &dq[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(hh * hd)];
                for (int j = 0; j < n; ++j) {
                    double dsc = row[j] * (dscore[static_cast<std::size_t>(j)] - dot_sum) * inv_sqrt;
                    const double* kj =
                        &cl.k[static_cast<std::size_t>(j) * d + static_cast<std::size_t>(hh * hd)];
                    double* dkj =
                        &dk[static_cast<std::size_t>(j) * d + static_cast<std::size_t>(hh * hd)];
                    for (int c = 0; c < hd; ++c) {
                        dqi[c] += dsc * kj[c];
                        dkj[c] += dsc * qi[c];
                    }
                }
            }
        }

        if (cfg.rotary) {
            for (int i = 0; i < n; ++i) {
                rope_angles(hd, i, cfg.rope_base, cs, sn);
                for (int hh = 0; hh < H; ++hh) {
                    rope_apply_inv(
                        &dq[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(hh * hd)], hd,
                        cs, sn);
                    rope_apply_inv(
                        &dk[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(hh * hd)], hd,
                        cs, sn);
                }
            }
        }
        std::vector<double> dln1(nn * d, 0.0);
        for (int i = 0; i < n; ++i) {
            const double* hi = &cl.ln1_out[static_cast<std::size_t>(i) * d];
            double* dli = &dln1[static_cast<std::size_t>(i) * d];
            matvec_bwd(wq, hi, &dq[static_cast<std::size_t>(i) * d], gwq, dli, d, d);
            matvec_bwd(wk, hi, &dk[static_cast<std::size_t>(i) * d], gwk, dli, d, d);
            matvec_bwd(wv, hi, &dv[static_cast<std::size_t>(i) * d], gwv, dli, d, d);
        }
        if (cfg.layernorm) {
            const double* g1 = p.at(pre + "ln1g");
            double* gg1 = g(pre + "ln1g");
            double* gb1n = g(pre + "ln1b");
            for (int i = 0; i < n; ++i)
                layernorm_bwd(&cl.h_in[static_cast<std::size_t>(i) * d], g1,
                              &cl.ln1_xhat[static_cast<std::size_t>(i) * d],
                              &dln1[static_cast<std::size_t>(i) * d],
                              &dh_in[static_cast<std::size_t>(i) * d], gg1, gb1n, d);
        } else {
            for (std::size_t i = 0; i < nn * d; ++i) dh_in[i] += dln1[i];
        }
        dh = std::move(dh_in);
    }

    double* gemb = g("emb");
    for (int i = 0; i < n; ++i) {
        TokenId t = x.tokens[static_cast<std::size_t>(i)];
        for (std::size_t c = 0; c < d; ++c)
            gemb[static_cast<std::size_t>(t) * d + c] += dh[static_cast<std::size_t>(i) * d + c];
    }
    if (!cfg.rotary) {
        double* gpos = g("pos");
        for (int i = 0; i < n; ++i)
            for (std::size_t c = 0; c < d; ++c)
                gpos[static_cast<std::size_t>(i) * d + c] += dh[static_cast<std::size_t>(i) * d + c];
    }
}

void save_checkpoint(const ModelParams& p, const Vocab& vocab, const std::string& path) {
    nlohmann::json hdr;
    hdr["version"] = 1;
    hdr["layers"] = p.cfg.layers;
    hdr["heads"] = p.cfg.heads;
    hdr["d"] = p.cfg.d;
    hdr["dff"] = p.cfg.dff;
    hdr["max_seq"] = p.cfg.max_seq;
    hdr["rotary"] = p.cfg.rotary;
    hdr["rope_base"] = p.cfg.rope_base;
    hdr["layernorm"] = p.cfg.layernorm;
    hdr["tau"] = {p.cfg.tau_r, p.cfg.tau_i, p.cfg.tau_d};
    nlohmann::json names = nlohmann::json::array();
    for (TokenId t = 0; t < static_cast<TokenId>(vocab.size()); ++t) {
        names.push_back({{"name", vocab.name(t)}, {"mask", vocab.is_mask(t)}});
    }
    hdr["vocab"] = names;
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& e : p.layout.entries)
        tensors.push_back({{"name", e.name}, {"rows", e.rows}, {"cols", e.cols}});
    hdr["tensors"] = tensors;
    std::string h = hdr.dump();

    std::ofstream f(path, std::ios::binary);
    if (!f) throw ContractError("cannot write checkpoint: " + path);
    const char magic[8] = {'A', 'P', 'C', 'K', 'P', 'T', '0', '1'};
    f.write(magic, 8);
    std::uint64_t hl = h.size();
    f.write(reinterpret_cast<const char*>(&hl), 8);
    f.write(h.data(), static_cast<std::streamsize>(h.size()));
    std::uint64_t wl = p.w.size();
    f.write(reinterpret_cast<const char*>(&wl), 8);
    f.write(reinterpret_cast<const char*>(p.w.data()),
            static_cast<std::streamsize>(p.w.size() * sizeof(double)));
}

ModelParams load_checkpoint(const std::string& path, Vocab* vocab_out) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ContractError("cannot read checkpoint: " + path);
    char magic[8];
    f.read(magic, 8);
    if (std::memcmp(magic, "APCKPT01", 8) != 0) throw ContractError("bad checkpoint magic");
    std::uint64_t hl = 0;
    f.read(reinterpret_cast<char*>(&hl), 8);
    std::string h(hl, '\0');
    f.read(h.data(), static_cast<std::streamsize>(hl));
    nlohmann::json hdr = nlohmann::json::parse(h);

    Vocab vocab;
    for (const auto& e : hdr.at("vocab"))
        vocab.add(e.at("name").get<std::string>(), e.at("mask").get<bool>());
    if (vocab_out) *vocab_out = vocab;

    ModelConfig cfg;
    cfg.layers = hdr.at("layers").get<int>();
    cfg.heads = hdr.at("heads").get<int>();
    cfg.d = hdr.at("d").get<int>();
    cfg.dff = hdr.at("dff").get<int>();
    cfg.max_seq = hdr.at("max_seq").get<int>();
    cfg.rotary = hdr.at("rotary").get<bool>();
    cfg.rope_base = hdr.value("rope_base", 10000.0);
    cfg.layernorm = hdr.value("layernorm", true);
    cfg.tau_r = hdr.at("tau")[0].get<double>();
    cfg.tau_i = hdr.at("tau")[1].get<double>();
    cfg.tau_d = hdr.at("tau")[2].get<double>();

    ModelParams p = ModelParams::init(cfg, vocab, 0);
    std::uint64_t wl = 0;
    f.read(reinterpret_cast<char*>(&wl), 8);
    if (wl != p.w.size()) throw ContractError("checkpoint parameter count mismatch");
    f.read(reinterpret_cast<char*>(p.w.data()), static_cast<std::streamsize>(wl * sizeof(double)));
    return p;
}

}  // namespace apgen::model
