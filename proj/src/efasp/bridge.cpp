#include "apgen/efasp/bridge.hpp"

#include <algorithm>
#include <map>

namespace apgen::efasp {

PramCodec::PramCodec(int word_bits_) : word_bits(word_bits_) {
    if (word_bits < 1 || word_bits > 20) throw ContractError("codec word width out of range");
    mask = vocab.add("M", /*is_mask=*/true);
    sep = vocab.add("SEP");
    nolog = vocab.add("NOLOG");
    first_value = static_cast<TokenId>(vocab.size());
    const long long count = 1ll << word_bits;
    for (long long v = 0; v < count; ++v) vocab.add("V" + std::to_string(v));

    token_info.resize(vocab.size());
    token_info[static_cast<std::size_t>(mask)].is_mask = true;
    token_info[static_cast<std::size_t>(sep)].is_sep = true;
    for (long long v = 0; v < count; ++v) {
        TokenInfo& ti = token_info[static_cast<std::size_t>(first_value + v)];
        ti.numeric = true;
        ti.value = v;
    }
}

TokenId PramCodec::value_token(long long v) const {
    long long m = 1ll << word_bits;
    long long r = ((v % m) + m) % m;
    return first_value + static_cast<TokenId>(r);
}

long long PramCodec::token_value(TokenId t) const {
    const TokenInfo& ti = token_info.at(static_cast<std::size_t>(t));
    if (!ti.numeric) throw ContractError("token has no numeric value");
    return ti.value;
}

SeqState pram_bridge_encode(const PramCodec& codec, const pram::Program& prog, SimVariant variant,
                            std::size_t ctx_len) {
    SeqState s;
    s.tokens.push_back(codec.value_token(prog.procs));
    std::map<std::uint64_t, pram::Word> mem(prog.init_mem.begin(), prog.init_mem.end());
    if (variant == SimVariant::AO) {
        for (auto [addr, val] : mem) {
            if (val == 0) continue;
            s.tokens.push_back(codec.value_token(static_cast<long long>(addr)));
            s.tokens.push_back(codec.value_token(static_cast<long long>(val)));
        }
        s.tokens.push_back(codec.sep);
        if (ctx_len < s.tokens.size()) throw ContractError("AO context length too small");
        s.tokens.resize(ctx_len, codec.mask);
    } else {
        std::uint64_t n = 0;
        for (auto [addr, val] : mem)
            if (val != 0) n = std::max(n, addr + 1);
        for (std::uint64_t a = 0; a < n; ++a)
            s.tokens.push_back(codec.value_token(static_cast<long long>(mem.count(a) ? mem[a] : 0)));
        std::size_t total = 1 + prog.memsize + 4 * static_cast<std::size_t>(prog.procs);
        if (s.tokens.size() > total) throw ContractError("initial memory exceeds memsize");
        s.tokens.resize(total, codec.mask);
    }
    return s;
}

Denoiser symbolic_denoiser(const CompiledProgram& program, SimVariant variant,
                           const PramCodec& codec, const pram::Program& machine_prog,
                           bool parallel) {
    const int expected_dim = variant == SimVariant::AO ? 4 : 2;
    if (program.out_dim() != expected_dim)
        throw ContractError("sequence program output dimension does not match the variant");
    if (program.params.word_bits != codec.word_bits)
        throw ContractError("program width does not match the codec");

    return [&program, variant, &codec, &machine_prog, parallel](const SeqState& x,
                                                                Rng&) -> DenoiserOutput {
        EvalContext ctx;
        ctx.x = &x;
        ctx.token_info = &codec.token_info;
        ctx.pos_variant = variant == SimVariant::AO ? PosVariant::SEQ : PosVariant::BiPE;
        ctx.machine_program = &machine_prog;
        std::vector<Value> out_col = eval_columns(program, ctx, parallel);

        DenoiserOutput out;
        const std::size_t n = x.size();
        out.y.resize(n);
        out.controls.assign(n, Controls{});
        out.confidence.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const Value& v = out_col[i];
            const bool masked = codec.token_info[static_cast<std::size_t>(x.tokens[i])].is_mask;
            if (variant == SimVariant::AO) {
                long long emit = v[0].is_integer() ? v[0].num() : 0;
                long long kind = v[1].is_integer() ? v[1].num() : 0;
                long long value = v[2].is_integer() ? v[2].num() : 0;
                out.y[i] = kind == 1 ? codec.sep : kind == 2 ? codec.nolog
                                                             : codec.value_token(value);
                if (masked) {
                    if (emit != 0) {
                        out.confidence[i] = v[3].to_double();
                    } else {
                        out.controls[i].remask = true;  // stay masked this step
                        out.y[i] = codec.nolog;
                    }
                } else {
                    out.y[i] = x.tokens[i];  // decoded positions are never touched
                }
            } else {
                long long value = v[0].is_integer() ? v[0].num() : 0;
                long long rewrite = v[1].is_integer() ? v[1].num() : 0;
                out.y[i] = codec.value_token(value);
                out.controls[i].remask = rewrite != 0;
                if (!rewrite && !masked) out.y[i] = x.tokens[i];
            }
        }
        return out;
    };
}

CompiledProgram load_sim_program(SimVariant variant, int word_bits) {
    std::string name = variant == SimVariant::AO ? "pram_ao.efasp" : "pram_rewrite.efasp";
    std::string path = std::string(APGEN_ASSET_DIR) + "/efasp/" + name;
    ProgramParams params;
    params.word_bits = word_bits;
    return parse_program_file(path, params);
}

SimReport verify_simulation(const CompiledProgram& program, const pram::Program& machine_prog,
                            SimVariant variant, std::uint64_t max_rounds, bool parallel) {
    SimReport rep;

    pram::Machine machine(machine_prog, std::max(6, machine_prog.max_register() + 1));
    pram::RunMetrics metrics = machine.run(max_rounds);
    rep.machine_terminated = metrics.terminated && !metrics.trap;
    rep.rounds = metrics.rounds;
    if (!rep.machine_terminated) {
        rep.detail = "reference machine did not terminate cleanly";
        return rep;
    }
    rep.machine_output = machine.output();

    PramCodec codec(machine_prog.word_bits);
    const std::size_t procs = static_cast<std::size_t>(machine_prog.procs);
    std::size_t ctx_len = 0;
    if (variant == SimVariant::AO) {
        // input + one block per round + init block + answer slot, with slack.
        std::size_t input = 2;
        std::map<std::uint64_t, pram::Word> mem(machine_prog.init_mem.begin(),
                                                machine_prog.init_mem.end());
        for (auto [addr, val] : mem)
            if (val != 0) input += 2;
        ctx_len = input + (8 * procs + 1) * (metrics.rounds + 2) + 4;
        rep.context_limit = 16 * procs * static_cast<std::size_t>(metrics.rounds);
    } else {
        ctx_len = 1 + machine_prog.memsize + 4 * procs;
        rep.context_limit = 4 * machine_prog.memsize;
    }

    SeqState x0 = pram_bridge_encode(codec, machine_prog, variant, ctx_len);
    Denoiser den = symbolic_denoiser(program, variant, codec, machine_prog, parallel);
    DecodeOptions opts;
    opts.max_steps = static_cast<int>(4 * metrics.rounds + 16);
    opts.rewrite_mode = variant == SimVariant::REWRITE;
    Trace trace = decode(codec.vocab, den, x0, StopCriterion::fixpoint(), 0, opts);

    rep.decode_steps = trace.steps() > 0 ? trace.steps() - 1 : 0;  // last step detects the fixpoint
    rep.steps_per_round =
        metrics.rounds > 0 ? static_cast<double>(rep.decode_steps) / static_cast<double>(metrics.rounds)
                           : static_cast<double>(rep.decode_steps);
    const SeqState& fin = trace.final_state();

    if (variant == SimVariant::AO) {
        std::ptrdiff_t last_sep = -1, last_tok = -1;
        for (std::size_t i = 0; i < fin.size(); ++i) {
            if (fin.tokens[i] == codec.sep) last_sep = static_cast<std::ptrdiff_t>(i);
            if (fin.tokens[i] != codec.mask) last_tok = static_cast<std::ptrdiff_t>(i);
        }
        rep.context_tokens = static_cast<std::size_t>(last_tok + 1);
        if (last_sep >= 0 && last_sep + 1 < static_cast<std::ptrdiff_t>(fin.size())) {
            TokenId ans = fin.tokens[static_cast<std::size_t>(last_sep + 1)];
            if (codec.token_info[static_cast<std::size_t>(ans)].numeric) {
                rep.decoded_output_valid = true;
                rep.decoded_output = codec.token_value(ans);
            }
        }
    } else {
        rep.context_tokens = fin.size();
        std::size_t pos = static_cast<std::size_t>(machine_prog.out_addr) + 1;  // 0-based index
        if (pos < fin.size() &&
            codec.token_info[static_cast<std::size_t>(fin.tokens[pos])].numeric) {
            rep.decoded_output_valid = true;
            rep.decoded_output = codec.token_value(fin.tokens[pos]);
        }
    }

    rep.ok = rep.decoded_output_valid &&
             rep.decoded_output == static_cast<long long>(rep.machine_output) &&
             trace.stop_reason == StopReason::fixpoint;
    if (!rep.ok) {
        rep.detail = "decode mismatch: machine=" + std::to_string(rep.machine_output) +
                     " decoded=" + std::to_string(rep.decoded_output) +
                     " stop=" + stop_reason_name(trace.stop_reason);
    }
    return rep;
}

}  // namespace apgen::efasp
