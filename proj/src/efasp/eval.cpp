#include "apgen/efasp/eval.hpp"

#include <algorithm>
#include <unordered_map>

namespace apgen::efasp {

namespace {

constexpr long long kHaltCode = -2;  // sentinel before masking into the word range

long long halt_code_for(int word_bits) { return (1ll << word_bits) - 1; }

// Total instruction lookup: anything outside the code range decodes as HALT.
struct InstrFields {
    long long op = 11, r = 0, s = 0, imm = 0, target = 0;
};

InstrFields instr_at(const pram::Program* prog, int word_bits, const Rational& pc) {
    InstrFields f;
    f.target = halt_code_for(word_bits);
    if (prog == nullptr || !pc.is_integer()) return f;
    long long v = pc.num();
    if (v < 0 || v >= static_cast<long long>(prog->code.size())) return f;
    const pram::Instruction& ins = prog->code[static_cast<std::size_t>(v)];
    f.op = static_cast<long long>(ins.op);
    f.r = ins.r;
    f.s = ins.s;
    long long mask = (1ll << word_bits) - 1;
    f.imm = static_cast<long long>(static_cast<unsigned long long>(ins.imm) &
                                   static_cast<unsigned long long>(mask));
    f.target = ins.target >= 0 ? ins.target : halt_code_for(word_bits);
    return f;
}

Rational bool_r(bool b) { return Rational(b ? 1 : 0); }

// Elementwise apply with dim-1 broadcast.
template <typename F>
Value zip(const Value& a, const Value& b, F f) {
    std::size_t n = std::max(a.size(), b.size());
    Value out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = f(a[a.size() == 1 ? 0 : i], b[b.size() == 1 ? 0 : i]);
    return out;
}

long long word_int(const Rational& r, int word_bits) {
    if (!r.is_integer()) return 0;
    long long m = (1ll << word_bits);
    long long v = r.num() % m;
    return v < 0 ? v + m : v;
}

// Shift amount from a scalar or an LSB-first bit vector; -1 when malformed.
long long shift_amount(const Value& t) {
    if (t.size() == 1) {
        if (!t[0].is_integer() || t[0].num() < 0) return -1;
        return t[0].num();
    }
    long long amt = 0;
    for (std::size_t r = 0; r < t.size(); ++r) {
        if (!t[r].is_integer()) return -1;
        if (t[r].num() != 0 && t[r].num() != 1) return -1;
        amt += t[r].num() << r;
    }
    return amt;
}

long long bits_to_int(const Value& v) {
    long long out = 0;
    for (std::size_t r = 0; r < v.size(); ++r)
        if (truthy(v[r])) out += 1ll << r;
    return out;
}

Value int_to_bits(long long v, int width) {
    Value out(static_cast<std::size_t>(width));
    for (int r = 0; r < width; ++r) out[static_cast<std::size_t>(r)] = Rational((v >> r) & 1);
    return out;
}

struct Engine {
    const CompiledProgram& prog;
    const EvalContext& ctx;
    std::size_t n;

    Value token_embedding(std::size_t i) const {
        const TokenInfo& ti = ctx.info_at(i - 1);
        Value v = int_to_bits(ti.numeric ? ti.value : 0, prog.params.word_bits);
        v.push_back(bool_r(ti.numeric));
        v.push_back(bool_r(ti.is_sep));
        v.push_back(bool_r(ti.is_mask));
        return v;
    }

    Value pe_bits(std::size_t i) const {
        if (i >= (1ull << prog.params.word_bits))
            throw ContractError("binary positional encoding width exceeded");
        return int_to_bits(static_cast<long long>(i), prog.params.word_bits);
    }

    // Pointwise result of slot `s` at 1-indexed position i, with operand
    // values already computed.
    Value pointwise(const Slot& s, std::size_t i, const std::vector<const Value*>& a) const {
        switch (s.op) {
            case Op::lit: return s.lit;
            case Op::te: return token_embedding(i);
            case Op::pe: return scalar(Rational(static_cast<long long>(i)));
            case Op::pe_bits: return pe_bits(i);
            case Op::val_bits: {
                const TokenInfo& ti = ctx.info_at(i - 1);
                return int_to_bits(ti.numeric ? ti.value : 0, prog.params.word_bits);
            }
            case Op::val_int: {
                const TokenInfo& ti = ctx.info_at(i - 1);
                return scalar(Rational(ti.numeric ? ti.value : 0));
            }
            case Op::is_sep: return scalar(bool_r(ctx.info_at(i - 1).is_sep));
            case Op::is_mask: return scalar(bool_r(ctx.info_at(i - 1).is_mask));
            case Op::is_num: return scalar(bool_r(ctx.info_at(i - 1).numeric));
            case Op::add: return zip(*a[0], *a[1], [](auto& x, auto& y) { return x + y; });
            case Op::minus: return zip(*a[0], *a[1], [](auto& x, auto& y) { return x - y; });
            case Op::multi: return zip(*a[0], *a[1], [](auto& x, auto& y) { return x * y; });
            case Op::vmax:
                return zip(*a[0], *a[1], [](auto& x, auto& y) { return x < y ? y : x; });
            case Op::vmin:
                return zip(*a[0], *a[1], [](auto& x, auto& y) { return x < y ? x : y; });
            case Op::land:
                return zip(*a[0], *a[1],
                           [](auto& x, auto& y) { return bool_r(truthy(x) && truthy(y)); });
            case Op::lor:
                return zip(*a[0], *a[1],
                           [](auto& x, auto& y) { return bool_r(truthy(x) || truthy(y)); });
            case Op::lxor:
                return zip(*a[0], *a[1],
                           [](auto& x, auto& y) { return bool_r(truthy(x) != truthy(y)); });
            case Op::lnot: {
                Value out(a[0]->size());
                for (std::size_t k = 0; k < out.size(); ++k)
                    out[k] = Rational(1) - (*a[0])[k];
                return out;
            }
            case Op::relu: {
                Value out(a[0]->size());
                for (std::size_t k = 0; k < out.size(); ++k)
                    out[k] = (*a[0])[k] < Rational(0) ? Rational(0) : (*a[0])[k];
                return out;
            }
            case Op::reglu:
                return zip(*a[0], *a[1], [](auto& x, auto& y) {
                    return y < Rational(0) ? Rational(0) : x * y;
                });
            case Op::leq: return scalar(bool_r((*a[0])[0] <= (*a[1])[0]));
            case Op::geq: return scalar(bool_r((*a[0])[0] >= (*a[1])[0]));
            case Op::eq: return scalar(bool_r((*a[0])[0] == (*a[1])[0]));
            case Op::lt: return scalar(bool_r((*a[0])[0] < (*a[1])[0]));
            case Op::gt: return scalar(bool_r((*a[0])[0] > (*a[1])[0]));
            case Op::ite: {
                const Rational& c = (*a[0])[0];
                // c*x + (1-c)*y, the primitive composition; selects for 0/1.
                Value x = zip(scalar(c), *a[1], [](auto& u, auto& v) { return u * v; });
                Value y = zip(scalar(Rational(1) - c), *a[2],
                              [](auto& u, auto& v) { return u * v; });
                return zip(x, y, [](auto& u, auto& v) { return u + v; });
            }
            case Op::seq_len: return scalar(Rational(static_cast<long long>(n)));
            case Op::is_first: return scalar(bool_r(i == 1));
            case Op::is_pos: return scalar(bool_r(static_cast<long long>(i) == s.p0));
            case Op::inv_seq_len:
                return scalar(Rational(1, static_cast<long long>(n)));
            case Op::idiv: {
                const Rational &x = (*a[0])[0], &y = (*a[1])[0];
                if (!x.is_integer() || !y.is_integer() || y.num() == 0) return scalar(Rational(0));
                long long q = x.num() / y.num();
                if ((x.num() % y.num() != 0) && ((x.num() < 0) != (y.num() < 0))) --q;
                return scalar(Rational(q));  // floor division
            }
            case Op::imod: {
                const Rational &x = (*a[0])[0], &y = (*a[1])[0];
                if (!x.is_integer() || !y.is_integer() || y.num() == 0) return scalar(Rational(0));
                long long m = x.num() % y.num();
                if (m != 0 && ((m < 0) != (y.num() < 0))) m += y.num();
                return scalar(Rational(m));
            }
            case Op::iand:
            case Op::ixor: {
                long long x = word_int((*a[0])[0], prog.params.word_bits);
                long long y = word_int((*a[1])[0], prog.params.word_bits);
                return scalar(Rational(s.op == Op::iand ? (x & y) : (x ^ y)));
            }
            case Op::ishl:
            case Op::ishr: {
                long long x = word_int((*a[0])[0], prog.params.word_bits);
                long long h = word_int((*a[1])[0], prog.params.word_bits) % prog.params.word_bits;
                long long mask = (1ll << prog.params.word_bits) - 1;
                return scalar(Rational(s.op == Op::ishl ? ((x << h) & mask) : (x >> h)));
            }
            case Op::wrap:
                return scalar(Rational(word_int((*a[0])[0], prog.params.word_bits)));
            case Op::bit_add:
            case Op::bit_minus: {
                long long m = static_cast<long long>(a[0]->size());
                long long x = bits_to_int(*a[0]);
                long long y = bits_to_int(*a[1]);
                long long mod = 1ll << m;
                long long r = s.op == Op::bit_add ? (x + y) % mod : ((x - y) % mod + mod) % mod;
                return int_to_bits(r, static_cast<int>(m));
            }
            case Op::shift_left:
            case Op::shift_right: {
                const Value& v = *a[0];
                long long m = static_cast<long long>(v.size());
                long long t = shift_amount(*a[1]);
                Value out(v.size(), Rational(0));
                if (t < 0 || t > m) return out;  // out-of-range gates all fail
                for (long long k = 0; k < m; ++k) {
                    long long src = s.op == Op::shift_left ? k - t : k + t;
                    if (src >= 0 && src < m)
                        out[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(src)];
                }
                return out;
            }
            case Op::concat: {
                Value out;
                for (const Value* v : a) out.insert(out.end(), v->begin(), v->end());
                return out;
            }
            case Op::linear: {
                Value out(s.matrix.size(), Rational(0));
                for (std::size_t r = 0; r < s.matrix.size(); ++r)
                    for (std::size_t c = 0; c < s.matrix[r].size(); ++c)
                        out[r] = out[r] + s.matrix[r][c] * (*a[0])[c];
                return out;
            }
            case Op::slice: {
                Value out;
                for (long long k = 0; k < s.p1; ++k)
                    out.push_back((*a[0])[static_cast<std::size_t>(s.p0 + k)]);
                return out;
            }
            case Op::instr_op:
                return scalar(Rational(instr_at(ctx.machine_program, prog.params.word_bits,
                                                (*a[0])[0]).op));
            case Op::instr_r:
                return scalar(Rational(instr_at(ctx.machine_program, prog.params.word_bits,
                                                (*a[0])[0]).r));
            case Op::instr_s:
                return scalar(Rational(instr_at(ctx.machine_program, prog.params.word_bits,
                                                (*a[0])[0]).s));
            case Op::instr_imm:
                return scalar(Rational(instr_at(ctx.machine_program, prog.params.word_bits,
                                                (*a[0])[0]).imm));
            case Op::instr_tgt:
                return scalar(Rational(instr_at(ctx.machine_program, prog.params.word_bits,
                                                (*a[0])[0]).target));
            case Op::out_addr:
                return scalar(Rational(ctx.machine_program != nullptr
                                           ? static_cast<long long>(ctx.machine_program->out_addr)
                                           : 0));
            case Op::halt_code: return scalar(Rational(halt_code_for(prog.params.word_bits)));
            case Op::word_bits: return scalar(Rational(prog.params.word_bits));
            default: throw ContractError("not a pointwise operator");
        }
    }

    static bool is_seq_op(Op op) {
        switch (op) {
            case Op::seq_max:
            case Op::seq_min:
            case Op::seq_and:
            case Op::seq_or:
            case Op::seq_sum:
            case Op::seq_avg:
            case Op::aha:
            case Op::rha:
            case Op::rem: return true;
            default: return false;
        }
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// Reference evaluator: straight recursion over slots with per-(slot,position)
// caching of pure results.
// ---------------------------------------------------------------------------

namespace {

struct RefEval {
    Engine eng;
    std::unordered_map<std::uint64_t, Value> memo;

    Value& cache(int slot, std::size_t i, bool& hit) {
        std::uint64_t key = static_cast<std::uint64_t>(slot) * (eng.n + 2) + i;
        auto [it, inserted] = memo.try_emplace(key);
        hit = !inserted;
        return it->second;
    }

    Value eval(int slot_idx, std::size_t i) {
        bool hit = false;
        Value& out = cache(slot_idx, i, hit);
        if (hit) return out;
        const Slot& s = eng.prog.slots[static_cast<std::size_t>(slot_idx)];
        if (!Engine::is_seq_op(s.op)) {
            std::vector<Value> argv;
            argv.reserve(s.args.size());
            for (int a : s.args) argv.push_back(eval(a, i));
            std::vector<const Value*> ap;
            ap.reserve(argv.size());
            for (const Value& v : argv) ap.push_back(&v);
            out = eng.pointwise(s, i, ap);
            return out;
        }
        const std::size_t n = eng.n;
        switch (s.op) {
            case Op::seq_max:
            case Op::seq_min:
            case Op::seq_and:
            case Op::seq_or:
            case Op::seq_sum:
            case Op::seq_avg: {
                Value acc = eval(s.args[0], 1);
                for (std::size_t j = 2; j <= n; ++j) {
                    Value vj = eval(s.args[0], j);
                    for (std::size_t k = 0; k < acc.size(); ++k) {
                        switch (s.op) {
                            case Op::seq_max: acc[k] = acc[k] < vj[k] ? vj[k] : acc[k]; break;
                            case Op::seq_min: acc[k] = vj[k] < acc[k] ? vj[k] : acc[k]; break;
                            case Op::seq_and:
                                acc[k] = bool_r(truthy(acc[k]) && truthy(vj[k]));
                                break;
                            case Op::seq_or:
                                acc[k] = bool_r(truthy(acc[k]) || truthy(vj[k]));
                                break;
                            default: acc[k] = acc[k] + vj[k];
                        }
                    }
                }
                if (s.op == Op::seq_and || s.op == Op::seq_or) {
                    // n == 1: normalize to a strict boolean
                    for (auto& r : acc) r = bool_r(truthy(r));
                }
                if (s.op == Op::seq_avg) {
                    Rational inv(1, static_cast<long long>(n));
                    for (auto& r : acc) r = r * inv;
                }
                out = acc;
                return out;
            }
            case Op::aha:
            case Op::rha: {
                Value q = eval(s.args[0], i);
                Rational best;
                std::vector<std::size_t> arg;
                for (std::size_t j = 1; j <= n; ++j) {
                    Value kj = eval(s.args[1], j);
                    Rational score(0);
                    for (std::size_t k2 = 0; k2 < q.size(); ++k2) score = score + q[k2] * kj[k2];
                    if (arg.empty() || best < score) {
                        best = score;
                        arg.assign(1, j);
                    } else if (score == best) {
                        arg.push_back(j);
                    }
                }
                if (s.op == Op::rha) arg.assign(1, arg.back());
                Value acc(static_cast<std::size_t>(
                              eng.prog.dim_of(s.args[2])),
                          Rational(0));
                for (std::size_t j : arg) {
                    Value vj = eval(s.args[2], j);
                    for (std::size_t k2 = 0; k2 < acc.size(); ++k2) acc[k2] = acc[k2] + vj[k2];
                }
                Rational inv(1, static_cast<long long>(arg.size()));
                for (auto& r : acc) r = r * inv;
                out = acc;
                return out;
            }
            case Op::rem: {
                Value q = eval(s.args[0], i);
                std::ptrdiff_t found = -1;
                for (std::size_t j = n; j >= 1; --j) {
                    Value kj = eval(s.args[1], j);
                    if (kj == q) {
                        found = static_cast<std::ptrdiff_t>(j);
                        break;
                    }
                }
                if (found < 0) {
                    if (s.args.size() == 4)
                        out = eval(s.args[3], i);
                    else
                        out = Value(static_cast<std::size_t>(eng.prog.dim_of(s.args[2])),
                                    Rational(0));
                    return out;
                }
                out = eval(s.args[2], static_cast<std::size_t>(found));
                return out;
            }
            default: throw ContractError("unhandled sequence operator");
        }
    }
};

}  // namespace

Value eval_reference(const CompiledProgram& prog, const EvalContext& ctx, std::size_t i) {
    if (ctx.x == nullptr || ctx.token_info == nullptr)
        throw ContractError("evaluation context is incomplete");
    if (i < 1 || i > ctx.length()) throw ContractError("position out of range");
    RefEval ev{Engine{prog, ctx, ctx.length()}, {}};
    return ev.eval(prog.ret, i);
}

// ---------------------------------------------------------------------------
// Column evaluator
// ---------------------------------------------------------------------------

std::vector<Value> eval_columns(const CompiledProgram& prog, const EvalContext& ctx,
                                bool parallel) {
    if (ctx.x == nullptr || ctx.token_info == nullptr)
        throw ContractError("evaluation context is incomplete");
    Engine eng{prog, ctx, ctx.length()};
    const std::size_t n = ctx.length();
    const long long nn = static_cast<long long>(n);
    std::vector<std::vector<Value>> cols(prog.slots.size());

    for (std::size_t si = 0; si < prog.slots.size(); ++si) {
        const Slot& s = prog.slots[si];
        std::vector<Value>& col = cols[si];
        col.resize(n);

        if (!Engine::is_seq_op(s.op)) {
            auto compute = [&](long long idx) {
                std::size_t i = static_cast<std::size_t>(idx) + 1;
                std::vector<const Value*> ap(s.args.size());
                for (std::size_t k = 0; k < s.args.size(); ++k)
                    ap[k] = &cols[static_cast<std::size_t>(s.args[k])][static_cast<std::size_t>(idx)];
                col[static_cast<std::size_t>(idx)] = eng.pointwise(s, i, ap);
            };
            if (parallel) {
#pragma omp parallel for schedule(static)
                for (long long idx = 0; idx < nn; ++idx) compute(idx);
            } else {
                for (long long idx = 0; idx < nn; ++idx) compute(idx);
            }
            continue;
        }

        switch (s.op) {
            case Op::seq_max:
            case Op::seq_min:
            case Op::seq_and:
            case Op::seq_or:
            case Op::seq_sum:
            case Op::seq_avg: {
                const auto& src = cols[static_cast<std::size_t>(s.args[0])];
                Value acc = src[0];
                for (std::size_t j = 1; j < n; ++j) {
                    for (std::size_t k = 0; k < acc.size(); ++k) {
                        const Rational& v = src[j][k];
                        switch (s.op) {
                            case Op::seq_max: acc[k] = acc[k] < v ? v : acc[k]; break;
                            case Op::seq_min: acc[k] = v < acc[k] ? v : acc[k]; break;
                            case Op::seq_and: acc[k] = bool_r(truthy(acc[k]) && truthy(v)); break;
                            case Op::seq_or: acc[k] = bool_r(truthy(acc[k]) || truthy(v)); break;
                            default: acc[k] = acc[k] + v;
                        }
                    }
                }
                if (s.op == Op::seq_and || s.op == Op::seq_or)
                    for (auto& r : acc) r = bool_r(truthy(r));
                if (s.op == Op::seq_avg) {
                    Rational inv(1, nn);
                    for (auto& r : acc) r = r * inv;
                }
                for (std::size_t j = 0; j < n; ++j) col[j] = acc;
                break;
            }
            case Op::rem: {
                const auto& qs = cols[static_cast<std::size_t>(s.args[0])];
                const auto& ks = cols[static_cast<std::size_t>(s.args[1])];
                const auto& vs = cols[static_cast<std::size_t>(s.args[2])];
                // Rightmost position per key value.
                std::unordered_map<std::uint64_t, std::vector<std::pair<Value, std::size_t>>> index;
                for (std::size_t j = 0; j < n; ++j) {
                    auto& bucket = index[hash_value(ks[j])];
                    bool placed = false;
                    for (auto& [kv, pos] : bucket)
                        if (kv == ks[j]) {
                            pos = j;
                            placed = true;
                            break;
                        }
                    if (!placed) bucket.emplace_back(ks[j], j);
                }
                auto lookup = [&](const Value& q) -> std::ptrdiff_t {
                    auto it = index.find(hash_value(q));
                    if (it == index.end()) return -1;
                    for (auto& [kv, pos] : it->second)
                        if (kv == q) return static_cast<std::ptrdiff_t>(pos);
                    return -1;
                };
                auto compute = [&](long long idx) {
                    std::ptrdiff_t j = lookup(qs[static_cast<std::size_t>(idx)]);
                    if (j >= 0)
                        col[static_cast<std::size_t>(idx)] = vs[static_cast<std::size_t>(j)];
                    else if (s.args.size() == 4)
                        col[static_cast<std::size_t>(idx)] =
                            cols[static_cast<std::size_t>(s.args[3])][static_cast<std::size_t>(idx)];
                    else
                        col[static_cast<std::size_t>(idx)] =
                            Value(static_cast<std::size_t>(s.dim), Rational(0));
                };
                if (parallel) {
#pragma omp parallel for schedule(static)
                    for (long long idx = 0; idx < nn; ++idx) compute(idx);
                } else {
                    for (long long idx = 0; idx < nn; ++idx) compute(idx);
                }
                break;
            }
            case Op::aha:
            case Op::rha: {
                const auto& qs = cols[static_cast<std::size_t>(s.args[0])];
                const auto& ks = cols[static_cast<std::size_t>(s.args[1])];
                const auto& vs = cols[static_cast<std::size_t>(s.args[2])];
                auto compute = [&](long long idx) {
                    const Value& q = qs[static_cast<std::size_t>(idx)];
                    Rational best;
                    std::vector<std::size_t> arg;
                    for (std::size_t j = 0; j < n; ++j) {
                        Rational score(0);
                        for (std::size_t k = 0; k < q.size(); ++k)
                            score = score + q[k] * ks[j][k];
                        if (arg.empty() || best < score) {
                            best = score;
                            arg.assign(1, j);
                        } else if (score == best) {
                            arg.push_back(j);
                        }
                    }
                    if (s.op == Op::rha) arg.assign(1, arg.back());
                    Value acc(static_cast<std::size_t>(s.dim), Rational(0));
                    for (std::size_t j : arg)
                        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] = acc[k] + vs[j][k];
                    Rational inv(1, static_cast<long long>(arg.size()));
                    for (auto& r : acc) r = r * inv;
                    col[static_cast<std::size_t>(idx)] = acc;
                };
                if (parallel) {
#pragma omp parallel for schedule(static)
                    for (long long idx = 0; idx < nn; ++idx) compute(idx);
                } else {
                    for (long long idx = 0; idx < nn; ++idx) compute(idx);
                }
                break;
            }
            default: throw ContractError("unhandled sequence operator");
        }
    }
    return cols[static_cast<std::size_t>(prog.ret)];
}

}  // namespace apgen::efasp
