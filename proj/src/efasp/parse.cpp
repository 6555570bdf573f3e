#include "apgen/efasp/parse.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace apgen::efasp {

int opcode_const(const std::string& name) {
    static const std::map<std::string, int> table = {
        {"LOAD", 0}, {"STORE", 1}, {"LOADI", 2}, {"ADD", 3},  {"SUB", 4},  {"AND", 5},
        {"XOR", 6},  {"SHL", 7},   {"SHR", 8},   {"BRZ", 9},  {"JMP", 10}, {"HALT", 11},
    };
    auto it = table.find(name);
    if (it == table.end()) throw ParseError("unknown opcode name: " + name);
    return it->second;
}

namespace {

struct Tok {
    enum Kind { lparen, rparen, atom } kind;
    std::string text;
    int line;
};

std::vector<Tok> tokenize(const std::string& text) {
    std::vector<Tok> out;
    int line = 1;
    for (std::size_t i = 0; i < text.size();) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == ';') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (c == '(') {
            out.push_back({Tok::lparen, "(", line});
            ++i;
        } else if (c == ')') {
            out.push_back({Tok::rparen, ")", line});
            ++i;
        } else {
            std::size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) &&
                   text[j] != '(' && text[j] != ')' && text[j] != ';')
                ++j;
            out.push_back({Tok::atom, text.substr(i, j - i), line});
            i = j;
        }
    }
    return out;
}

// Generic s-expression tree.
struct Sx {
    bool is_atom = false;
    std::string atom;
    int line = 0;
    std::vector<Sx> items;
};

Sx parse_sx(const std::vector<Tok>& toks, std::size_t& pos) {
    if (pos >= toks.size()) throw ParseError("unexpected end of input");
    const Tok& t = toks[pos];
    if (t.kind == Tok::atom) {
        ++pos;
        return Sx{true, t.text, t.line, {}};
    }
    if (t.kind == Tok::rparen) throw ParseError("line " + std::to_string(t.line) + ": stray ')'");
    ++pos;  // consume '('
    Sx node;
    node.line = t.line;
    while (pos < toks.size() && toks[pos].kind != Tok::rparen) node.items.push_back(parse_sx(toks, pos));
    if (pos >= toks.size()) throw ParseError("line " + std::to_string(t.line) + ": missing ')'");
    ++pos;  // consume ')'
    return node;
}

struct OpSig {
    Op op;
    int min_args;
    int max_args;  // -1 = variadic
};

const std::unordered_map<std::string, OpSig>& op_table() {
    static const std::unordered_map<std::string, OpSig> table = {
        {"add", {Op::add, 2, 2}},
        {"minus", {Op::minus, 2, 2}},
        {"multi", {Op::multi, 2, 2}},
        {"max", {Op::vmax, 2, 2}},
        {"min", {Op::vmin, 2, 2}},
        {"and", {Op::land, 2, 2}},
        {"or", {Op::lor, 2, 2}},
        {"not", {Op::lnot, 1, 1}},
        {"xor", {Op::lxor, 2, 2}},
        {"leq", {Op::leq, 2, 2}},
        {"geq", {Op::geq, 2, 2}},
        {"eq", {Op::eq, 2, 2}},
        {"lt", {Op::lt, 2, 2}},
        {"gt", {Op::gt, 2, 2}},
        {"seq_max", {Op::seq_max, 1, 1}},
        {"seq_min", {Op::seq_min, 1, 1}},
        {"seq_and", {Op::seq_and, 1, 1}},
        {"seq_or", {Op::seq_or, 1, 1}},
        {"seq_sum", {Op::seq_sum, 1, 1}},
        {"seq_avg", {Op::seq_avg, 1, 1}},
        {"seq_len", {Op::seq_len, 0, 0}},
        {"is_first", {Op::is_first, 0, 0}},
        {"inv_seq_len", {Op::inv_seq_len, 0, 0}},
        {"ite", {Op::ite, 3, 3}},
        {"relu", {Op::relu, 1, 1}},
        {"reglu", {Op::reglu, 2, 2}},
        {"aha", {Op::aha, 3, 3}},
        {"rha", {Op::rha, 3, 3}},
        {"rightmost_exact_match", {Op::rem, 3, 4}},
        {"bit_add", {Op::bit_add, 2, 2}},
        {"bit_minus", {Op::bit_minus, 2, 2}},
        {"shift_left", {Op::shift_left, 2, 2}},
        {"shift_right", {Op::shift_right, 2, 2}},
        {"idiv", {Op::idiv, 2, 2}},
        {"imod", {Op::imod, 2, 2}},
        {"iand", {Op::iand, 2, 2}},
        {"ixor", {Op::ixor, 2, 2}},
        {"ishl", {Op::ishl, 2, 2}},
        {"ishr", {Op::ishr, 2, 2}},
        {"wrap", {Op::wrap, 1, 1}},
        {"concat", {Op::concat, 1, -1}},
        {"instr_op", {Op::instr_op, 1, 1}},
        {"instr_r", {Op::instr_r, 1, 1}},
        {"instr_s", {Op::instr_s, 1, 1}},
        {"instr_imm", {Op::instr_imm, 1, 1}},
        {"instr_target", {Op::instr_tgt, 1, 1}},
        {"out_addr", {Op::out_addr, 0, 0}},
        {"halt_code", {Op::halt_code, 0, 0}},
        {"word_bits", {Op::word_bits, 0, 0}},
        {"val_bits", {Op::val_bits, 0, 0}},
        {"val_int", {Op::val_int, 0, 0}},
        {"is_sep", {Op::is_sep, 0, 0}},
        {"is_mask", {Op::is_mask, 0, 0}},
        {"is_num", {Op::is_num, 0, 0}},
    };
    return table;
}

struct Compiler {
    CompiledProgram prog;
    std::unordered_map<std::string, int> names;

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ParseError("line " + std::to_string(line) + ": " + msg);
    }

    int push(Slot s) {
        prog.slots.push_back(std::move(s));
        return static_cast<int>(prog.slots.size()) - 1;
    }

    int literal(Value v) {
        Slot s;
        s.op = Op::lit;
        s.dim = static_cast<int>(v.size());
        s.lit = std::move(v);
        return push(std::move(s));
    }

    static bool is_integer_atom(const std::string& a) {
        if (a.empty()) return false;
        std::size_t i = a[0] == '-' ? 1 : 0;
        if (i == a.size()) return false;
        for (; i < a.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(a[i]))) return false;
        return true;
    }

    int broadcast_dim(int line, int a, int b) {
        int da = prog.dim_of(a), db = prog.dim_of(b);
        if (da == db) return da;
        if (da == 1 || db == 1) return std::max(da, db);
        fail(line, "dimension mismatch: " + std::to_string(da) + " vs " + std::to_string(db));
    }

    int compile(const Sx& e) {
        if (e.is_atom) {
            const std::string& a = e.atom;
            if (is_integer_atom(a)) return literal(scalar(Rational(std::stoll(a))));
            if (a.rfind("#b", 0) == 0) {
                if (a.size() <= 2) fail(e.line, "empty bit literal");
                Value v;
                for (std::size_t i = a.size(); i > 2; --i) {
                    char c = a[i - 1];
                    if (c != '0' && c != '1') fail(e.line, "bad bit literal " + a);
                    v.push_back(Rational(c - '0'));
                }
                return literal(std::move(v));
            }
            if (a == "TE") {
                Slot s;
                s.op = Op::te;
                s.dim = prog.params.word_bits + 3;
                return push(std::move(s));
            }
            if (a == "PE") {
                Slot s;
                s.op = Op::pe;
                s.dim = 1;
                return push(std::move(s));
            }
            if (a == "PE_BITS") {
                Slot s;
                s.op = Op::pe_bits;
                s.dim = prog.params.word_bits;
                return push(std::move(s));
            }
            if (auto it = names.find(a); it != names.end()) return it->second;
            if (auto it = op_table().find(a); it != op_table().end() && it->second.min_args == 0) {
                Slot s;
                s.op = it->second.op;
                s.dim = it->second.op == Op::val_bits ? prog.params.word_bits : 1;
                return push(std::move(s));
            }
            fail(e.line, "unknown name '" + a + "'");
        }

        if (e.items.empty()) fail(e.line, "empty form");
        if (!e.items[0].is_atom) fail(e.line, "operator position must be a name");
        const std::string& head = e.items[0].atom;
        const auto args_begin = e.items.begin() + 1;
        const int nargs = static_cast<int>(e.items.size()) - 1;

        if (head == "op") {
            if (nargs != 1 || !e.items[1].is_atom) fail(e.line, "(op NAME) expects one name");
            return literal(scalar(Rational(opcode_const(e.items[1].atom))));
        }
        if (head == "is_pos") {
            if (nargs != 1 || !e.items[1].is_atom || !is_integer_atom(e.items[1].atom))
                fail(e.line, "(is_pos k) expects an integer");
            Slot s;
            s.op = Op::is_pos;
            s.p0 = std::stoll(e.items[1].atom);
            s.dim = 1;
            return push(std::move(s));
        }
        if (head == "slice") {
            if (nargs != 3 || !e.items[1].is_atom || !e.items[2].is_atom)
                fail(e.line, "(slice start len expr)");
            Slot s;
            s.op = Op::slice;
            s.p0 = std::stoll(e.items[1].atom);
            s.p1 = std::stoll(e.items[2].atom);
            int arg = compile(e.items[3]);
            if (s.p0 < 0 || s.p1 < 1 || s.p0 + s.p1 > prog.dim_of(arg))
                fail(e.line, "slice window out of range");
            s.args = {arg};
            s.dim = static_cast<int>(s.p1);
            return push(std::move(s));
        }
        if (head == "linear") {
            if (nargs != 2) fail(e.line, "(linear ((row)(row)...) expr)");
            const Sx& rows = e.items[1];
            if (rows.is_atom || rows.items.empty()) fail(e.line, "matrix must be a list of rows");
            Slot s;
            s.op = Op::linear;
            for (const Sx& row : rows.items) {
                if (row.is_atom) fail(e.line, "matrix row must be a list");
                std::vector<Rational> r;
                for (const Sx& cell : row.items) {
                    if (!cell.is_atom || !is_integer_atom(cell.atom))
                        fail(e.line, "matrix entries must be integers");
                    r.push_back(Rational(std::stoll(cell.atom)));
                }
                s.matrix.push_back(std::move(r));
            }
            int arg = compile(e.items[2]);
            for (const auto& row : s.matrix)
                if (static_cast<int>(row.size()) != prog.dim_of(arg))
                    fail(e.line, "matrix width does not match operand dimension");
            s.args = {arg};
            s.dim = static_cast<int>(s.matrix.size());
            return push(std::move(s));
        }

        auto it = op_table().find(head);
        if (it == op_table().end()) fail(e.line, "unknown operator '" + head + "'");
        const OpSig& sig = it->second;
        if (nargs < sig.min_args || (sig.max_args >= 0 && nargs > sig.max_args))
            fail(e.line, "operator '" + head + "' arity mismatch");

        Slot s;
        s.op = sig.op;
        for (auto a = args_begin; a != e.items.end(); ++a) s.args.push_back(compile(*a));

        switch (s.op) {
            case Op::add:
            case Op::minus:
            case Op::multi:
            case Op::vmax:
            case Op::vmin:
            case Op::land:
            case Op::lor:
            case Op::lxor:
            case Op::reglu:
                s.dim = broadcast_dim(e.line, s.args[0], s.args[1]);
                break;
            case Op::lnot:
            case Op::relu:
                s.dim = prog.dim_of(s.args[0]);
                break;
            case Op::leq:
            case Op::geq:
            case Op::eq:
            case Op::lt:
            case Op::gt:
            case Op::idiv:
            case Op::imod:
            case Op::iand:
            case Op::ixor:
            case Op::ishl:
            case Op::ishr:
                if (prog.dim_of(s.args[0]) != 1 || prog.dim_of(s.args[1]) != 1)
                    fail(e.line, head + " expects scalars");
                s.dim = 1;
                break;
            case Op::wrap:
                if (prog.dim_of(s.args[0]) != 1) fail(e.line, "wrap expects a scalar");
                s.dim = 1;
                break;
            case Op::seq_max:
            case Op::seq_min:
            case Op::seq_and:
            case Op::seq_or:
            case Op::seq_sum:
            case Op::seq_avg:
                s.dim = prog.dim_of(s.args[0]);
                break;
            case Op::ite:
                if (prog.dim_of(s.args[0]) != 1) fail(e.line, "ite condition must be scalar");
                s.dim = broadcast_dim(e.line, s.args[1], s.args[2]);
                break;
            case Op::aha:
            case Op::rha:
                if (prog.dim_of(s.args[0]) != prog.dim_of(s.args[1]))
                    fail(e.line, "query/key dimension mismatch");
                s.dim = prog.dim_of(s.args[2]);
                break;
            case Op::rem:
                if (prog.dim_of(s.args[0]) != prog.dim_of(s.args[1]))
                    fail(e.line, "query/key dimension mismatch");
                if (s.args.size() == 4 && prog.dim_of(s.args[2]) != prog.dim_of(s.args[3]))
                    fail(e.line, "default dimension must match value dimension");
                s.dim = prog.dim_of(s.args[2]);
                break;
            case Op::bit_add:
            case Op::bit_minus:
                if (prog.dim_of(s.args[0]) != prog.dim_of(s.args[1]))
                    fail(e.line, "bit vector width mismatch");
                s.dim = prog.dim_of(s.args[0]);
                break;
            case Op::shift_left:
            case Op::shift_right:
                if (prog.dim_of(s.args[1]) != prog.dim_of(s.args[0]) && prog.dim_of(s.args[1]) != 1)
                    fail(e.line, "shift amount must be scalar or match the vector width");
                s.dim = prog.dim_of(s.args[0]);
                break;
            case Op::concat: {
                int d = 0;
                for (int a2 : s.args) d += prog.dim_of(a2);
                s.dim = d;
                break;
            }
            case Op::instr_op:
            case Op::instr_r:
            case Op::instr_s:
            case Op::instr_imm:
            case Op::instr_tgt:
                if (prog.dim_of(s.args[0]) != 1) fail(e.line, "instruction accessors take an integer pc");
                s.dim = 1;
                break;
            case Op::seq_len:
            case Op::is_first:
            case Op::inv_seq_len:
            case Op::out_addr:
            case Op::halt_code:
            case Op::word_bits:
            case Op::val_int:
            case Op::is_sep:
            case Op::is_mask:
            case Op::is_num:
                s.dim = 1;
                break;
            case Op::val_bits:
                s.dim = prog.params.word_bits;
                break;
            default:
                fail(e.line, "internal: unhandled operator");
        }
        return push(std::move(s));
    }
};

}  // namespace

CompiledProgram parse_program(const std::string& text, const ProgramParams& params) {
    std::vector<Tok> toks = tokenize(text);
    std::size_t pos = 0;
    Compiler c;
    c.prog.params = params;
    bool saw_return = false;
    while (pos < toks.size()) {
        Sx form = parse_sx(toks, pos);
        if (form.is_atom) throw ParseError("top level expects (def ...) or (return ...) forms");
        if (form.items.empty() || !form.items[0].is_atom)
            throw ParseError("line " + std::to_string(form.line) + ": bad top-level form");
        const std::string& head = form.items[0].atom;
        if (head == "def") {
            if (form.items.size() != 3 || !form.items[1].is_atom)
                c.fail(form.line, "(def name expr)");
            if (saw_return) c.fail(form.line, "definitions must precede return");
            const std::string& name = form.items[1].atom;
            if (c.names.count(name)) c.fail(form.line, "duplicate def '" + name + "'");
            int slot = c.compile(form.items[2]);
            c.prog.slots[static_cast<std::size_t>(slot)].name = name;
            c.names[name] = slot;
        } else if (head == "return") {
            if (form.items.size() != 2) c.fail(form.line, "(return expr)");
            if (saw_return) c.fail(form.line, "multiple return forms");
            c.prog.ret = c.compile(form.items[1]);
            saw_return = true;
        } else {
            c.fail(form.line, "top level expects def or return, got '" + head + "'");
        }
    }
    if (!saw_return) throw ParseError("program needs exactly one (return expr)");
    return c.prog;
}

CompiledProgram parse_program_file(const std::string& path, const ProgramParams& params) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open program file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_program(ss.str(), params);
}

}  // namespace apgen::efasp
