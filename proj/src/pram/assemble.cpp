#include "apgen/pram/isa.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace apgen::pram {

const char* opcode_name(Opcode op) {
    switch (op) {
        case Opcode::LOAD: return "LOAD";
        case Opcode::STORE: return "STORE";
        case Opcode::LOADI: return "LOADI";
        case Opcode::ADD: return "ADD";
        case Opcode::SUB: return "SUB";
        case Opcode::AND: return "AND";
        case Opcode::XOR: return "XOR";
        case Opcode::SHL: return "SHL";
        case Opcode::SHR: return "SHR";
        case Opcode::BRZ: return "BRZ";
        case Opcode::JMP: return "JMP";
        case Opcode::HALT: return "HALT";
    }
    return "?";
}

namespace {

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Splits "OP a, b" into opcode and comma-separated operand fields.
struct RawLine {
    std::string op;
    std::vector<std::string> args;
};

RawLine split_line(const std::string& body) {
    RawLine out;
    std::size_t sp = body.find_first_of(" \t");
    out.op = upper(strip(body.substr(0, sp)));
    if (sp != std::string::npos) {
        std::string rest = body.substr(sp + 1);
        std::stringstream ss(rest);
        std::string field;
        while (std::getline(ss, field, ',')) out.args.push_back(strip(field));
    }
    return out;
}

int parse_reg(const std::string& tok, int line, int register_count, bool bracket) {
    std::string t = strip(tok);
    if (bracket) {
        if (t.size() < 3 || t.front() != '[' || t.back() != ']')
            throw AssemblyError(line, "expected bracketed register, got '" + tok + "'");
        t = strip(t.substr(1, t.size() - 2));
    }
    std::string u = upper(t);
    if (u.size() < 2 || u[0] != 'R')
        throw AssemblyError(line, "expected register, got '" + tok + "'");
    int idx = 0;
    try {
        idx = std::stoi(u.substr(1));
    } catch (...) {
        throw AssemblyError(line, "bad register '" + tok + "'");
    }
    if (idx < 0 || idx >= register_count)
        throw AssemblyError(line, "register out of range: " + tok);
    return idx;
}

long long parse_int(const std::string& tok, int line) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(strip(tok), &pos, 0);
        if (pos != strip(tok).size()) throw std::invalid_argument("trailing");
        return v;
    } catch (...) {
        throw AssemblyError(line, "bad integer '" + tok + "'");
    }
}

void expect_args(const RawLine& rl, std::size_t n, int line) {
    if (rl.args.size() != n)
        throw AssemblyError(line, rl.op + " expects " + std::to_string(n) + " operands");
}

}  // namespace

Program assemble(const std::string& text, int register_count) {
    Program prog;
    struct Pending {
        std::size_t instr;
        std::string label;
        int line;
    };
    std::vector<Pending> fixups;

    std::stringstream ss(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        std::string body = raw;
        if (std::size_t semi = body.find(';'); semi != std::string::npos) body = body.substr(0, semi);
        body = strip(body);
        if (body.empty()) continue;

        // Label prefixes; several labels may stack on one line.
        while (true) {
            std::size_t colon = body.find(':');
            if (colon == std::string::npos) break;
            std::string head = strip(body.substr(0, colon));
            if (head.find_first_of(" \t[") != std::string::npos) break;  // colon not a label
            if (head.empty()) throw AssemblyError(line_no, "empty label");
            std::string key = upper(head);
            if (prog.labels.count(key))
                throw AssemblyError(line_no, "duplicate label '" + head + "'");
            prog.labels[key] = static_cast<int>(prog.code.size());
            body = strip(body.substr(colon + 1));
            if (body.empty()) break;
        }
        if (body.empty()) continue;

        RawLine rl = split_line(body);

        if (rl.op[0] == '.') {
            // Directive operands are whitespace-separated.
            std::vector<std::string> flat;
            for (const std::string& a : rl.args) {
                std::stringstream fs(a);
                std::string w;
                while (fs >> w) flat.push_back(w);
            }
            rl.args = std::move(flat);
            if (rl.op == ".PROCS") {
                expect_args(rl, 1, line_no);
                prog.procs = static_cast<int>(parse_int(rl.args[0], line_no));
                if (prog.procs < 1) throw AssemblyError(line_no, ".procs must be >= 1");
            } else if (rl.op == ".MEMSIZE") {
                expect_args(rl, 1, line_no);
                prog.memsize = static_cast<std::uint64_t>(parse_int(rl.args[0], line_no));
            } else if (rl.op == ".WORD") {
                expect_args(rl, 1, line_no);
                prog.word_bits = static_cast<int>(parse_int(rl.args[0], line_no));
                if (prog.word_bits < 1 || prog.word_bits > 32)
                    throw AssemblyError(line_no, ".word must be in [1,32]");
            } else if (rl.op == ".MEM") {
                expect_args(rl, 2, line_no);
                prog.init_mem.emplace_back(
                    static_cast<std::uint64_t>(parse_int(rl.args[0], line_no)),
                    static_cast<Word>(parse_int(rl.args[1], line_no)));
            } else if (rl.op == ".OUT") {
                expect_args(rl, 1, line_no);
                prog.out_addr = static_cast<std::uint64_t>(parse_int(rl.args[0], line_no));
            } else {
                throw AssemblyError(line_no, "unknown directive '" + rl.op + "'");
            }
            continue;
        }

        Instruction ins;
        if (rl.op == "LOAD") {
            expect_args(rl, 2, line_no);
            ins.op = Opcode::LOAD;
            ins.r = parse_reg(rl.args[0], line_no, register_count, false);
            ins.s = parse_reg(rl.args[1], line_no, register_count, true);
        } else if (rl.op == "STORE") {
            expect_args(rl, 2, line_no);
            ins.op = Opcode::STORE;
            ins.s = parse_reg(rl.args[0], line_no, register_count, true);
            ins.r = parse_reg(rl.args[1], line_no, register_count, false);
        } else if (rl.op == "LOADI") {
            expect_args(rl, 2, line_no);
            ins.op = Opcode::LOADI;
            ins.r = parse_reg(rl.args[0], line_no, register_count, false);
            long long c = parse_int(rl.args[1], line_no);
            if (c < kImmMin || c > kImmMax)
                throw AssemblyError(line_no, "immediate out of range [-15,15]: " + rl.args[1]);
            ins.imm = static_cast<int>(c);
        } else if (rl.op == "ADD" || rl.op == "SUB" || rl.op == "AND" || rl.op == "XOR" ||
                   rl.op == "SHL" || rl.op == "SHR") {
            expect_args(rl, 2, line_no);
            ins.op = rl.op == "ADD"   ? Opcode::ADD
                     : rl.op == "SUB" ? Opcode::SUB
                     : rl.op == "AND" ? Opcode::AND
                     : rl.op == "XOR" ? Opcode::XOR
                     : rl.op == "SHL" ? Opcode::SHL
                                      : Opcode::SHR;
            ins.r = parse_reg(rl.args[0], line_no, register_count, false);
            ins.s = parse_reg(rl.args[1], line_no, register_count, false);
        } else if (rl.op == "BRZ") {
            expect_args(rl, 2, line_no);
            ins.op = Opcode::BRZ;
            ins.r = parse_reg(rl.args[0], line_no, register_count, false);
            fixups.push_back({prog.code.size(), upper(rl.args[1]), line_no});
        } else if (rl.op == "JMP") {
            expect_args(rl, 1, line_no);
            ins.op = Opcode::JMP;
            fixups.push_back({prog.code.size(), upper(rl.args[0]), line_no});
        } else if (rl.op == "HALT") {
            expect_args(rl, 0, line_no);
            ins.op = Opcode::HALT;
        } else {
            throw AssemblyError(line_no, "unknown opcode '" + rl.op + "'");
        }
        prog.code.push_back(ins);
    }

    for (const Pending& p : fixups) {
        auto it = prog.labels.find(p.label);
        if (it == prog.labels.end())
            throw AssemblyError(p.line, "undeclared label '" + p.label + "'");
        prog.code[p.instr].target = it->second;
    }
    if (prog.code.empty()) throw AssemblyError(line_no, "empty program");
    return prog;
}

}  // namespace apgen::pram
