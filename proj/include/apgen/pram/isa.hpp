#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "apgen/vocab.hpp"

namespace apgen::pram {

using Word = std::uint64_t;

enum class Opcode : std::uint8_t {
    LOAD,   // LOAD r,[s]
    STORE,  // STORE [s],r
    LOADI,  // LOADI r,c
    ADD,
    SUB,
    AND,
    XOR,
    SHL,
    SHR,
    BRZ,  // BRZ r,L
    JMP,  // JMP L
    HALT,
};

const char* opcode_name(Opcode op);

// Immediates come from a fixed finite set, independent of word size.
constexpr int kImmMin = -15;
constexpr int kImmMax = 15;

struct Instruction {
    Opcode op = Opcode::HALT;
    int r = 0;        // destination / tested register
    int s = 0;        // source register
    int imm = 0;      // LOADI constant, in [kImmMin, kImmMax]
    int target = -1;  // resolved jump target index (BRZ/JMP)

    bool reads_reg_s() const {
        switch (op) {
            case Opcode::LOAD:
            case Opcode::STORE:
            case Opcode::ADD:
            case Opcode::SUB:
            case Opcode::AND:
            case Opcode::XOR:
            case Opcode::SHL:
            case Opcode::SHR: return true;
            default: return false;
        }
    }
};

struct AssemblyError : std::runtime_error {
    int line;
    AssemblyError(int line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// Assembled program plus the machine directives found in the source.
struct Program {
    std::vector<Instruction> code;
    std::unordered_map<std::string, int> labels;

    // Directives (defaults used when the source does not override them).
    int procs = 1;                 // .procs P
    std::uint64_t memsize = 256;   // .memsize S
    int word_bits = 8;             // .word w
    std::uint64_t out_addr = 0;    // .out addr
    std::vector<std::pair<std::uint64_t, Word>> init_mem;  // .mem addr value

    int max_register() const {
        int m = 0;
        for (const auto& ins : code) {
            m = std::max(m, ins.r);
            if (ins.reads_reg_s()) m = std::max(m, ins.s);
        }
        return m;
    }
};

// Parses assembly text: one instruction per line, `label:` prefixes, `;`
// comments, registers R0..Rk, case-insensitive opcodes, directives
// .procs/.memsize/.word/.mem/.out.  Throws AssemblyError naming the line on
// duplicate labels, undeclared jump targets, unknown opcodes or registers
// out of range.
Program assemble(const std::string& text, int register_count = 6);

}  // namespace apgen::pram
