#pragma once

#include <string>
#include <vector>

#include "apgen/efasp/value.hpp"

namespace apgen::efasp {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Slot operations.  The first group mirrors the primitive operators
// (embeddings, projection, activation, attention); the rest is the derived
// operator library plus the context accessors the simulation programs need.
enum class Op {
    lit,
    te,
    pe,
    pe_bits,
    val_bits,
    val_int,
    is_sep,
    is_mask,
    is_num,
    add,
    minus,
    multi,
    vmax,
    vmin,
    land,
    lor,
    lnot,
    lxor,
    leq,
    geq,
    eq,
    lt,
    gt,
    seq_max,
    seq_min,
    seq_and,
    seq_or,
    seq_sum,
    seq_avg,
    seq_len,
    is_first,
    is_pos,
    inv_seq_len,
    ite,
    relu,
    reglu,
    aha,
    rha,
    rem,  // rightmost_exact_match
    bit_add,
    bit_minus,
    shift_left,
    shift_right,
    idiv,
    imod,
    iand,
    ixor,
    ishl,
    ishr,
    wrap,  // reduce an integer scalar mod 2^w
    concat,
    linear,
    slice,
    instr_op,
    instr_r,
    instr_s,
    instr_imm,
    instr_tgt,
    out_addr,
    halt_code,
    word_bits,
};

struct Slot {
    Op op = Op::lit;
    std::vector<int> args;   // operand slot indices
    Value lit;               // Op::lit payload
    long long p0 = 0;        // is_pos k / slice start
    long long p1 = 0;        // slice length
    std::vector<std::vector<Rational>> matrix;  // Op::linear rows
    int dim = 1;
    std::string name;        // def name when this slot heads a definition
};

struct ProgramParams {
    int word_bits = 8;
};

// Flattened program: slots in dependency order, one return slot.
struct CompiledProgram {
    std::vector<Slot> slots;
    int ret = -1;
    ProgramParams params;

    int dim_of(int slot) const { return slots[static_cast<std::size_t>(slot)].dim; }
    int out_dim() const { return dim_of(ret); }
};

// Opcode ids used by the (op NAME) literal and the instr_* accessors.
int opcode_const(const std::string& name);

}  // namespace apgen::efasp
