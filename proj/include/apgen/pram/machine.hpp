#pragma once

#include <optional>

#include "apgen/pram/isa.hpp"

namespace apgen::pram {

constexpr int kHaltPc = -1;

enum class TrapKind { none, write_conflict, bad_address, bad_pc };

struct Trap {
    TrapKind kind = TrapKind::none;
    std::uint64_t round = 0;
    std::vector<int> pids;      // offending processors
    std::uint64_t address = 0;  // conflicting / out-of-range address
};

struct RunMetrics {
    std::uint64_t rounds = 0;  // parallel time (span of the executed schedule)
    std::uint64_t work = 0;    // total executed instructions
    bool terminated = false;
    std::optional<Trap> trap;
};

// Synchronous CREW machine: per-processor pc and registers, shared
// zero-initialized memory.  All reads in a round observe the round-start
// memory; register writebacks, then memory commits, then pc updates happen
// at the end-of-round barrier.  Two writes to one address in a round trap.
class Machine {
public:
    // Register file size is k+1 words; R0 is preloaded with the pid and R1
    // with the processor count when preload_count is set.
    Machine(const Program& prog, int register_count = 6, bool preload_count = false);

    // Executes one synchronous round.  Returns the trap if one fired.
    // `parallel` evaluates processors with OpenMP; results are identical to
    // the serial per-pid order by construction.
    std::optional<Trap> step_round(bool parallel = false);

    RunMetrics run(std::uint64_t max_rounds, bool parallel = false);

    bool all_halted() const;
    Word word_mask() const { return mask_; }
    int word_bits() const { return word_bits_; }
    int procs() const { return procs_; }

    Word load(std::uint64_t addr) const { return mem_.at(addr); }
    void store(std::uint64_t addr, Word v) { mem_.at(addr) = v & mask_; }
    Word output() const { return mem_.at(out_addr_); }
    std::uint64_t out_addr() const { return out_addr_; }
    std::uint64_t memsize() const { return mem_.size(); }

    int pc(int pid) const { return pcs_.at(static_cast<std::size_t>(pid)); }
    Word reg(int pid, int r) const {
        return regs_.at(static_cast<std::size_t>(pid)).at(static_cast<std::size_t>(r));
    }
    const std::vector<Word>& memory() const { return mem_; }
    std::uint64_t round() const { return round_; }

    const Program& program() const { return prog_; }

private:
    struct Effect {
        bool executed = false;
        bool has_store = false;
        std::uint64_t store_addr = 0;
        Word store_val = 0;
        bool has_reg = false;
        int reg_idx = 0;
        Word reg_val = 0;
        int next_pc = kHaltPc;
        TrapKind trap = TrapKind::none;
        std::uint64_t trap_addr = 0;
    };
    Effect exec_one(int pid) const;

    Program prog_;
    int word_bits_;
    Word mask_;
    int procs_;
    std::uint64_t out_addr_;
    std::vector<int> pcs_;
    std::vector<std::vector<Word>> regs_;
    std::vector<Word> mem_;
    std::uint64_t round_ = 0;
    std::uint64_t work_ = 0;
};

// Direct sequential word-RAM interpreter (single processor, immediate
// commits).  Kept separate from Machine as the reference implementation the
// P=1 machine is checked against, instruction for instruction.
struct SeqStep {
    int pc = 0;
    std::vector<Word> regs_after;
};

struct SeqResult {
    std::vector<Word> memory;
    std::vector<SeqStep> steps;
    bool halted = false;
    std::optional<Trap> trap;
    Word output = 0;
};

SeqResult run_sequential(const Program& prog, std::uint64_t max_steps, int register_count = 6,
                         bool preload_count = false);

}  // namespace apgen::pram
