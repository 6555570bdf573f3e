#include "apgen/pram/machine.hpp"

#include <algorithm>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace apgen::pram {

Machine::Machine(const Program& prog, int register_count, bool preload_count)
    : prog_(prog),
      word_bits_(prog.word_bits),
      mask_(prog.word_bits >= 64 ? ~Word{0} : ((Word{1} << prog.word_bits) - 1)),
      procs_(prog.procs),
      out_addr_(prog.out_addr) {
    if (register_count <= prog.max_register())
        throw ContractError("program uses registers beyond the register file");

    // Transdichotomous condition: addresses and pids must fit in a word.
    auto bits_needed = [](std::uint64_t v) {
        int b = 0;
        while ((std::uint64_t{1} << b) < v) ++b;
        return b;
    };
    if (word_bits_ < bits_needed(prog.memsize) || word_bits_ < bits_needed(static_cast<std::uint64_t>(procs_)))
        throw ContractError("word size too small for the address space or processor count");

    pcs_.assign(static_cast<std::size_t>(procs_), 0);
    regs_.assign(static_cast<std::size_t>(procs_),
                 std::vector<Word>(static_cast<std::size_t>(register_count), 0));
    for (int i = 0; i < procs_; ++i) {
        regs_[static_cast<std::size_t>(i)][0] = static_cast<Word>(i) & mask_;
        if (preload_count && register_count > 1)
            regs_[static_cast<std::size_t>(i)][1] = static_cast<Word>(procs_) & mask_;
    }
    mem_.assign(prog.memsize, 0);
    for (const auto& [addr, val] : prog.init_mem) {
        if (addr >= mem_.size()) throw ContractError(".mem address out of range");
        mem_[addr] = val & mask_;
    }
}

Machine::Effect Machine::exec_one(int pid) const {
    Effect e;
    const int pc = pcs_[static_cast<std::size_t>(pid)];
    if (pc == kHaltPc) return e;
    e.executed = true;
    if (pc < 0 || pc >= static_cast<int>(prog_.code.size())) {
        e.trap = TrapKind::bad_pc;
        return e;
    }
    const Instruction& ins = prog_.code[static_cast<std::size_t>(pc)];
    const std::vector<Word>& R = regs_[static_cast<std::size_t>(pid)];
    e.next_pc = pc + 1;
    switch (ins.op) {
        case Opcode::LOAD: {
            std::uint64_t a = R[static_cast<std::size_t>(ins.s)];
            if (a >= mem_.size()) {
                e.trap = TrapKind::bad_address;
                e.trap_addr = a;
                return e;
            }
            e.has_reg = true;
            e.reg_idx = ins.r;
            e.reg_val = mem_[a];
            break;
        }
        case Opcode::STORE: {
            std::uint64_t a = R[static_cast<std::size_t>(ins.s)];
            if (a >= mem_.size()) {
                e.trap = TrapKind::bad_address;
                e.trap_addr = a;
                return e;
            }
            e.has_store = true;
            e.store_addr = a;
            e.store_val = R[static_cast<std::size_t>(ins.r)];
            break;
        }
        case Opcode::LOADI:
            e.has_reg = true;
            e.reg_idx = ins.r;
            e.reg_val = static_cast<Word>(static_cast<std::int64_t>(ins.imm)) & mask_;
            break;
        case Opcode::ADD:
        case Opcode::SUB: {
            Word a = R[static_cast<std::size_t>(ins.r)];
            Word b = R[static_cast<std::size_t>(ins.s)];
            e.has_reg = true;
            e.reg_idx = ins.r;
            e.reg_val = (ins.op == Opcode::ADD ? a + b : a - b) & mask_;
            break;
        }
        case Opcode::AND:
        case Opcode::XOR: {
            Word a = R[static_cast<std::size_t>(ins.r)];
            Word b = R[static_cast<std::size_t>(ins.s)];
            e.has_reg = true;
            e.reg_idx = ins.r;
            e.reg_val = (ins.op == Opcode::AND ? (a & b) : (a ^ b)) & mask_;
            break;
        }
        case Opcode::SHL:
        case Opcode::SHR: {
            Word a = R[static_cast<std::size_t>(ins.r)];
            Word h = R[static_cast<std::size_t>(ins.s)] % static_cast<Word>(word_bits_);
            e.has_reg = true;
            e.reg_idx = ins.r;
            e.reg_val = (ins.op == Opcode::SHL ? (a << h) : (a >> h)) & mask_;
            break;
        }
        case Opcode::BRZ:
            if (R[static_cast<std::size_t>(ins.r)] == 0) e.next_pc = ins.target;
            break;
        case Opcode::JMP:
            e.next_pc = ins.target;
            break;
        case Opcode::HALT:
            e.next_pc = kHaltPc;
            break;
    }
    return e;
}

std::optional<Trap> Machine::step_round(bool parallel) {
    if (all_halted()) return std::nullopt;
    std::vector<Effect> effects(static_cast<std::size_t>(procs_));

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int pid = 0; pid < procs_; ++pid)
            effects[static_cast<std::size_t>(pid)] = exec_one(pid);
    } else {
        for (int pid = 0; pid < procs_; ++pid)
            effects[static_cast<std::size_t>(pid)] = exec_one(pid);
    }

    // Commit phase, order-independent: collect traps and write conflicts
    // before touching any state.  A trapped round commits nothing and is not
    // counted in time or work.
    Trap trap;
    std::unordered_map<std::uint64_t, std::vector<int>> writers;
    for (int pid = 0; pid < procs_; ++pid) {
        const Effect& e = effects[static_cast<std::size_t>(pid)];
        if (!e.executed) continue;
        if (e.trap != TrapKind::none && trap.kind == TrapKind::none) {
            trap.kind = e.trap;
            trap.round = round_;
            trap.address = e.trap_addr;
        }
        if (e.trap != TrapKind::none) trap.pids.push_back(pid);
        if (e.has_store) writers[e.store_addr].push_back(pid);
    }
    if (trap.kind != TrapKind::none) return trap;
    std::optional<Trap> conflict;
    for (auto& [addr, pids] : writers) {
        if (pids.size() > 1 && (!conflict || addr < conflict->address)) {
            std::sort(pids.begin(), pids.end());
            conflict = Trap{TrapKind::write_conflict, round_, pids, addr};
        }
    }
    if (conflict) return conflict;
    for (int pid = 0; pid < procs_; ++pid)
        if (effects[static_cast<std::size_t>(pid)].executed) ++work_;

    // Register writebacks, then memory commits, then pc updates.
    for (int pid = 0; pid < procs_; ++pid) {
        const Effect& e = effects[static_cast<std::size_t>(pid)];
        if (!e.executed) continue;
        if (e.has_reg)
            regs_[static_cast<std::size_t>(pid)][static_cast<std::size_t>(e.reg_idx)] =
                e.reg_val & mask_;
    }
    for (int pid = 0; pid < procs_; ++pid) {
        const Effect& e = effects[static_cast<std::size_t>(pid)];
        if (e.executed && e.has_store) mem_[e.store_addr] = e.store_val & mask_;
    }
    for (int pid = 0; pid < procs_; ++pid) {
        const Effect& e = effects[static_cast<std::size_t>(pid)];
        if (e.executed) pcs_[static_cast<std::size_t>(pid)] = e.next_pc;
    }
    ++round_;
    return std::nullopt;
}

bool Machine::all_halted() const {
    return std::all_of(pcs_.begin(), pcs_.end(), [](int pc) { return pc == kHaltPc; });
}

RunMetrics Machine::run(std::uint64_t max_rounds, bool parallel) {
    if (max_rounds == 0) throw ContractError("run requires max_rounds > 0");
    RunMetrics m;
    for (std::uint64_t r = 0; r < max_rounds && !all_halted(); ++r) {
        auto trap = step_round(parallel);
        if (trap) {
            m.trap = trap;
            break;
        }
    }
    m.rounds = round_;
    m.work = work_;
    m.terminated = all_halted();
    return m;
}

SeqResult run_sequential(const Program& prog, std::uint64_t max_steps, int register_count,
                         bool preload_count) {
    SeqResult res;
    const Word mask =
        prog.word_bits >= 64 ? ~Word{0} : ((Word{1} << prog.word_bits) - 1);
    std::vector<Word> R(static_cast<std::size_t>(register_count), 0);
    if (preload_count && register_count > 1) R[1] = 1;
    res.memory.assign(prog.memsize, 0);
    for (const auto& [addr, val] : prog.init_mem) res.memory.at(addr) = val & mask;

    int pc = 0;
    for (std::uint64_t n = 0; n < max_steps; ++n) {
        if (pc == kHaltPc) {
            res.halted = true;
            break;
        }
        if (pc < 0 || pc >= static_cast<int>(prog.code.size())) {
            res.trap = Trap{TrapKind::bad_pc, n, {0}, 0};
            break;
        }
        const Instruction& ins = prog.code[static_cast<std::size_t>(pc)];
        int next = pc + 1;
        bool trapped = false;
        switch (ins.op) {
            case Opcode::LOAD: {
                std::uint64_t a = R[static_cast<std::size_t>(ins.s)];
                if (a >= res.memory.size()) {
                    res.trap = Trap{TrapKind::bad_address, n, {0}, a};
                    trapped = true;
                    break;
                }
                R[static_cast<std::size_t>(ins.r)] = res.memory[a];
                break;
            }
            case Opcode::STORE: {
                std::uint64_t a = R[static_cast<std::size_t>(ins.s)];
                if (a >= res.memory.size()) {
                    res.trap = Trap{TrapKind::bad_address, n, {0}, a};
                    trapped = true;
                    break;
                }
                res.memory[a] = R[static_cast<std::size_t>(ins.r)] & mask;
                break;
            }
            case Opcode::LOADI:
                R[static_cast<std::size_t>(ins.r)] =
                    static_cast<Word>(static_cast<std::int64_t>(ins.imm)) & mask;
                break;
            case Opcode::ADD:
                R[static_cast<std::size_t>(ins.r)] =
                    (R[static_cast<std::size_t>(ins.r)] + R[static_cast<std::size_t>(ins.s)]) & mask;
                break;
            case Opcode::SUB:
                R[static_cast<std::size_t>(ins.r)] =
                    (R[static_cast<std::size_t>(ins.r)] - R[static_cast<std::size_t>(ins.s)]) & mask;
                break;
            case Opcode::AND:
                R[static_cast<std::size_t>(ins.r)] &= R[static_cast<std::size_t>(ins.s)];
                break;
            case Opcode::XOR:
                R[static_cast<std::size_t>(ins.r)] ^= R[static_cast<std::size_t>(ins.s)];
                break;
            case Opcode::SHL: {
                Word h = R[static_cast<std::size_t>(ins.s)] % static_cast<Word>(prog.word_bits);
                R[static_cast<std::size_t>(ins.r)] = (R[static_cast<std::size_t>(ins.r)] << h) & mask;
                break;
            }
            case Opcode::SHR: {
                Word h = R[static_cast<std::size_t>(ins.s)] % static_cast<Word>(prog.word_bits);
                R[static_cast<std::size_t>(ins.r)] >>= h;
                break;
            }
            case Opcode::BRZ:
                if (R[static_cast<std::size_t>(ins.r)] == 0) next = ins.target;
                break;
            case Opcode::JMP:
                next = ins.target;
                break;
            case Opcode::HALT:
                next = kHaltPc;
                break;
        }
        if (trapped) break;
        res.steps.push_back(SeqStep{pc, R});
        pc = next;
    }
    if (pc == kHaltPc) res.halted = true;
    if (prog.out_addr < res.memory.size()) res.output = res.memory[prog.out_addr];
    return res;
}

}  // namespace apgen::pram
