#pragma once

#include <string>
#include <vector>

#include "apgen/pram/isa.hpp"

namespace apgen::pram {

// Assembly sources for the verification suite.  All programs stay within
// registers R0..R2 so they run under both machine-trace block widths.

// Emits `ADD r,r` k times (multiply by 2^k without immediates).
inline std::string doubled(const std::string& reg, int times) {
    std::string out;
    for (int i = 0; i < times; ++i) out += "  ADD " + reg + ", " + reg + "\n";
    return out;
}

// Every processor copies M[0] into M[1+pid]; output is the last copy.
inline std::string broadcast_source(int procs, Word value, int word_bits = 8) {
    std::string s;
    s += ".procs " + std::to_string(procs) + "\n";
    s += ".memsize 64\n.word " + std::to_string(word_bits) + "\n";
    s += ".mem 0 " + std::to_string(value) + "\n";
    s += ".out " + std::to_string(procs) + "\n";
    s += "  LOADI R1, 0\n  LOAD R2, [R1]\n  LOADI R1, 1\n  ADD R1, R0\n  STORE [R1], R2\n  HALT\n";
    return s;
}

// Binary-tree reduction over n = 2^h leaves at addresses 0..n-1 with
// P = n/2 processors.  Per-processor cursor A = pid*2^(r+1) at 128+pid and
// stride S = 2^r at 144+pid; both advance by doubling, the loop exits when
// S reaches n.  Out-of-range processors add zeros in the scratch-free zone
// above the data, which never collides with the cursors for n <= 16.
inline std::string treesum_source(const std::vector<Word>& values, int word_bits = 8) {
    const int n = static_cast<int>(values.size());
    if (n < 2 || (n & (n - 1)) != 0 || n > 16)
        throw ContractError("treesum wants a power-of-two leaf count in [2,16]");
    std::string s;
    s += ".procs " + std::to_string(n / 2) + "\n";
    s += ".memsize 256\n.word " + std::to_string(word_bits) + "\n";
    for (int i = 0; i < n; ++i)
        s += ".mem " + std::to_string(i) + " " + std::to_string(values[static_cast<std::size_t>(i)]) +
             "\n";
    s += ".out 0\n";
    auto amp128 = "  LOADI R1, 8\n" + doubled("R1", 4) + "  ADD R1, R0\n";   // &A
    auto amp144 = "  LOADI R1, 9\n" + doubled("R1", 4) + "  ADD R1, R0\n";   // &S
    s += "  LOADI R2, 0\n  ADD R2, R0\n  ADD R2, R2\n";  // 2*pid
    s += amp128 + "  STORE [R1], R2\n";
    s += "  LOADI R2, 1\n" + amp144 + "  STORE [R1], R2\n";
    s += "loop:\n";
    s += amp144 + "  LOAD R1, [R1]\n";  // s
    if (n <= 15)
        s += "  LOADI R2, " + std::to_string(n) + "\n";
    else
        s += "  LOADI R2, 1\n" + doubled("R2", 4);  // 16
    s += "  SUB R2, R1\n  BRZ R2, done\n";
    // a2 = A + s, then v2, v1, the sum, and the writeback to a1 = A.
    s += "  LOADI R2, 8\n" + doubled("R2", 4) + "  ADD R2, R0\n  LOAD R2, [R2]\n";  // a1
    s += "  ADD R1, R2\n  LOAD R1, [R1]\n";                                         // v2
    s += "  LOAD R2, [R2]\n  ADD R2, R1\n";                                         // v1+v2
    s += amp128 + "  LOAD R1, [R1]\n  STORE [R1], R2\n";
    // A *= 2 ; S *= 2
    s += amp128 + "  LOAD R2, [R1]\n  ADD R2, R2\n  STORE [R1], R2\n";
    s += amp144 + "  LOAD R2, [R1]\n  ADD R2, R2\n  STORE [R1], R2\n";
    s += "  JMP loop\ndone:\n  HALT\n";
    return s;
}

// Doubling-stride prefix maximum with one processor per element at
// addresses 16..16+n-1 (n <= 8); values must stay below 2^(w-1) so the
// subtraction sign test is valid.  Output is the running maximum of the
// whole array.
inline std::string prefixmax_source(const std::vector<Word>& values, int word_bits = 8) {
    const int n = static_cast<int>(values.size());
    if (n < 2 || n > 8) throw ContractError("prefixmax wants 2..8 elements");
    const int base = 16;
    std::string s;
    s += ".procs " + std::to_string(n) + "\n";
    s += ".memsize 128\n.word " + std::to_string(word_bits) + "\n";
    for (int i = 0; i < n; ++i)
        s += ".mem " + std::to_string(base + i) + " " +
             std::to_string(values[static_cast<std::size_t>(i)]) + "\n";
    s += ".out " + std::to_string(base + n - 1) + "\n";
    int rounds = 0;
    while ((1 << rounds) < n) ++rounds;
    for (int r = 0; r < rounds; ++r) {
        int sstride = 1 << r;
        std::string tag = std::to_string(r);
        // b = M[base+pid-s]; a = M[base+pid]; store b when b >= a.
        s += "  LOADI R1, " + std::to_string(base - sstride) + "\n  ADD R1, R0\n  LOAD R2, [R1]\n";
        s += "  LOADI R1, 1\n" + doubled("R1", 4) + "  ADD R1, R0\n  LOAD R1, [R1]\n";
        s += "  SUB R2, R1\n";
        s += "  LOADI R1, " + std::to_string(word_bits - 1) + "\n  SHR R2, R1\n";
        s += "  BRZ R2, st" + tag + "\n  JMP en" + tag + "\n";
        s += "st" + tag + ":\n";
        s += "  LOADI R1, " + std::to_string(base - sstride) + "\n  ADD R1, R0\n  LOAD R2, [R1]\n";
        s += "  LOADI R1, 1\n" + doubled("R1", 4) + "  ADD R1, R0\n  STORE [R1], R2\n";
        s += "en" + tag + ":\n";
    }
    s += "  HALT\n";
    return s;
}

// Single-processor countdown: acc += k for k = K..1, output acc.  Rounds
// scale linearly in K while the memory footprint stays fixed.
inline std::string counter_source(Word k, int word_bits = 12) {
    std::string s;
    s += ".procs 1\n.memsize 64\n.word " + std::to_string(word_bits) + "\n";
    s += ".mem 0 " + std::to_string(k) + "\n.out 1\n";
    s += "loop:\n";
    s += "  LOADI R1, 0\n  LOAD R1, [R1]\n  BRZ R1, done\n";
    s += "  LOADI R2, 1\n  LOAD R2, [R2]\n  ADD R2, R1\n  LOADI R1, 1\n  STORE [R1], R2\n";
    s += "  LOADI R1, 0\n  LOAD R1, [R1]\n  LOADI R2, 1\n  SUB R1, R2\n  LOADI R2, 0\n  STORE [R2], R1\n";
    s += "  JMP loop\ndone:\n  HALT\n";
    return s;
}

}  // namespace apgen::pram
