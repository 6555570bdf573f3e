#pragma once

#include "apgen/efasp/ast.hpp"

namespace apgen::efasp {

// Parenthesized prefix notation.  Atoms are integers, bit-vector literals
// #b0101 (standard MSB-first numeral, stored LSB-first), TE, PE, operator
// names and def names.  Special forms:
//   (def name expr)          bind a reusable subexpression
//   (return expr)            the program result (exactly one)
//   (linear ((r11 r12) ...) e)  explicit-matrix projection
//   (slice start len e)      lane window
//   (is_pos k)               position indicator
//   (op LOAD)                instruction opcode constant
// Dimension checking happens here; errors carry the source line.
CompiledProgram parse_program(const std::string& text, const ProgramParams& params);

CompiledProgram parse_program_file(const std::string& path, const ProgramParams& params);

}  // namespace apgen::efasp
