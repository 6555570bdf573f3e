#pragma once

#include <array>
#include <optional>

#include "apgen/decode.hpp"
#include "apgen/trajectory.hpp"

namespace apgen::tasks {

using SudokuGrid = std::array<int, 81>;  // 0 = blank, 1..9 = digit

// Straightforward candidate-propagating backtracking solver, used for
// uniqueness checks and puzzle generation.
std::optional<SudokuGrid> sudoku_solve(const SudokuGrid& givens);
int sudoku_count_solutions(const SudokuGrid& givens, int limit = 2);

// Generates (puzzle, solution) with a unique solution by digging clues out
// of a random complete grid; keeps digging while uniqueness holds.
std::pair<SudokuGrid, SudokuGrid> sudoku_generate(Rng& rng, int min_givens = 24);

SudokuGrid sudoku_parse_line(const std::string& line81);
std::string sudoku_format_line(const SudokuGrid& g);

struct SudokuRejected : ContractError {
    using ContractError::ContractError;
};

// 324-token grid encoding: per cell (value, color, marker, SEPARATOR).
// The trajectory records a branching solver run: 2-step assigns and
// branches, contradiction marking to (EMPTY, COLOR_b, SKULL), 2-step
// backtrack clears and recoveries, and a final cleanup pass that restores
// NORMAL markers everywhere and WHITE colors on non-branch cells.
class SudokuTask {
public:
    SudokuTask();

    const Vocab& vocab() const { return vocab_; }

    SeqState encode_puzzle(const SudokuGrid& givens) const;

    // Throws SudokuRejected when the puzzle has no or multiple solutions or
    // fewer than 17 givens.
    Trajectory trajectory(const SudokuGrid& givens, Rng& rng) const;

    // Value tokens of a state: 0 = EMPTY, 1..9 digit, -1 = masked/other.
    std::array<int, 81> decode_values(const SeqState& s) const;

    // True when no row/column/box holds a duplicate digit among decoded
    // (non-mask) value tokens.
    bool safe_values(const SeqState& s) const;

    bool is_solved_as(const SeqState& s, const SudokuGrid& solution) const;

private:
    friend struct SudokuEmitter;
    Vocab vocab_;
    TokenId tok_empty_, tok_mask_, tok_white_, tok_normal_, tok_skull_, tok_branch_, tok_sep_;
    TokenId first_digit_, first_color_;  // 9 digits, 15 colors
};

}  // namespace apgen::tasks
