#include "apgen/tasks/sudoku.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>

namespace apgen::tasks {

namespace {

constexpr int kBoxOf[81] = {
    0, 0, 0, 1, 1, 1, 2, 2, 2, 0, 0, 0, 1, 1, 1, 2, 2, 2, 0, 0, 0, 1, 1, 1, 2, 2, 2,
    3, 3, 3, 4, 4, 4, 5, 5, 5, 3, 3, 3, 4, 4, 4, 5, 5, 5, 3, 3, 3, 4, 4, 4, 5, 5, 5,
    6, 6, 6, 7, 7, 7, 8, 8, 8, 6, 6, 6, 7, 7, 7, 8, 8, 8, 6, 6, 6, 7, 7, 7, 8, 8, 8,
};

struct Units {
    int row_used[9] = {}, col_used[9] = {}, box_used[9] = {};

    static Units from(const SudokuGrid& g) {
        Units u;
        for (int i = 0; i < 81; ++i) {
            if (g[static_cast<std::size_t>(i)] > 0) {
                int bit = 1 << g[static_cast<std::size_t>(i)];
                u.row_used[i / 9] |= bit;
                u.col_used[i % 9] |= bit;
                u.box_used[kBoxOf[i]] |= bit;
            }
        }
        return u;
    }
    int candidates(int cell) const {
        int used = row_used[cell / 9] | col_used[cell % 9] | box_used[kBoxOf[cell]];
        return ~used & 0b1111111110;
    }
    void place(int cell, int d) {
        int bit = 1 << d;
        row_used[cell / 9] |= bit;
        col_used[cell % 9] |= bit;
        box_used[kBoxOf[cell]] |= bit;
    }
    void remove(int cell, int d) {
        int bit = ~(1 << d);
        row_used[cell / 9] &= bit;
        col_used[cell % 9] &= bit;
        box_used[kBoxOf[cell]] &= bit;
    }
};

int count_rec(SudokuGrid& g, Units& u, int limit) {
    int best = -1, best_cand = 0, best_count = 10;
    for (int i = 0; i < 81; ++i) {
        if (g[static_cast<std::size_t>(i)] != 0) continue;
        int cand = u.candidates(i);
        int c = std::popcount(static_cast<unsigned>(cand));
        if (c == 0) return 0;
        if (c < best_count) {
            best_count = c;
            best = i;
            best_cand = cand;
            if (c == 1) break;
        }
    }
    if (best < 0) return 1;  // complete
    int total = 0;
    for (int d = 1; d <= 9; ++d) {
        if (!(best_cand & (1 << d))) continue;
        g[static_cast<std::size_t>(best)] = d;
        u.place(best, d);
        total += count_rec(g, u, limit - total);
        u.remove(best, d);
        g[static_cast<std::size_t>(best)] = 0;
        if (total >= limit) return total;
    }
    return total;
}

bool solve_rec(SudokuGrid& g, Units& u, Rng* rng) {
    int best = -1, best_cand = 0, best_count = 10;
    for (int i = 0; i < 81; ++i) {
        if (g[static_cast<std::size_t>(i)] != 0) continue;
        int cand = u.candidates(i);
        int c = std::popcount(static_cast<unsigned>(cand));
        if (c == 0) return false;
        if (c < best_count) {
            best_count = c;
            best = i;
            best_cand = cand;
            if (c == 1) break;
        }
    }
    if (best < 0) return true;
    std::array<int, 9> order;
    int nd = 0;
    for (int d = 1; d <= 9; ++d)
        if (best_cand & (1 << d)) order[static_cast<std::size_t>(nd++)] = d;
    if (rng) std::shuffle(order.begin(), order.begin() + nd, *rng);
    for (int j = 0; j < nd; ++j) {
        int d = order[static_cast<std::size_t>(j)];
        g[static_cast<std::size_t>(best)] = d;
        u.place(best, d);
        if (solve_rec(g, u, rng)) return true;
        u.remove(best, d);
        g[static_cast<std::size_t>(best)] = 0;
    }
    return false;
}

}  // namespace

std::optional<SudokuGrid> sudoku_solve(const SudokuGrid& givens) {
    SudokuGrid g = givens;
    Units u = Units::from(g);
    if (solve_rec(g, u, nullptr)) return g;
    return std::nullopt;
}

int sudoku_count_solutions(const SudokuGrid& givens, int limit) {
    SudokuGrid g = givens;
    Units u = Units::from(g);
    return count_rec(g, u, limit);
}

std::pair<SudokuGrid, SudokuGrid> sudoku_generate(Rng& rng, int min_givens) {
    SudokuGrid full{};
    Units u = Units::from(full);
    solve_rec(full, u, &rng);

    SudokuGrid puzzle = full;
    std::array<int, 81> order;
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    int givens = 81;
    for (int cell : order) {
        if (givens <= min_givens) break;
        int saved = puzzle[static_cast<std::size_t>(cell)];
        puzzle[static_cast<std::size_t>(cell)] = 0;
        if (sudoku_count_solutions(puzzle, 2) != 1)
            puzzle[static_cast<std::size_t>(cell)] = saved;
        else
            --givens;
    }
    return {puzzle, full};
}

SudokuGrid sudoku_parse_line(const std::string& line) {
    SudokuGrid g{};
    if (line.size() < 81) throw ContractError("sudoku line needs 81 characters");
    for (int i = 0; i < 81; ++i) {
        char c = line[static_cast<std::size_t>(i)];
        if (c == '0' || c == '.')
            g[static_cast<std::size_t>(i)] = 0;
        else if (c >= '1' && c <= '9')
            g[static_cast<std::size_t>(i)] = c - '0';
        else
            throw ContractError("bad sudoku character");
    }
    return g;
}

std::string sudoku_format_line(const SudokuGrid& g) {
    std::string s(81, '0');
    for (int i = 0; i < 81; ++i)
        s[static_cast<std::size_t>(i)] = static_cast<char>('0' + g[static_cast<std::size_t>(i)]);
    return s;
}

SudokuTask::SudokuTask() {
    tok_empty_ = vocab_.add("EMPTY");
    tok_mask_ = vocab_.add("M", /*is_mask=*/true);
    first_digit_ = static_cast<TokenId>(vocab_.size());
    for (int d = 1; d <= 9; ++d) vocab_.add(std::to_string(d));
    tok_white_ = vocab_.add("WHITE");
    first_color_ = static_cast<TokenId>(vocab_.size());
    for (int c = 1; c <= 15; ++c) vocab_.add("COLOR_" + std::to_string(c));
    tok_normal_ = vocab_.add("NORMAL");
    tok_skull_ = vocab_.add("SKULL");
    tok_branch_ = vocab_.add("BRANCH");
    tok_sep_ = vocab_.add("SEPARATOR");
}

SeqState SudokuTask::encode_puzzle(const SudokuGrid& givens) const {
    SeqState s;
    s.tokens.reserve(324);
    for (int i = 0; i < 81; ++i) {
        int v = givens[static_cast<std::size_t>(i)];
        s.tokens.push_back(v == 0 ? tok_empty_ : first_digit_ + v - 1);
        s.tokens.push_back(tok_white_);
        s.tokens.push_back(tok_normal_);
        s.tokens.push_back(tok_sep_);
    }
    return s;
}

// Emits the 2-step tuples of the solving run against the token state.
struct SudokuEmitter {
    const SudokuTask& task;
    Trajectory& tr;
    SeqState cur;

    std::size_t vp(int cell) const { return 4 * static_cast<std::size_t>(cell); }

    // Untouched masked positions hold their mask via the remask bit.
    DenoiserOutput blank() const {
        DenoiserOutput o;
        o.y.resize(cur.size());
        o.controls.assign(cur.size(), Controls{});
        for (std::size_t i = 0; i < cur.size(); ++i) {
            if (task.vocab_.is_mask(cur.tokens[i])) {
                o.y[i] = task.tok_empty_;
                o.controls[i].remask = true;
            } else {
                o.y[i] = cur.tokens[i];
            }
        }
        return o;
    }
    void unmask(DenoiserOutput& o, std::size_t pos, TokenId tok) const {
        o.y[pos] = tok;
        o.controls[pos].remask = false;
    }
    void commit(DenoiserOutput o) {
        SeqState next = apply_transition(task.vocab_, cur, o);
        tr.steps.push_back(StepTuple{cur, o.y, o.controls, {}});
        cur = std::move(next);
    }

    TokenId digit(int d) const { return task.first_digit_ + d - 1; }
    TokenId color_tok(int c) const { return c == 0 ? task.tok_white_ : task.first_color_ + c - 1; }

    // (M,M,M) then (value, color, marker)
    void remask_then(int cell, TokenId v, TokenId c, TokenId m) {
        DenoiserOutput o1 = blank();
        for (int k = 0; k < 3; ++k) o1.controls[vp(cell) + static_cast<std::size_t>(k)].remask = true;
        commit(std::move(o1));
        DenoiserOutput o2 = blank();
        unmask(o2, vp(cell), v);
        unmask(o2, vp(cell) + 1, c);
        unmask(o2, vp(cell) + 2, m);
        commit(std::move(o2));
    }
};

Trajectory SudokuTask::trajectory(const SudokuGrid& givens, Rng& rng) const {
    (void)rng;  // candidate order is deterministic (ascending digits)
    int given_count = 0;
    for (int v : givens) given_count += v != 0 ? 1 : 0;
    if (given_count < 17) throw SudokuRejected("puzzle has fewer than 17 givens");
    int nsol = sudoku_count_solutions(givens, 2);
    if (nsol == 0) throw SudokuRejected("puzzle has no solution");
    if (nsol > 1) throw SudokuRejected("puzzle has multiple solutions");

    Trajectory tr;
    SudokuEmitter em{*this, tr, encode_puzzle(givens)};

    // Semantic mirror of the token grid.
    SudokuGrid values = givens;
    std::array<int, 81> colors{};   // 0 = white
    std::array<int, 81> markers{};  // 0 normal, 1 skull, 2 branch

    struct Frame {
        int cell;
        int color;
        std::set<int> tried;
    };
    std::vector<Frame> stack;
    int color_counter = 0;
    // Fresh identifier per branch event, avoiding the colours of live
    // frames; only a branching depth beyond the 15 colours forces reuse.
    auto next_color = [&] {
        for (int probe = 0; probe < 15; ++probe) {
            int c = 1 + (color_counter++ % 15);
            bool live = false;
            for (const Frame& f : stack) live = live || f.color == c;
            if (!live) return c;
        }
        return 1 + (color_counter++ % 15);
    };
    auto cur_color = [&] { return stack.empty() ? 0 : stack.back().color; };

    auto candidates = [&](int cell) {
        Units u = Units::from(values);
        return u.candidates(cell);
    };

    auto set_cell = [&](int cell, int v, int color, int marker) {
        values[static_cast<std::size_t>(cell)] = v;
        colors[static_cast<std::size_t>(cell)] = color;
        markers[static_cast<std::size_t>(cell)] = marker;
    };

    constexpr int kGuard = 300000;
    bool complete = false;
    for (int iter = 0; iter < kGuard && !complete; ++iter) {
        complete = std::all_of(values.begin(), values.end(), [](int v) { return v > 0; });
        if (complete) break;

        // Find a contradiction, a naked single, or the MRV branch cell.
        int contradiction = -1, single = -1, mrv = -1, mrv_count = 10, mrv_cand = 0;
        for (int i = 0; i < 81 && contradiction < 0; ++i) {
            if (values[static_cast<std::size_t>(i)] != 0) continue;
            int cand = candidates(i);
            int c = std::popcount(static_cast<unsigned>(cand));
            if (c == 0)
                contradiction = i;
            else if (c == 1 && single < 0)
                single = i;
            else if (c < mrv_count) {
                mrv_count = c;
                mrv = i;
                mrv_cand = cand;
            }
        }

        if (contradiction >= 0) {
            if (stack.empty()) throw SudokuRejected("search exhausted (unsolvable puzzle)");
            // Mark the dead end in the innermost branch colour.
            em.remask_then(contradiction, tok_empty_, em.color_tok(stack.back().color), tok_skull_);
            set_cell(contradiction, 0, stack.back().color, 1);

            while (true) {
                Frame fr = stack.back();  // by value; the stack mutates below
                int v_failed = values[static_cast<std::size_t>(fr.cell)];

                // Backtrack: clear every cell in this branch colour; the
                // branch start keeps its tokens but loses the marker, then
                // stores the failed value in the marker slot.
                DenoiserOutput o1 = em.blank();
                for (int i = 0; i < 81; ++i) {
                    if (colors[static_cast<std::size_t>(i)] != fr.color) continue;
                    if (i == fr.cell) {
                        o1.controls[em.vp(i) + 2].remask = true;
                    } else {
                        for (int k = 0; k < 3; ++k)
                            o1.controls[em.vp(i) + static_cast<std::size_t>(k)].remask = true;
                    }
                }
                em.commit(std::move(o1));
                DenoiserOutput o2 = em.blank();
                for (int i = 0; i < 81; ++i) {
                    if (colors[static_cast<std::size_t>(i)] != fr.color) continue;
                    if (i == fr.cell) {
                        o2.controls[em.vp(i)].remask = true;
                        o2.controls[em.vp(i) + 1].remask = true;
                        em.unmask(o2, em.vp(i) + 2, em.digit(v_failed));
                    } else {
                        em.unmask(o2, em.vp(i), tok_empty_);
                        em.unmask(o2, em.vp(i) + 1, tok_white_);
                        em.unmask(o2, em.vp(i) + 2, tok_normal_);
                        set_cell(i, 0, 0, 0);
                    }
                }
                em.commit(std::move(o2));
                set_cell(fr.cell, 0, 0, 0);  // value/colour slots are masked now

                int cand = candidates(fr.cell);
                std::set<int> remaining;
                for (int d = 1; d <= 9; ++d)
                    if ((cand & (1 << d)) && !fr.tried.count(d)) remaining.insert(d);

                if (remaining.empty()) {
                    // Branch exhausted: convert the branch cell into the
                    // contradiction marker of the enclosing branch.
                    stack.pop_back();
                    if (stack.empty()) throw SudokuRejected("search exhausted (unsolvable puzzle)");
                    DenoiserOutput c1 = em.blank();
                    c1.controls[em.vp(fr.cell) + 2].remask = true;
                    em.commit(std::move(c1));
                    DenoiserOutput c2 = em.blank();
                    em.unmask(c2, em.vp(fr.cell), tok_empty_);
                    em.unmask(c2, em.vp(fr.cell) + 1, em.color_tok(stack.back().color));
                    em.unmask(c2, em.vp(fr.cell) + 2, tok_skull_);
                    em.commit(std::move(c2));
                    set_cell(fr.cell, 0, stack.back().color, 1);
                    continue;
                }

                int v_new = *remaining.begin();
                bool rebranch = remaining.size() >= 2;
                int color;
                TokenId marker_tok;
                if (rebranch) {
                    stack.back().tried.insert(v_new);
                    stack.back().color = next_color();
                    color = stack.back().color;
                    marker_tok = tok_branch_;
                } else {
                    stack.pop_back();
                    color = cur_color();
                    marker_tok = tok_normal_;
                }
                // Recovery: (M,M,v_failed) -> (v_new, colour, M) -> marker.
                DenoiserOutput r1 = em.blank();
                em.unmask(r1, em.vp(fr.cell), em.digit(v_new));
                em.unmask(r1, em.vp(fr.cell) + 1, em.color_tok(color));
                r1.controls[em.vp(fr.cell) + 2].remask = true;
                em.commit(std::move(r1));
                DenoiserOutput r2 = em.blank();
                em.unmask(r2, em.vp(fr.cell) + 2, marker_tok);
                em.commit(std::move(r2));
                set_cell(fr.cell, v_new, color, rebranch ? 2 : 0);
                break;
            }
            continue;
        }

        if (single >= 0) {
            int cand = candidates(single);
            int d = std::countr_zero(static_cast<unsigned>(cand));
            em.remask_then(single, em.digit(d), em.color_tok(cur_color()), tok_normal_);
            set_cell(single, d, cur_color(), 0);
            continue;
        }

        // Branch on the MRV cell with its smallest candidate.
        int d = std::countr_zero(static_cast<unsigned>(mrv_cand));
        int b = next_color();
        stack.push_back(Frame{mrv, b, {d}});
        em.remask_then(mrv, em.digit(d), em.color_tok(b), tok_branch_);
        set_cell(mrv, d, b, 2);
    }

    if (!complete) throw SudokuRejected("solver run exceeded the step guard");

    // Cleanup: markers back to NORMAL everywhere, colours to WHITE on cells
    // that are not branch starting points.
    {
        std::vector<std::size_t> recolor, remark;
        for (int i = 0; i < 81; ++i) {
            if (markers[static_cast<std::size_t>(i)] == 2)
                remark.push_back(em.vp(i) + 2);
            else if (colors[static_cast<std::size_t>(i)] != 0)
                recolor.push_back(em.vp(i) + 1);
        }
        if (!recolor.empty() || !remark.empty()) {
            DenoiserOutput o1 = em.blank();
            for (std::size_t p : recolor) o1.controls[p].remask = true;
            for (std::size_t p : remark) o1.controls[p].remask = true;
            em.commit(std::move(o1));
            DenoiserOutput o2 = em.blank();
            for (std::size_t p : recolor) em.unmask(o2, p, tok_white_);
            for (std::size_t p : remark) em.unmask(o2, p, tok_normal_);
            em.commit(std::move(o2));
        }
    }

    tr.final_state = em.cur;
    return tr;
}

std::array<int, 81> SudokuTask::decode_values(const SeqState& s) const {
    std::array<int, 81> out;
    out.fill(-1);
    if (s.size() != 324) return out;
    for (int i = 0; i < 81; ++i) {
        TokenId t = s.tokens[4 * static_cast<std::size_t>(i)];
        if (t == tok_empty_)
            out[static_cast<std::size_t>(i)] = 0;
        else if (t >= first_digit_ && t < first_digit_ + 9)
            out[static_cast<std::size_t>(i)] = t - first_digit_ + 1;
    }
    return out;
}

bool SudokuTask::safe_values(const SeqState& s) const {
    auto vals = decode_values(s);
    if (s.size() != 324) return false;
    for (int unit = 0; unit < 9; ++unit) {
        int row_seen = 0, col_seen = 0, box_seen = 0;
        for (int j = 0; j < 9; ++j) {
            int rc = unit * 9 + j;
            int cc = j * 9 + unit;
            int bc = (unit / 3 * 3 + j / 3) * 9 + (unit % 3 * 3 + j % 3);
            for (auto [cell, seen] :
                 {std::pair<int, int*>{rc, &row_seen}, {cc, &col_seen}, {bc, &box_seen}}) {
                int v = vals[static_cast<std::size_t>(cell)];
                if (v > 0) {
                    if (*seen & (1 << v)) return false;
                    *seen |= 1 << v;
                }
            }
        }
    }
    return true;
}

bool SudokuTask::is_solved_as(const SeqState& s, const SudokuGrid& solution) const {
    auto vals = decode_values(s);
    for (int i = 0; i < 81; ++i)
        if (vals[static_cast<std::size_t>(i)] != solution[static_cast<std::size_t>(i)]) return false;
    return true;
}

}  // namespace apgen::tasks
