#include <doctest.h>

#include <functional>
#include <set>

#include "apgen/tasks/dyck.hpp"
#include "apgen/tasks/graph.hpp"
#include "apgen/tasks/parity.hpp"
#include "apgen/tasks/sudoku.hpp"

using namespace apgen;
using namespace apgen::tasks;

// ---------------------------------------------------------------------------
// parity
// ---------------------------------------------------------------------------

TEST_CASE("parity trajectory: worked example") {
    Parity par;
    Trajectory tr = par.trajectory({1, 0, 1});
    // (1,0,1) -> (1,M,1) -> (1,1) -> (M,M) -> ()
    REQUIRE(tr.steps.size() == 4);
    auto state = [&](std::vector<TokenId> inner) {
        SeqState s;
        s.tokens.push_back(par.bos);
        for (TokenId t : inner) s.tokens.push_back(t);
        s.tokens.push_back(par.eos);
        return s;
    };
    CHECK(tr.steps[0].x == state({par.one, par.zero, par.one}));
    CHECK(tr.steps[1].x == state({par.one, par.mask, par.one}));
    CHECK(tr.steps[2].x == state({par.one, par.one}));
    CHECK(tr.steps[3].x == state({par.mask, par.mask}));
    CHECK(tr.final_state == state({}));
    CHECK(par.classify(tr.final_state) == 0);
}

TEST_CASE("parity trajectories replay and match the xor oracle") {
    Parity par;
    CHECK(par.trajectory({}).final_state == SeqState{{par.bos, par.eos}});

    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        int len = static_cast<int>(rng() % 21);
        std::vector<int> bits;
        int want = 0;
        for (int i = 0; i < len; ++i) {
            bits.push_back(static_cast<int>(rng() % 2));
            want ^= bits.back();
        }
        Trajectory tr = par.trajectory(bits);
        CHECK(!replay_mismatch(par.vocab, tr).has_value());
        CHECK(par.classify(tr.final_state) == want);
        // alternating remask/delete steps
        for (const StepTuple& t : tr.steps) {
            bool any_remask = false, any_delete = false;
            for (const Controls& c : t.c) {
                any_remask |= c.remask;
                any_delete |= c.erase;
            }
            CHECK(any_remask != any_delete);
        }
    }
}

TEST_CASE("parity: exhaustive correctness up to length 12 via decode") {
    Parity par;
    for (int len = 0; len <= 12; ++len) {
        for (int code = 0; code < (1 << len); ++code) {
            std::vector<int> bits;
            int want = 0;
            for (int i = 0; i < len; ++i) {
                bits.push_back((code >> i) & 1);
                want ^= bits.back();
            }
            DecodeOptions opts;
            opts.max_steps = 4 * len + 8;
            Trace tr = decode(par.vocab, par.denoiser(), par.encode(bits),
                              StopCriterion::fixpoint(), 0, opts);
            REQUIRE(par.classify(tr.final_state()) == want);
        }
    }
}

TEST_CASE("parity canonical tuples cover the four patterns") {
    Parity par;
    auto tuples = par.canonical_training_tuples();
    REQUIRE(tuples.size() == 4);
    CHECK(tuples[0].x == par.encode({0, 0}));
    CHECK(tuples[1].x == par.encode({0, 1}));
    CHECK(tuples[2].x == par.encode({1, 1}));
    CHECK(tuples[3].x == SeqState{{par.bos, par.one, par.mask, par.eos}});
    // 00: both zeros remasked; 01: only the zero; 11: the pair of ones;
    // terminal: the mask goes, the lone one stays.
    CHECK(tuples[0].c[1].remask);
    CHECK(tuples[0].c[2].remask);
    CHECK(tuples[1].c[1].remask);
    CHECK(!tuples[1].c[2].remask);
    CHECK(tuples[2].c[1].remask);
    CHECK(tuples[2].c[2].remask);
    CHECK(!tuples[3].c[1].erase);
    CHECK(tuples[3].c[2].erase);
}

// ---------------------------------------------------------------------------
// dyck
// ---------------------------------------------------------------------------

TEST_CASE("dyck membership oracle") {
    DyckConfig cfg;
    Dyck d(cfg);
    auto toks = [&](const std::vector<std::string>& names) {
        std::vector<TokenId> w;
        for (auto& n : names) w.push_back(d.vocab().id(n));
        return w;
    };
    CHECK(d.member({}));
    CHECK(d.member(toks({"a1", "A1"})));
    CHECK(d.member(toks({"A1", "a1"})));  // two-sided
    CHECK(!d.member(toks({"a1", "A2"})));
    CHECK(!d.member(toks({"a1"})));
    CHECK(d.member(toks({"a1", "a2", "A2", "A1"})));
    CHECK(d.member(toks({"a1", "A1", "A2", "a2"})));
    CHECK(!d.member_names({"a1", "BOS"}));  // foreign symbol
}

TEST_CASE("dyck membership equals exhaustive reduction search") {
    DyckConfig cfg;
    Dyck d(cfg);
    // brute force: try every reduction order
    std::function<bool(std::vector<TokenId>)> brute = [&](std::vector<TokenId> w) {
        if (w.empty()) return true;
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            if (d.partner(w[i]) == w[i + 1]) {
                std::vector<TokenId> next = w;
                next.erase(next.begin() + static_cast<std::ptrdiff_t>(i),
                           next.begin() + static_cast<std::ptrdiff_t>(i) + 2);
                if (brute(next)) return true;
            }
        }
        return false;
    };
    TokenId first = d.vocab().id("a1");
    for (int len : {2, 4}) {
        std::vector<TokenId> w(static_cast<std::size_t>(len));
        int total = 1;
        for (int i = 0; i < len; ++i) total *= 4;
        for (int code = 0; code < total; ++code) {
            int c2 = code;
            for (int i = 0; i < len; ++i) {
                w[static_cast<std::size_t>(i)] = first + c2 % 4;
                c2 /= 4;
            }
            CHECK(d.member(w) == brute(w));
        }
    }
}

TEST_CASE("dyck samples are members and traces replay") {
    DyckConfig cfg;
    Dyck d(cfg);
    int empties = 0;
    for (int e = 0; e < 300; ++e) {
        auto res = d.sample(static_cast<std::uint64_t>(e) * 77 + 1);
        REQUIRE(res.ok);
        CHECK(d.member(res.word));
        CHECK(replay_trace(d.vocab(), res.trace));
        empties += res.word.empty() ? 1 : 0;
    }
    CHECK(empties > 0);  // the immediate-termination path occurs
}

TEST_CASE("dyck reachability witnesses up to length 4") {
    DyckConfig cfg;
    Dyck d(cfg);
    TokenId first = d.vocab().id("a1");
    int members = 0;
    for (int len : {0, 2, 4}) {
        int total = 1;
        for (int i = 0; i < len; ++i) total *= 4;
        for (int code = 0; code < total; ++code) {
            std::vector<TokenId> w(static_cast<std::size_t>(len));
            int c2 = code;
            for (int i = 0; i < len; ++i) {
                w[static_cast<std::size_t>(i)] = first + c2 % 4;
                c2 /= 4;
            }
            auto wit = d.witness(w);
            CHECK(wit.has_value() == d.member(w));
            if (wit) {
                ++members;
                CHECK(replay_trace(d.vocab(), *wit));
                CHECK(d.strip(wit->final_state()) == w);
            }
        }
    }
    CHECK(members == 1 + 4 + 28);  // eps, 4 pairs, 28 four-letter members
}

// ---------------------------------------------------------------------------
// graph
// ---------------------------------------------------------------------------

TEST_CASE("mincut oracle basics") {
    GraphInstance g;
    g.n = 2;
    g.edges = {{0, 1}, {0, 1}};
    g.s = 0;
    g.t = 1;
    CHECK(mincut_oracle(g) == 2);

    GraphInstance h;
    h.n = 4;
    h.edges = {{0, 1}, {1, 3}, {0, 2}, {2, 3}};
    h.s = 0;
    h.t = 3;
    CHECK(mincut_oracle(h) == 2);
}

TEST_CASE("mincut oracle equals exhaustive edge-subset search") {
    auto reachable = [](const GraphInstance& g, const std::vector<bool>& removed) -> bool {
        std::vector<bool> seen(static_cast<std::size_t>(g.n), false);
        std::vector<int> stack{g.s};
        seen[static_cast<std::size_t>(g.s)] = true;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (std::size_t e = 0; e < g.edges.size(); ++e) {
                if (removed[e]) continue;
                auto [a, b] = g.edges[e];
                if (a == u && !seen[static_cast<std::size_t>(b)]) {
                    seen[static_cast<std::size_t>(b)] = true;
                    stack.push_back(b);
                }
            }
        }
        return seen[static_cast<std::size_t>(g.t)];
    };
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        GraphInstance g;
        g.n = 8;
        std::set<std::pair<int, int>> chosen;
        std::uniform_int_distribution<int> node(0, 7);
        while (chosen.size() < 14) {
            int u = node(rng), v = node(rng);
            if (u != v) chosen.insert({u, v});
        }
        g.edges.assign(chosen.begin(), chosen.end());
        g.s = 0;
        g.t = 7;
        int best = static_cast<int>(g.edges.size());
        for (int mask = 0; mask < (1 << g.edges.size()); ++mask) {
            std::vector<bool> removed(g.edges.size());
            int count = 0;
            for (std::size_t e = 0; e < g.edges.size(); ++e) {
                removed[e] = (mask >> e) & 1;
                count += removed[e] ? 1 : 0;
            }
            if (count >= best) continue;
            if (!reachable(g, removed)) best = count;
        }
        CHECK(mincut_oracle(g) == best);
    }
}

TEST_CASE("graph trajectories: replay, conservation, min-cut removal") {
    GraphTask gt;
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 4 + static_cast<int>(rng() % 7);
        GraphInstance g = random_graph_instance(n, rng);
        int want = mincut_oracle(g);
        Trajectory tr = gt.trajectory(g, rng);
        CHECK(!replay_mismatch(gt.vocab(), tr).has_value());
        auto fin = gt.parse_final(tr.final_state);
        REQUIRE(fin.has_value());
        CHECK(fin->n == g.n);
        CHECK(gt.disconnected(*fin));
        CHECK(static_cast<int>(g.edges.size() - fin->edges.size()) == want);
    }
}

TEST_CASE("graph: disconnected source yields zero removals") {
    GraphTask gt;
    Rng rng(1);
    GraphInstance g;
    g.n = 4;
    g.edges = {{1, 0}, {2, 1}, {3, 2}};  // everything points away from t
    g.s = 0;
    g.t = 3;
    Trajectory tr = gt.trajectory(g, rng);
    auto fin = gt.parse_final(tr.final_state);
    REQUIRE(fin.has_value());
    CHECK(fin->edges.size() == g.edges.size());
    CHECK(gt.disconnected(*fin));
}

TEST_CASE("graph sequence-length statistic at n=4") {
    GraphTask gt;
    Rng rng(99);
    double total = 0;
    const int trials = 50;
    for (int trial = 0; trial < trials; ++trial) {
        GraphInstance g = random_graph_instance(4, rng);
        Trajectory tr = gt.trajectory(g, rng);
        total += static_cast<double>(tr.final_state.size());
    }
    double mean = total / trials;
    CHECK(mean > 0.8 * 56);
    CHECK(mean < 1.2 * 56);
}

// ---------------------------------------------------------------------------
// sudoku
// ---------------------------------------------------------------------------

TEST_CASE("sudoku solver and generator") {
    Rng rng(3);
    auto [puzzle, solution] = sudoku_generate(rng);
    CHECK(sudoku_count_solutions(puzzle, 2) == 1);
    auto solved = sudoku_solve(puzzle);
    REQUIRE(solved.has_value());
    CHECK(*solved == solution);
    CHECK(sudoku_parse_line(sudoku_format_line(puzzle)) == puzzle);
}

TEST_CASE("sudoku trajectory: replay, safety, terminal cleanliness") {
    SudokuTask st;
    Rng rng(12);
    for (int trial = 0; trial < 8; ++trial) {
        auto [puzzle, solution] = sudoku_generate(rng);
        Trajectory tr = st.trajectory(puzzle, rng);
        CHECK(!replay_mismatch(st.vocab(), tr).has_value());
        CHECK(tr.final_state.size() == 324);
        for (const StepTuple& t : tr.steps) {
            CHECK(t.x.size() == 324);
            CHECK(st.safe_values(t.x));
        }
        CHECK(st.is_solved_as(tr.final_state, solution));
        // terminal markers NORMAL everywhere, WHITE off branch cells
        const Vocab& v = st.vocab();
        for (int cell = 0; cell < 81; ++cell) {
            TokenId marker = tr.final_state.tokens[4 * static_cast<std::size_t>(cell) + 2];
            CHECK(v.name(marker) == "NORMAL");
        }
    }
}

TEST_CASE("sudoku easy puzzle uses assigns only") {
    SudokuTask st;
    Rng rng(4);
    auto [puzzle, solution] = sudoku_generate(rng, 60);  // heavily clued
    Trajectory tr = st.trajectory(puzzle, rng);
    const Vocab& v = st.vocab();
    for (const StepTuple& t : tr.steps)
        for (TokenId tok : t.x.tokens) {
            std::string name = v.name(tok);
            CHECK(name.rfind("COLOR_", 0) != 0);
            CHECK(name != "SKULL");
        }
    CHECK(st.is_solved_as(tr.final_state, solution));
}

TEST_CASE("sudoku rejects bad puzzles") {
    SudokuTask st;
    Rng rng(9);
    SudokuGrid empty{};
    CHECK_THROWS_AS(st.trajectory(empty, rng), SudokuRejected);  // multi-solution / low clues

    auto [puzzle, solution] = sudoku_generate(rng);
    // contradict one clue
    SudokuGrid bad = puzzle;
    for (int i = 0; i < 81; ++i) {
        if (bad[static_cast<std::size_t>(i)] == 0) {
            int row = i / 9;
            for (int j = row * 9; j < row * 9 + 9; ++j) {
                if (bad[static_cast<std::size_t>(j)] != 0) {
                    bad[static_cast<std::size_t>(i)] = bad[static_cast<std::size_t>(j)];
                    break;
                }
            }
            break;
        }
    }
    CHECK_THROWS_AS(st.trajectory(bad, rng), SudokuRejected);
}

TEST_CASE("sudoku oracle decode solves generated puzzles") {
    SudokuTask st;
    Rng rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        auto [puzzle, solution] = sudoku_generate(rng);
        Trajectory traj = st.trajectory(puzzle, rng);
        std::size_t cursor = 0;
        Denoiser replay = [&](const SeqState& s, Rng&) -> DenoiserOutput {
            if (cursor < traj.steps.size() && s == traj.steps[cursor].x)
                return traj.steps[cursor++].as_output();
            DenoiserOutput idle;
            idle.y.resize(s.size());
            idle.controls.assign(s.size(), Controls{});
            for (std::size_t i = 0; i < s.size(); ++i)
                idle.y[i] = st.vocab().is_mask(s.tokens[i]) ? st.vocab().id("EMPTY") : s.tokens[i];
            return idle;
        };
        DecodeOptions opts;
        opts.max_steps = static_cast<int>(traj.steps.size()) + 4;
        Trace tr = decode(st.vocab(), replay, st.encode_puzzle(puzzle), StopCriterion::fixpoint(),
                          0, opts);
        CHECK(st.is_solved_as(tr.final_state(), solution));
    }
}
