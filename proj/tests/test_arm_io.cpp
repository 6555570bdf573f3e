#include <doctest.h>

#include <fstream>
#include <sstream>

#include "apgen/io.hpp"
#include "apgen/manifest.hpp"
#include "apgen/tasks/arm.hpp"
#include "apgen/tasks/graph.hpp"
#include "apgen/tasks/parity.hpp"

using namespace apgen;
using namespace apgen::tasks;

namespace {

// An any-order trajectory: reveal masked positions left to right, revealing
// a fixed token; unrevealed masks hold their place with the remask bit.
Trajectory ao_trajectory(const Vocab& v, const SeqState& x0, const std::vector<TokenId>& targets,
                         int per_step) {
    Trajectory tr;
    SeqState cur = x0;
    while (true) {
        std::vector<std::size_t> masked;
        for (std::size_t i = 0; i < cur.size(); ++i)
            if (v.is_mask(cur.tokens[i])) masked.push_back(i);
        if (masked.empty()) break;
        StepTuple t;
        t.x = cur;
        t.y.resize(cur.size());
        t.c.assign(cur.size(), Controls{});
        for (std::size_t i = 0; i < cur.size(); ++i)
            t.y[i] = v.is_mask(cur.tokens[i]) ? targets[i] : cur.tokens[i];
        for (std::size_t j = 0; j < masked.size(); ++j)
            if (j >= static_cast<std::size_t>(per_step)) t.c[masked[j]].remask = true;
        SeqState next = apply_transition(v, cur, t.as_output());
        tr.steps.push_back(std::move(t));
        cur = std::move(next);
    }
    tr.final_state = cur;
    return tr;
}

}  // namespace

TEST_CASE("pair format: length law and event order") {
    Vocab v;
    v.add("M", true);
    v.add("x1");
    v.add("x2");
    v.add("SEPTOK");
    v.add("a");
    v.add("b");
    v.add("c");
    // S = 6, n = 2 prompt tokens plus separator: expect length 2S - n - 1 = 9
    SeqState x0{{v.id("x1"), v.id("x2"), v.id("SEPTOK"), v.id("M"), v.id("M"), v.id("M")}};
    std::vector<TokenId> targets = {0, 0, 0, v.id("a"), v.id("b"), v.id("c")};
    Trajectory tr = ao_trajectory(v, x0, targets, 2);

    ArmVocab av(v, 16);
    SeqState arm = arm_sequentialize(av, tr, ArmFormat::PAIR);
    CHECK(arm.size() == 9);
    CHECK(arm.tokens[0] == v.id("x1"));
    CHECK(arm.tokens[2] == v.id("SEPTOK"));
    CHECK(arm.tokens[3] == av.pose(3));
    CHECK(arm.tokens[4] == v.id("a"));
    CHECK(arm.tokens[5] == av.pose(4));
    CHECK(arm.tokens[7] == av.pose(5));
    CHECK(arm.tokens[8] == v.id("c"));

    // empty trajectory: prompt plus padding only
    Trajectory empty;
    empty.final_state = x0;
    SeqState arm0 = arm_sequentialize(av, empty, ArmFormat::PAIR);
    CHECK(arm0.size() == 9);
    for (std::size_t i = 3; i < 9; ++i) CHECK(av.vocab.is_mask(arm0.tokens[i]));
}

TEST_CASE("pair format rejects editing trajectories") {
    Parity par;
    Trajectory tr = par.trajectory({1, 0});
    ArmVocab av(par.vocab, 16);
    CHECK_THROWS_AS(arm_sequentialize(av, tr, ArmFormat::PAIR), ArmFormatError);
}

TEST_CASE("triplet replay reproduces final states") {
    Parity par;
    ArmVocab av(par.vocab, 64);
    Rng rng(77);
    for (int trial = 0; trial < 500; ++trial) {
        int len = static_cast<int>(rng() % 12);
        std::vector<int> bits;
        for (int i = 0; i < len; ++i) bits.push_back(static_cast<int>(rng() % 2));
        Trajectory tr = par.trajectory(bits);
        SeqState arm = arm_sequentialize(av, tr, ArmFormat::TRIPLET);
        SeqState replayed = arm_triplet_replay(av, par.vocab, arm);
        CHECK(replayed == tr.final_state);
    }

    GraphTask gt;
    ArmVocab gav(gt.vocab(), 512);
    for (int trial = 0; trial < 100; ++trial) {
        GraphInstance g = random_graph_instance(4 + static_cast<int>(rng() % 4), rng);
        Trajectory tr = gt.trajectory(g, rng);
        SeqState arm = arm_sequentialize(gav, tr, ArmFormat::TRIPLET);
        SeqState replayed = arm_triplet_replay(gav, gt.vocab(), arm);
        CHECK(replayed == tr.final_state);
    }
}

TEST_CASE("trace export and trajectory round trip") {
    Parity par;
    Trace tr = decode(par.vocab, par.denoiser(), par.encode({1, 1, 0}),
                      StopCriterion::fixpoint(), 0);
    std::ostringstream os;
    write_trace_jsonl(os, par.vocab, tr);
    std::string text = os.str();
    CHECK(text.find("\"stop_reason\":\"fixpoint\"") != std::string::npos);
    CHECK(text.find("\"x\":[\"BOS\"") != std::string::npos);

    Trajectory traj = par.trajectory({1, 0, 1, 1});
    std::ostringstream os2;
    write_trajectory_jsonl(os2, par.vocab, traj, 3, "parity");
    std::istringstream is(os2.str());
    auto records = read_trajectory_jsonl(is, par.vocab);
    REQUIRE(records.size() == traj.steps.size());
    CHECK(records[0].episode == 3);
    CHECK(records[0].task == "parity");
    auto grouped = group_episodes(par.vocab, records);
    REQUIRE(grouped.size() == 1);
    CHECK(!replay_mismatch(par.vocab, grouped[0]).has_value());
    CHECK(grouped[0].final_state == traj.final_state);
}

TEST_CASE("manifest hashes cover outputs") {
    std::string path = "manifest_test_artifact.txt";
    {
        std::ofstream f(path);
        f << "hello";
    }
    RunManifest m;
    m.command = "selftest";
    m.outputs = {path};
    m.write(path + ".manifest.json");
    std::ifstream f(path + ".manifest.json");
    std::string all((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(all.find("fnv1a64") != std::string::npos);
    CHECK(fnv1a_bytes("hello", 5) == fnv1a_file(path));
    std::remove(path.c_str());
    std::remove((path + ".manifest.json").c_str());
}
