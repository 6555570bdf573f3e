#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "apgen/trajectory.hpp"

namespace apgen {

// Trace export, one JSON object per line with fields
//   step, x (token-name array), y, c (array of 3-bit arrays)
// and stop_reason on the last line.
void write_trace_jsonl(std::ostream& os, const Vocab& vocab, const Trace& trace);

// Trajectory files: one StepTuple per line with fields
//   episode, step, x, y, c, task, meta
// Token names as strings; meta is free-form key/value data.
void write_trajectory_jsonl(std::ostream& os, const Vocab& vocab, const Trajectory& tr,
                            int episode, const std::string& task,
                            const std::string& meta_json = "{}");

struct TrajectoryRecord {
    int episode = 0;
    int step = 0;
    std::string task;
    StepTuple tuple;
};

// Reads every record in a trajectory file, resolving token names via vocab.
std::vector<TrajectoryRecord> read_trajectory_jsonl(std::istream& is, const Vocab& vocab);

// Groups flat records back into per-episode trajectories (final_state is
// reconstructed by replaying the last tuple).
std::vector<Trajectory> group_episodes(const Vocab& vocab,
                                       const std::vector<TrajectoryRecord>& records);

}  // namespace apgen
