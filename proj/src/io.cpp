#include "apgen/io.hpp"

#include <map>
#include <ostream>
#include <istream>

#include <json.hpp>

namespace apgen {

using nlohmann::json;

static json names_of(const Vocab& vocab, const std::vector<TokenId>& toks) {
    json arr = json::array();
    for (TokenId t : toks) arr.push_back(vocab.name(t));
    return arr;
}

static json controls_of(const std::vector<Controls>& cs) {
    json arr = json::array();
    for (const Controls& c : cs)
        arr.push_back(json::array({c.remask ? 1 : 0, c.insert ? 1 : 0, c.erase ? 1 : 0}));
    return arr;
}

void write_trace_jsonl(std::ostream& os, const Vocab& vocab, const Trace& trace) {
    for (std::size_t i = 0; i < trace.outputs.size(); ++i) {
        json rec;
        rec["step"] = i;
        rec["x"] = names_of(vocab, trace.states[i].tokens);
        rec["y"] = names_of(vocab, trace.outputs[i].y);
        rec["c"] = controls_of(trace.outputs[i].controls);
        os << rec.dump() << '\n';
    }
    json last;
    last["step"] = trace.outputs.size();
    last["x"] = names_of(vocab, trace.states.back().tokens);
    last["y"] = json::array();
    last["c"] = json::array();
    last["stop_reason"] = stop_reason_name(trace.stop_reason);
    os << last.dump() << '\n';
}

void write_trajectory_jsonl(std::ostream& os, const Vocab& vocab, const Trajectory& tr,
                            int episode, const std::string& task,
                            const std::string& meta_json) {
    json meta = json::parse(meta_json);
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
        const StepTuple& t = tr.steps[i];
        json rec;
        rec["episode"] = episode;
        rec["step"] = i;
        rec["x"] = names_of(vocab, t.x.tokens);
        rec["y"] = names_of(vocab, t.y);
        rec["c"] = controls_of(t.c);
        if (!t.insert_token.empty()) rec["insert_token"] = names_of(vocab, t.insert_token);
        rec["task"] = task;
        rec["meta"] = meta;
        os << rec.dump() << '\n';
    }
}

std::vector<TrajectoryRecord> read_trajectory_jsonl(std::istream& is, const Vocab& vocab) {
    std::vector<TrajectoryRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line);
        TrajectoryRecord r;
        r.episode = rec.at("episode").get<int>();
        r.step = rec.at("step").get<int>();
        r.task = rec.value("task", "");
        for (const auto& n : rec.at("x")) r.tuple.x.tokens.push_back(vocab.id(n.get<std::string>()));
        for (const auto& n : rec.at("y")) r.tuple.y.push_back(vocab.id(n.get<std::string>()));
        for (const auto& c : rec.at("c")) {
            Controls ctl;
            ctl.remask = c.at(0).get<int>() != 0;
            ctl.insert = c.at(1).get<int>() != 0;
            ctl.erase = c.at(2).get<int>() != 0;
            r.tuple.c.push_back(ctl);
        }
        if (rec.contains("insert_token"))
            for (const auto& n : rec.at("insert_token"))
                r.tuple.insert_token.push_back(vocab.id(n.get<std::string>()));
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Trajectory> group_episodes(const Vocab& vocab,
                                       const std::vector<TrajectoryRecord>& records) {
    std::map<int, Trajectory> by_episode;
    for (const auto& r : records) by_episode[r.episode].steps.push_back(r.tuple);
    std::vector<Trajectory> out;
    for (auto& [ep, tr] : by_episode) {
        if (!tr.steps.empty())
            tr.final_state = apply_transition(vocab, tr.steps.back().x,
                                              tr.steps.back().as_output());
        out.push_back(std::move(tr));
    }
    return out;
}

}  // namespace apgen
