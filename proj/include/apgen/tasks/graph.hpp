#pragma once

#include <optional>

#include "apgen/decode.hpp"
#include "apgen/trajectory.hpp"

namespace apgen::tasks {

// Directed unit-capacity graph instance for the min-cut editing task.
struct GraphInstance {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    int s = 0;
    int t = 0;
};

// Exact min s-t cut by plain augmenting-path max-flow over adjacency
// matrices; deliberately independent of the token machinery.
int mincut_oracle(const GraphInstance& g);

// Token layout:
//   SRC s TGT t GRAPH (u v slot1 slot2)*m NODES (id level parent)*n EOA [EOS]
// slot1/slot2 hold FB when the edge is traversable forward/backward in the
// residual graph and stay masked otherwise; levels run LVL0..LVL9 with INF
// for unreached nodes and NIL for an absent parent.
class GraphTask {
public:
    explicit GraphTask(int max_nodes = 50);

    const Vocab& vocab() const { return vocab_; }
    int max_nodes() const { return max_nodes_; }
    TokenId eos() const { return tok_eos_; }

    SeqState encode_prompt(const GraphInstance& g) const;

    // Full editing trajectory: feature expansion, layered BFS, path
    // augmentation, and min-cut removal at termination.
    Trajectory trajectory(const GraphInstance& g, Rng& rng) const;

    // Parses a terminal state back into the surviving edge list.
    struct FinalGraph {
        int n = 0;
        int s = 0;
        int t = 0;
        std::vector<std::pair<int, int>> edges;
    };
    std::optional<FinalGraph> parse_final(const SeqState& s) const;

    // True when the terminal state disconnects s from t using the surviving
    // edges in their original direction.
    bool disconnected(const FinalGraph& g) const;

private:
    int max_nodes_;
    Vocab vocab_;
    TokenId tok_src_, tok_tgt_, tok_graph_, tok_nodes_, tok_eoa_, tok_eos_;
    TokenId tok_fb_, tok_inf_, tok_nil_, tok_mask_;
    TokenId first_lvl_, first_id_;
};

// Random instance with the edge count used for its size in the reference
// statistics (n=4 -> 12, 5 -> 17, 6 -> 23, 7 -> 29, 8 -> 36, 9 -> 43,
// 10 -> 50); other sizes scale as ~56% of the possible arcs.
GraphInstance random_graph_instance(int n, Rng& rng);

}  // namespace apgen::tasks
