#include "apgen/tasks/graph.hpp"

#include <algorithm>
#include <array>
#include <queue>
#include <set>

namespace apgen::tasks {

int mincut_oracle(const GraphInstance& g) {
    const int n = g.n;
    std::vector<std::vector<int>> cap(static_cast<std::size_t>(n),
                                      std::vector<int>(static_cast<std::size_t>(n), 0));
    for (auto [u, v] : g.edges) cap[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] += 1;
    int flow = 0;
    while (true) {
        std::vector<int> parent(static_cast<std::size_t>(n), -1);
        parent[static_cast<std::size_t>(g.s)] = g.s;
        std::queue<int> q;
        q.push(g.s);
        while (!q.empty() && parent[static_cast<std::size_t>(g.t)] < 0) {
            int u = q.front();
            q.pop();
            for (int v = 0; v < n; ++v) {
                if (parent[static_cast<std::size_t>(v)] < 0 &&
                    cap[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] > 0) {
                    parent[static_cast<std::size_t>(v)] = u;
                    q.push(v);
                }
            }
        }
        if (parent[static_cast<std::size_t>(g.t)] < 0) break;
        for (int v = g.t; v != g.s; v = parent[static_cast<std::size_t>(v)]) {
            int u = parent[static_cast<std::size_t>(v)];
            cap[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] -= 1;
            cap[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] += 1;
        }
        ++flow;
    }
    return flow;
}

GraphTask::GraphTask(int max_nodes) : max_nodes_(max_nodes) {
    tok_mask_ = vocab_.add("M", /*is_mask=*/true);
    tok_src_ = vocab_.add("SRC");
    tok_tgt_ = vocab_.add("TGT");
    tok_graph_ = vocab_.add("GRAPH");
    tok_nodes_ = vocab_.add("NODES");
    tok_eoa_ = vocab_.add("EOA");
    tok_eos_ = vocab_.add("EOS");
    tok_fb_ = vocab_.add("FB");
    tok_inf_ = vocab_.add("INF");
    tok_nil_ = vocab_.add("NIL");
    first_lvl_ = static_cast<TokenId>(vocab_.size());
    for (int l = 0; l <= 9; ++l) vocab_.add("LVL" + std::to_string(l));
    first_id_ = static_cast<TokenId>(vocab_.size());
    for (int i = 0; i < max_nodes_; ++i) vocab_.add(std::to_string(i));
}

SeqState GraphTask::encode_prompt(const GraphInstance& g) const {
    if (g.n > max_nodes_) throw ContractError("graph exceeds the node-id token range");
    SeqState s;
    auto id = [&](int v) { return first_id_ + v; };
    s.tokens = {tok_src_, id(g.s), tok_tgt_, id(g.t), tok_graph_};
    for (auto [u, v] : g.edges) {
        s.tokens.push_back(id(u));
        s.tokens.push_back(id(v));
    }
    s.tokens.push_back(tok_nodes_);
    for (int v = 0; v < g.n; ++v) s.tokens.push_back(id(v));
    s.tokens.push_back(tok_eoa_);
    return s;
}

namespace {

// Mutable mirror of the expanded token state used while emitting tuples.
struct Layout {
    int n, m;
    // Position of the first token of edge e / node v in the expanded state.
    std::size_t edge_base(int e) const { return 5 + 4 * static_cast<std::size_t>(e); }
    std::size_t node_base(int v) const {
        return 5 + 4 * static_cast<std::size_t>(m) + 1 + 3 * static_cast<std::size_t>(v);
    }
};

struct TupleBuilder {
    const Vocab& vocab;
    SeqState cur;
    Trajectory* tr;
    TokenId filler;

    // Untouched masked positions hold their mask via the remask bit; writes
    // through unmask() clear it.
    DenoiserOutput blank() const {
        DenoiserOutput o;
        o.y.resize(cur.size());
        o.controls.assign(cur.size(), Controls{});
        for (std::size_t i = 0; i < cur.size(); ++i) {
            if (vocab.is_mask(cur.tokens[i])) {
                o.y[i] = filler;
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
        SeqState next = apply_transition(vocab, cur, o);
        tr->steps.push_back(StepTuple{cur, o.y, o.controls, o.insert_token});
        cur = std::move(next);
    }
};

}  // namespace

Trajectory GraphTask::trajectory(const GraphInstance& g, Rng& rng) const {
    (void)rng;  // the editing procedure is deterministic per instance
    if (g.s == g.t) throw ContractError("graph task requires s != t");
    const int n = g.n, m = static_cast<int>(g.edges.size());
    Layout lay{n, m};
    auto id = [&](int v) { return first_id_ + v; };
    auto lvl = [&](int l) {
        if (l > 9) throw ContractError("BFS level beyond LVL9");
        return first_lvl_ + l;
    };

    Trajectory tr;
    TupleBuilder b{vocab_, encode_prompt(g), &tr, tok_fb_};

    // --- Feature expansion -------------------------------------------------
    {
        // Step 1: a mask after each edge's second endpoint and each node id.
        DenoiserOutput o = b.blank();
        for (int e = 0; e < m; ++e) o.controls[5 + 2 * static_cast<std::size_t>(e) + 1].insert = true;
        std::size_t nodes_at = 5 + 2 * static_cast<std::size_t>(m) + 1;
        for (int v = 0; v < n; ++v) o.controls[nodes_at + static_cast<std::size_t>(v)].insert = true;
        b.commit(o);
    }
    {
        // Step 2: unmask those to FB / level while inserting the second slot.
        DenoiserOutput o = b.blank();
        for (int e = 0; e < m; ++e) {
            std::size_t p = 5 + 3 * static_cast<std::size_t>(e) + 2;
            b.unmask(o, p, tok_fb_);
            o.controls[p].insert = true;
        }
        std::size_t nodes_at = 5 + 3 * static_cast<std::size_t>(m) + 1;
        for (int v = 0; v < n; ++v) {
            std::size_t p = nodes_at + 2 * static_cast<std::size_t>(v) + 1;
            b.unmask(o, p, v == g.s ? lvl(0) : tok_inf_);
            o.controls[p].insert = true;
        }
        b.commit(o);
    }
    {
        // Step 3: node parent slots become NIL; edge second slots stay masked.
        DenoiserOutput o = b.blank();
        for (int v = 0; v < n; ++v) b.unmask(o, lay.node_base(v) + 2, tok_nil_);
        b.commit(o);
    }

    // Residual availability mirrors the slot tokens.
    std::vector<std::array<bool, 2>> avail(static_cast<std::size_t>(m));
    for (int e = 0; e < m; ++e) avail[static_cast<std::size_t>(e)] = {true, false};

    auto residual_neighbors = [&](int u) {
        // (neighbor, edge, used slot1?) triples leaving u, in edge order.
        std::vector<std::tuple<int, int, bool>> out;
        for (int e = 0; e < m; ++e) {
            auto [a, c] = g.edges[static_cast<std::size_t>(e)];
            if (a == u && avail[static_cast<std::size_t>(e)][0]) out.emplace_back(c, e, true);
            if (c == u && avail[static_cast<std::size_t>(e)][1]) out.emplace_back(a, e, false);
        }
        return out;
    };

    int augmentations = 0;
    std::vector<int> level(static_cast<std::size_t>(n));
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::vector<int> parent_edge(static_cast<std::size_t>(n));

    while (true) {
        // --- Layered BFS; one remask+unmask tuple pair per layer -----------
        std::fill(level.begin(), level.end(), -1);
        std::fill(parent.begin(), parent.end(), -1);
        std::fill(parent_edge.begin(), parent_edge.end(), -1);
        level[static_cast<std::size_t>(g.s)] = 0;
        std::vector<int> frontier{g.s};
        bool reached = false;
        int depth = 0;
        while (!frontier.empty() && !reached) {
            ++depth;
            std::vector<int> next;
            for (int u : frontier) {
                for (auto [v, e, fwd] : residual_neighbors(u)) {
                    if (level[static_cast<std::size_t>(v)] >= 0) continue;
                    if (std::find(next.begin(), next.end(), v) != next.end()) continue;
                    next.push_back(v);
                    parent[static_cast<std::size_t>(v)] = u;
                    parent_edge[static_cast<std::size_t>(v)] = e;
                }
            }
            std::sort(next.begin(), next.end());
            if (next.empty()) break;
            DenoiserOutput re = b.blank();
            for (int v : next) {
                re.controls[lay.node_base(v) + 1].remask = true;
                re.controls[lay.node_base(v) + 2].remask = true;
            }
            b.commit(re);
            DenoiserOutput un = b.blank();
            for (int v : next) {
                level[static_cast<std::size_t>(v)] = depth;
                b.unmask(un, lay.node_base(v) + 1, lvl(depth));
                b.unmask(un, lay.node_base(v) + 2, id(parent[static_cast<std::size_t>(v)]));
            }
            b.commit(un);
            if (level[static_cast<std::size_t>(g.t)] >= 0) reached = true;
            frontier = std::move(next);
        }

        if (!reached) break;  // no augmenting path left

        // --- Path augmentation: swap slots along the path, reset features --
        ++augmentations;
        DenoiserOutput swp = b.blank();
        for (int v = g.t; v != g.s; v = parent[static_cast<std::size_t>(v)]) {
            int e = parent_edge[static_cast<std::size_t>(v)];
            bool fwd = g.edges[static_cast<std::size_t>(e)].first ==
                       parent[static_cast<std::size_t>(v)];
            std::size_t s1 = lay.edge_base(e) + 2, s2 = lay.edge_base(e) + 3;
            std::size_t from = fwd ? s1 : s2, to = fwd ? s2 : s1;
            swp.controls[from].remask = true;  // FB -> M
            b.unmask(swp, to, tok_fb_);        // M -> FB
            avail[static_cast<std::size_t>(e)] = {!fwd, fwd};
        }
        for (int v = 0; v < n; ++v) {
            swp.controls[lay.node_base(v) + 1].remask = true;
            swp.controls[lay.node_base(v) + 2].remask = true;
        }
        b.commit(swp);
        DenoiserOutput rst = b.blank();
        for (int v = 0; v < n; ++v) {
            b.unmask(rst, lay.node_base(v) + 1, v == g.s ? lvl(0) : tok_inf_);
            b.unmask(rst, lay.node_base(v) + 2, tok_nil_);
        }
        b.commit(rst);
    }

    // --- Termination: remove the cut edges, then close with EOS ------------
    std::vector<int> cut;
    for (int e = 0; e < m; ++e) {
        auto [u, v] = g.edges[static_cast<std::size_t>(e)];
        bool u_in = level[static_cast<std::size_t>(u)] >= 0;
        bool v_in = level[static_cast<std::size_t>(v)] >= 0;
        if (u_in && !v_in) cut.push_back(e);
    }
    {
        DenoiserOutput o = b.blank();
        for (int e : cut)
            for (std::size_t k = 0; k < 4; ++k) o.controls[lay.edge_base(e) + k].remask = true;
        b.commit(o);
    }
    {
        DenoiserOutput o = b.blank();
        for (int e : cut)
            for (std::size_t k = 0; k < 4; ++k) o.controls[lay.edge_base(e) + k].erase = true;
        o.controls[b.cur.size() - 1].insert = true;  // mask after EOA
        b.commit(o);
    }
    {
        DenoiserOutput o = b.blank();
        b.unmask(o, b.cur.size() - 1, tok_eos_);
        b.commit(o);
    }

    tr.final_state = b.cur;
    return tr;
}

std::optional<GraphTask::FinalGraph> GraphTask::parse_final(const SeqState& s) const {
    FinalGraph g;
    const auto& t = s.tokens;
    auto is_id = [&](TokenId x) { return x >= first_id_ && x < first_id_ + max_nodes_; };
    if (t.size() < 8 || t[0] != tok_src_ || !is_id(t[1]) || t[2] != tok_tgt_ || !is_id(t[3]) ||
        t[4] != tok_graph_)
        return std::nullopt;
    g.s = t[1] - first_id_;
    g.t = t[3] - first_id_;
    std::size_t i = 5;
    while (i < t.size() && t[i] != tok_nodes_) {
        if (i + 3 >= t.size() || !is_id(t[i]) || !is_id(t[i + 1])) return std::nullopt;
        g.edges.emplace_back(t[i] - first_id_, t[i + 1] - first_id_);
        i += 4;
    }
    if (i >= t.size()) return std::nullopt;
    ++i;  // NODES
    int n = 0;
    while (i < t.size() && t[i] != tok_eoa_) {
        if (i + 2 >= t.size() || !is_id(t[i])) return std::nullopt;
        n = std::max(n, t[i] - first_id_ + 1);
        i += 3;
    }
    if (i >= t.size()) return std::nullopt;
    g.n = n;
    return g;
}

bool GraphTask::disconnected(const FinalGraph& g) const {
    std::vector<bool> seen(static_cast<std::size_t>(g.n), false);
    std::queue<int> q;
    q.push(g.s);
    seen[static_cast<std::size_t>(g.s)] = true;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (auto [a, b2] : g.edges) {
            if (a == u && !seen[static_cast<std::size_t>(b2)]) {
                seen[static_cast<std::size_t>(b2)] = true;
                q.push(b2);
            }
        }
    }
    return !seen[static_cast<std::size_t>(g.t)];
}

GraphInstance random_graph_instance(int n, Rng& rng) {
    static const std::array<std::pair<int, int>, 7> table{{
        {4, 12}, {5, 17}, {6, 23}, {7, 29}, {8, 36}, {9, 43}, {10, 50},
    }};
    int m = -1;
    for (auto [nn, mm] : table)
        if (nn == n) m = mm;
    if (m < 0) m = std::max(1, static_cast<int>(0.56 * n * (n - 1) + 0.5));
    m = std::min(m, n * (n - 1));

    GraphInstance g;
    g.n = n;
    std::vector<std::pair<int, int>> all;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (u != v) all.emplace_back(u, v);
    std::shuffle(all.begin(), all.end(), rng);
    g.edges.assign(all.begin(), all.begin() + m);
    std::sort(g.edges.begin(), g.edges.end());
    std::uniform_int_distribution<int> pick(0, n - 1);
    g.s = pick(rng);
    do {
        g.t = pick(rng);
    } while (g.t == g.s);
    return g;
}

}  // namespace apgen::tasks
