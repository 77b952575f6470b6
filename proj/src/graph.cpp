#include "cohere/graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>

#include "cohere/errors.hpp"
#include "cohere/sign.hpp"
#include "cohere/spin.hpp"
#include "cohere/system.hpp"

namespace cohere {

std::string_view to_string(SignLabel s) {
    switch (s) {
        case SignLabel::Plus: return "+";
        case SignLabel::Minus: return "-";
        case SignLabel::Theta: return "?";
    }
    return "?";
}

SignLabel operator*(SignLabel a, SignLabel b) {
    if (a == SignLabel::Theta || b == SignLabel::Theta) return SignLabel::Theta;
    return a == b ? SignLabel::Plus : SignLabel::Minus;
}

std::string_view to_string(SystemClass c) {
    switch (c) {
        case SystemClass::Cooperative: return "cooperative";
        case SystemClass::Quasicooperative: return "quasicooperative";
        case SystemClass::Coherent: return "coherent";
        case SystemClass::Incoherent: return "incoherent";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// InteractionGraph

InteractionGraph::InteractionGraph(int n) : InteractionGraph(n, {}) {}

InteractionGraph::InteractionGraph(int n, std::vector<Edge> edges)
    : n_(n),
      edges_(std::move(edges)),
      matrix_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n)),
      out_(static_cast<std::size_t>(n)),
      in_(static_cast<std::size_t>(n)) {
    if (n < 0) throw std::invalid_argument("graph size must be non-negative");
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return std::pair(a.from, a.to) < std::pair(b.from, b.to); });
    for (const Edge& e : edges_) {
        if (e.from < 0 || e.to < 0 || e.from >= n || e.to >= n)
            throw std::invalid_argument("edge endpoint out of range: " + std::to_string(e.from + 1) + " -> " +
                                        std::to_string(e.to + 1));
        if (e.from == e.to) throw std::invalid_argument("self-edge at vertex " + std::to_string(e.from + 1));
        auto& slot = matrix_[static_cast<std::size_t>(e.from * n + e.to)];
        if (slot) throw std::invalid_argument("duplicate edge " + std::to_string(e.from + 1) + " -> " +
                                              std::to_string(e.to + 1));
        slot = e.label;
        out_[static_cast<std::size_t>(e.from)].push_back(e.to);
        in_[static_cast<std::size_t>(e.to)].push_back(e.from);
    }
    for (auto& v : in_) std::sort(v.begin(), v.end());
}

std::optional<SignLabel> InteractionGraph::label(int from, int to) const {
    if (from < 0 || to < 0 || from >= n_ || to >= n_) return std::nullopt;
    return matrix_[static_cast<std::size_t>(from * n_ + to)];
}

InteractionGraph InteractionGraph::induced(const std::vector<int>& vertices) const {
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < vertices.size(); ++a)
        for (std::size_t b = 0; b < vertices.size(); ++b)
            if (auto l = label(vertices[a], vertices[b])) edges.push_back({static_cast<int>(a), static_cast<int>(b), *l});
    return InteractionGraph(static_cast<int>(vertices.size()), std::move(edges));
}

InteractionGraph build_interaction_graph(const SystemDef& s, const SignOptions& opts) {
    std::vector<Edge> edges;
    for (int i = 0; i < s.n; ++i) {
        for (int j = 0; j < s.n; ++j) {
            if (i == j) continue;
            const SignVerdict v = sign_of_partial(s, i, j, opts);
            switch (v.sign) {
                case Sign::Zero: break;
                case Sign::Plus: edges.push_back({j, i, SignLabel::Plus}); break;
                case Sign::Minus: edges.push_back({j, i, SignLabel::Minus}); break;
                case Sign::Theta: edges.push_back({j, i, SignLabel::Theta}); break;
            }
        }
    }
    return InteractionGraph(s.n, std::move(edges));
}

InteractionGraph build_interaction_graph(const SystemDef& s) { return build_interaction_graph(s, SignOptions{}); }

// ---------------------------------------------------------------------------
// Loops

std::vector<std::pair<int, int>> Loop::edges() const {
    std::vector<std::pair<int, int>> out;
    for (std::size_t k = 0; k < vertices.size(); ++k)
        out.emplace_back(vertices[k], vertices[(k + 1) % vertices.size()]);
    return out;
}

SignLabel loop_sign(const InteractionGraph& g, const Loop& loop) {
    if (loop.vertices.size() < 2) throw std::invalid_argument("a loop needs at least two edges");
    SignLabel product = SignLabel::Plus;
    for (auto [u, v] : loop.edges()) {
        auto l = g.label(u, v);
        if (!l) throw std::invalid_argument("loop step " + std::to_string(u + 1) + " -> " + std::to_string(v + 1) +
                                            " is not an edge");
        product = product * *l;
    }
    return product;
}

Condensation scc(const InteractionGraph& g) {
    const int n = g.n();
    std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
    std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
    std::vector<int> stack;
    std::vector<std::vector<int>> comps;
    int counter = 0;

    std::function<void(int)> strongconnect = [&](int v) {
        const auto sv = static_cast<std::size_t>(v);
        index[sv] = low[sv] = counter++;
        stack.push_back(v);
        on_stack[sv] = true;
        for (int w : g.successors(v)) {
            const auto sw = static_cast<std::size_t>(w);
            if (index[sw] < 0) {
                strongconnect(w);
                low[sv] = std::min(low[sv], low[sw]);
            } else if (on_stack[sw]) {
                low[sv] = std::min(low[sv], index[sw]);
            }
        }
        if (low[sv] == index[sv]) {
            std::vector<int> comp;
            int w = -1;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[static_cast<std::size_t>(w)] = false;
                comp.push_back(w);
            } while (w != v);
            std::sort(comp.begin(), comp.end());
            comps.push_back(std::move(comp));
        }
    };
    for (int v = 0; v < n; ++v)
        if (index[static_cast<std::size_t>(v)] < 0) strongconnect(v);

    std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    Condensation c;
    c.components = std::move(comps);
    c.component_of.assign(static_cast<std::size_t>(n), -1);
    for (std::size_t k = 0; k < c.components.size(); ++k)
        for (int v : c.components[k]) c.component_of[static_cast<std::size_t>(v)] = static_cast<int>(k);
    for (const Edge& e : g.edges()) {
        const int a = c.component_of[static_cast<std::size_t>(e.from)];
        const int b = c.component_of[static_cast<std::size_t>(e.to)];
        if (a != b) c.edges.emplace_back(a, b);
    }
    std::sort(c.edges.begin(), c.edges.end());
    c.edges.erase(std::unique(c.edges.begin(), c.edges.end()), c.edges.end());
    return c;
}

std::vector<Edge> loop_edges(const InteractionGraph& g) {
    const Condensation c = scc(g);
    std::vector<Edge> out;
    for (const Edge& e : g.edges())
        if (c.component_of[static_cast<std::size_t>(e.from)] == c.component_of[static_cast<std::size_t>(e.to)])
            out.push_back(e);
    return out;
}

std::vector<SignedLoop> enumerate_simple_loops(const InteractionGraph& g, int max_len, std::size_t max_loops) {
    if (max_len < 2) throw std::invalid_argument("max_len must be at least 2");
    const int n = g.n();
    std::vector<SignedLoop> out;
    std::vector<int> path;
    std::vector<bool> used(static_cast<std::size_t>(n), false);

    // Cycles are rooted at their smallest vertex; the DFS only visits
    // larger vertices, so each cycle appears exactly once.
    std::function<void(int, int, SignLabel)> dfs = [&](int start, int v, SignLabel sign) {
        for (int w : g.successors(v)) {
            const SignLabel s = sign * *g.label(v, w);
            if (w == start) {
                if (path.size() >= 2) {
                    if (out.size() >= max_loops)
                        throw BudgetExceeded("more than " + std::to_string(max_loops) + " simple loops");
                    out.push_back({Loop{path}, s});
                }
                continue;
            }
            if (w < start || used[static_cast<std::size_t>(w)] || static_cast<int>(path.size()) >= max_len) continue;
            used[static_cast<std::size_t>(w)] = true;
            path.push_back(w);
            dfs(start, w, s);
            path.pop_back();
            used[static_cast<std::size_t>(w)] = false;
        }
    };
    for (int s = 0; s < n; ++s) {
        path.assign(1, s);
        used[static_cast<std::size_t>(s)] = true;
        dfs(s, s, SignLabel::Plus);
        used[static_cast<std::size_t>(s)] = false;
    }
    return out;
}

std::vector<Loop> split_closed_walk(const std::vector<int>& walk) {
    std::vector<Loop> cycles;
    if (walk.size() < 2) return cycles;
    std::vector<int> stack;
    for (int v : walk) {
        auto it = std::find(stack.begin(), stack.end(), v);
        if (it != stack.end()) {
            std::vector<int> cyc(it, stack.end());
            if (cyc.size() >= 2) cycles.push_back(Loop{cyc});
            stack.erase(it + 1, stack.end());
        } else {
            stack.push_back(v);
        }
    }
    return cycles;
}

std::vector<int> shortest_path(const InteractionGraph& g, int from, int to, const std::vector<bool>& allowed) {
    const int n = g.n();
    std::vector<int> parent(static_cast<std::size_t>(n), -2);
    std::queue<int> q;
    parent[static_cast<std::size_t>(from)] = -1;
    q.push(from);
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        if (u == to) break;
        for (int w : g.successors(u)) {
            if (!allowed[static_cast<std::size_t>(w)] || parent[static_cast<std::size_t>(w)] != -2) continue;
            parent[static_cast<std::size_t>(w)] = u;
            q.push(w);
        }
    }
    if (parent[static_cast<std::size_t>(to)] == -2) return {};
    std::vector<int> path;
    for (int v = to; v != -1; v = parent[static_cast<std::size_t>(v)]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

// ---------------------------------------------------------------------------
// Classification

bool is_positive(const InteractionGraph& g) {
    return std::all_of(g.edges().begin(), g.edges().end(), [](const Edge& e) { return e.label == SignLabel::Plus; });
}

bool is_quasipositive(const InteractionGraph& g) {
    const auto le = loop_edges(g);
    return std::all_of(le.begin(), le.end(), [](const Edge& e) { return e.label == SignLabel::Plus; });
}

ClassVerdict classify(const InteractionGraph& g) {
    if (is_positive(g)) return {SystemClass::Cooperative, std::nullopt};
    if (is_quasipositive(g)) return {SystemClass::Quasicooperative, std::nullopt};
    SpinResult r = find_consistent_spin(g);
    if (std::holds_alternative<SpinAssignment>(r)) return {SystemClass::Coherent, std::nullopt};
    return {SystemClass::Incoherent, std::get<SpinFailure>(r).loop};
}

// ---------------------------------------------------------------------------
// Subgraphs

Subgraph full_subgraph(const InteractionGraph& g, std::vector<int> vertices) {
    std::sort(vertices.begin(), vertices.end());
    vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
    Subgraph s;
    s.vertices = vertices;
    for (const Edge& e : g.edges())
        if (std::binary_search(vertices.begin(), vertices.end(), e.from) &&
            std::binary_search(vertices.begin(), vertices.end(), e.to))
            s.edges.emplace_back(e.from, e.to);
    return s;
}

SubgraphProperties subgraph_predicates(const InteractionGraph& g, const Subgraph& s) {
    if (s.vertices.empty()) throw std::invalid_argument("subgraph has no vertices");
    std::vector<bool> in(static_cast<std::size_t>(g.n()), false);
    for (int v : s.vertices) {
        if (v < 0 || v >= g.n()) throw std::invalid_argument("subgraph vertex out of range");
        if (in[static_cast<std::size_t>(v)]) throw std::invalid_argument("duplicate subgraph vertex");
        in[static_cast<std::size_t>(v)] = true;
    }
    std::vector<Edge> sub_edges;
    for (auto [u, v] : s.edges) {
        auto l = g.label(u, v);
        if (!l) throw std::invalid_argument("subgraph edge is not an edge of the parent graph");
        if (!in[static_cast<std::size_t>(u)] || !in[static_cast<std::size_t>(v)])
            throw std::invalid_argument("subgraph edge has an endpoint outside the subgraph");
        sub_edges.push_back({u, v, *l});
    }
    // duplicates are rejected by the graph constructor
    const InteractionGraph sg(g.n(), sub_edges);

    SubgraphProperties p;
    p.full = true;
    p.initial = true;
    p.terminal = true;
    for (const Edge& e : g.edges()) {
        const bool a = in[static_cast<std::size_t>(e.from)];
        const bool b = in[static_cast<std::size_t>(e.to)];
        if (a && b && !sg.has_edge(e.from, e.to)) p.full = false;
        if (!a && b) p.initial = false;
        if (a && !b) p.terminal = false;
    }

    // primary: every edge of s lies on a loop of s
    const Condensation c = scc(sg);
    p.primary = std::all_of(sub_edges.begin(), sub_edges.end(), [&](const Edge& e) {
        return c.component_of[static_cast<std::size_t>(e.from)] == c.component_of[static_cast<std::size_t>(e.to)];
    });
    p.strongly_connected = c.component_of[static_cast<std::size_t>(s.vertices.front())] ==
                               c.component_of[static_cast<std::size_t>(s.vertices.back())] &&
                           std::all_of(s.vertices.begin(), s.vertices.end(), [&](int v) {
                               return c.component_of[static_cast<std::size_t>(v)] ==
                                      c.component_of[static_cast<std::size_t>(s.vertices.front())];
                           });

    // connected: undirected reachability inside s
    std::vector<bool> seen(static_cast<std::size_t>(g.n()), false);
    std::vector<int> todo{s.vertices.front()};
    seen[static_cast<std::size_t>(s.vertices.front())] = true;
    std::size_t reached = 1;
    while (!todo.empty()) {
        const int u = todo.back();
        todo.pop_back();
        auto visit = [&](int w) {
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = true;
                ++reached;
                todo.push_back(w);
            }
        };
        for (int w : sg.successors(u)) visit(w);
        for (int w : sg.predecessors(u)) visit(w);
    }
    p.connected = reached == s.vertices.size();
    return p;
}

std::vector<Subgraph> fundamental_subgraphs(const InteractionGraph& g) {
    const Condensation c = scc(g);
    std::vector<bool> has_incoming(c.components.size(), false);
    for (auto [a, b] : c.edges) has_incoming[static_cast<std::size_t>(b)] = true;
    std::vector<Subgraph> out;
    for (std::size_t k = 0; k < c.components.size(); ++k)
        if (!has_incoming[k]) out.push_back(full_subgraph(g, c.components[k]));
    return out;
}

}  // namespace cohere
