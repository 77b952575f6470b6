#include "cohere/spin.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace cohere {

namespace {

int as_int(SignLabel l) { return l == SignLabel::Minus ? -1 : 1; }

// Loop through the Theta edge (u, v): the edge plus a shortest path back.
Loop loop_through(const InteractionGraph& g, const Edge& e, const std::vector<bool>& in_component) {
    std::vector<int> back = shortest_path(g, e.to, e.from, in_component);
    // back = v ... u; the loop is u, v, ..., (predecessor of u)
    std::vector<int> cyc{e.from};
    cyc.insert(cyc.end(), back.begin(), back.end() - 1);
    return Loop{cyc};
}

// A negative directed loop inside the strongly connected component `comp`,
// which is known to have no consistent spin. Directed BFS from the smallest
// vertex r assigns s(x) = sign of the tree path r -> x; some edge (u, v) has
// s(v) != s(u) h(u, v), and then exactly one of the closed walks
// r->u->v->r and r->v->r is negative. A negative closed walk splits into
// simple cycles, at least one of them negative.
Loop negative_loop_in(const InteractionGraph& g, const std::vector<int>& comp) {
    std::vector<bool> allowed(static_cast<std::size_t>(g.n()), false);
    for (int v : comp) allowed[static_cast<std::size_t>(v)] = true;
    const int root = comp.front();

    std::vector<int> parent(static_cast<std::size_t>(g.n()), -2);
    std::vector<int> s(static_cast<std::size_t>(g.n()), 0);
    std::queue<int> q;
    parent[static_cast<std::size_t>(root)] = -1;
    s[static_cast<std::size_t>(root)] = 1;
    q.push(root);
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int w : g.successors(u)) {
            if (!allowed[static_cast<std::size_t>(w)] || parent[static_cast<std::size_t>(w)] != -2) continue;
            parent[static_cast<std::size_t>(w)] = u;
            s[static_cast<std::size_t>(w)] = s[static_cast<std::size_t>(u)] * as_int(*g.label(u, w));
            q.push(w);
        }
    }
    auto tree_path = [&](int to) {
        std::vector<int> p;
        for (int v = to; v != -1; v = parent[static_cast<std::size_t>(v)]) p.push_back(v);
        std::reverse(p.begin(), p.end());
        return p;
    };
    auto walk_sign = [&](const std::vector<int>& w) {
        SignLabel prod = SignLabel::Plus;
        for (std::size_t k = 0; k + 1 < w.size(); ++k) prod = prod * *g.label(w[k], w[k + 1]);
        return prod;
    };

    for (int u : comp) {
        for (int v : g.successors(u)) {
            if (!allowed[static_cast<std::size_t>(v)]) continue;
            if (s[static_cast<std::size_t>(v)] == s[static_cast<std::size_t>(u)] * as_int(*g.label(u, v))) continue;
            const std::vector<int> back = shortest_path(g, v, root, allowed);  // v ... r
            std::vector<int> w1 = tree_path(u);
            w1.insert(w1.end(), back.begin(), back.end());
            std::vector<int> w2 = tree_path(v);
            w2.insert(w2.end(), back.begin() + 1, back.end());
            const std::vector<int>& neg = walk_sign(w1) == SignLabel::Minus ? w1 : w2;
            for (const Loop& l : split_closed_walk(neg))
                if (loop_sign(g, l) == SignLabel::Minus) return l;
        }
    }
    throw std::logic_error("negative_loop_in: component admits a consistent spin");
}

}  // namespace

SpinResult find_consistent_spin(const InteractionGraph& g) {
    const int n = g.n();
    const Condensation c = scc(g);
    const std::vector<Edge> le = loop_edges(g);

    auto component_mask = [&](int v) {
        std::vector<bool> mask(static_cast<std::size_t>(n), false);
        for (int w : c.components[static_cast<std::size_t>(c.component_of[static_cast<std::size_t>(v)])])
            mask[static_cast<std::size_t>(w)] = true;
        return mask;
    };

    for (const Edge& e : le)
        if (e.label == SignLabel::Theta)
            return SpinFailure{SpinFailure::Reason::AmbiguousLoopEdge, loop_through(g, e, component_mask(e.from))};

    // undirected view of the loop edges
    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(n));
    for (const Edge& e : le) {
        adj[static_cast<std::size_t>(e.from)].emplace_back(e.to, as_int(e.label));
        adj[static_cast<std::size_t>(e.to)].emplace_back(e.from, as_int(e.label));
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());

    SpinAssignment out{std::vector<int>(static_cast<std::size_t>(n), 0)};
    for (int root = 0; root < n; ++root) {
        if (out.sigma[static_cast<std::size_t>(root)] != 0) continue;
        out.sigma[static_cast<std::size_t>(root)] = 1;
        std::queue<int> q;
        q.push(root);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (auto [w, h] : adj[static_cast<std::size_t>(u)]) {
                const int want = out.sigma[static_cast<std::size_t>(u)] * h;
                int& sw = out.sigma[static_cast<std::size_t>(w)];
                if (sw == 0) {
                    sw = want;
                    q.push(w);
                } else if (sw != want) {
                    return SpinFailure{SpinFailure::Reason::NegativeLoop,
                                       negative_loop_in(g, c.components[static_cast<std::size_t>(
                                                               c.component_of[static_cast<std::size_t>(u)])])};
                }
            }
        }
    }
    return out;
}

bool verify_spin(const InteractionGraph& g, const SpinAssignment& sigma) {
    if (static_cast<int>(sigma.sigma.size()) != g.n()) throw std::invalid_argument("spin assignment has wrong size");
    for (const Edge& e : loop_edges(g)) {
        if (e.label == SignLabel::Theta) return false;
        if (sigma[e.from] * sigma[e.to] != as_int(e.label)) return false;
    }
    return true;
}

}  // namespace cohere
