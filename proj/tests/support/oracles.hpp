#pragma once

// Brute-force reference implementations. None of these call into the graph
// algorithms under test.

#include <optional>
#include <vector>

#include "cohere/graph.hpp"

namespace cohere::testing {

struct OracleCycle {
    std::vector<int> vertices;  // smallest vertex first
    SignLabel sign = SignLabel::Plus;
};

/// Every simple directed cycle, by DFS from each start vertex over larger
/// vertices only.
std::vector<OracleCycle> oracle_cycles(const InteractionGraph& g);

/// Edges lying on some oracle cycle.
std::vector<std::pair<int, int>> oracle_loop_edges(const InteractionGraph& g);

/// True iff every cycle has sign Plus.
bool oracle_all_loops_positive(const InteractionGraph& g);

/// First assignment (in binary counting order, vertex 0 most significant)
/// that is consistent on every oracle loop edge.
std::optional<std::vector<int>> oracle_spin(const InteractionGraph& g);

bool oracle_cooperative(const InteractionGraph& g);
bool oracle_quasicooperative(const InteractionGraph& g);
bool oracle_coherent(const InteractionGraph& g);

/// Does the edge set, restricted to `vertices`, satisfy the definitions
/// literally (connected: undirected reachability over vertices and edges;
/// primary: every edge on a cycle of the subgraph; initial: no edge of g
/// enters from outside).
bool oracle_connected(int n, const std::vector<int>& vertices, const std::vector<std::pair<int, int>>& edges);
bool oracle_primary(int n, const std::vector<std::pair<int, int>>& edges);
bool oracle_initial(const InteractionGraph& g, const std::vector<int>& vertices);

/// Maximal connected primary initial subgraphs by brute force over every
/// vertex subset and every edge subset. Only for graphs with few edges.
std::vector<Subgraph> oracle_fundamental_exhaustive(const InteractionGraph& g);

/// Same family over vertex subsets only: for a fixed vertex set the largest
/// primary edge set is the set of edges lying on cycles inside it, and any
/// connected primary edge set is contained in it.
std::vector<Subgraph> oracle_fundamental_by_vertices(const InteractionGraph& g);

/// Every connected primary initial subgraph (exhaustive).
std::vector<Subgraph> oracle_cpi_subgraphs(const InteractionGraph& g);

}  // namespace cohere::testing
