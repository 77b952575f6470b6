#pragma once

// Sign-labelled interaction graphs, their loop structure and the subgraph
// vocabulary used by the cascade construction.
//
// Vertices are 0-based. Edge (j, i) means x_j appears in F_i. Graphs never
// contain self-edges and carry at most one edge per ordered pair.

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace cohere {

struct SystemDef;
struct SignOptions;

enum class SignLabel { Plus, Minus, Theta };

std::string_view to_string(SignLabel s);
/// Product of labels; Theta absorbs.
SignLabel operator*(SignLabel a, SignLabel b);

struct Edge {
    int from = 0;
    int to = 0;
    SignLabel label = SignLabel::Plus;

    friend bool operator==(const Edge&, const Edge&) = default;
};

class InteractionGraph {
public:
    explicit InteractionGraph(int n = 0);
    /// Throws std::invalid_argument on self-edges, duplicate pairs or
    /// out-of-range endpoints.
    InteractionGraph(int n, std::vector<Edge> edges);

    int n() const { return n_; }
    /// Sorted by (from, to).
    const std::vector<Edge>& edges() const { return edges_; }
    std::optional<SignLabel> label(int from, int to) const;
    bool has_edge(int from, int to) const { return label(from, to).has_value(); }
    /// Ascending.
    const std::vector<int>& successors(int v) const { return out_[static_cast<std::size_t>(v)]; }
    const std::vector<int>& predecessors(int v) const { return in_[static_cast<std::size_t>(v)]; }

    /// Graph on `vertices` (relabelled 0..k-1 in the given order) with every
    /// parent edge between them.
    InteractionGraph induced(const std::vector<int>& vertices) const;

    friend bool operator==(const InteractionGraph& a, const InteractionGraph& b) {
        return a.n_ == b.n_ && a.edges_ == b.edges_;
    }

private:
    int n_;
    std::vector<Edge> edges_;
    std::vector<std::optional<SignLabel>> matrix_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;
};

/// Edge (j, i) present iff dF_i/dx_j is not symbolically zero, labelled by
/// its sign verdict. Conservative Theta labels are indistinguishable here;
/// callers wanting the evidence use sign_of_partial directly.
InteractionGraph build_interaction_graph(const SystemDef& s, const SignOptions& opts);
InteractionGraph build_interaction_graph(const SystemDef& s);

/// A loop is recorded by its vertex cycle v0 -> v1 -> ... -> v_{k-1} -> v0.
struct Loop {
    std::vector<int> vertices;

    std::vector<std::pair<int, int>> edges() const;
    friend bool operator==(const Loop&, const Loop&) = default;
};

/// Product of the loop's labels. Throws std::invalid_argument when a loop
/// step is not an edge of g.
SignLabel loop_sign(const InteractionGraph& g, const Loop& loop);

struct Condensation {
    /// Components ordered by smallest vertex, vertices ascending within.
    std::vector<std::vector<int>> components;
    std::vector<int> component_of;
    /// Sorted, duplicate-free edges between component indices.
    std::vector<std::pair<int, int>> edges;
};

Condensation scc(const InteractionGraph& g);

/// Edges lying on at least one loop: those whose endpoints share a component.
std::vector<Edge> loop_edges(const InteractionGraph& g);

struct SignedLoop {
    Loop loop;
    SignLabel sign = SignLabel::Plus;
};

/// All simple directed cycles of length 2..max_len, each listed once with
/// its smallest vertex first. Exponential; meant as a test oracle. Throws
/// BudgetExceeded once more than `max_loops` cycles have been found.
std::vector<SignedLoop> enumerate_simple_loops(const InteractionGraph& g, int max_len,
                                               std::size_t max_loops = 1'000'000);

enum class SystemClass { Cooperative, Quasicooperative, Coherent, Incoherent };

std::string_view to_string(SystemClass c);

struct ClassVerdict {
    SystemClass klass = SystemClass::Cooperative;
    /// Present iff klass == Incoherent: a loop of sign -1 or Theta.
    std::optional<Loop> witness;
};

ClassVerdict classify(const InteractionGraph& g);

bool is_positive(const InteractionGraph& g);
bool is_quasipositive(const InteractionGraph& g);

struct Subgraph {
    std::vector<int> vertices;  // sorted, unique
    std::vector<std::pair<int, int>> edges;  // sorted

    friend bool operator==(const Subgraph&, const Subgraph&) = default;
};

/// Subgraph on `vertices` with every parent edge between them.
Subgraph full_subgraph(const InteractionGraph& g, std::vector<int> vertices);

struct SubgraphProperties {
    bool full = false;
    bool initial = false;
    bool terminal = false;
    bool primary = false;
    bool connected = false;
    bool strongly_connected = false;
};

/// Throws std::invalid_argument if `s` is not a subgraph of `g` (including
/// the empty vertex set).
SubgraphProperties subgraph_predicates(const InteractionGraph& g, const Subgraph& s);

/// Full subgraphs on the source components of the condensation (components
/// with no incoming condensation edge), ordered by smallest vertex.
std::vector<Subgraph> fundamental_subgraphs(const InteractionGraph& g);

/// Splits a closed walk (first vertex repeated at the end) into simple
/// cycles whose edges partition the walk's edges.
std::vector<Loop> split_closed_walk(const std::vector<int>& walk);

/// Shortest directed path from `from` to `to` through vertices for which
/// `allowed` is true, visiting successors in ascending order. Includes both
/// endpoints; empty when unreachable.
std::vector<int> shortest_path(const InteractionGraph& g, int from, int to, const std::vector<bool>& allowed);

}  // namespace cohere
