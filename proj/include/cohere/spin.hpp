#pragma once

// Consistent spin assignments: sigma(u) * sigma(v) == h(u, v) on every edge
// that lies on a loop. One exists exactly when every loop is positive.

#include <variant>
#include <vector>

#include "cohere/graph.hpp"

namespace cohere {

struct SpinAssignment {
    std::vector<int> sigma;  // +1 or -1 per vertex

    int operator[](int v) const { return sigma[static_cast<std::size_t>(v)]; }
    friend bool operator==(const SpinAssignment&, const SpinAssignment&) = default;
};

struct SpinFailure {
    enum class Reason { AmbiguousLoopEdge, NegativeLoop };
    Reason reason = Reason::NegativeLoop;
    /// Directed loop with label product -1, or containing a Theta edge.
    Loop loop;
};

using SpinResult = std::variant<SpinAssignment, SpinFailure>;

/// Canonical assignment: per undirected component of the loop-edge graph the
/// smallest vertex gets +1 and BFS (neighbours ascending) propagates
/// sigma(v) = sigma(u) h(u, v). Vertices on no loop edge get +1.
SpinResult find_consistent_spin(const InteractionGraph& g);

bool verify_spin(const InteractionGraph& g, const SpinAssignment& sigma);

}  // namespace cohere
