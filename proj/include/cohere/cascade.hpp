#pragma once

// Elementary changes of variables and cascade decompositions.
//
// An ElementaryChange maps x to y with y_i = rho_i * x_{perm[i]}. Applying
// it to a system F gives G(y) = L F(L^-1 y), so L conjugates the flows and
// edge labels transport as h_G = rho_u rho_v h_F.

#include <span>
#include <vector>

#include "cohere/errors.hpp"
#include "cohere/graph.hpp"
#include "cohere/sign.hpp"
#include "cohere/system.hpp"

namespace cohere {

struct ElementaryChange {
    std::vector<int> perm;  // new coordinate i is old coordinate perm[i]
    std::vector<int> rho;  // +1 / -1

    static ElementaryChange identity(int n);

    int dim() const { return static_cast<int>(perm.size()); }
    bool is_identity() const;
    /// Throws std::invalid_argument unless perm is a bijection and rho is +-1.
    void validate() const;
    ElementaryChange inverse() const;
    /// y = L x
    std::vector<double> apply(std::span<const double> x) const;

    friend bool operator==(const ElementaryChange&, const ElementaryChange&) = default;
};

/// Raised by plan_transform/decompose on incoherent input.
class IncoherentError : public AnalysisError {
public:
    IncoherentError(const std::string& message, Loop witness)
        : AnalysisError(message), witness_(std::move(witness)) {}
    const Loop& witness() const { return witness_; }

private:
    Loop witness_;
};

/// Symbolic substitution x_{perm[i]} = rho_i y_i; domain intervals are
/// permuted and reflected where rho_i = -1.
SystemDef apply_change(const SystemDef& s, const ElementaryChange& c);

/// Label of (from, to) after the change, computed from g without touching
/// any system. Used to cross-check apply_change.
InteractionGraph transport_graph(const InteractionGraph& g, const ElementaryChange& c);

/// Spin flips rho_i = sigma(perm[i]) plus a permutation moving the
/// fundamental subgraph with the smallest vertex to positions 0..n1-1
/// (ascending), other vertices after it in ascending order.
ElementaryChange plan_transform(const InteractionGraph& g);

struct CascadeDecomposition {
    ElementaryChange change;
    /// Blocks in new coordinates; block k is the contiguous range
    /// [boundaries[k], boundaries[k+1]).
    std::vector<std::vector<int>> blocks;
    std::vector<int> boundaries;  // 0 = b0 < b1 < ... < b_m = n
    int top_index = 0;  // n1 = size of block 0
    std::vector<ClassVerdict> block_classes;
    ClassVerdict transformed_class;
    SystemDef transformed;
    InteractionGraph transformed_graph;

    /// The blocks as sets of original coordinates.
    std::vector<std::vector<int>> source_blocks() const;
};

/// Spin flips, then repeated peeling of the fundamental subgraph with the
/// smallest (original) vertex from what remains.
CascadeDecomposition decompose(const SystemDef& s, const SignOptions& opts = {});
/// Same, reusing an already computed interaction graph of s.
CascadeDecomposition decompose(const SystemDef& s, const InteractionGraph& g);
/// Graph-only variant: everything but `transformed`, which stays empty.
CascadeDecomposition decompose_graph(const InteractionGraph& g);

struct TriangularCheck {
    bool symbolic = true;
    bool numeric = true;
    double max_forbidden_entry = 0.0;
    bool ok() const { return symbolic && numeric; }
};

/// dF_i/dx_j must vanish for i < n1 <= j (0-based): symbolically, and as a
/// central-difference Jacobian at `points` seeded domain samples, with
/// |entry| <= tol. n1 == n is the trivial cascade and passes vacuously.
TriangularCheck check_block_triangular(const SystemDef& s, int n1, int points = 50, double tol = 1e-12,
                                       std::uint64_t seed = 42);
bool verify_block_triangular(const SystemDef& s, int n1);

/// First n1 fields of the transformed system on the first n1 intervals.
/// Throws std::logic_error if one of them references a later coordinate.
SystemDef top_system(const CascadeDecomposition& d);

struct FibreSystemDef {
    SystemDef parent;
    std::vector<double> base;  // equilibrium p of the top system
    SystemDef reduced;  // on coordinates n1..n-1, reindexed from 0
    DomainClass parent_class = DomainClass::Other;
    DomainClass inherited_class = DomainClass::Other;
};

/// Freezes the top coordinates at p. Throws AnalysisError if p is not an
/// equilibrium of the top system (|F1(p)|_inf > eq_tol), lies outside its
/// domain, or the cascade is trivial.
FibreSystemDef fibre_system(const CascadeDecomposition& d, std::span<const double> p, double eq_tol = 1e-9);

}  // namespace cohere
