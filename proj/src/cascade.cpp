#include "cohere/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cohere/spin.hpp"

namespace cohere {

// ---------------------------------------------------------------------------
// ElementaryChange

ElementaryChange ElementaryChange::identity(int n) {
    ElementaryChange c;
    c.perm.resize(static_cast<std::size_t>(n));
    std::iota(c.perm.begin(), c.perm.end(), 0);
    c.rho.assign(static_cast<std::size_t>(n), 1);
    return c;
}

bool ElementaryChange::is_identity() const { return *this == identity(dim()); }

void ElementaryChange::validate() const {
    if (perm.size() != rho.size()) throw std::invalid_argument("perm and rho differ in length");
    std::vector<bool> seen(perm.size(), false);
    for (int p : perm) {
        if (p < 0 || p >= dim() || seen[static_cast<std::size_t>(p)])
            throw std::invalid_argument("perm is not a permutation");
        seen[static_cast<std::size_t>(p)] = true;
    }
    for (int r : rho)
        if (r != 1 && r != -1) throw std::invalid_argument("rho entries must be +1 or -1");
}

ElementaryChange ElementaryChange::inverse() const {
    validate();
    ElementaryChange inv;
    inv.perm.resize(perm.size());
    inv.rho.resize(rho.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        const auto k = static_cast<std::size_t>(perm[i]);
        inv.perm[k] = static_cast<int>(i);
        inv.rho[k] = rho[i];
    }
    return inv;
}

std::vector<double> ElementaryChange::apply(std::span<const double> x) const {
    if (x.size() != perm.size()) throw std::invalid_argument("dimension mismatch in change of variables");
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < perm.size(); ++i) y[i] = rho[i] * x[static_cast<std::size_t>(perm[i])];
    return y;
}

// ---------------------------------------------------------------------------
// Transforming systems and graphs

SystemDef apply_change(const SystemDef& s, const ElementaryChange& c) {
    c.validate();
    if (c.dim() != s.n) throw std::invalid_argument("change of variables has wrong dimension");
    const ElementaryChange inv = c.inverse();

    // x_k = rho_{inv(k)} y_{inv(k)}
    auto leaf = [&](const Expr& e) -> std::optional<Expr> {
        if (e.kind() != Expr::Kind::Variable) return std::nullopt;
        const auto k = static_cast<std::size_t>(e.index());
        const int target = inv.perm[k];
        if (target == e.index() && inv.rho[k] == 1) return std::nullopt;
        Expr y = Expr::variable(target);
        return inv.rho[k] == 1 ? y : make_neg(y);
    };

    SystemDef g;
    g.n = s.n;
    g.params = s.params;
    std::vector<CoordInterval> coords;
    for (int i = 0; i < s.n; ++i) {
        const auto src = static_cast<std::size_t>(c.perm[static_cast<std::size_t>(i)]);
        Expr f = substitute(s.fields[src], leaf);
        if (c.rho[static_cast<std::size_t>(i)] == -1) f = make_neg(f);
        g.fields.push_back(f);
        const CoordInterval& iv = s.domain[static_cast<int>(src)];
        coords.push_back(c.rho[static_cast<std::size_t>(i)] == -1 ? iv.reflected() : iv);
    }
    g.domain = DomainBox(std::move(coords));
    return g;
}

InteractionGraph transport_graph(const InteractionGraph& g, const ElementaryChange& c) {
    const ElementaryChange inv = c.inverse();
    std::vector<Edge> edges;
    for (const Edge& e : g.edges()) {
        const int u = inv.perm[static_cast<std::size_t>(e.from)];
        const int v = inv.perm[static_cast<std::size_t>(e.to)];
        SignLabel l = e.label;
        if (l != SignLabel::Theta && c.rho[static_cast<std::size_t>(u)] * c.rho[static_cast<std::size_t>(v)] == -1)
            l = l == SignLabel::Plus ? SignLabel::Minus : SignLabel::Plus;
        edges.push_back({u, v, l});
    }
    return InteractionGraph(g.n(), std::move(edges));
}

namespace {

SpinAssignment spin_or_throw(const InteractionGraph& g) {
    SpinResult r = find_consistent_spin(g);
    if (auto* f = std::get_if<SpinFailure>(&r)) {
        const char* why = f->reason == SpinFailure::Reason::AmbiguousLoopEdge ? "a loop edge has ambiguous sign"
                                                                                : "the graph has a negative loop";
        throw IncoherentError(std::string("system is not coherent: ") + why, f->loop);
    }
    return std::get<SpinAssignment>(r);
}

ElementaryChange with_spin(std::vector<int> order, const SpinAssignment& sigma) {
    ElementaryChange c;
    c.perm = std::move(order);
    for (int v : c.perm) c.rho.push_back(sigma[v]);
    return c;
}

}  // namespace

ElementaryChange plan_transform(const InteractionGraph& g) {
    const SpinAssignment sigma = spin_or_throw(g);
    std::vector<int> order;
    if (g.n() > 0) {
        const auto fundamentals = fundamental_subgraphs(g);
        order = fundamentals.front().vertices;
        for (int v = 0; v < g.n(); ++v)
            if (!std::binary_search(fundamentals.front().vertices.begin(), fundamentals.front().vertices.end(), v))
                order.push_back(v);
    }
    return with_spin(std::move(order), sigma);
}

// ---------------------------------------------------------------------------
// Decomposition

std::vector<std::vector<int>> CascadeDecomposition::source_blocks() const {
    std::vector<std::vector<int>> out;
    for (const auto& b : blocks) {
        std::vector<int> src;
        for (int v : b) src.push_back(change.perm[static_cast<std::size_t>(v)]);
        std::sort(src.begin(), src.end());
        out.push_back(std::move(src));
    }
    return out;
}

CascadeDecomposition decompose(const SystemDef& s, const SignOptions& opts) {
    return decompose(s, build_interaction_graph(s, opts));
}

CascadeDecomposition decompose(const SystemDef& s, const InteractionGraph& g) {
    if (g.n() != s.n) throw std::invalid_argument("graph does not match system dimension");
    CascadeDecomposition d = decompose_graph(g);
    d.transformed = apply_change(s, d.change);
    return d;
}

CascadeDecomposition decompose_graph(const InteractionGraph& g) {
    if (g.n() == 0) throw std::invalid_argument("cannot decompose an empty system");
    const SpinAssignment sigma = spin_or_throw(g);

    // peel fundamental subgraphs of what remains, smallest vertex first
    std::vector<int> remaining(static_cast<std::size_t>(g.n()));
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<int> order;
    std::vector<int> sizes;
    while (!remaining.empty()) {
        const InteractionGraph h = g.induced(remaining);
        const auto fundamentals = fundamental_subgraphs(h);
        std::vector<int> block;
        for (int local : fundamentals.front().vertices) block.push_back(remaining[static_cast<std::size_t>(local)]);
        std::sort(block.begin(), block.end());
        order.insert(order.end(), block.begin(), block.end());
        sizes.push_back(static_cast<int>(block.size()));
        std::vector<int> rest;
        for (int v : remaining)
            if (!std::binary_search(block.begin(), block.end(), v)) rest.push_back(v);
        remaining = std::move(rest);
    }

    CascadeDecomposition d;
    d.change = with_spin(order, sigma);
    d.transformed_graph = transport_graph(g, d.change);
    d.transformed_class = classify(d.transformed_graph);
    int start = 0;
    d.boundaries.push_back(0);
    for (int size : sizes) {
        std::vector<int> block(static_cast<std::size_t>(size));
        std::iota(block.begin(), block.end(), start);
        d.block_classes.push_back(classify(d.transformed_graph.induced(block)));
        d.blocks.push_back(std::move(block));
        start += size;
        d.boundaries.push_back(start);
    }
    d.top_index = sizes.front();
    return d;
}

TriangularCheck check_block_triangular(const SystemDef& s, int n1, int points, double tol, std::uint64_t seed) {
    if (n1 < 1 || n1 > s.n) throw std::invalid_argument("block boundary must satisfy 1 <= n1 <= n");
    TriangularCheck out;
    for (int i = 0; i < n1 && out.symbolic; ++i)
        for (int j = n1; j < s.n; ++j)
            if (sign_of_partial(s, i, j).sign != Sign::Zero) {
                out.symbolic = false;
                break;
            }

    const FieldEvaluator f(s);
    for (auto& x : random_domain_points(s.domain, points, 10.0, seed)) {
        for (int j = n1; j < s.n; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            const double h = 1e-6 * std::max(1.0, std::abs(x[sj]));
            const double xj = x[sj];
            std::vector<double> plus, minus;
            try {
                x[sj] = xj + h;
                plus = f(x);
                x[sj] = xj - h;
                minus = f(x);
            } catch (const EvalError&) {
                x[sj] = xj;
                continue;
            }
            x[sj] = xj;
            for (int i = 0; i < n1; ++i) {
                const auto si = static_cast<std::size_t>(i);
                const double entry = std::abs(plus[si] - minus[si]) / (2 * h);
                out.max_forbidden_entry = std::max(out.max_forbidden_entry, entry);
            }
        }
    }
    out.numeric = out.max_forbidden_entry <= tol;
    return out;
}

bool verify_block_triangular(const SystemDef& s, int n1) { return check_block_triangular(s, n1).ok(); }

SystemDef top_system(const CascadeDecomposition& d) {
    const int n1 = d.top_index;
    SystemDef top;
    top.n = n1;
    top.params = d.transformed.params;
    std::vector<CoordInterval> coords;
    for (int i = 0; i < n1; ++i) {
        const Expr& f = d.transformed.fields[static_cast<std::size_t>(i)];
        if (max_variable(f) >= n1)
            throw std::logic_error("top system component " + std::to_string(i + 1) +
                                   " depends on a coordinate outside the top block");
        top.fields.push_back(f);
        coords.push_back(d.transformed.domain[i]);
    }
    top.domain = DomainBox(std::move(coords));
    return top;
}

FibreSystemDef fibre_system(const CascadeDecomposition& d, std::span<const double> p, double eq_tol) {
    const int n = d.transformed.n;
    const int n1 = d.top_index;
    if (n1 >= n) throw AnalysisError("trivial cascade has no fibre systems");
    if (static_cast<int>(p.size()) != n1)
        throw AnalysisError("base point has dimension " + std::to_string(p.size()) + ", top system has " +
                            std::to_string(n1));
    const SystemDef top = top_system(d);
    if (!top.domain.contains_closed(p)) throw AnalysisError("base point lies outside the top system's domain");
    const auto residual = eval_field(top, p);
    double norm = 0.0;
    for (double r : residual) norm = std::max(norm, std::abs(r));
    if (norm > eq_tol)
        throw AnalysisError("base point is not an equilibrium of the top system (|F1(p)| = " + std::to_string(norm) +
                            ")");

    auto leaf = [&](const Expr& e) -> std::optional<Expr> {
        if (e.kind() != Expr::Kind::Variable) return std::nullopt;
        if (e.index() < n1) return Expr::constant(p[static_cast<std::size_t>(e.index())]);
        return Expr::variable(e.index() - n1);
    };

    FibreSystemDef out;
    out.parent = d.transformed;
    out.base.assign(p.begin(), p.end());
    out.reduced.n = n - n1;
    out.reduced.params = d.transformed.params;
    std::vector<CoordInterval> coords;
    for (int i = n1; i < n; ++i) {
        out.reduced.fields.push_back(substitute(d.transformed.fields[static_cast<std::size_t>(i)], leaf));
        coords.push_back(d.transformed.domain[i]);
    }
    out.reduced.domain = DomainBox(std::move(coords));
    out.parent_class = d.transformed.domain.domain_class();
    out.inherited_class = out.reduced.domain.domain_class();
    return out;
}

}  // namespace cohere
