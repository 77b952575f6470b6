#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "cohere/errors.hpp"
#include "cohere/graph.hpp"
#include "cohere/sign.hpp"
#include "cohere/system.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace cohere;
using testing::oracle_cycles;

namespace {

constexpr auto P = SignLabel::Plus;
constexpr auto M = SignLabel::Minus;
constexpr auto T = SignLabel::Theta;

InteractionGraph two_loop(SignLabel a, SignLabel b) { return InteractionGraph(2, {{0, 1, a}, {1, 0, b}}); }

// 1->2, 2->1, 2->3 in 1-based terms
InteractionGraph sample_graph() { return InteractionGraph(3, {{0, 1, P}, {1, 0, P}, {1, 2, P}}); }

std::vector<std::pair<int, int>> pairs_of(const std::vector<Edge>& es) {
    std::vector<std::pair<int, int>> out;
    for (const Edge& e : es) out.push_back({e.from, e.to});
    return out;
}

}  // namespace

TEST_CASE("graph invariants are enforced") {
    CHECK_THROWS_AS(InteractionGraph(2, {{0, 0, P}}), std::invalid_argument);
    CHECK_THROWS_AS(InteractionGraph(2, {{0, 1, P}, {0, 1, M}}), std::invalid_argument);
    CHECK_THROWS_AS(InteractionGraph(2, {{0, 2, P}}), std::invalid_argument);
    const InteractionGraph g(3, {{2, 0, M}, {0, 1, P}});
    CHECK(g.edges().front().from == 0);
    CHECK(g.label(2, 0) == M);
    CHECK_FALSE(g.has_edge(0, 2));
}

TEST_CASE("build_interaction_graph examples") {
    const auto lin = build_interaction_graph(parse_system("x1' = -x1 + 2*x2\nx2' = 3*x1 - x2"));
    CHECK(lin == InteractionGraph(2, {{1, 0, P}, {0, 1, P}}));
    const auto tanh_g = build_interaction_graph(parse_system("x1' = -x1 + tanh(x2)\nx2' = x1 - x2"));
    CHECK(tanh_g == InteractionGraph(2, {{1, 0, P}, {0, 1, P}}));
    const auto none = build_interaction_graph(parse_system("x1' = -x1\nx2' = -x2"));
    CHECK(none.edges().empty());
    const auto lo = build_interaction_graph(testing::lambda_omega_system());
    CHECK(lo == InteractionGraph(2, {{1, 0, T}, {0, 1, T}}));
    // orientation: x_j appears in F_i gives edge (j, i)
    const auto chain = build_interaction_graph(parse_system("x1' = -x1\nx2' = -x1 - x2"));
    CHECK(chain == InteractionGraph(2, {{0, 1, M}}));
}

TEST_CASE("scc examples") {
    const Condensation c = scc(sample_graph());
    CHECK(c.components == std::vector<std::vector<int>>{{0, 1}, {2}});
    CHECK(c.edges == std::vector<std::pair<int, int>>{{0, 1}});
    const Condensation empty = scc(InteractionGraph(3));
    CHECK(empty.components.size() == 3);
    CHECK(empty.edges.empty());
    const Condensation tri = scc(InteractionGraph(3, {{0, 1, P}, {1, 2, P}, {2, 0, P}}));
    CHECK(tri.components == std::vector<std::vector<int>>{{0, 1, 2}});
}

TEST_CASE("loop_edges examples") {
    CHECK(pairs_of(loop_edges(sample_graph())) == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});
    CHECK(loop_edges(InteractionGraph(3, {{0, 1, P}, {1, 2, P}})).empty());
    const InteractionGraph chord(3, {{0, 1, P}, {1, 2, P}, {2, 0, P}, {0, 2, M}});
    CHECK(loop_edges(chord).size() == 4);
    CHECK(pairs_of(loop_edges(chord)) == testing::oracle_loop_edges(chord));
}

TEST_CASE("enumerate_simple_loops examples") {
    auto one = [](const InteractionGraph& g) {
        const auto loops = enumerate_simple_loops(g, g.n());
        REQUIRE(loops.size() == 1);
        return loops.front().sign;
    };
    CHECK(one(two_loop(M, M)) == P);
    CHECK(one(two_loop(P, M)) == M);
    CHECK(one(two_loop(P, T)) == T);
    Rng rng(1);
    const InteractionGraph k4 = testing::random_graph(rng, 4, 1.0);
    CHECK(enumerate_simple_loops(k4, 4).size() == 20);
    CHECK(enumerate_simple_loops(k4, 2).size() == 6);
    CHECK_THROWS_AS(enumerate_simple_loops(k4, 4, 5), BudgetExceeded);
}

TEST_CASE("classify examples") {
    CHECK(classify(two_loop(P, P)).klass == SystemClass::Cooperative);
    CHECK(classify(two_loop(M, M)).klass == SystemClass::Coherent);
    const ClassVerdict inc = classify(two_loop(P, M));
    CHECK(inc.klass == SystemClass::Incoherent);
    REQUIRE(inc.witness.has_value());
    CHECK(loop_sign(two_loop(P, M), *inc.witness) == M);
    CHECK_FALSE(classify(two_loop(M, M)).witness.has_value());
    // a Minus edge off every loop keeps the graph quasicooperative
    CHECK(classify(InteractionGraph(3, {{0, 1, P}, {1, 0, P}, {2, 0, M}})).klass == SystemClass::Quasicooperative);
    // Theta off every loop is harmless too
    CHECK(classify(InteractionGraph(3, {{0, 1, P}, {1, 0, P}, {2, 0, T}})).klass == SystemClass::Quasicooperative);
    const ClassVerdict th = classify(two_loop(P, T));
    CHECK(th.klass == SystemClass::Incoherent);
    REQUIRE(th.witness.has_value());
    CHECK(loop_sign(two_loop(P, T), *th.witness) == T);
}

TEST_CASE("subgraph_predicates examples") {
    const InteractionGraph g = sample_graph();
    const auto top = subgraph_predicates(g, {{0, 1}, {{0, 1}, {1, 0}}});
    CHECK(top.full);
    CHECK(top.initial);
    CHECK(top.primary);
    CHECK(top.connected);
    CHECK(top.strongly_connected);
    CHECK_FALSE(top.terminal);
    const auto leaf = subgraph_predicates(g, {{2}, {}});
    CHECK_FALSE(leaf.initial);
    CHECK(leaf.terminal);
    CHECK(leaf.primary);
    const auto single = subgraph_predicates(g, {{0, 1}, {{0, 1}}});
    CHECK_FALSE(single.primary);
    CHECK_FALSE(single.full);
    CHECK_THROWS_AS(subgraph_predicates(g, {{0}, {{0, 1}}}), std::invalid_argument);
    CHECK_THROWS_AS(subgraph_predicates(g, {{}, {}}), std::invalid_argument);
    CHECK_THROWS_AS(subgraph_predicates(g, {{0, 2}, {{0, 2}}}), std::invalid_argument);
}

TEST_CASE("fundamental_subgraphs examples") {
    CHECK(fundamental_subgraphs(sample_graph()) == std::vector<Subgraph>{{{0, 1}, {{0, 1}, {1, 0}}}});
    CHECK(fundamental_subgraphs(InteractionGraph(2)) == std::vector<Subgraph>{{{0}, {}}, {{1}, {}}});
    CHECK(fundamental_subgraphs(InteractionGraph(3, {{0, 1, P}, {1, 2, P}})) == std::vector<Subgraph>{{{0}, {}}});
    for (const auto& g : {sample_graph(), InteractionGraph(2), InteractionGraph(3, {{0, 1, P}, {1, 2, P}})})
        CHECK(fundamental_subgraphs(g) == testing::oracle_fundamental_exhaustive(g));
}

TEST_CASE("split_closed_walk partitions the walk") {
    const auto loops = split_closed_walk({0, 1, 2, 1, 3, 0});
    std::multiset<std::pair<int, int>> walk{{0, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 0}}, got;
    for (const auto& l : loops) {
        std::set<int> distinct(l.vertices.begin(), l.vertices.end());
        CHECK(distinct.size() == l.vertices.size());
        for (auto e : l.edges()) got.insert(e);
    }
    CHECK(got == walk);
}

TEST_CASE("property: loop_edges matches the cycle oracle") {
    Rng rng(100);
    for (int trial = 0; trial < 600; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(7));
        const InteractionGraph g = testing::random_graph(rng, n, rng.uniform(0.05, 0.6), 0.1);
        REQUIRE(pairs_of(loop_edges(g)) == testing::oracle_loop_edges(g));
    }
}

TEST_CASE("property: enumerate_simple_loops matches the cycle oracle") {
    Rng rng(101);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(6));
        const InteractionGraph g = testing::random_graph(rng, n, rng.uniform(0.1, 0.7), 0.1);
        std::set<std::pair<std::vector<int>, SignLabel>> a, b;
        for (const auto& l : enumerate_simple_loops(g, std::max(n, 2))) a.insert({l.loop.vertices, l.sign});
        for (const auto& c : oracle_cycles(g)) b.insert({c.vertices, c.sign});
        REQUIRE(a == b);
    }
}

TEST_CASE("property: classification agrees with the oracles and nests") {
    Rng rng(102);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(6));
        const InteractionGraph g = testing::random_graph(rng, n, rng.uniform(0.05, 0.6), rng.uniform() < 0.3 ? 0.1 : 0.0);
        const ClassVerdict v = classify(g);
        const bool coop = testing::oracle_cooperative(g);
        const bool quasi = testing::oracle_quasicooperative(g);
        const bool coh = testing::oracle_coherent(g);
        CHECK(coop == (v.klass == SystemClass::Cooperative));
        CHECK(quasi == (v.klass == SystemClass::Cooperative || v.klass == SystemClass::Quasicooperative));
        CHECK(coh == (v.klass != SystemClass::Incoherent));
        CHECK(is_positive(g) == coop);
        CHECK(is_quasipositive(g) == quasi);
        CHECK(v.witness.has_value() == (v.klass == SystemClass::Incoherent));
        if (v.witness) CHECK(loop_sign(g, *v.witness) != SignLabel::Plus);
    }
}

TEST_CASE("property: fundamental subgraphs match brute force") {
    Rng rng(103);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(6));
        const InteractionGraph g = testing::random_graph(rng, n, rng.uniform(0.05, 0.5));
        const auto got = fundamental_subgraphs(g);
        REQUIRE(got == testing::oracle_fundamental_by_vertices(g));
        if (g.edges().size() <= 12) REQUIRE(got == testing::oracle_fundamental_exhaustive(g));
        std::vector<int> seen(static_cast<std::size_t>(n), 0);
        for (const auto& f : got) {
            const auto p = subgraph_predicates(g, f);
            CHECK((p.full && p.initial && p.primary && p.connected));
            for (int v : f.vertices) ++seen[static_cast<std::size_t>(v)];
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int k) { return k <= 1; }));
    }
}

TEST_CASE("property: every connected primary initial subgraph lies in exactly one fundamental subgraph") {
    Rng rng(104);
    for (int trial = 0; trial < 150; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(5));
        const InteractionGraph g = testing::random_graph(rng, n, rng.uniform(0.05, 0.5));
        if (g.edges().size() > 12) continue;
        const auto fund = fundamental_subgraphs(g);
        for (const auto& s : testing::oracle_cpi_subgraphs(g)) {
            int hosts = 0;
            for (const auto& f : fund)
                if (std::includes(f.vertices.begin(), f.vertices.end(), s.vertices.begin(), s.vertices.end()) &&
                    std::includes(f.edges.begin(), f.edges.end(), s.edges.begin(), s.edges.end()))
                    ++hosts;
            CHECK(hosts == 1);
        }
    }
}

TEST_CASE("property: subgraph predicates match the definitions") {
    Rng rng(105);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(5));
        const InteractionGraph g = testing::random_graph(rng, n, rng.uniform(0.1, 0.6));
        std::vector<int> verts;
        for (int v = 0; v < n; ++v)
            if (rng.below(2) == 0) verts.push_back(v);
        if (verts.empty()) verts.push_back(0);
        Subgraph s{verts, {}};
        for (const Edge& e : g.edges())
            if (std::binary_search(verts.begin(), verts.end(), e.from) &&
                std::binary_search(verts.begin(), verts.end(), e.to) && rng.below(3) != 0)
                s.edges.push_back({e.from, e.to});
        const auto p = subgraph_predicates(g, s);
        CHECK(p.connected == testing::oracle_connected(n, s.vertices, s.edges));
        CHECK(p.primary == testing::oracle_primary(n, s.edges));
        CHECK(p.initial == testing::oracle_initial(g, s.vertices));
        CHECK(p.full == (s == full_subgraph(g, verts)));
    }
}
