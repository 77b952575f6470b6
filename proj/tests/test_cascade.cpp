#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cohere/cascade.hpp"
#include "cohere/dynamics.hpp"
#include "cohere/errors.hpp"
#include "support/generators.hpp"

using namespace cohere;

namespace {

constexpr auto P = SignLabel::Plus;
constexpr auto M = SignLabel::Minus;

const char* kChain = "x1' = -x1\nx2' = x1 - x2\nx3' = x2 - x3\n";
const char* kThreeVertex = "x1' = -x1 + x2 - x3\nx2' = x1 - x2\nx3' = -x3\n";

}  // namespace

TEST_CASE("elementary changes") {
    const ElementaryChange id = ElementaryChange::identity(3);
    CHECK(id.is_identity());
    const ElementaryChange c{{2, 0, 1}, {1, -1, 1}};
    CHECK(c.apply(std::vector<double>{1, 2, 3}) == std::vector<double>{3, -1, 2});
    const auto x = c.inverse().apply(c.apply(std::vector<double>{1, 2, 3}));
    CHECK(x == std::vector<double>{1, 2, 3});
    CHECK_THROWS_AS((ElementaryChange{{0, 0}, {1, 1}}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ElementaryChange{{0, 1}, {1, 2}}.validate()), std::invalid_argument);
}

TEST_CASE("apply_change examples") {
    const SystemDef s = parse_system("x1' = -x1 - x2\nx2' = -x1 - x2");
    CHECK(same_system(apply_change(s, ElementaryChange::identity(2)), s));

    const SystemDef g = apply_change(s, {{0, 1}, {1, -1}});
    CHECK(to_string(g.fields[0]) == "-x1 + x2");
    CHECK(to_string(g.fields[1]) == "x1 - x2");
    const InteractionGraph gg = build_interaction_graph(g);
    CHECK(gg.edges().size() == 2);
    for (const Edge& e : gg.edges()) CHECK(e.label == P);

    const SystemDef swap = apply_change(parse_system("x1' = -x1\nx2' = x1 - x2"), {{1, 0}, {1, 1}});
    CHECK(to_string(swap.fields[0]) == "x2 - x1");
    CHECK(to_string(swap.fields[1]) == "-x2");

    const SystemDef orthant = parse_system("var x1 in [0, inf)\nvar x2 in (-1, 2]\nx1' = -x1\nx2' = -x2");
    const SystemDef flipped = apply_change(orthant, {{1, 0}, {-1, -1}});
    CHECK(flipped.domain[0].lo.value == -2.0);
    CHECK(flipped.domain[0].lo.closed);
    CHECK(flipped.domain[0].hi.value == 1.0);
    CHECK_FALSE(flipped.domain[0].hi.closed);
    CHECK(flipped.domain[1].hi.value == 0.0);
    CHECK(flipped.domain[1].hi.closed);
    CHECK(flipped.domain.domain_class() == DomainClass::Other);
}

TEST_CASE("plan_transform examples") {
    CHECK(plan_transform(InteractionGraph(2, {{0, 1, P}, {1, 0, P}})).is_identity());
    const ElementaryChange mm = plan_transform(InteractionGraph(2, {{0, 1, M}, {1, 0, M}}));
    CHECK(mm.perm == std::vector<int>{0, 1});
    CHECK(mm.rho == std::vector<int>{1, -1});
    const ElementaryChange three = plan_transform(InteractionGraph(3, {{2, 0, M}, {0, 1, P}, {1, 0, P}}));
    CHECK(three.perm == std::vector<int>{2, 0, 1});
    CHECK(three.rho == std::vector<int>{1, 1, 1});
    try {
        plan_transform(InteractionGraph(2, {{0, 1, P}, {1, 0, M}}));
        FAIL("expected IncoherentError");
    } catch (const IncoherentError& e) {
        CHECK(e.witness().vertices.size() == 2);
    }
}

TEST_CASE("decompose examples") {
    const CascadeDecomposition chain = decompose(parse_system(kChain));
    CHECK(chain.blocks == std::vector<std::vector<int>>{{0}, {1}, {2}});
    CHECK(chain.boundaries == std::vector<int>{0, 1, 2, 3});
    CHECK(chain.top_index == 1);
    CHECK(chain.change.is_identity());

    const CascadeDecomposition loop = decompose(parse_system("x1' = -x1 + x2\nx2' = x1 - x2"));
    CHECK(loop.blocks == std::vector<std::vector<int>>{{0, 1}});
    CHECK(loop.top_index == 2);

    const CascadeDecomposition three = decompose(parse_system(kThreeVertex));
    CHECK(three.change.perm == std::vector<int>{2, 0, 1});
    CHECK(three.blocks == std::vector<std::vector<int>>{{0}, {1, 2}});
    CHECK(three.source_blocks() == std::vector<std::vector<int>>{{2}, {0, 1}});
    for (const auto& v : three.block_classes) CHECK(v.klass == SystemClass::Cooperative);
    CHECK(three.transformed_class.klass == SystemClass::Quasicooperative);
    const auto top = subgraph_predicates(three.transformed_graph, full_subgraph(three.transformed_graph, {0}));
    CHECK((top.full && top.initial && top.primary && top.connected));

    CHECK_THROWS_AS(decompose(testing::lambda_omega_system()), IncoherentError);
}

TEST_CASE("verify_block_triangular examples") {
    CHECK(verify_block_triangular(parse_system("x1' = -x1\nx2' = x1 - x2"), 1));
    CHECK_FALSE(verify_block_triangular(parse_system("x1' = -x1 + x2\nx2' = -x2"), 1));
    CHECK(verify_block_triangular(parse_system(kChain), 2));
    CHECK(verify_block_triangular(parse_system(kChain), 1));
    CHECK(verify_block_triangular(parse_system(kChain), 3));
    CHECK_THROWS_AS(verify_block_triangular(parse_system(kChain), 4), std::invalid_argument);
    CHECK_THROWS_AS(verify_block_triangular(parse_system(kChain), 0), std::invalid_argument);
    const TriangularCheck numeric = check_block_triangular(parse_system("x1' = -x1 + 1e-3*x2\nx2' = -x2"), 1);
    CHECK_FALSE(numeric.numeric);
    CHECK(numeric.max_forbidden_entry == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("top_system examples") {
    const SystemDef chain_top = top_system(decompose(parse_system(kChain)));
    CHECK(chain_top.n == 1);
    CHECK(to_string(chain_top.fields[0]) == "-x1");

    const SystemDef loop = parse_system("x1' = -x1 + x2\nx2' = x1 - x2");
    CHECK(same_system(top_system(decompose(loop)), loop));

    const SystemDef three_top = top_system(decompose(parse_system(kThreeVertex)));
    CHECK(three_top.n == 1);
    CHECK(to_string(three_top.fields[0]) == "-x1");

    CascadeDecomposition bad = decompose(parse_system(kThreeVertex));
    bad.top_index = 2;
    CHECK_THROWS_AS(top_system(bad), std::logic_error);
}

TEST_CASE("fibre_system examples") {
    const CascadeDecomposition d = decompose(parse_system("x1' = -x1\nx2' = x1 - x2"));
    const FibreSystemDef f = fibre_system(d, std::vector<double>{0.0});
    CHECK(f.reduced.n == 1);
    CHECK(to_string(f.reduced.fields[0]) == "-x1");
    CHECK_THROWS_AS(fibre_system(d, std::vector<double>{1.0}), AnalysisError);
    CHECK_THROWS_AS(fibre_system(d, std::vector<double>{0.0, 0.0}), AnalysisError);

    const CascadeDecomposition t = decompose(parse_system("x1' = -x1\nx2' = tanh(x1) - x2"));
    CHECK(to_string(fibre_system(t, std::vector<double>{0.0}).reduced.fields[0]) == "-x1");

    const CascadeDecomposition loop = decompose(parse_system("x1' = -x1 + x2\nx2' = x1 - x2"));
    CHECK_THROWS_AS(fibre_system(loop, std::vector<double>{0.0, 0.0}), AnalysisError);

    const CascadeDecomposition orth =
        decompose(parse_system("var x1 in [0, inf)\nvar x2 in [0, inf)\nx1' = -x1\nx2' = x1 - x2"));
    const FibreSystemDef fo = fibre_system(orth, std::vector<double>{0.0});
    CHECK(fo.parent_class == DomainClass::C3);
    CHECK(fo.inherited_class == DomainClass::C3);
    CHECK_THROWS_AS(fibre_system(orth, std::vector<double>{-1.0}), AnalysisError);
}

TEST_CASE("property: labels transport under elementary changes") {
    Rng rng(300);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(3));
        const SystemDef s = trial % 5 == 0 ? testing::lambda_omega_system() : testing::random_cooperative_system(rng, n);
        const ElementaryChange c = testing::random_change(rng, s.n);
        const InteractionGraph g = build_interaction_graph(s);
        CHECK(transport_graph(g, c) == build_interaction_graph(apply_change(s, c)));
        // G(y) = L F(L^-1 y)
        for (const auto& y : random_domain_points(s.domain, 10, 3.0, 9)) {
            const auto lhs = eval_field(apply_change(s, c), y);
            const auto rhs = c.apply(eval_field(s, c.inverse().apply(y)));
            CHECK(lhs == rhs);
        }
    }
}

TEST_CASE("property: coherent systems become quasicooperative cascades") {
    Rng rng(301);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(4));
        const SystemDef s = testing::random_coherent_system(rng, n, rng.uniform(0.2, 0.8));
        const InteractionGraph g = build_interaction_graph(s);
        REQUIRE(classify(g).klass != SystemClass::Incoherent);
        const SystemDef t = apply_change(s, plan_transform(g));
        const SystemClass k = classify(build_interaction_graph(t)).klass;
        CHECK((k == SystemClass::Cooperative || k == SystemClass::Quasicooperative));

        const CascadeDecomposition d = decompose(s, g);
        CHECK(d.transformed_graph == build_interaction_graph(d.transformed));
        const auto top = subgraph_predicates(d.transformed_graph, full_subgraph(d.transformed_graph, d.blocks[0]));
        CHECK((top.full && top.initial && top.primary && top.connected));
        const SystemDef top_sys = top_system(d);
        CHECK(classify(build_interaction_graph(top_sys)).klass == SystemClass::Cooperative);
        CHECK(build_interaction_graph(top_sys) == d.transformed_graph.induced(d.blocks[0]));
        for (std::size_t b = 1; b + 1 < d.boundaries.size(); ++b)
            CHECK(check_block_triangular(d.transformed, d.boundaries[b]).ok());
        for (const auto& v : d.block_classes)
            CHECK((v.klass == SystemClass::Cooperative || v.klass == SystemClass::Quasicooperative));
    }
}

TEST_CASE("property: fibre fields equal the parent's trailing components") {
    Rng rng(302);
    int fibres = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(3));
        const SystemDef s = testing::random_coherent_system(rng, n, 0.6);
        const CascadeDecomposition d = decompose(s);
        if (d.top_index == n) continue;
        const SystemDef top = top_system(d);
        const auto eqs = find_equilibria(top);
        if (eqs.empty()) continue;
        const FibreSystemDef f = fibre_system(d, eqs.front());
        ++fibres;
        const InteractionGraph parent = d.transformed_graph;
        std::vector<int> rest;
        for (int v = d.top_index; v < n; ++v) rest.push_back(v);
        const InteractionGraph restricted = parent.induced(rest);
        const InteractionGraph fg = build_interaction_graph(f.reduced);
        for (const Edge& e : fg.edges()) {
            const auto l = restricted.label(e.from, e.to);
            REQUIRE(l.has_value());
            if (*l != SignLabel::Theta) CHECK(*l == e.label);
        }
        for (auto z : random_domain_points(f.reduced.domain, 100, 5.0, 17)) {
            std::vector<double> full(eqs.front());
            full.insert(full.end(), z.begin(), z.end());
            const auto parent_f = eval_field(d.transformed, full);
            const auto fibre_f = eval_field(f.reduced, z);
            for (int i = 0; i < f.reduced.n; ++i)
                CHECK(fibre_f[static_cast<std::size_t>(i)] == parent_f[static_cast<std::size_t>(i + d.top_index)]);
        }
    }
    CHECK(fibres > 10);
}

TEST_CASE("property: elementary changes conjugate flows") {
    Rng rng(303);
    ProbeOptions opts;
    opts.grid = {10.0, 0.1};
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(4));
        const SystemDef s = testing::random_cooperative_system(rng, n);
        const FlowComparison r = check_conjugacy(s, testing::random_change(rng, n), 5, 1e-6, opts);
        CHECK(r.pass);
        CHECK(r.max_deviation <= 1e-6);
    }
}
