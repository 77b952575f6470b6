#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cohere/cascade.hpp"
#include "cohere/dynamics.hpp"
#include "cohere/errors.hpp"
#include "support/generators.hpp"

using namespace cohere;

namespace {

double inf_norm(const State& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("integrate: exponential decay") {
    const SystemDef s = parse_system("x1' = -x1");
    const Trajectory tr = integrate(s, std::vector<double>{1.0}, 1.0);
    CHECK(tr.terminated_by == Termination::TEnd);
    CHECK(tr.final_time() == 1.0);
    CHECK(std::abs(tr.final_state()[0] - std::exp(-1.0)) <= 1e-6);
    CHECK(tr.times.size() == 101);
    for (std::size_t k = 1; k < tr.times.size(); ++k) {
        CHECK(tr.times[k] > tr.times[k - 1]);
        CHECK(std::abs(tr.states[k][0] - std::exp(-tr.times[k])) <= 1e-7);
    }
}

TEST_CASE("integrate: cooperative linear system converges") {
    const SystemDef s = parse_system("x1' = -2*x1 + x2\nx2' = x1 - 2*x2");
    const Trajectory tr = integrate(s, std::vector<double>{1.0, 0.0}, 20.0);
    CHECK(inf_norm(tr.final_state()) <= 1e-8);
    // closed form: x1 = (e^-t + e^-3t)/2, x2 = (e^-t - e^-3t)/2
    for (std::size_t k = 0; k < tr.times.size(); k += 97) {
        const double t = tr.times[k];
        CHECK(std::abs(tr.states[k][0] - 0.5 * (std::exp(-t) + std::exp(-3 * t))) <= 1e-7);
        CHECK(std::abs(tr.states[k][1] - 0.5 * (std::exp(-t) - std::exp(-3 * t))) <= 1e-7);
    }
}

TEST_CASE("integrate: blow-up, domain exit and invalid starts") {
    const SystemDef grow = parse_system("x1' = x1");
    const Trajectory tr = integrate(grow, std::vector<double>{1.0}, 100.0);
    CHECK(tr.terminated_by == Termination::BlowUp);
    CHECK(std::abs(tr.final_state()[0]) > 1e8);
    CHECK(tr.final_time() < 100.0);

    const SystemDef leave = parse_system("var x1 in [0, 1]\nx1' = -1");
    const Trajectory out = integrate(leave, std::vector<double>{0.5}, 2.0);
    CHECK(out.terminated_by == Termination::DomainExit);
    CHECK(out.final_time() < 1.0);

    CHECK_THROWS_AS(integrate(leave, std::vector<double>{2.0}, 1.0), IntegrationError);
    CHECK_THROWS_AS(integrate(grow, std::vector<double>{1.0, 2.0}, 1.0), IntegrationError);
    CHECK_THROWS_AS(integrate(grow, std::vector<double>{1.0}, -1.0), IntegrationError);
    CHECK_THROWS_AS(integrate(parse_system("x1' = log(x1)"), std::vector<double>{-1.0}, 1.0), IntegrationError);
}

TEST_CASE("integrator order: halving a fixed step") {
    const SystemDef s = parse_system("x1' = -x1");
    const double exact = std::exp(-1.0);
    for (int steps : {4, 8, 16}) {
        const double e1 = std::abs(integrate_fixed_step(s, std::vector<double>{1.0}, 1.0, steps)[0] - exact);
        const double e2 = std::abs(integrate_fixed_step(s, std::vector<double>{1.0}, 1.0, 2 * steps)[0] - exact);
        CHECK(e1 / e2 >= 12.0);
    }
}

TEST_CASE("dense output matches the closed form between steps") {
    const SystemDef s = parse_system("x1' = -x2\nx2' = x1");
    IntegratorOptions opts;
    opts.dt = 0.001;
    const Trajectory tr = integrate(s, std::vector<double>{1.0, 0.0}, 10.0, opts);
    double err = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        err = std::max(err, std::abs(tr.states[k][0] - std::cos(tr.times[k])));
    CHECK(err <= 1e-6);
    CHECK(tr.accepted_steps * 10 < static_cast<long>(tr.times.size()));
}

TEST_CASE("omega limit examples") {
    const SystemDef lin = parse_system("x1' = -2*x1 + x2\nx2' = x1 - 2*x2");
    const OmegaEstimate eq = estimate_omega_limit(lin, std::vector<double>{1.0, 0.0});
    CHECK(eq.verdict == OmegaEstimate::Verdict::Equilibrium);
    CHECK(inf_norm(eq.point) <= 1e-9);
    CHECK(eq.diagnostics.residual <= 1e-9);

    const OmegaEstimate cyc = estimate_omega_limit(testing::lambda_omega_system(), std::vector<double>{2.0, 0.0});
    REQUIRE(cyc.verdict == OmegaEstimate::Verdict::Cycle);
    CHECK(std::abs(cyc.period - 2 * std::numbers::pi) <= 0.05);
    CHECK(cyc.diagnostics.returns >= 3);
    CHECK(cyc.samples.size() <= 128);
    CHECK(cyc.samples.size() >= 64);
    for (const auto& p : cyc.samples) CHECK(std::hypot(p[0], p[1]) == doctest::Approx(1.0).epsilon(1e-4));

    const OmegaEstimate un = estimate_omega_limit(parse_system("x1' = x1"), std::vector<double>{1.0});
    CHECK(un.verdict == OmegaEstimate::Verdict::Unbounded);
}

TEST_CASE("omega limit: slow convergence is not a cycle") {
    // a weakly damped spiral: x'' + 0.02 x' + x = 0
    const SystemDef spiral = parse_system("x1' = x2\nx2' = -x1 - 0.02*x2");
    const OmegaEstimate e = estimate_omega_limit(spiral, std::vector<double>{1.0, 0.0});
    CHECK(e.verdict != OmegaEstimate::Verdict::Cycle);
    // degenerate equilibrium approached algebraically
    const OmegaEstimate slow = estimate_omega_limit(parse_system("x1' = -x1^3"), std::vector<double>{1.0});
    CHECK(slow.verdict == OmegaEstimate::Verdict::Unresolved);
    // a harmonic oscillator is periodic: the detector has no notion of an attractor
    const OmegaEstimate harm = estimate_omega_limit(parse_system("x1' = x2\nx2' = -x1"), std::vector<double>{1.0, 0.0});
    CHECK(harm.verdict == OmegaEstimate::Verdict::Cycle);
}

TEST_CASE("find_equilibria examples") {
    CHECK(find_equilibria(parse_system("x1' = -x1")) == std::vector<State>{{0.0}});
    const auto three = find_equilibria(parse_system("var x1 in [-2, 2]\nx1' = x1 - x1^3"));
    REQUIRE(three.size() == 3);
    CHECK(three[0][0] == doctest::Approx(-1.0));
    CHECK(std::abs(three[1][0]) <= 1e-12);
    CHECK(three[2][0] == doctest::Approx(1.0));
    const auto lo = find_equilibria(testing::lambda_omega_system());
    REQUIRE(lo.size() == 1);
    CHECK(inf_norm(lo[0]) <= 1e-9);
    CHECK(find_equilibria(parse_system("x1' = 1 + x1^2")).empty());
    for (const auto& p : three) CHECK(inf_norm(eval_field(parse_system("x1' = x1 - x1^3"), p)) <= 1e-9);
}

TEST_CASE("check_monotone examples") {
    const SystemDef metzler = parse_system("var x1 in [0, 1]\nvar x2 in [0, 1]\nx1' = -x1 + x2\nx2' = x1 - x2");
    ProbeOptions opts;
    opts.radius = 1.0;
    const MonotoneReport m = check_monotone(metzler, 10, 1e-7, opts);
    CHECK(m.pass);
    CHECK(m.pairs_checked == 10);
    CHECK(m.failures.empty());

    const MonotoneReport t = check_monotone(parse_system("x1' = -x1 + tanh(x2)\nx2' = x1 - x2"), 10, 1e-7);
    CHECK(t.pass);
    CHECK(t.violations.empty());

    const MonotoneReport lo = check_monotone_pairs(testing::lambda_omega_system(), {{{2.0, 0.0}, {0.1, 0.0}}}, 1e-7);
    CHECK_FALSE(lo.pass);
    CHECK_FALSE(lo.violations.empty());

    CHECK_THROWS_AS(check_monotone_pairs(metzler, {{{0.0, 1.0}, {1.0, 0.0}}}, 1e-7), std::invalid_argument);

    const MonotoneReport blow = check_monotone_pairs(parse_system("x1' = x1^2"), {{{1.0}, {0.5}}}, 1e-7);
    CHECK_FALSE(blow.failures.empty());
}

TEST_CASE("check_semiconjugacy examples") {
    const SystemDef chain = parse_system("x1' = -x1\nx2' = x1 - x2");
    const CascadeDecomposition d = decompose(chain);
    const FlowComparison r = check_semiconjugacy(chain, d, 10, 1e-6);
    CHECK(r.pass);
    CHECK(r.max_deviation <= 1e-6);

    const SystemDef loop = parse_system("x1' = -x1 + x2\nx2' = x1 - x2");
    const FlowComparison trivial = check_semiconjugacy(loop, decompose(loop), 5, 1e-6);
    CHECK(trivial.pass);
    CHECK(trivial.max_deviation == 0.0);

    // the 2-cycle {x1, x2} is block 1; cutting it after one coordinate is wrong
    const SystemDef tri = parse_system("x1' = -x1 + 0.5*x2\nx2' = 0.5*x1 - x2\nx3' = x2 - x3");
    CascadeDecomposition bad = decompose(tri);
    REQUIRE(bad.top_index == 2);
    bad.top_index = 1;
    const FlowComparison corrupt = check_semiconjugacy(tri, bad, 5, 1e-6);
    CHECK_FALSE(corrupt.pass);
    CHECK_FALSE(corrupt.structural);
    CHECK(corrupt.max_deviation > 1e-3);
}

TEST_CASE("order_compare examples") {
    using V = OrderRelation::Verdict;
    const auto a = order_compare(std::vector<double>{1, 2}, std::vector<double>{0, 2});
    CHECK(a.verdict == V::GEQ);
    CHECK_FALSE(a.strict_dominance);
    CHECK(order_compare(std::vector<double>{1, 0}, std::vector<double>{0, 1}).verdict == V::Incomparable);
    const auto c = order_compare(std::vector<double>{2, 3}, std::vector<double>{1, 1}, 0.5);
    CHECK(c.verdict == V::GEQ);
    CHECK(c.strict_dominance);
    CHECK(order_compare(std::vector<double>{1, 1}, std::vector<double>{1, 1}).verdict == V::Equal);
    const auto d = order_compare(std::vector<double>{0, 0}, std::vector<double>{1, 1}, 0.5);
    CHECK(d.verdict == V::LEQ);
    CHECK(d.strict_dominance);
    CHECK_FALSE(order_compare(std::vector<double>{2, 3}, std::vector<double>{1, 1}, 1.0).strict_dominance);
    CHECK_THROWS_AS(order_compare(std::vector<double>{1}, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST_CASE("check_unordered_omega examples") {
    CHECK(check_unordered_omega({{0.0, 0.0}}, 1e-6).pass);
    CHECK(check_unordered_omega({{0.0, 1.0}, {0.0, -1.0}}, 1e-6).pass);
    std::vector<State> circle;
    for (int k = 0; k < 64; ++k) {
        const double t = 2 * std::numbers::pi * k / 64;
        circle.push_back({std::cos(t), std::sin(t)});
    }
    const UnorderedReport r = check_unordered_omega(circle, 1e-6);
    CHECK_FALSE(r.pass);
    REQUIRE(r.offending.has_value());
    const auto& hi = circle[static_cast<std::size_t>(r.offending->first)];
    const auto& lo = circle[static_cast<std::size_t>(r.offending->second)];
    CHECK(hi[0] > lo[0]);
    CHECK(hi[1] > lo[1]);
}

TEST_CASE("accessibility examples") {
    CHECK(accessibility(DomainBox::unbounded(2), std::vector<double>{3, -4}).above);
    CHECK(accessibility(DomainBox::unbounded(2), std::vector<double>{3, -4}).below);
    const DomainBox orthant = parse_system("var x1 in [0, inf)\nvar x2 in [0, inf)\nx1' = -x1\nx2' = -x2").domain;
    const Accessibility z = accessibility(orthant, std::vector<double>{0, 0});
    CHECK(z.above);
    CHECK_FALSE(z.below);
    CHECK(accessibility(orthant, std::vector<double>{1, 2}).below);
    CHECK_FALSE(accessibility(orthant, std::vector<double>{1, 0}).below);
    const DomainBox square = parse_system("var x1 in [0, 1]\nvar x2 in [0, 1]\nx1' = -x1\nx2' = -x2").domain;
    const Accessibility mid = accessibility(square, std::vector<double>{0.5, 0.5});
    CHECK((mid.above && mid.below));
    const Accessibility corner = accessibility(square, std::vector<double>{1.0, 0.5});
    CHECK_FALSE(corner.above);
    CHECK(corner.below);
    CHECK_THROWS_AS(accessibility(square, std::vector<double>{2.0, 0.5}), std::invalid_argument);
}

TEST_CASE("property: cooperative systems preserve order") {
    Rng rng(400);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(4));
        const SystemDef s = testing::random_cooperative_system(rng, n);
        ProbeOptions opts;
        opts.seed = 400 + static_cast<std::uint64_t>(trial);
        const MonotoneReport r = check_monotone(s, 10, 1e-7, opts);
        CHECK_MESSAGE(r.pass, print_system(s));
    }
}

TEST_CASE("property: omega limits of cooperative systems are unordered") {
    Rng rng(401);
    for (int trial = 0; trial < 15; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(4));
        const SystemDef s = testing::random_cooperative_system(rng, n);
        for (const auto& x0 : random_domain_points(s.domain, 3, 3.0, 401 + static_cast<std::uint64_t>(trial))) {
            const OmegaEstimate e = estimate_omega_limit(s, x0);
            CHECK(e.verdict != OmegaEstimate::Verdict::Cycle);
            if (e.verdict == OmegaEstimate::Verdict::Equilibrium) CHECK(check_unordered_omega(e.samples, 1e-6).pass);
        }
    }
}

TEST_CASE("property: orthant systems near zero converge to zero") {
    Rng rng(402);
    int near_zero = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(3));
        const SystemDef s = testing::random_orthant_system(rng, n);
        for (const auto& x0 : random_domain_points(s.domain, 2, 0.5, 402 + static_cast<std::uint64_t>(trial))) {
            const Trajectory tr = integrate(s, x0, 500.0);
            double running = std::numeric_limits<double>::infinity();
            for (const auto& x : tr.states) running = std::min(running, inf_norm(x));
            if (running >= 1e-4) continue;
            ++near_zero;
            const OmegaEstimate e = classify_trajectory(s, tr);
            CHECK(e.verdict == OmegaEstimate::Verdict::Equilibrium);
            CHECK(inf_norm(e.point) <= 1e-6);
        }
    }
    CHECK(near_zero >= 10);
}

TEST_CASE("property: a unique equilibrium attracts every sampled start") {
    Rng rng(403);
    int unique = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(3));
        const SystemDef s = testing::random_coherent_system(rng, n, 0.6);
        const auto eq = find_equilibria(s);
        REQUIRE_FALSE(eq.empty());
        if (eq.size() != 1) continue;
        ++unique;
        for (const auto& x0 : random_domain_points(s.domain, 4, 3.0, 403 + static_cast<std::uint64_t>(trial))) {
            const OmegaEstimate e = estimate_omega_limit(s, x0);
            REQUIRE(e.verdict == OmegaEstimate::Verdict::Equilibrium);
            double gap = 0.0;
            for (int i = 0; i < n; ++i) gap = std::max(gap, std::abs(e.point[static_cast<std::size_t>(i)] - eq[0][static_cast<std::size_t>(i)]));
            CHECK(gap <= 1e-6);
        }
    }
    CHECK(unique >= 6);
}
