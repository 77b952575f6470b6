#pragma once

// Numerical dynamics: Dormand–Prince 5(4) integration with dense output,
// omega-limit estimation, equilibrium search and sampled checks of order
// preservation, semiconjugacy and unordered omega limits.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cohere/cascade.hpp"
#include "cohere/system.hpp"

namespace cohere {

using State = std::vector<double>;

struct IntegratorOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double dt = 0.01;  // dense-output sampling interval
    double h_min = 1e-12;
    double blowup = 1e8;
    double boundary_tol = 1e-9;
    long max_steps = 20'000'000;
};

enum class Termination { TEnd, BlowUp, DomainExit };

std::string_view to_string(Termination t);

struct Trajectory {
    std::vector<double> times;  // strictly increasing, times[0] = 0
    std::vector<State> states;
    Termination terminated_by = Termination::TEnd;
    long accepted_steps = 0;
    long rejected_steps = 0;

    const State& final_state() const { return states.back(); }
    double final_time() const { return times.back(); }
};

/// Adaptive integration on [0, t_end], sampled at multiples of opts.dt and
/// at t_end. Stops early on blow-up (|x|_inf > blowup) or when the state
/// leaves the closed domain by more than boundary_tol. Throws
/// IntegrationError for an x0 outside the domain or when the field cannot be
/// evaluated even at the smallest step.
Trajectory integrate(const SystemDef& s, std::span<const double> x0, double t_end, const IntegratorOptions& opts = {});

/// The same Dormand–Prince step with a fixed step size and no error control;
/// returns the state at t_end.
State integrate_fixed_step(const SystemDef& s, std::span<const double> x0, double t_end, int steps);

struct OmegaOptions {
    IntegratorOptions integrator;
    double horizon = 500.0;
    double eq_tol = 1e-9;
    double drift_tol = 1e-7;
    double cyc_tol = 1e-4;
    double min_speed = 1e-6;
    int min_returns = 3;
    double period_spread = 0.05;
    int max_cycle_samples = 128;
};

struct OmegaEstimate {
    enum class Verdict { Equilibrium, Cycle, Unresolved, Unbounded };
    Verdict verdict = Verdict::Unresolved;
    State point;  // Equilibrium: the tail state
    double period = 0.0;  // Cycle
    std::vector<State> samples;  // Equilibrium: {point}; Cycle: one period

    struct Diagnostics {
        double residual = 0.0;  // |F(x_T)|_inf, or |F(p)|_inf once polished
        bool polished = false;  // point is a Newton refinement of x_T
        double drift = 0.0;  // max |x(t) - x_T|_inf over the last 10%
        int returns = 0;
        std::vector<double> return_times;
        double closest_return = 0.0;
        double period_spread = 0.0;
        double min_speed = 0.0;  // min |F|_inf along the last period
        double final_time = 0.0;
        Termination terminated_by = Termination::TEnd;
    } diagnostics;
};

std::string_view to_string(OmegaEstimate::Verdict v);

OmegaEstimate estimate_omega_limit(const SystemDef& s, std::span<const double> x0, const OmegaOptions& opts = {});
/// Classifies an already computed trajectory.
OmegaEstimate classify_trajectory(const SystemDef& s, const Trajectory& traj, const OmegaOptions& opts = {});

struct EquilibriumOptions {
    int grid_per_axis = 5;
    int grid_cap = 15625;
    double radius = 10.0;  // search box for unbounded coordinates
    int trajectory_starts = 8;
    double trajectory_time = 50.0;
    int newton_iterations = 60;
    double eq_tol = 1e-9;
    double cluster_tol = 1e-6;
    std::uint64_t seed = 42;
};

/// Damped Newton from a grid over the domain (clipped to +-radius) and from
/// the end points of a few sample trajectories. Results satisfy
/// |F(p)|_inf <= eq_tol, lie in the closed domain, are deduplicated within
/// cluster_tol and sorted lexicographically.
std::vector<State> find_equilibria(const SystemDef& s, const EquilibriumOptions& opts = {});

/// Damped Newton from one start; nullopt when it does not reach eq_tol.
std::optional<State> newton_polish(const SystemDef& s, std::span<const double> x0, double eq_tol = 1e-9,
                                   int iterations = 60);

struct TimeGrid {
    double t_end = 10.0;
    double dt = 0.1;
};

struct ProbeOptions {
    TimeGrid grid;
    double radius = 2.0;  // sampling box around the origin
    std::uint64_t seed = 42;
    IntegratorOptions integrator;
};

struct OrderViolation {
    int pair = 0;
    double t = 0.0;
    int coordinate = 0;
    double upper = 0.0;  // x_i(t) of the larger start
    double lower = 0.0;  // y_i(t) of the smaller start
};

struct MonotoneReport {
    bool pass = true;
    int pairs_checked = 0;
    double worst_gap = 0.0;  // max over (t, i) of y_i(t) - x_i(t), may be negative
    std::vector<OrderViolation> violations;
    std::vector<std::string> failures;  // per-pair integration failures
};

/// Integrates ordered pairs x0 >= y0 and reports every (t, i) with
/// x_i(t) < y_i(t) - tol. Pairs are sampled from the domain.
MonotoneReport check_monotone(const SystemDef& s, int n_pairs, double tol, const ProbeOptions& opts = {});
/// Same on caller-supplied pairs (first >= second).
MonotoneReport check_monotone_pairs(const SystemDef& s, const std::vector<std::pair<State, State>>& pairs,
                                    double tol, const ProbeOptions& opts = {});

struct FlowComparison {
    bool pass = true;
    bool structural = true;  // decomposition consistent with the system
    double max_deviation = 0.0;
    int points_checked = 0;
    std::vector<std::string> failures;
};

/// Compares the leading n1 coordinates of the transformed flow with the top
/// system's flow from the projected start. A decomposition whose top block
/// depends on later coordinates fails structurally; its deviation is still
/// measured by freezing those coordinates at their initial values.
FlowComparison check_semiconjugacy(const SystemDef& s, const CascadeDecomposition& d, int n_points, double tol,
                                   const ProbeOptions& opts = {});

/// max |L Phi^F_t(x) - Phi^G_t(L x)|_inf with G = apply_change(F, c).
FlowComparison check_conjugacy(const SystemDef& s, const ElementaryChange& c, int n_points, double tol,
                               const ProbeOptions& opts = {});

struct OrderRelation {
    enum class Verdict { Equal, GEQ, LEQ, Incomparable };
    Verdict verdict = Verdict::Equal;
    bool strict_dominance = false;
};

std::string_view to_string(OrderRelation::Verdict v);

/// Componentwise order; strict dominance when min_i (x_i - y_i) > margin or
/// max_i (x_i - y_i) < -margin.
OrderRelation order_compare(std::span<const double> x, std::span<const double> y, double margin = 0.0);

struct UnorderedReport {
    bool pass = true;
    std::optional<std::pair<int, int>> offending;  // (larger, smaller) indices
};

UnorderedReport check_unordered_omega(const std::vector<State>& points, double margin);

struct Accessibility {
    bool above = false;
    bool below = false;
};

/// Strong accessibility of p from above/below in the domain, by domain
/// class. Throws std::invalid_argument when p is outside the closed domain.
Accessibility accessibility(const DomainBox& domain, std::span<const double> p);

}  // namespace cohere
