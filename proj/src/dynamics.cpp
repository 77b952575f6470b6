#include "cohere/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cohere/errors.hpp"
#include "cohere/sign.hpp"

namespace cohere {

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::TEnd: return "t_end";
        case Termination::BlowUp: return "blow_up";
        case Termination::DomainExit: return "domain_exit";
    }
    return "?";
}

std::string_view to_string(OmegaEstimate::Verdict v) {
    switch (v) {
        case OmegaEstimate::Verdict::Equilibrium: return "equilibrium";
        case OmegaEstimate::Verdict::Cycle: return "cycle";
        case OmegaEstimate::Verdict::Unresolved: return "unresolved";
        case OmegaEstimate::Verdict::Unbounded: return "unbounded";
    }
    return "?";
}

std::string_view to_string(OrderRelation::Verdict v) {
    switch (v) {
        case OrderRelation::Verdict::Equal: return "equal";
        case OrderRelation::Verdict::GEQ: return "geq";
        case OrderRelation::Verdict::LEQ: return "leq";
        case OrderRelation::Verdict::Incomparable: return "incomparable";
    }
    return "?";
}

namespace {

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double inf_dist(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Dormand–Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

class Stepper {
public:
    explicit Stepper(const SystemDef& s)
        : f_(s), n_(static_cast<std::size_t>(s.n)), k2_(n_), k3_(n_), k4_(n_), k5_(n_), k6_(n_), k7_(n_),
          tmp_(n_), ynew_(n_), err_(n_) {}

    // One step from (y, k1 = F(y)); fills ynew, k7 = F(ynew) and the
    // embedded error estimate. Throws EvalError.
    void step(const State& y, const State& k1, double h) {
        stage(y, h, {{a21, &k1}}, k2_);
        stage(y, h, {{a31, &k1}, {a32, &k2_}}, k3_);
        stage(y, h, {{a41, &k1}, {a42, &k2_}, {a43, &k3_}}, k4_);
        stage(y, h, {{a51, &k1}, {a52, &k2_}, {a53, &k3_}, {a54, &k4_}}, k5_);
        stage(y, h, {{a61, &k1}, {a62, &k2_}, {a63, &k3_}, {a64, &k4_}, {a65, &k5_}}, k6_);
        for (std::size_t i = 0; i < n_; ++i)
            ynew_[i] = y[i] + h * (a71 * k1[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
        f_(ynew_, k7_);
        for (std::size_t i = 0; i < n_; ++i)
            err_[i] = h * (e1 * k1[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
    }

    double error_norm(const State& y, double rtol, double atol) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
            const double r = err_[i] / sc;
            sum += r * r;
        }
        return n_ == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(n_));
    }

    // Dense output on the last step at fraction theta in [0, 1].
    void dense(const State& y, const State& k1, double h, double theta, State& out) const {
        out.resize(n_);
        const double t1 = 1.0 - theta;
        for (std::size_t i = 0; i < n_; ++i) {
            const double r2 = ynew_[i] - y[i];
            const double r3 = h * k1[i] - r2;
            const double r4 = r2 - h * k7_[i] - r3;
            const double r5 =
                h * (d1 * k1[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
            out[i] = y[i] + theta * (r2 + t1 * (r3 + theta * (r4 + t1 * r5)));
        }
    }

    const State& ynew() const { return ynew_; }
    const State& k7() const { return k7_; }
    void field(std::span<const double> x, std::span<double> out) const { f_(x, out); }

private:
    struct Term {
        double a;
        const State* k;
    };

    void stage(const State& y, double h, std::initializer_list<Term> terms, State& out) {
        for (std::size_t i = 0; i < n_; ++i) {
            double acc = 0.0;
            for (const Term& t : terms) acc += t.a * (*t.k)[i];
            tmp_[i] = y[i] + h * acc;
        }
        f_(tmp_, out);
    }

    FieldEvaluator f_;
    std::size_t n_;
    State k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_, err_;
};

std::vector<double> sample_times(double t_end, double dt) {
    std::vector<double> ts;
    if (!(dt > 0.0) || dt >= t_end) {
        ts.push_back(t_end);
        return ts;
    }
    const auto count = static_cast<long>(std::floor(t_end / dt + 1e-9));
    for (long k = 1; k <= count; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (t >= t_end - 1e-9 * dt) break;
        ts.push_back(t);
    }
    ts.push_back(t_end);
    return ts;
}

double initial_step(const Stepper& st, const State& y, const State& f0, double t_end, double rtol, double atol) {
    const std::size_t n = y.size();
    double d0 = 0.0, d1n = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::abs(y[i]);
        d0 += (y[i] / sc) * (y[i] / sc);
        d1n += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / static_cast<double>(n));
    d1n = std::sqrt(d1n / static_cast<double>(n));
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, t_end);
    State y1(n), f1(n);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + h0 * f0[i];
    try {
        st.field(y1, f1);
    } catch (const EvalError&) {
        return h0;
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::abs(y[i]);
        d2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
    }
    d2 = std::sqrt(d2 / static_cast<double>(n)) / h0;
    const double dm = std::max(d1n, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min({100 * h0, h1, t_end});
}

void check_start(const SystemDef& s, std::span<const double> x0, const IntegratorOptions& opts) {
    if (static_cast<int>(x0.size()) != s.n)
        throw IntegrationError("initial state has dimension " + std::to_string(x0.size()) + ", system has " +
                               std::to_string(s.n));
    for (double v : x0)
        if (!std::isfinite(v)) throw IntegrationError("initial state is not finite");
    if (!s.domain.contains_closed(x0, opts.boundary_tol))
        throw IntegrationError("initial state lies outside the domain");
}

}  // namespace

Trajectory integrate(const SystemDef& s, std::span<const double> x0, double t_end, const IntegratorOptions& opts) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw IntegrationError("t_end must be positive and finite");
    check_start(s, x0, opts);
    Stepper st(s);
    const std::size_t n = x0.size();

    Trajectory tr;
    State y(x0.begin(), x0.end());
    State k1(n);
    try {
        st.field(y, k1);
    } catch (const EvalError& e) {
        throw IntegrationError(std::string("field cannot be evaluated at the initial state: ") + e.what());
    }
    tr.times.push_back(0.0);
    tr.states.push_back(y);
    if (n == 0) {
        tr.times.push_back(t_end);
        tr.states.push_back(y);
        return tr;
    }

    const std::vector<double> ts = sample_times(t_end, opts.dt);
    std::size_t next = 0;
    double t = 0.0;
    double h = initial_step(st, y, k1, t_end, opts.rtol, opts.atol);
    bool last_rejected = false;
    State buf;

    while (t < t_end) {
        if (tr.accepted_steps + tr.rejected_steps >= opts.max_steps)
            throw IntegrationError("step budget exhausted at t = " + std::to_string(t));
        bool final_step = false;
        if (t + h >= t_end || t_end - (t + h) < 1e-12 * t_end) {
            h = t_end - t;
            final_step = true;
        }
        double err = 0.0;
        try {
            st.step(y, k1, h);
            err = st.error_norm(y, opts.rtol, opts.atol);
        } catch (const EvalError&) {
            err = std::numeric_limits<double>::infinity();
        }
        if (!std::isfinite(err)) {
            ++tr.rejected_steps;
            last_rejected = true;
            h *= 0.25;
            if (h < opts.h_min) throw IntegrationError("non-finite field value near t = " + std::to_string(t));
            continue;
        }
        if (err > 1.0) {
            ++tr.rejected_steps;
            last_rejected = true;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (h < opts.h_min) throw IntegrationError("step size underflow at t = " + std::to_string(t));
            continue;
        }

        ++tr.accepted_steps;
        const double t_new = final_step ? t_end : t + h;
        while (next < ts.size() && ts[next] <= t_new) {
            const double theta = std::clamp((ts[next] - t) / h, 0.0, 1.0);
            if (ts[next] == t_new) {
                buf = st.ynew();
            } else {
                st.dense(y, k1, h, theta, buf);
            }
            tr.times.push_back(ts[next]);
            tr.states.push_back(buf);
            ++next;
        }
        t = t_new;
        y = st.ynew();
        k1 = st.k7();

        const bool blown = inf_norm(y) > opts.blowup;
        const bool outside = !s.domain.contains_closed(y, opts.boundary_tol);
        if (blown || outside) {
            if (tr.times.back() < t) {
                tr.times.push_back(t);
                tr.states.push_back(y);
            }
            tr.terminated_by = blown ? Termination::BlowUp : Termination::DomainExit;
            return tr;
        }

        double fac = err == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 10.0);
        if (last_rejected) fac = std::min(fac, 1.0);
        last_rejected = false;
        h *= fac;
    }
    return tr;
}

State integrate_fixed_step(const SystemDef& s, std::span<const double> x0, double t_end, int steps) {
    if (steps < 1) throw std::invalid_argument("fixed-step integration needs at least one step");
    check_start(s, x0, IntegratorOptions{});
    Stepper st(s);
    State y(x0.begin(), x0.end()), k1(y.size());
    const double h = t_end / steps;
    try {
        st.field(y, k1);
        for (int k = 0; k < steps; ++k) {
            st.step(y, k1, h);
            y = st.ynew();
            k1 = st.k7();
        }
    } catch (const EvalError& e) {
        throw IntegrationError(std::string("fixed-step integration failed: ") + e.what());
    }
    return y;
}

// ---------------------------------------------------------------------------
// Omega limits

namespace {

// Closest point of segment [a, b] to p in the max norm, approximated by the
// Euclidean projection parameter.
std::pair<double, double> segment_distance(const State& a, const State& b, const State& p) {
    double ab2 = 0.0, ap_ab = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double ab = b[i] - a[i];
        ab2 += ab * ab;
        ap_ab += (p[i] - a[i]) * ab;
    }
    const double tau = ab2 > 0.0 ? std::clamp(ap_ab / ab2, 0.0, 1.0) : 0.0;
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) d = std::max(d, std::abs(a[i] + tau * (b[i] - a[i]) - p[i]));
    return {d, tau};
}

double field_norm(const FieldEvaluator& f, const State& x) {
    try {
        return inf_norm(f(x));
    } catch (const EvalError&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace

OmegaEstimate estimate_omega_limit(const SystemDef& s, std::span<const double> x0, const OmegaOptions& opts) {
    return classify_trajectory(s, integrate(s, x0, opts.horizon, opts.integrator), opts);
}

OmegaEstimate classify_trajectory(const SystemDef& s, const Trajectory& tr, const OmegaOptions& opts) {
    OmegaEstimate out;
    auto& dg = out.diagnostics;
    dg.terminated_by = tr.terminated_by;
    dg.final_time = tr.final_time();
    const State& xT = tr.final_state();
    const FieldEvaluator f(s);
    dg.residual = field_norm(f, xT);

    if (tr.terminated_by == Termination::BlowUp) {
        out.verdict = OmegaEstimate::Verdict::Unbounded;
        return out;
    }
    if (tr.terminated_by == Termination::DomainExit) return out;

    const double T = tr.final_time();
    const std::size_t m = tr.times.size();
    for (std::size_t k = 0; k < m; ++k)
        if (tr.times[k] >= 0.9 * T) dg.drift = std::max(dg.drift, inf_dist(tr.states[k], xT));
    if (dg.drift <= opts.drift_tol) {
        State p = xT;
        if (dg.residual > opts.eq_tol) {
            // the adaptive stepper hovers around a stable equilibrium at a
            // distance set by atol/rtol; a Newton step from x_T removes that
            auto polished = newton_polish(s, xT, opts.eq_tol);
            if (polished && inf_dist(*polished, xT) <= opts.drift_tol &&
                s.domain.contains_closed(*polished, opts.integrator.boundary_tol)) {
                p = std::move(*polished);
                dg.polished = true;
                dg.residual = field_norm(f, p);
            }
        }
        if (dg.residual <= opts.eq_tol) {
            out.verdict = OmegaEstimate::Verdict::Equilibrium;
            out.point = p;
            out.samples = {p};
            return out;
        }
    }

    // Near-returns to x_T, scanning the second half backwards. An episode
    // starts when a segment comes within cyc_tol and ends once the orbit is
    // again farther than 10 * cyc_tol.
    const double far = 10.0 * opts.cyc_tol;
    std::size_t first = 0;
    while (first + 1 < m && tr.times[first] < 0.5 * T) ++first;
    bool departed = false, in_episode = false;
    double best_d = 0.0, best_t = 0.0;
    double closest = std::numeric_limits<double>::infinity();
    std::vector<double> returns;
    for (std::size_t k = m - 1; k > first; --k) {
        const State& a = tr.states[k - 1];
        const State& b = tr.states[k];
        if (!departed) {
            if (inf_dist(a, xT) > far) departed = true;
            continue;
        }
        const auto [d, tau] = segment_distance(a, b, xT);
        closest = std::min(closest, d);
        if (d <= opts.cyc_tol) {
            const double t_at = tr.times[k - 1] + tau * (tr.times[k] - tr.times[k - 1]);
            if (!in_episode || d < best_d) {
                best_d = d;
                best_t = t_at;
            }
            in_episode = true;
        } else if (in_episode && inf_dist(a, xT) > far) {
            returns.push_back(best_t);
            in_episode = false;
        }
    }
    dg.closest_return = std::isfinite(closest) ? closest : 0.0;
    dg.returns = static_cast<int>(returns.size());
    dg.return_times = returns;
    if (static_cast<int>(returns.size()) < opts.min_returns) return out;

    std::vector<double> periods;
    double prev = T;
    for (double r : returns) {
        periods.push_back(prev - r);
        prev = r;
    }
    const auto [pmin, pmax] = std::minmax_element(periods.begin(), periods.end());
    const double period = (T - returns.back()) / static_cast<double>(returns.size());
    dg.period_spread = (*pmax - *pmin) / period;
    if (dg.period_spread > opts.period_spread) return out;

    std::vector<std::size_t> last_period;
    for (std::size_t k = 0; k < m; ++k)
        if (tr.times[k] >= T - period) last_period.push_back(k);
    dg.min_speed = std::numeric_limits<double>::infinity();
    double diameter = 0.0;
    for (std::size_t k : last_period) {
        dg.min_speed = std::min(dg.min_speed, field_norm(f, tr.states[k]));
        diameter = std::max(diameter, inf_dist(tr.states[k], xT));
    }
    if (dg.min_speed < opts.min_speed || diameter <= far) return out;

    out.verdict = OmegaEstimate::Verdict::Cycle;
    out.period = period;
    const std::size_t count = last_period.size();
    const std::size_t want = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, opts.max_cycle_samples)));
    for (std::size_t j = 0; j < want; ++j) out.samples.push_back(tr.states[last_period[j * count / want]]);
    return out;
}

// ---------------------------------------------------------------------------
// Equilibria

std::optional<State> newton_polish(const SystemDef& s, std::span<const double> x0, double eq_tol, int iterations) {
    const FieldEvaluator f(s);
    const auto n = static_cast<Eigen::Index>(s.n);
    State x(x0.begin(), x0.end());
    State fx;
    try {
        fx = f(x);
    } catch (const EvalError&) {
        return std::nullopt;
    }
    auto sq = [](const State& v) {
        double acc = 0.0;
        for (double e : v) acc += e * e;
        return acc;
    };

    for (int it = 0; it < iterations; ++it) {
        if (inf_norm(fx) <= 1e-3 * eq_tol) break;
        Eigen::MatrixXd J(n, n);
        bool ok = true;
        for (Eigen::Index j = 0; j < n && ok; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            const double h = 1e-7 * std::max(1.0, std::abs(x[sj]));
            State xp = x, xm = x;
            xp[sj] += h;
            xm[sj] -= h;
            try {
                const State fp = f(xp), fm = f(xm);
                for (Eigen::Index i = 0; i < n; ++i)
                    J(i, j) = (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2 * h);
            } catch (const EvalError&) {
                ok = false;
            }
        }
        if (!ok) break;
        Eigen::VectorXd rhs(n);
        for (Eigen::Index i = 0; i < n; ++i) rhs(i) = -fx[static_cast<std::size_t>(i)];
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        const Eigen::VectorXd dx = lu.isInvertible() ? Eigen::VectorXd(lu.solve(rhs))
                                                     : Eigen::VectorXd(J.colPivHouseholderQr().solve(rhs));
        if (!dx.allFinite()) break;

        const double base = sq(fx);
        bool improved = false;
        double lambda = 1.0;
        for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
            State xn = x;
            for (Eigen::Index i = 0; i < n; ++i) xn[static_cast<std::size_t>(i)] += lambda * dx(i);
            State fn;
            try {
                fn = f(xn);
            } catch (const EvalError&) {
                continue;
            }
            if (sq(fn) < base) {
                x = std::move(xn);
                fx = std::move(fn);
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    if (inf_norm(fx) > eq_tol || !s.domain.contains_closed(x)) return std::nullopt;
    for (double& v : x) v += 0.0;  // -0 -> +0
    return x;
}

std::vector<State> find_equilibria(const SystemDef& s, const EquilibriumOptions& opts) {
    const int n = s.n;
    std::vector<State> starts;
    if (n == 0) return {};

    int k = std::max(1, opts.grid_per_axis);
    while (k > 1 && std::pow(static_cast<double>(k), n) > opts.grid_cap) --k;
    std::vector<std::pair<double, double>> ranges;
    for (int i = 0; i < n; ++i) {
        const CoordInterval& c = s.domain[i];
        ranges.push_back({std::max(c.lo.value, -opts.radius), std::min(c.hi.value, opts.radius)});
    }
    std::vector<int> digit(static_cast<std::size_t>(n), 0);
    long total = 1;
    for (int i = 0; i < n; ++i) total *= k;
    for (long p = 0; p < total; ++p) {
        State x(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const auto [lo, hi] = ranges[static_cast<std::size_t>(i)];
            const double t = k == 1 ? 0.5 : static_cast<double>(digit[static_cast<std::size_t>(i)]) / (k - 1);
            x[static_cast<std::size_t>(i)] = lo + (hi - lo) * t;
        }
        starts.push_back(std::move(x));
        for (int i = 0; i < n; ++i) {
            if (++digit[static_cast<std::size_t>(i)] < k) break;
            digit[static_cast<std::size_t>(i)] = 0;
        }
    }

    IntegratorOptions iopts;
    iopts.dt = opts.trajectory_time;
    for (const auto& x0 : random_domain_points(s.domain, opts.trajectory_starts, opts.radius, opts.seed)) {
        try {
            const Trajectory tr = integrate(s, x0, opts.trajectory_time, iopts);
            if (tr.terminated_by == Termination::TEnd) starts.push_back(tr.final_state());
        } catch (const IntegrationError&) {
        }
    }

    std::vector<State> found;
    for (const auto& x0 : starts) {
        auto p = newton_polish(s, x0, opts.eq_tol, opts.newton_iterations);
        if (!p) continue;
        const bool dup = std::any_of(found.begin(), found.end(),
                                     [&](const State& q) { return inf_dist(q, *p) <= opts.cluster_tol; });
        if (!dup) found.push_back(std::move(*p));
    }
    std::sort(found.begin(), found.end());
    return found;
}

// ---------------------------------------------------------------------------
// Sampled checks

namespace {

IntegratorOptions grid_options(const ProbeOptions& opts) {
    IntegratorOptions io = opts.integrator;
    io.dt = opts.grid.dt;
    return io;
}

std::string describe_early_stop(const Trajectory& tr) {
    return std::string("integration stopped early (") + std::string(to_string(tr.terminated_by)) + ") at t = " +
           std::to_string(tr.final_time());
}

// Same system with the fields of the first n1 coordinates only, later
// coordinates frozen at `frozen`.
SystemDef leading_block(const SystemDef& g, int n1, std::span<const double> frozen) {
    auto leaf = [&](const Expr& e) -> std::optional<Expr> {
        if (e.kind() != Expr::Kind::Variable || e.index() < n1) return std::nullopt;
        return Expr::constant(frozen[static_cast<std::size_t>(e.index())]);
    };
    SystemDef top;
    top.n = n1;
    top.params = g.params;
    std::vector<CoordInterval> coords;
    for (int i = 0; i < n1; ++i) {
        top.fields.push_back(substitute(g.fields[static_cast<std::size_t>(i)], leaf));
        coords.push_back(g.domain[i]);
    }
    top.domain = DomainBox(std::move(coords));
    return top;
}

}  // namespace

MonotoneReport check_monotone(const SystemDef& s, int n_pairs, double tol, const ProbeOptions& opts) {
    std::vector<std::pair<State, State>> pairs;
    Rng rng(opts.seed ^ 0x6d6f6e6f746f6e65ULL);
    for (auto& y : random_domain_points(s.domain, n_pairs, opts.radius, opts.seed)) {
        State x = y;
        for (int i = 0; i < s.n; ++i) {
            const auto si = static_cast<std::size_t>(i);
            double delta = rng.below(4) == 0 ? 0.0 : rng.uniform(0.0, 0.5 * opts.radius);
            while (delta > 0.0 && !s.domain[i].contains(y[si] + delta)) delta *= 0.5;
            if (delta < 1e-12) delta = 0.0;
            x[si] = y[si] + delta;
        }
        pairs.push_back({std::move(x), std::move(y)});
    }
    return check_monotone_pairs(s, pairs, tol, opts);
}

MonotoneReport check_monotone_pairs(const SystemDef& s, const std::vector<std::pair<State, State>>& pairs,
                                    double tol, const ProbeOptions& opts) {
    MonotoneReport rep;
    rep.worst_gap = -std::numeric_limits<double>::infinity();
    const IntegratorOptions io = grid_options(opts);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto& [hi, lo] = pairs[p];
        if (order_compare(hi, lo).verdict != OrderRelation::Verdict::GEQ &&
            order_compare(hi, lo).verdict != OrderRelation::Verdict::Equal)
            throw std::invalid_argument("pair " + std::to_string(p) + " is not ordered");
        try {
            const Trajectory a = integrate(s, hi, opts.grid.t_end, io);
            const Trajectory b = integrate(s, lo, opts.grid.t_end, io);
            if (a.terminated_by != Termination::TEnd)
                rep.failures.push_back("pair " + std::to_string(p) + " upper: " + describe_early_stop(a));
            if (b.terminated_by != Termination::TEnd)
                rep.failures.push_back("pair " + std::to_string(p) + " lower: " + describe_early_stop(b));
            const std::size_t common = std::min(a.times.size(), b.times.size());
            for (std::size_t k = 0; k < common; ++k) {
                if (a.times[k] != b.times[k]) break;
                for (int i = 0; i < s.n; ++i) {
                    const double x = a.states[k][static_cast<std::size_t>(i)];
                    const double y = b.states[k][static_cast<std::size_t>(i)];
                    rep.worst_gap = std::max(rep.worst_gap, y - x);
                    if (x < y - tol) rep.violations.push_back({static_cast<int>(p), a.times[k], i, x, y});
                }
            }
            ++rep.pairs_checked;
        } catch (const IntegrationError& e) {
            rep.failures.push_back("pair " + std::to_string(p) + ": " + e.what());
        }
    }
    if (rep.pairs_checked == 0) rep.worst_gap = 0.0;
    rep.pass = rep.violations.empty();
    return rep;
}

FlowComparison check_semiconjugacy(const SystemDef& s, const CascadeDecomposition& d, int n_points, double tol,
                                   const ProbeOptions& opts) {
    FlowComparison out;
    const SystemDef& g = d.transformed;
    const int n1 = d.top_index;
    if (g.n != s.n || n1 < 1 || n1 > g.n) {
        out.pass = false;
        out.structural = false;
        out.failures.push_back("decomposition dimensions do not match the system");
        return out;
    }
    if (!same_system(apply_change(s, d.change), g)) {
        out.structural = false;
        out.failures.push_back("transformed system is not the image of the system under the change");
    }
    for (int i = 0; i < n1; ++i)
        if (max_variable(g.fields[static_cast<std::size_t>(i)]) >= n1) {
            out.structural = false;
            out.failures.push_back("top block component " + std::to_string(i + 1) +
                                   " depends on a later coordinate");
            break;
        }

    const IntegratorOptions io = grid_options(opts);
    for (const auto& y0 : random_domain_points(g.domain, n_points, opts.radius, opts.seed)) {
        try {
            const Trajectory full = integrate(g, y0, opts.grid.t_end, io);
            const SystemDef top = leading_block(g, n1, y0);
            const std::span<const double> head(y0.data(), static_cast<std::size_t>(n1));
            const Trajectory part = integrate(top, head, opts.grid.t_end, io);
            if (full.terminated_by != Termination::TEnd) out.failures.push_back(describe_early_stop(full));
            const std::size_t common = std::min(full.times.size(), part.times.size());
            for (std::size_t k = 0; k < common; ++k)
                for (int i = 0; i < n1; ++i)
                    out.max_deviation =
                        std::max(out.max_deviation, std::abs(full.states[k][static_cast<std::size_t>(i)] -
                                                             part.states[k][static_cast<std::size_t>(i)]));
            ++out.points_checked;
        } catch (const IntegrationError& e) {
            out.failures.push_back(e.what());
        }
    }
    out.pass = out.structural && out.points_checked > 0 && out.max_deviation <= tol;
    return out;
}

FlowComparison check_conjugacy(const SystemDef& s, const ElementaryChange& c, int n_points, double tol,
                               const ProbeOptions& opts) {
    FlowComparison out;
    const SystemDef g = apply_change(s, c);
    const IntegratorOptions io = grid_options(opts);
    for (const auto& x0 : random_domain_points(s.domain, n_points, opts.radius, opts.seed)) {
        try {
            const Trajectory a = integrate(s, x0, opts.grid.t_end, io);
            const Trajectory b = integrate(g, c.apply(x0), opts.grid.t_end, io);
            if (a.terminated_by != Termination::TEnd) out.failures.push_back(describe_early_stop(a));
            const std::size_t common = std::min(a.times.size(), b.times.size());
            for (std::size_t k = 0; k < common; ++k) {
                const State la = c.apply(a.states[k]);
                out.max_deviation = std::max(out.max_deviation, inf_dist(la, b.states[k]));
            }
            ++out.points_checked;
        } catch (const IntegrationError& e) {
            out.failures.push_back(e.what());
        }
    }
    out.pass = out.points_checked > 0 && out.max_deviation <= tol;
    return out;
}

OrderRelation order_compare(std::span<const double> x, std::span<const double> y, double margin) {
    if (x.size() != y.size()) throw std::invalid_argument("order_compare: dimension mismatch");
    OrderRelation r;
    bool geq = true, leq = true;
    double lo = std::numeric_limits<double>::infinity(), hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        if (d < 0) geq = false;
        if (d > 0) leq = false;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    if (geq && leq) {
        r.verdict = OrderRelation::Verdict::Equal;
    } else if (geq) {
        r.verdict = OrderRelation::Verdict::GEQ;
    } else if (leq) {
        r.verdict = OrderRelation::Verdict::LEQ;
    } else {
        r.verdict = OrderRelation::Verdict::Incomparable;
    }
    r.strict_dominance = !x.empty() && (lo > margin || hi < -margin);
    return r;
}

UnorderedReport check_unordered_omega(const std::vector<State>& points, double margin) {
    UnorderedReport rep;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const OrderRelation r = order_compare(points[i], points[j], margin);
            if (!r.strict_dominance) continue;
            rep.pass = false;
            const bool i_above = r.verdict == OrderRelation::Verdict::GEQ;
            rep.offending = i_above ? std::pair{static_cast<int>(i), static_cast<int>(j)}
                                    : std::pair{static_cast<int>(j), static_cast<int>(i)};
            return rep;
        }
    return rep;
}

Accessibility accessibility(const DomainBox& domain, std::span<const double> p) {
    if (static_cast<int>(p.size()) != domain.dim()) throw std::invalid_argument("accessibility: dimension mismatch");
    if (!domain.contains(p)) throw std::invalid_argument("accessibility: point lies outside the domain");
    switch (domain.domain_class()) {
        case DomainClass::C1:
        case DomainClass::C2: return {true, true};
        case DomainClass::C3: return {true, std::all_of(p.begin(), p.end(), [](double v) { return v > 0.0; })};
        case DomainClass::C4:
        case DomainClass::Other: break;
    }
    Accessibility a{true, true};
    for (int i = 0; i < domain.dim(); ++i) {
        const double v = p[static_cast<std::size_t>(i)];
        if (!(v < domain[i].hi.value)) a.above = false;
        if (!(v > domain[i].lo.value)) a.below = false;
    }
    return a;
}

}  // namespace cohere
