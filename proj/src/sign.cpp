#include "cohere/sign.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "cohere/errors.hpp"

namespace cohere {

std::string_view to_string(Sign s) {
    switch (s) {
        case Sign::Zero: return "0";
        case Sign::Plus: return "+";
        case Sign::Minus: return "-";
        case Sign::Theta: return "?";
    }
    return "?";
}

std::string_view to_string(SignEvidence::Kind k) {
    switch (k) {
        case SignEvidence::Kind::SymbolicZero: return "symbolic_zero";
        case SignEvidence::Kind::IntervalBound: return "interval";
        case SignEvidence::Kind::Witnesses: return "witnesses";
        case SignEvidence::Kind::Conservative: return "conservative";
        case SignEvidence::Kind::Failure: return "failure";
    }
    return "?";
}

std::uint64_t Rng::next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

std::vector<std::vector<double>> sample_points(const DomainBox& domain, const SignOptions& opts) {
    const auto box = domain.analysis_box(opts.big_box);
    const int n = domain.dim();
    std::vector<std::vector<double>> pts;
    if (n == 0) return pts;

    // grid: k points per axis with k^n <= grid_cap
    int k = std::max(2, opts.grid_per_axis);
    while (k > 2 && std::pow(static_cast<double>(k), n) > opts.grid_cap) --k;
    long total = 1;
    for (int d = 0; d < n && total <= opts.grid_cap; ++d) total *= k;
    total = std::min<long>(total, opts.grid_cap);
    std::vector<int> digit(static_cast<std::size_t>(n), 0);
    for (long p = 0; p < total; ++p) {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int d = 0; d < n; ++d) {
            const auto& iv = box[static_cast<std::size_t>(d)];
            const double t = static_cast<double>(digit[static_cast<std::size_t>(d)]) / (k - 1);
            x[static_cast<std::size_t>(d)] = iv.lo + (iv.hi - iv.lo) * t;
        }
        pts.push_back(std::move(x));
        for (int d = 0; d < n; ++d) {
            if (++digit[static_cast<std::size_t>(d)] < k) break;
            digit[static_cast<std::size_t>(d)] = 0;
        }
    }

    // random points at mixed scales, so unbounded axes are not sampled only
    // at |x| ~ 1e6
    static constexpr double kScales[] = {1.0, 10.0, 1000.0, 0.0};
    Rng rng(opts.seed);
    for (int p = 0; p < opts.random_points; ++p) {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int d = 0; d < n; ++d) {
            const auto& iv = box[static_cast<std::size_t>(d)];
            double scale = kScales[rng.below(4)];
            if (scale == 0.0) scale = opts.big_box;
            const double c = std::clamp(0.0, iv.lo, iv.hi);
            const double lo = std::max(iv.lo, c - scale);
            const double hi = std::min(iv.hi, c + scale);
            x[static_cast<std::size_t>(d)] = rng.uniform(lo, hi);
        }
        pts.push_back(std::move(x));
    }
    return pts;
}

std::vector<std::vector<double>> random_domain_points(const DomainBox& domain, int count, double radius,
                                                      std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> pts;
    pts.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int p = 0; p < count; ++p) {
        std::vector<double> x(static_cast<std::size_t>(domain.dim()));
        for (int d = 0; d < domain.dim(); ++d) {
            const CoordInterval& c = domain[d];
            const double centre = std::clamp(0.0, c.lo.value, c.hi.value);
            const double lo = std::max(c.lo.value, centre - radius);
            const double hi = std::min(c.hi.value, centre + radius);
            double v = rng.uniform(lo, hi);
            // uniform() is in [0, 1), so only an open lower endpoint can be hit
            if (!c.contains(v)) v = lo + 0.5 * (hi - lo);
            x[static_cast<std::size_t>(d)] = v;
        }
        pts.push_back(std::move(x));
    }
    return pts;
}

namespace {

struct BoxResult {
    bool proved = false;
    Sign sign = Sign::Theta;
    Interval hull{0.0, 0.0};
    int boxes = 0;
};

// Bisection on the widest referenced coordinate until every sub-box has an
// enclosure of one sign, both signs are proved on different boxes, or the
// budget runs out.
BoxResult interval_stage(const Expr& d, const std::vector<Interval>& box, int max_boxes) {
    BoxResult r;
    std::vector<int> vars;
    for (int v = 0; v < static_cast<int>(box.size()); ++v)
        if (references_variable(d, v)) vars.push_back(v);

    std::queue<std::vector<Interval>> work;
    work.push(box);
    bool any_pos = false, any_neg = false, first = true;
    while (!work.empty()) {
        auto b = std::move(work.front());
        work.pop();
        const Interval iv = eval_interval(d, b);  // throws EvalError on domain errors
        ++r.boxes;
        if (first) {
            r.hull = iv;
            first = false;
        }
        if (iv.nonnegative() && !std::isnan(iv.lo)) {
            any_pos = true;
            continue;
        }
        if (iv.nonpositive() && !std::isnan(iv.hi)) {
            any_neg = true;
            continue;
        }
        if (vars.empty() || r.boxes + static_cast<int>(work.size()) + 2 > max_boxes) return r;
        int widest = vars.front();
        for (int v : vars)
            if (b[static_cast<std::size_t>(v)].width() > b[static_cast<std::size_t>(widest)].width()) widest = v;
        const Interval w = b[static_cast<std::size_t>(widest)];
        const double m = w.mid();
        if (!(m > w.lo && m < w.hi)) return r;
        auto left = b;
        auto right = std::move(b);
        left[static_cast<std::size_t>(widest)] = {w.lo, m};
        right[static_cast<std::size_t>(widest)] = {m, w.hi};
        work.push(std::move(left));
        work.push(std::move(right));
    }
    if (any_pos && any_neg) return r;  // sign differs between boxes; sampling finds witnesses
    r.proved = true;
    r.sign = any_neg ? Sign::Minus : Sign::Plus;
    return r;
}

}  // namespace

SignVerdict sign_of_expr(const Expr& d, const DomainBox& domain, const SignOptions& opts) {
    SignVerdict out;
    if (d.is_constant(0.0)) {
        out.sign = Sign::Zero;
        out.evidence.kind = SignEvidence::Kind::SymbolicZero;
        return out;
    }
    const auto box = domain.analysis_box(opts.big_box);
    try {
        const BoxResult r = interval_stage(d, box, opts.max_boxes);
        out.evidence.bound = r.hull;
        out.evidence.boxes = r.boxes;
        if (r.proved) {
            out.sign = r.sign;
            out.evidence.kind = SignEvidence::Kind::IntervalBound;
            return out;
        }
    } catch (const EvalError& e) {
        out.sign = Sign::Theta;
        out.evidence.kind = SignEvidence::Kind::Failure;
        out.evidence.bound = Interval::whole();
        out.evidence.note = e.what();
        return out;
    }

    const Program prog(d);
    bool have_pos = false, have_neg = false;
    for (const auto& x : sample_points(domain, opts)) {
        double v = 0.0;
        try {
            v = prog.run(x);
        } catch (const EvalError&) {
            continue;
        }
        ++out.evidence.samples;
        if (!std::isfinite(v)) continue;
        if (v > 0.0 && !have_pos) {
            have_pos = true;
            out.evidence.positive_point = x;
            out.evidence.positive_value = v;
        } else if (v < 0.0 && !have_neg) {
            have_neg = true;
            out.evidence.negative_point = x;
            out.evidence.negative_value = v;
        }
        if (have_pos && have_neg) break;
    }
    out.sign = Sign::Theta;
    out.evidence.kind = have_pos && have_neg ? SignEvidence::Kind::Witnesses : SignEvidence::Kind::Conservative;
    return out;
}

SignVerdict sign_of_partial(const SystemDef& s, int i, int j, const SignOptions& opts) {
    if (i < 0 || j < 0 || i >= s.n || j >= s.n) throw std::out_of_range("sign_of_partial: coordinate out of range");
    if (i == j) throw std::invalid_argument("sign_of_partial: diagonal entries are not interaction edges");
    return sign_of_expr(differentiate(s.fields[static_cast<std::size_t>(i)], j), s.domain, opts);
}

}  // namespace cohere
