#include "cohere/interval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cohere/errors.hpp"

namespace cohere {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Interval make(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) return Interval::whole();
    return {std::min(a, b), std::max(a, b)};
}

// 0 * inf is taken as 0: the zero endpoint is exact, the infinite one is a bound.
double mul0(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    return a * b;
}

// sin over [lo, hi] with hi - lo < 2*pi, via the extrema at pi/2 + k*pi.
Interval sin_range(double lo, double hi) {
    constexpr double pi = std::numbers::pi;
    if (!(hi - lo < 2.0 * pi)) return {-1.0, 1.0};
    double a = std::sin(lo);
    double b = std::sin(hi);
    double out_lo = std::min(a, b);
    double out_hi = std::max(a, b);
    // maxima at pi/2 + 2k*pi, minima at -pi/2 + 2k*pi
    const double k_max = std::ceil((lo - pi / 2) / (2 * pi));
    if (pi / 2 + 2 * pi * k_max <= hi) out_hi = 1.0;
    const double k_min = std::ceil((lo + pi / 2) / (2 * pi));
    if (-pi / 2 + 2 * pi * k_min <= hi) out_lo = -1.0;
    return {out_lo, out_hi};
}

}  // namespace

Interval Interval::whole() { return {-kInf, kInf}; }

double Interval::mid() const {
    if (std::isinf(lo) && std::isinf(hi)) return 0.0;
    if (std::isinf(lo)) return hi - 1.0;
    if (std::isinf(hi)) return lo + 1.0;
    return lo + 0.5 * (hi - lo);
}

Interval operator-(Interval a) { return {-a.hi, -a.lo}; }

Interval operator+(Interval a, Interval b) { return make(a.lo + b.lo, a.hi + b.hi); }

Interval operator-(Interval a, Interval b) { return make(a.lo - b.hi, a.hi - b.lo); }

Interval operator*(Interval a, Interval b) {
    const double p[4] = {mul0(a.lo, b.lo), mul0(a.lo, b.hi), mul0(a.hi, b.lo), mul0(a.hi, b.hi)};
    for (double v : p)
        if (std::isnan(v)) return Interval::whole();
    return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

Interval operator/(Interval a, Interval b) {
    if (b.lo <= 0.0 && b.hi >= 0.0) return Interval::whole();
    const Interval recip{1.0 / b.hi, 1.0 / b.lo};
    return a * recip;
}

Interval ipow(Interval a, int k) {
    if (k == 0) return Interval::point(1.0);
    if (k < 0) return Interval::point(1.0) / ipow(a, -k);
    const double l = int_pow(a.lo, k);
    const double h = int_pow(a.hi, k);
    if (k % 2 == 1) return make(l, h);
    if (a.contains(0.0)) return {0.0, std::max(l, h)};
    return make(l, h);
}

Interval apply_func(Func f, Interval a) {
    switch (f) {
        case Func::Exp: return {std::exp(a.lo), std::exp(a.hi)};
        case Func::Log:
            if (a.lo < 0.0) throw EvalError("log of interval " + to_string(a) + " reaching below zero");
            return {a.lo == 0.0 ? -kInf : std::log(a.lo), std::log(a.hi)};
        case Func::Tanh: return {std::tanh(a.lo), std::tanh(a.hi)};
        case Func::Sigmoid: return {1.0 / (1.0 + std::exp(-a.lo)), 1.0 / (1.0 + std::exp(-a.hi))};
        case Func::Sin: return sin_range(a.lo, a.hi);
        case Func::Cos: return sin_range(a.lo + std::numbers::pi / 2, a.hi + std::numbers::pi / 2);
        case Func::Sqrt:
            if (a.lo < 0.0) throw EvalError("sqrt of interval " + to_string(a) + " reaching below zero");
            return {std::sqrt(a.lo), std::sqrt(a.hi)};
    }
    return Interval::whole();
}

Interval eval_interval(const Expr& e, std::span<const Interval> box) {
    using K = Expr::Kind;
    switch (e.kind()) {
        case K::Constant: return Interval::point(e.value());
        case K::Variable:
            if (static_cast<std::size_t>(e.index()) >= box.size())
                throw EvalError("variable x" + std::to_string(e.index() + 1) + " out of range");
            return box[static_cast<std::size_t>(e.index())];
        case K::Parameter: throw EvalError("unresolved parameter '" + e.name() + "'");
        case K::Negate: return -eval_interval(e.lhs(), box);
        case K::Add: return eval_interval(e.lhs(), box) + eval_interval(e.rhs(), box);
        case K::Subtract: return eval_interval(e.lhs(), box) - eval_interval(e.rhs(), box);
        case K::Multiply: {
            // x*x is a square: use the tighter even-power rule
            if (e.lhs() == e.rhs()) return ipow(eval_interval(e.lhs(), box), 2);
            return eval_interval(e.lhs(), box) * eval_interval(e.rhs(), box);
        }
        case K::Divide: return eval_interval(e.lhs(), box) / eval_interval(e.rhs(), box);
        case K::Power: return ipow(eval_interval(e.lhs(), box), e.exponent());
        case K::Call: return apply_func(e.func(), eval_interval(e.lhs(), box));
    }
    return Interval::whole();
}

std::string to_string(const Interval& iv) {
    std::ostringstream os;
    os.precision(17);
    os << '[' << iv.lo << ", " << iv.hi << ']';
    return os.str();
}

}  // namespace cohere
