#pragma once

// Closed real intervals with plain floating-point endpoints (no directed
// rounding). Bounds may be infinite. An operation whose result is
// undefined (inf - inf, a NaN endpoint) returns the whole line, so every
// result is a superset of the true range up to rounding.

#include <span>
#include <string>

#include "cohere/expr.hpp"

namespace cohere {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    static Interval point(double v) { return {v, v}; }
    static Interval whole();

    bool contains(double v) const { return lo <= v && v <= hi; }
    bool nonnegative() const { return lo >= 0.0; }
    bool nonpositive() const { return hi <= 0.0; }
    double width() const { return hi - lo; }
    double mid() const;
};

Interval operator-(Interval a);
Interval operator+(Interval a, Interval b);
Interval operator-(Interval a, Interval b);
Interval operator*(Interval a, Interval b);
Interval operator/(Interval a, Interval b);
Interval ipow(Interval a, int k);
/// Throws EvalError when the interval lies outside the function's domain
/// (log of an interval reaching below zero, sqrt of a negative interval).
Interval apply_func(Func f, Interval a);

/// Natural interval extension of `e` over the box.
Interval eval_interval(const Expr& e, std::span<const Interval> box);

std::string to_string(const Interval& iv);

}  // namespace cohere
