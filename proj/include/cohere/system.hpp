#pragma once

#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cohere/expr.hpp"
#include "cohere/interval.hpp"

namespace cohere {

/// Finite sizes substituted for infinite domain endpoints in sign analysis.
inline constexpr double kBigBox = 1e6;

struct Endpoint {
    double value = 0.0;
    bool closed = false;  // infinite endpoints are always open

    friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

struct CoordInterval {
    Endpoint lo{-std::numeric_limits<double>::infinity(), false};
    Endpoint hi{std::numeric_limits<double>::infinity(), false};

    bool unbounded() const;
    bool bounded() const;
    bool half_bounded() const;
    /// Closure membership with slack `tol`.
    bool contains_closed(double v, double tol = 0.0) const;
    /// Respects open/closed endpoint flags.
    bool contains(double v) const;
    /// The interval mapped through t -> -t.
    CoordInterval reflected() const;

    friend bool operator==(const CoordInterval&, const CoordInterval&) = default;
};

enum class DomainClass { C1, C2, C3, C4, Other };

std::string_view to_string(DomainClass c);

class DomainBox {
public:
    DomainBox() = default;
    explicit DomainBox(std::vector<CoordInterval> coords);
    /// n copies of (-inf, inf).
    static DomainBox unbounded(int n);

    int dim() const { return static_cast<int>(coords_.size()); }
    const CoordInterval& operator[](int i) const { return coords_[static_cast<std::size_t>(i)]; }
    const std::vector<CoordInterval>& coords() const { return coords_; }

    /// C1: all (-inf, inf). C3: every coordinate [0, inf) (or (0, inf)).
    /// C2: exactly one half-bounded coordinate, the rest unbounded.
    /// C4: all bounded. C3 is tested before C2 so the 1-D orthant is C3.
    DomainClass domain_class() const;

    bool contains(std::span<const double> x) const;
    bool contains_closed(std::span<const double> x, double tol = 0.0) const;
    /// Infinite endpoints clamped to +-kBigBox.
    std::vector<Interval> analysis_box(double big = kBigBox) const;

    friend bool operator==(const DomainBox&, const DomainBox&) = default;

private:
    std::vector<CoordInterval> coords_;
};

/// An ODE system x' = F(x) on a box domain. Parameters are substituted into
/// the field expressions at parse time; `params` keeps their values for
/// reporting and printing.
struct SystemDef {
    int n = 0;
    std::vector<Expr> fields;
    DomainBox domain;
    std::map<std::string, double> params;
};

/// Parses the line-oriented system DSL. Throws ParseError with line/column.
SystemDef parse_system(std::string_view text);

/// Prints a system in the DSL. Parameters are not re-emitted (they are
/// already folded into the fields), so parse_system(print_system(s)) yields
/// the same fields and domain.
std::string print_system(const SystemDef& s);

/// Structural equality of fields and domain.
bool same_system(const SystemDef& a, const SystemDef& b);

/// F(x). Throws EvalError naming the offending component on a domain error
/// or non-finite value.
std::vector<double> eval_field(const SystemDef& s, std::span<const double> x);

/// Compiled form of a system's field for repeated evaluation.
class FieldEvaluator {
public:
    explicit FieldEvaluator(const SystemDef& s);

    int dim() const { return static_cast<int>(programs_.size()); }
    /// Writes F(x) into out; throws EvalError like eval_field.
    void operator()(std::span<const double> x, std::span<double> out) const;
    std::vector<double> operator()(std::span<const double> x) const;

private:
    std::vector<Program> programs_;
};

}  // namespace cohere
