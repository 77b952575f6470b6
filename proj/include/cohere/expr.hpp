#pragma once

// Immutable expression trees for the right-hand sides of ODE systems.
//
// Variables are 0-based internally and printed as x1..xn. Every Expr is a
// cheap handle to a shared, never-mutated node, so values can be copied and
// handed to other threads freely.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cohere {

enum class Func { Exp, Log, Tanh, Sigmoid, Sin, Cos, Sqrt };

std::string_view func_name(Func f);
std::optional<Func> func_from_name(std::string_view name);

/// Pointwise function value; throws EvalError outside the natural domain.
double apply_func(Func f, double x);
/// x^k by repeated squaring, k may be negative.
double int_pow(double x, int k);

class Expr {
public:
    enum class Kind { Constant, Variable, Parameter, Negate, Add, Subtract, Multiply, Divide, Power, Call };

    /// The literal 0.
    Expr();

    static Expr constant(double value);
    static Expr variable(int index);
    static Expr parameter(std::string name);

    // Raw constructors: build exactly the requested node, no simplification.
    // The parser uses these so that printing and re-parsing is the identity.
    static Expr negate(Expr operand);
    static Expr binary(Kind kind, Expr lhs, Expr rhs);
    static Expr power(Expr base, int exponent);
    static Expr call(Func f, Expr argument);

    Kind kind() const;
    double value() const;
    int index() const;
    int exponent() const;
    Func func() const;
    const std::string& name() const;
    /// Left operand, or the single operand of Negate/Power/Call.
    const Expr& lhs() const;
    const Expr& rhs() const;

    bool is_constant() const { return kind() == Kind::Constant; }
    bool is_constant(double v) const { return is_constant() && value() == v; }

    /// Structural equality (same tree shape, same literals, bitwise).
    friend bool operator==(const Expr& a, const Expr& b);

    /// Number of nodes.
    std::size_t size() const;

    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

// Simplifying constructors: constant folding, annihilation (0*e -> 0),
// identities (e+0 -> e, 1*e -> e) and sign normalisation (a - (-b) -> a + b).
// All rewrites are exact in IEEE arithmetic, so evaluating the simplified
// tree gives the same bits as evaluating the unsimplified one.
Expr make_neg(Expr a);
Expr make_add(Expr a, Expr b);
Expr make_sub(Expr a, Expr b);
Expr make_mul(Expr a, Expr b);
Expr make_div(Expr a, Expr b);
Expr make_pow(Expr base, int exponent);
Expr make_call(Func f, Expr a);

/// Tree-walking evaluator. Throws EvalError on log/sqrt domain violations and
/// on unresolved parameters; division by zero yields IEEE inf/nan.
double eval(const Expr& e, std::span<const double> x);

/// Exact symbolic partial derivative with respect to variable `var`.
Expr differentiate(const Expr& e, int var);

/// Rebuilds `e`, replacing every leaf for which `leaf_map` returns a value.
/// Only the spine above a replaced leaf is reconstructed (with the
/// simplifying constructors); untouched subtrees keep their structure.
Expr substitute(const Expr& e, const std::function<std::optional<Expr>(const Expr&)>& leaf_map);

bool references_variable(const Expr& e, int var);
/// -1 when the expression references no variable.
int max_variable(const Expr& e);
bool has_parameters(const Expr& e);

/// DSL syntax, with minimal parentheses and shortest round-trip literals.
std::string to_string(const Expr& e);

/// Postfix program for fast repeated evaluation. Produces the same value as
/// eval() for the same input.
class Program {
public:
    explicit Program(const Expr& e);
    double run(std::span<const double> x) const;

private:
    struct Instr {
        Expr::Kind kind;
        double value = 0.0;
        int index = 0;
        Func func = Func::Exp;
    };
    std::vector<Instr> code_;
    std::size_t max_depth_ = 0;
};

}  // namespace cohere
