#include "cohere/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "cohere/errors.hpp"

namespace cohere {

struct Expr::Node {
    Kind kind = Kind::Constant;
    double value = 0.0;
    int index = 0;  // variable index or exponent
    Func func = Func::Exp;
    std::string name;
    Expr lhs{std::shared_ptr<const Node>()};
    Expr rhs{std::shared_ptr<const Node>()};
    std::size_t size = 1;

    Node() = default;
};

namespace {

constexpr std::array<std::pair<Func, std::string_view>, 7> kFuncNames{{
    {Func::Exp, "exp"},
    {Func::Log, "log"},
    {Func::Tanh, "tanh"},
    {Func::Sigmoid, "sigmoid"},
    {Func::Sin, "sin"},
    {Func::Cos, "cos"},
    {Func::Sqrt, "sqrt"},
}};

std::shared_ptr<const Expr::Node> zero_node() {
    static const auto node = std::make_shared<const Expr::Node>();
    return node;
}

}  // namespace

std::string_view func_name(Func f) {
    for (const auto& [fn, name] : kFuncNames)
        if (fn == f) return name;
    return "?";
}

std::optional<Func> func_from_name(std::string_view name) {
    for (const auto& [fn, n] : kFuncNames)
        if (n == name) return fn;
    return std::nullopt;
}

double apply_func(Func f, double x) {
    switch (f) {
        case Func::Exp: return std::exp(x);
        case Func::Log:
            if (!(x > 0.0)) throw EvalError("log of non-positive value " + std::to_string(x));
            return std::log(x);
        case Func::Tanh: return std::tanh(x);
        case Func::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case Func::Sin: return std::sin(x);
        case Func::Cos: return std::cos(x);
        case Func::Sqrt:
            if (x < 0.0) throw EvalError("sqrt of negative value " + std::to_string(x));
            return std::sqrt(x);
    }
    return 0.0;
}

double int_pow(double x, int k) {
    if (k < 0) return 1.0 / int_pow(x, -k);
    double result = 1.0;
    double base = x;
    unsigned e = static_cast<unsigned>(k);
    while (e != 0) {
        if (e & 1u) result *= base;
        e >>= 1u;
        if (e != 0) base *= base;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Expr handle

Expr::Expr() : node_(zero_node()) {}
Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double value) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Constant;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::variable(int index) {
    if (index < 0) throw std::invalid_argument("variable index must be non-negative");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Variable;
    n->index = index;
    return Expr(std::move(n));
}

Expr Expr::parameter(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Parameter;
    n->name = std::move(name);
    return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Negate;
    n->size = 1 + operand.size();
    n->lhs = std::move(operand);
    return Expr(std::move(n));
}

Expr Expr::binary(Kind kind, Expr lhs, Expr rhs) {
    switch (kind) {
        case Kind::Add:
        case Kind::Subtract:
        case Kind::Multiply:
        case Kind::Divide: break;
        default: throw std::invalid_argument("Expr::binary needs an arithmetic kind");
    }
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->size = 1 + lhs.size() + rhs.size();
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return Expr(std::move(n));
}

Expr Expr::power(Expr base, int exponent) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Power;
    n->index = exponent;
    n->size = 1 + base.size();
    n->lhs = std::move(base);
    return Expr(std::move(n));
}

Expr Expr::call(Func f, Expr argument) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Call;
    n->func = f;
    n->size = 1 + argument.size();
    n->lhs = std::move(argument);
    return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
int Expr::index() const { return node_->index; }
int Expr::exponent() const { return node_->index; }
Func Expr::func() const { return node_->func; }
const std::string& Expr::name() const { return node_->name; }
const Expr& Expr::lhs() const { return node_->lhs; }
const Expr& Expr::rhs() const { return node_->rhs; }
std::size_t Expr::size() const { return node_->size; }

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case Expr::Kind::Constant:
            return std::signbit(a.value()) == std::signbit(b.value()) &&
                   (a.value() == b.value() || (std::isnan(a.value()) && std::isnan(b.value())));
        case Expr::Kind::Variable: return a.index() == b.index();
        case Expr::Kind::Parameter: return a.name() == b.name();
        case Expr::Kind::Negate: return a.lhs() == b.lhs();
        case Expr::Kind::Power: return a.exponent() == b.exponent() && a.lhs() == b.lhs();
        case Expr::Kind::Call: return a.func() == b.func() && a.lhs() == b.lhs();
        default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    }
}

// ---------------------------------------------------------------------------
// Simplifying constructors

namespace {

// Folding is skipped when the result would not be a finite literal, so the
// printed form of any simplified tree stays parseable.
std::optional<Expr> folded(double v) {
    if (!std::isfinite(v)) return std::nullopt;
    return Expr::constant(v);
}

}  // namespace

Expr make_neg(Expr a) {
    if (a.is_constant()) return Expr::constant(-a.value());
    if (a.kind() == Expr::Kind::Negate) return a.lhs();
    // -(a - b) -> b - a
    if (a.kind() == Expr::Kind::Subtract) return Expr::binary(Expr::Kind::Subtract, a.rhs(), a.lhs());
    // -(-a + b) -> a - b
    if (a.kind() == Expr::Kind::Add && a.lhs().kind() == Expr::Kind::Negate)
        return Expr::binary(Expr::Kind::Subtract, a.lhs().lhs(), a.rhs());
    return Expr::negate(std::move(a));
}

Expr make_add(Expr a, Expr b) {
    if (a.is_constant() && b.is_constant())
        if (auto f = folded(a.value() + b.value())) return *f;
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    if (b.kind() == Expr::Kind::Negate) return Expr::binary(Expr::Kind::Subtract, std::move(a), b.lhs());
    if (b.is_constant() && b.value() < 0.0) return Expr::binary(Expr::Kind::Subtract, std::move(a), Expr::constant(-b.value()));
    return Expr::binary(Expr::Kind::Add, std::move(a), std::move(b));
}

Expr make_sub(Expr a, Expr b) {
    if (a.is_constant() && b.is_constant())
        if (auto f = folded(a.value() - b.value())) return *f;
    if (b.is_constant(0.0)) return a;
    if (a.is_constant(0.0)) return make_neg(std::move(b));
    if (b.kind() == Expr::Kind::Negate) return make_add(std::move(a), b.lhs());
    return Expr::binary(Expr::Kind::Subtract, std::move(a), std::move(b));
}

Expr make_mul(Expr a, Expr b) {
    if (a.is_constant() && b.is_constant())
        if (auto f = folded(a.value() * b.value())) return *f;
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    if (a.is_constant(-1.0)) return make_neg(std::move(b));
    if (b.is_constant(-1.0)) return make_neg(std::move(a));
    if (a.kind() == Expr::Kind::Negate && b.kind() == Expr::Kind::Negate) return make_mul(a.lhs(), b.lhs());
    if (a.is_constant() && b.kind() == Expr::Kind::Negate) return make_mul(Expr::constant(-a.value()), b.lhs());
    return Expr::binary(Expr::Kind::Multiply, std::move(a), std::move(b));
}

Expr make_div(Expr a, Expr b) {
    if (a.is_constant() && b.is_constant() && b.value() != 0.0)
        if (auto f = folded(a.value() / b.value())) return *f;
    if (a.is_constant(0.0)) return Expr::constant(0.0);
    if (b.is_constant(1.0)) return a;
    return Expr::binary(Expr::Kind::Divide, std::move(a), std::move(b));
}

Expr make_pow(Expr base, int exponent) {
    if (exponent == 0) return Expr::constant(1.0);
    if (exponent == 1) return base;
    if (base.is_constant())
        if (auto f = folded(int_pow(base.value(), exponent))) return *f;
    return Expr::power(std::move(base), exponent);
}

Expr make_call(Func f, Expr a) {
    if (a.is_constant()) {
        try {
            if (auto v = folded(apply_func(f, a.value()))) return *v;
        } catch (const EvalError&) {
            // leave the call in place; evaluation reports the domain error
        }
    }
    return Expr::call(f, std::move(a));
}

// ---------------------------------------------------------------------------
// Evaluation

double eval(const Expr& e, std::span<const double> x) {
    switch (e.kind()) {
        case Expr::Kind::Constant: return e.value();
        case Expr::Kind::Variable:
            if (static_cast<std::size_t>(e.index()) >= x.size())
                throw EvalError("variable x" + std::to_string(e.index() + 1) + " out of range");
            return x[static_cast<std::size_t>(e.index())];
        case Expr::Kind::Parameter: throw EvalError("unresolved parameter '" + e.name() + "'");
        case Expr::Kind::Negate: return -eval(e.lhs(), x);
        case Expr::Kind::Add: return eval(e.lhs(), x) + eval(e.rhs(), x);
        case Expr::Kind::Subtract: return eval(e.lhs(), x) - eval(e.rhs(), x);
        case Expr::Kind::Multiply: return eval(e.lhs(), x) * eval(e.rhs(), x);
        case Expr::Kind::Divide: return eval(e.lhs(), x) / eval(e.rhs(), x);
        case Expr::Kind::Power: return int_pow(eval(e.lhs(), x), e.exponent());
        case Expr::Kind::Call: return apply_func(e.func(), eval(e.lhs(), x));
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Differentiation

Expr differentiate(const Expr& e, int var) {
    using K = Expr::Kind;
    switch (e.kind()) {
        case K::Constant:
        case K::Parameter: return Expr::constant(0.0);
        case K::Variable: return Expr::constant(e.index() == var ? 1.0 : 0.0);
        case K::Negate: return make_neg(differentiate(e.lhs(), var));
        case K::Add: return make_add(differentiate(e.lhs(), var), differentiate(e.rhs(), var));
        case K::Subtract: return make_sub(differentiate(e.lhs(), var), differentiate(e.rhs(), var));
        case K::Multiply: {
            Expr du = differentiate(e.lhs(), var);
            Expr dv = differentiate(e.rhs(), var);
            return make_add(make_mul(du, e.rhs()), make_mul(e.lhs(), dv));
        }
        case K::Divide: {
            Expr du = differentiate(e.lhs(), var);
            Expr dv = differentiate(e.rhs(), var);
            if (dv.is_constant(0.0)) return make_div(du, e.rhs());
            return make_div(make_sub(make_mul(du, e.rhs()), make_mul(e.lhs(), dv)), make_pow(e.rhs(), 2));
        }
        case K::Power: {
            Expr du = differentiate(e.lhs(), var);
            if (du.is_constant(0.0)) return Expr::constant(0.0);
            const int k = e.exponent();
            return make_mul(make_mul(Expr::constant(static_cast<double>(k)), make_pow(e.lhs(), k - 1)), du);
        }
        case K::Call: {
            const Expr& u = e.lhs();
            Expr du = differentiate(u, var);
            if (du.is_constant(0.0)) return Expr::constant(0.0);
            Expr outer;
            switch (e.func()) {
                case Func::Exp: outer = make_call(Func::Exp, u); break;
                case Func::Log: return make_div(du, u);
                case Func::Tanh: outer = make_sub(Expr::constant(1.0), make_pow(make_call(Func::Tanh, u), 2)); break;
                case Func::Sigmoid: {
                    Expr s = make_call(Func::Sigmoid, u);
                    outer = make_mul(s, make_sub(Expr::constant(1.0), s));
                    break;
                }
                case Func::Sin: outer = make_call(Func::Cos, u); break;
                case Func::Cos: outer = make_neg(make_call(Func::Sin, u)); break;
                case Func::Sqrt: return make_div(du, make_mul(Expr::constant(2.0), make_call(Func::Sqrt, u)));
            }
            return make_mul(outer, du);
        }
    }
    return Expr::constant(0.0);
}

// ---------------------------------------------------------------------------
// Substitution and queries

namespace {

std::optional<Expr> substitute_changed(const Expr& e,
                                       const std::function<std::optional<Expr>(const Expr&)>& leaf_map) {
    using K = Expr::Kind;
    switch (e.kind()) {
        case K::Constant:
        case K::Variable:
        case K::Parameter: return leaf_map(e);
        case K::Negate: {
            auto a = substitute_changed(e.lhs(), leaf_map);
            if (!a) return std::nullopt;
            return make_neg(*a);
        }
        case K::Power: {
            auto a = substitute_changed(e.lhs(), leaf_map);
            if (!a) return std::nullopt;
            return make_pow(*a, e.exponent());
        }
        case K::Call: {
            auto a = substitute_changed(e.lhs(), leaf_map);
            if (!a) return std::nullopt;
            return make_call(e.func(), *a);
        }
        default: {
            auto a = substitute_changed(e.lhs(), leaf_map);
            auto b = substitute_changed(e.rhs(), leaf_map);
            if (!a && !b) return std::nullopt;
            Expr l = a ? *a : e.lhs();
            Expr r = b ? *b : e.rhs();
            switch (e.kind()) {
                case K::Add: return make_add(l, r);
                case K::Subtract: return make_sub(l, r);
                case K::Multiply: return make_mul(l, r);
                default: return make_div(l, r);
            }
        }
    }
}

}  // namespace

Expr substitute(const Expr& e, const std::function<std::optional<Expr>(const Expr&)>& leaf_map) {
    auto changed = substitute_changed(e, leaf_map);
    return changed ? *changed : e;
}

bool references_variable(const Expr& e, int var) {
    switch (e.kind()) {
        case Expr::Kind::Variable: return e.index() == var;
        case Expr::Kind::Constant:
        case Expr::Kind::Parameter: return false;
        case Expr::Kind::Negate:
        case Expr::Kind::Power:
        case Expr::Kind::Call: return references_variable(e.lhs(), var);
        default: return references_variable(e.lhs(), var) || references_variable(e.rhs(), var);
    }
}

int max_variable(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Variable: return e.index();
        case Expr::Kind::Constant:
        case Expr::Kind::Parameter: return -1;
        case Expr::Kind::Negate:
        case Expr::Kind::Power:
        case Expr::Kind::Call: return max_variable(e.lhs());
        default: return std::max(max_variable(e.lhs()), max_variable(e.rhs()));
    }
}

bool has_parameters(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Parameter: return true;
        case Expr::Kind::Constant:
        case Expr::Kind::Variable: return false;
        case Expr::Kind::Negate:
        case Expr::Kind::Power:
        case Expr::Kind::Call: return has_parameters(e.lhs());
        default: return has_parameters(e.lhs()) || has_parameters(e.rhs());
    }
}

// ---------------------------------------------------------------------------
// Printing
//
// Binding levels: 1 additive, 2 multiplicative, 3 unary minus, 4 power,
// 5 atoms. A negative literal sits at level 3 because the parser folds a
// minus sign directly in front of a number into the literal.

namespace {

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) return std::to_string(v);
    return std::string(buf.data(), ptr);
}

int level(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Add:
        case Expr::Kind::Subtract: return 1;
        case Expr::Kind::Multiply:
        case Expr::Kind::Divide: return 2;
        case Expr::Kind::Negate: return 3;
        case Expr::Kind::Power: return 4;
        case Expr::Kind::Constant: return std::signbit(e.value()) ? 3 : 5;
        default: return 5;
    }
}

void print(const Expr& e, std::string& out);

void print_at(const Expr& e, int min_level, std::string& out) {
    if (level(e) < min_level) {
        out += '(';
        print(e, out);
        out += ')';
    } else {
        print(e, out);
    }
}

void print(const Expr& e, std::string& out) {
    using K = Expr::Kind;
    switch (e.kind()) {
        case K::Constant: out += format_number(e.value()); break;
        case K::Variable: out += 'x' + std::to_string(e.index() + 1); break;
        case K::Parameter: out += e.name(); break;
        case K::Negate:
            out += '-';
            // "-2" would re-parse as a negative literal, "- -x" is fine.
            if (e.lhs().is_constant()) {
                out += '(';
                print(e.lhs(), out);
                out += ')';
            } else {
                print_at(e.lhs(), 3, out);
            }
            break;
        case K::Add:
        case K::Subtract:
            print_at(e.lhs(), 1, out);
            out += e.kind() == K::Add ? " + " : " - ";
            print_at(e.rhs(), 2, out);
            break;
        case K::Multiply:
        case K::Divide:
            print_at(e.lhs(), 2, out);
            out += e.kind() == K::Multiply ? "*" : "/";
            print_at(e.rhs(), 3, out);
            break;
        case K::Power:
            print_at(e.lhs(), 5, out);
            out += '^';
            out += std::to_string(e.exponent());
            break;
        case K::Call:
            out += func_name(e.func());
            out += '(';
            print(e.lhs(), out);
            out += ')';
            break;
    }
}

}  // namespace

std::string to_string(const Expr& e) {
    std::string out;
    print(e, out);
    return out;
}

// ---------------------------------------------------------------------------
// Postfix program

namespace {

void emit(const Expr& e, std::vector<Expr::Kind>& kinds, std::vector<double>& values, std::vector<int>& ints,
          std::vector<Func>& funcs) {
    using K = Expr::Kind;
    switch (e.kind()) {
        case K::Constant:
        case K::Variable:
        case K::Parameter: break;
        case K::Negate:
        case K::Power:
        case K::Call: emit(e.lhs(), kinds, values, ints, funcs); break;
        default:
            emit(e.lhs(), kinds, values, ints, funcs);
            emit(e.rhs(), kinds, values, ints, funcs);
            break;
    }
    if (e.kind() == K::Parameter) throw EvalError("unresolved parameter '" + e.name() + "'");
    kinds.push_back(e.kind());
    values.push_back(e.value());
    ints.push_back(e.kind() == K::Power ? e.exponent() : e.index());
    funcs.push_back(e.func());
}

}  // namespace

Program::Program(const Expr& e) {
    std::vector<Expr::Kind> kinds;
    std::vector<double> values;
    std::vector<int> ints;
    std::vector<Func> funcs;
    emit(e, kinds, values, ints, funcs);
    code_.reserve(kinds.size());
    std::size_t depth = 0;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        code_.push_back(Instr{kinds[i], values[i], ints[i], funcs[i]});
        switch (kinds[i]) {
            case Expr::Kind::Constant:
            case Expr::Kind::Variable: ++depth; break;
            case Expr::Kind::Add:
            case Expr::Kind::Subtract:
            case Expr::Kind::Multiply:
            case Expr::Kind::Divide: --depth; break;
            default: break;
        }
        max_depth_ = std::max(max_depth_, depth);
    }
}

double Program::run(std::span<const double> x) const {
    thread_local std::vector<double> stack;
    if (stack.size() < max_depth_) stack.resize(max_depth_);
    std::size_t top = 0;
    for (const Instr& in : code_) {
        switch (in.kind) {
            case Expr::Kind::Constant: stack[top++] = in.value; break;
            case Expr::Kind::Variable:
                if (static_cast<std::size_t>(in.index) >= x.size())
                    throw EvalError("variable x" + std::to_string(in.index + 1) + " out of range");
                stack[top++] = x[static_cast<std::size_t>(in.index)];
                break;
            case Expr::Kind::Negate: stack[top - 1] = -stack[top - 1]; break;
            case Expr::Kind::Add: --top; stack[top - 1] = stack[top - 1] + stack[top]; break;
            case Expr::Kind::Subtract: --top; stack[top - 1] = stack[top - 1] - stack[top]; break;
            case Expr::Kind::Multiply: --top; stack[top - 1] = stack[top - 1] * stack[top]; break;
            case Expr::Kind::Divide: --top; stack[top - 1] = stack[top - 1] / stack[top]; break;
            case Expr::Kind::Power: stack[top - 1] = int_pow(stack[top - 1], in.index); break;
            case Expr::Kind::Call: stack[top - 1] = apply_func(in.func, stack[top - 1]); break;
            case Expr::Kind::Parameter: break;
        }
    }
    return stack[0];
}

}  // namespace cohere
