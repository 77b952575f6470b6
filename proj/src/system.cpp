#include "cohere/system.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>

#include "cohere/errors.hpp"

namespace cohere {

// ---------------------------------------------------------------------------
// Domains

bool CoordInterval::unbounded() const { return std::isinf(lo.value) && std::isinf(hi.value); }
bool CoordInterval::bounded() const { return std::isfinite(lo.value) && std::isfinite(hi.value); }
bool CoordInterval::half_bounded() const { return std::isfinite(lo.value) != std::isfinite(hi.value); }

bool CoordInterval::contains_closed(double v, double tol) const {
    return v >= lo.value - tol && v <= hi.value + tol;
}

bool CoordInterval::contains(double v) const {
    const bool above = lo.closed ? v >= lo.value : v > lo.value;
    const bool below = hi.closed ? v <= hi.value : v < hi.value;
    return above && below;
}

CoordInterval CoordInterval::reflected() const {
    return CoordInterval{Endpoint{-hi.value, hi.closed}, Endpoint{-lo.value, lo.closed}};
}

std::string_view to_string(DomainClass c) {
    switch (c) {
        case DomainClass::C1: return "C1";
        case DomainClass::C2: return "C2";
        case DomainClass::C3: return "C3";
        case DomainClass::C4: return "C4";
        case DomainClass::Other: return "OTHER";
    }
    return "OTHER";
}

DomainBox::DomainBox(std::vector<CoordInterval> coords) : coords_(std::move(coords)) {
    for (const auto& c : coords_)
        if (c.lo.value > c.hi.value) throw std::invalid_argument("domain interval with lower endpoint above upper");
}

DomainBox DomainBox::unbounded(int n) { return DomainBox(std::vector<CoordInterval>(static_cast<std::size_t>(n))); }

DomainClass DomainBox::domain_class() const {
    if (coords_.empty()) return DomainClass::Other;
    const auto all = [&](auto pred) { return std::all_of(coords_.begin(), coords_.end(), pred); };
    if (all([](const CoordInterval& c) { return c.unbounded(); })) return DomainClass::C1;
    if (all([](const CoordInterval& c) { return c.lo.value == 0.0 && std::isinf(c.hi.value); }))
        return DomainClass::C3;
    const auto half = std::count_if(coords_.begin(), coords_.end(), [](const auto& c) { return c.half_bounded(); });
    const auto free = std::count_if(coords_.begin(), coords_.end(), [](const auto& c) { return c.unbounded(); });
    if (half == 1 && free + 1 == static_cast<long>(coords_.size())) return DomainClass::C2;
    if (all([](const CoordInterval& c) { return c.bounded(); })) return DomainClass::C4;
    return DomainClass::Other;
}

bool DomainBox::contains(std::span<const double> x) const {
    if (x.size() != coords_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!coords_[i].contains(x[i])) return false;
    return true;
}

bool DomainBox::contains_closed(std::span<const double> x, double tol) const {
    if (x.size() != coords_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!coords_[i].contains_closed(x[i], tol)) return false;
    return true;
}

std::vector<Interval> DomainBox::analysis_box(double big) const {
    std::vector<Interval> box;
    box.reserve(coords_.size());
    for (const auto& c : coords_) {
        double lo = std::isinf(c.lo.value) ? -big : c.lo.value;
        double hi = std::isinf(c.hi.value) ? big : c.hi.value;
        // a half-bounded coordinate beyond the big box keeps a unit width
        if (lo > hi) {
            if (std::isinf(c.hi.value)) hi = lo + 1.0;
            else lo = hi - 1.0;
        }
        box.push_back({lo, hi});
    }
    return box;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { Ident, Number, Prime, Equals, LParen, RParen, LBracket, RBracket, Comma, Plus, Minus, Star, Slash,
                 Caret, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0.0;
    int column = 0;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::End: return "end of line";
        case Tok::Ident: return "'" + t.text + "'";
        case Tok::Number: return "number " + t.text;
        default: return "'" + t.text + "'";
    }
}

std::vector<Token> lex_line(std::string_view line, int line_no) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        const int col = static_cast<int>(i) + 1;
        if (c == '#') break;
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < line.size() && (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) ++j;
            out.push_back({Tok::Ident, std::string(line.substr(i, j - i)), 0.0, col});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < line.size() &&
                                                             std::isdigit(static_cast<unsigned char>(line[i + 1])))) {
            std::size_t j = i;
            while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
            if (j < line.size() && line[j] == '.') {
                ++j;
                while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
            }
            if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < line.size() && (line[k] == '+' || line[k] == '-')) ++k;
                if (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) {
                    while (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) ++k;
                    j = k;
                }
            }
            Token t{Tok::Number, std::string(line.substr(i, j - i)), 0.0, col};
            auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
            if (ec != std::errc() || ptr != t.text.data() + t.text.size() || !std::isfinite(t.number))
                throw ParseError("malformed number '" + t.text + "'", line_no, col);
            out.push_back(std::move(t));
            i = j;
            continue;
        }
        Tok kind;
        switch (c) {
            case '\'': kind = Tok::Prime; break;
            case '=': kind = Tok::Equals; break;
            case '(': kind = Tok::LParen; break;
            case ')': kind = Tok::RParen; break;
            case '[': kind = Tok::LBracket; break;
            case ']': kind = Tok::RBracket; break;
            case ',': kind = Tok::Comma; break;
            case '+': kind = Tok::Plus; break;
            case '-': kind = Tok::Minus; break;
            case '*': kind = Tok::Star; break;
            case '/': kind = Tok::Slash; break;
            case '^': kind = Tok::Caret; break;
            default: throw ParseError(std::string("unexpected character '") + c + "'", line_no, col);
        }
        out.push_back({kind, std::string(1, c), 0.0, col});
        ++i;
    }
    out.push_back({Tok::End, "", 0.0, static_cast<int>(line.size()) + 1});
    return out;
}

/// Parses "x<k>" with k >= 1; returns the 0-based index.
std::optional<int> variable_index(std::string_view name) {
    if (name.size() < 2 || name[0] != 'x') return std::nullopt;
    int k = 0;
    auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
    if (ec != std::errc() || ptr != name.data() + name.size() || k < 1 || name[1] == '0') return std::nullopt;
    return k - 1;
}

bool is_keyword(std::string_view s) { return s == "var" || s == "param" || s == "in" || s == "inf"; }

// ---------------------------------------------------------------------------
// Parser for one line

class LineParser {
public:
    LineParser(std::vector<Token> tokens, int line_no,
               const std::map<std::string, double>& params)
        : toks_(std::move(tokens)), line_(line_no), params_(params) {}

    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
    bool at(Tok k) const { return peek().kind == k; }

    [[noreturn]] void fail(const std::string& msg, const Token& at) const { throw ParseError(msg, line_, at.column); }

    const Token& expect(Tok k, const char* what) {
        if (!at(k)) fail(std::string("expected ") + what + ", found " + describe(peek()), peek());
        return next();
    }

    void expect_end() {
        if (!at(Tok::End)) fail("unexpected " + describe(peek()) + " after statement", peek());
    }

    double signed_number() {
        bool neg = false;
        if (at(Tok::Minus) || at(Tok::Plus)) neg = next().kind == Tok::Minus;
        const Token& t = expect(Tok::Number, "a number");
        return neg ? -t.number : t.number;
    }

    Expr expression() {
        Expr lhs = term();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            const auto kind = next().kind == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Subtract;
            lhs = Expr::binary(kind, lhs, term());
        }
        return lhs;
    }

    int max_var_ref = -1;  // largest variable index referenced
    Token last_var_token;

private:
    Expr term() {
        Expr lhs = unary();
        while (at(Tok::Star) || at(Tok::Slash)) {
            const auto kind = next().kind == Tok::Star ? Expr::Kind::Multiply : Expr::Kind::Divide;
            lhs = Expr::binary(kind, lhs, unary());
        }
        return lhs;
    }

    Expr unary() {
        if (at(Tok::Minus)) {
            // "-3" is a negative literal unless it is the base of a power
            if (peek(1).kind == Tok::Number && peek(2).kind != Tok::Caret) {
                next();
                return Expr::constant(-next().number);
            }
            next();
            return Expr::negate(unary());
        }
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (!at(Tok::Caret)) return base;
        next();
        return Expr::power(base, exponent());
    }

    int exponent() {
        const bool paren = at(Tok::LParen);
        if (paren) next();
        bool neg = false;
        if (at(Tok::Minus) || at(Tok::Plus)) neg = next().kind == Tok::Minus;
        const Token& t = peek();
        double v = 0.0;
        if (t.kind == Tok::Number) {
            v = t.number;
        } else if (t.kind == Tok::Ident && params_.count(t.text) != 0) {
            v = params_.at(t.text);
        } else {
            fail("exponent must be an integer literal, found " + describe(t), t);
        }
        if (v != std::floor(v) || std::abs(v) > 1e6) fail("non-integer exponent " + t.text, t);
        next();
        if (paren) expect(Tok::RParen, "')'");
        const int k = static_cast<int>(v);
        return neg ? -k : k;
    }

    Expr primary() {
        const Token& t = peek();
        if (t.kind == Tok::Number) {
            next();
            return Expr::constant(t.number);
        }
        if (t.kind == Tok::LParen) {
            next();
            Expr inner = expression();
            expect(Tok::RParen, "')'");
            return inner;
        }
        if (t.kind == Tok::Ident) {
            const Token ident = next();
            if (at(Tok::LParen)) {
                auto f = func_from_name(ident.text);
                if (!f) fail("unknown function '" + ident.text + "'", ident);
                next();
                Expr arg = expression();
                expect(Tok::RParen, "')'");
                return Expr::call(*f, arg);
            }
            if (auto k = variable_index(ident.text)) {
                if (*k > max_var_ref) {
                    max_var_ref = *k;
                    last_var_token = ident;
                }
                return Expr::variable(*k);
            }
            if (func_from_name(ident.text)) fail("function '" + ident.text + "' needs an argument", ident);
            if (is_keyword(ident.text)) fail("unexpected keyword '" + ident.text + "'", ident);
            if (params_.count(ident.text) == 0) fail("unbound name '" + ident.text + "'", ident);
            return Expr::parameter(ident.text);
        }
        fail("expected expression, found " + describe(t), t);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int line_;
    const std::map<std::string, double>& params_;
};

Expr resolve_params(const Expr& e, const std::map<std::string, double>& params) {
    using K = Expr::Kind;
    switch (e.kind()) {
        case K::Parameter: return Expr::constant(params.at(e.name()));
        case K::Constant:
        case K::Variable: return e;
        case K::Negate:
            if (e.lhs().kind() == K::Parameter) return Expr::constant(-params.at(e.lhs().name()));
            return Expr::negate(resolve_params(e.lhs(), params));
        case K::Power: return Expr::power(resolve_params(e.lhs(), params), e.exponent());
        case K::Call: return Expr::call(e.func(), resolve_params(e.lhs(), params));
        default: return Expr::binary(e.kind(), resolve_params(e.lhs(), params), resolve_params(e.rhs(), params));
    }
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

CoordInterval parse_interval(LineParser& p, int line_no) {
    CoordInterval iv;
    if (!p.at(Tok::LBracket) && !p.at(Tok::LParen)) p.fail("expected '[' or '(' to open an interval", p.peek());
    const Token open = p.peek();
    const bool lo_closed = open.kind == Tok::LBracket;
    p.next();
    if (p.at(Tok::Minus) && p.peek(1).kind == Tok::Ident && p.peek(1).text == "inf") {
        p.next();
        p.next();
        iv.lo = {-std::numeric_limits<double>::infinity(), false};
    } else {
        iv.lo = {p.signed_number(), lo_closed};
    }
    p.expect(Tok::Comma, "','");
    if ((p.at(Tok::Ident) && p.peek().text == "inf") ||
        (p.at(Tok::Plus) && p.peek(1).kind == Tok::Ident && p.peek(1).text == "inf")) {
        if (p.at(Tok::Plus)) p.next();
        p.next();
        iv.hi = {std::numeric_limits<double>::infinity(), false};
        if (!p.at(Tok::RParen) && !p.at(Tok::RBracket)) p.fail("expected ')' or ']'", p.peek());
        p.next();
    } else {
        const double hi = p.signed_number();
        if (!p.at(Tok::RParen) && !p.at(Tok::RBracket)) p.fail("expected ')' or ']'", p.peek());
        iv.hi = {hi, p.next().kind == Tok::RBracket};
    }
    if (iv.lo.value > iv.hi.value) throw ParseError("interval lower endpoint exceeds upper endpoint", line_no, open.column);
    return iv;
}

}  // namespace

SystemDef parse_system(std::string_view text) {
    const auto lines = split_lines(text);

    // Pass 1: parameters, so equations may use them regardless of order.
    std::map<std::string, double> params;
    std::map<std::string, int> param_lines;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const int line_no = static_cast<int>(li) + 1;
        auto toks = lex_line(lines[li], line_no);
        if (toks.front().kind != Tok::Ident || toks.front().text != "param") continue;
        LineParser p(std::move(toks), line_no, params);
        p.next();
        const Token name = p.expect(Tok::Ident, "a parameter name");
        if (variable_index(name.text) || func_from_name(name.text) || is_keyword(name.text))
            p.fail("'" + name.text + "' cannot be used as a parameter name", name);
        if (params.count(name.text) != 0)
            p.fail("duplicate definition of parameter '" + name.text + "' (first on line " +
                       std::to_string(param_lines[name.text]) + ")",
                   name);
        p.expect(Tok::Equals, "'='");
        const double v = p.signed_number();
        p.expect_end();
        params[name.text] = v;
        param_lines[name.text] = line_no;
    }

    struct Equation {
        Expr rhs;
        int line = 0;
        int max_var = -1;
        Token var_token;
    };
    std::map<int, Equation> equations;
    std::map<int, std::pair<CoordInterval, int>> decls;

    for (std::size_t li = 0; li < lines.size(); ++li) {
        const int line_no = static_cast<int>(li) + 1;
        auto toks = lex_line(lines[li], line_no);
        if (toks.front().kind == Tok::End) continue;
        LineParser p(std::move(toks), line_no, params);
        const Token head = p.peek();
        if (head.kind == Tok::Ident && head.text == "param") continue;
        if (head.kind == Tok::Ident && head.text == "var") {
            p.next();
            const Token name = p.expect(Tok::Ident, "a variable name");
            auto k = variable_index(name.text);
            if (!k) p.fail("variable names must have the form x<k>, found '" + name.text + "'", name);
            const Token in = p.expect(Tok::Ident, "'in'");
            if (in.text != "in") p.fail("expected 'in', found " + describe(in), in);
            CoordInterval iv = parse_interval(p, line_no);
            p.expect_end();
            if (decls.count(*k) != 0)
                p.fail("duplicate definition of domain for " + name.text, name);
            decls[*k] = {iv, line_no};
            continue;
        }
        if (head.kind != Tok::Ident) p.fail("expected a statement, found " + describe(head), head);
        auto k = variable_index(head.text);
        if (!k) p.fail("expected 'var', 'param' or an equation, found " + describe(head), head);
        p.next();
        p.expect(Tok::Prime, "\"'\"");
        p.expect(Tok::Equals, "'='");
        Expr rhs = p.expression();
        p.expect_end();
        if (equations.count(*k) != 0)
            p.fail("duplicate definition of " + head.text + "' (first on line " +
                       std::to_string(equations[*k].line) + ")",
                   head);
        equations[*k] = Equation{rhs, line_no, p.max_var_ref, p.last_var_token};
    }

    if (equations.empty()) throw ParseError("system has no equations", static_cast<int>(lines.size()), 1);
    const int n = equations.rbegin()->first + 1;
    for (int k = 0; k < n; ++k)
        if (equations.count(k) == 0)
            throw ParseError("missing equation for coordinate x" + std::to_string(k + 1), 0, 0);
    for (const auto& [k, eq] : equations)
        if (eq.max_var >= n)
            throw ParseError("unbound variable '" + eq.var_token.text + "' in a " + std::to_string(n) +
                                 "-dimensional system",
                             eq.line, eq.var_token.column);
    std::vector<CoordInterval> coords(static_cast<std::size_t>(n));
    for (const auto& [k, d] : decls) {
        if (k >= n)
            throw ParseError("domain declared for x" + std::to_string(k + 1) + " which has no equation", d.second, 1);
        coords[static_cast<std::size_t>(k)] = d.first;
    }

    SystemDef s;
    s.n = n;
    s.domain = DomainBox(std::move(coords));
    s.params = params;
    for (int k = 0; k < n; ++k) s.fields.push_back(resolve_params(equations[k].rhs, params));
    return s;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_endpoint(double v) {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace

std::string print_system(const SystemDef& s) {
    std::string out;
    for (int k = 0; k < s.n; ++k) {
        const auto& c = s.domain[k];
        if (c.unbounded()) continue;
        out += "var x" + std::to_string(k + 1) + " in ";
        out += c.lo.closed ? '[' : '(';
        out += format_endpoint(c.lo.value) + ", " + format_endpoint(c.hi.value);
        out += c.hi.closed ? ']' : ')';
        out += '\n';
    }
    for (int k = 0; k < s.n; ++k)
        out += "x" + std::to_string(k + 1) + "' = " + to_string(s.fields[static_cast<std::size_t>(k)]) + '\n';
    return out;
}

bool same_system(const SystemDef& a, const SystemDef& b) {
    return a.n == b.n && a.fields == b.fields && a.domain == b.domain;
}

// ---------------------------------------------------------------------------
// Evaluation

std::vector<double> eval_field(const SystemDef& s, std::span<const double> x) {
    if (static_cast<int>(x.size()) != s.n)
        throw std::invalid_argument("state has dimension " + std::to_string(x.size()) + ", system has " + std::to_string(s.n));
    std::vector<double> out(static_cast<std::size_t>(s.n));
    for (int i = 0; i < s.n; ++i) {
        double v = 0.0;
        try {
            v = eval(s.fields[static_cast<std::size_t>(i)], x);
        } catch (const EvalError& e) {
            throw e.with_coordinate(i);
        }
        if (!std::isfinite(v)) throw EvalError("non-finite value", i).with_coordinate(i);
        out[static_cast<std::size_t>(i)] = v;
    }
    return out;
}

FieldEvaluator::FieldEvaluator(const SystemDef& s) {
    programs_.reserve(s.fields.size());
    for (const auto& f : s.fields) programs_.emplace_back(f);
}

void FieldEvaluator::operator()(std::span<const double> x, std::span<double> out) const {
    for (std::size_t i = 0; i < programs_.size(); ++i) {
        double v = 0.0;
        try {
            v = programs_[i].run(x);
        } catch (const EvalError& e) {
            throw e.with_coordinate(static_cast<int>(i));
        }
        if (!std::isfinite(v)) throw EvalError("non-finite value", static_cast<int>(i)).with_coordinate(static_cast<int>(i));
        out[i] = v;
    }
}

std::vector<double> FieldEvaluator::operator()(std::span<const double> x) const {
    std::vector<double> out(programs_.size());
    (*this)(x, out);
    return out;
}

}  // namespace cohere
