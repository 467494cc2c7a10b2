#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "cylkam/funcspace.hpp"

namespace cylkam::dsl {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Trig-polynomial expression AST over x, y, pi.
struct Expr {
    enum class Kind { Number, X, Y, Pi, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos };
    Kind kind;
    double number = 0.0; // Number
    int exponent = 0;    // Pow
    ExprPtr a;
    ExprPtr b;
};

inline ExprPtr make_node(Expr::Kind k, ExprPtr a = nullptr, ExprPtr b = nullptr) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

inline double evaluate(const Expr& e, double x, double y) {
    switch (e.kind) {
        case Expr::Kind::Number: return e.number;
        case Expr::Kind::X: return x;
        case Expr::Kind::Y: return y;
        case Expr::Kind::Pi: return pi;
        case Expr::Kind::Neg: return -evaluate(*e.a, x, y);
        case Expr::Kind::Add: return evaluate(*e.a, x, y) + evaluate(*e.b, x, y);
        case Expr::Kind::Sub: return evaluate(*e.a, x, y) - evaluate(*e.b, x, y);
        case Expr::Kind::Mul: return evaluate(*e.a, x, y) * evaluate(*e.b, x, y);
        case Expr::Kind::Div: return evaluate(*e.a, x, y) / evaluate(*e.b, x, y);
        case Expr::Kind::Pow: {
            double base = evaluate(*e.a, x, y), out = 1.0;
            for (int i = 0; i < e.exponent; ++i) out *= base;
            return out;
        }
        case Expr::Kind::Sin: return std::sin(evaluate(*e.a, x, y));
        case Expr::Kind::Cos: return std::cos(evaluate(*e.a, x, y));
    }
    return 0.0;
}

inline bool uses_symbols(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::X:
        case Expr::Kind::Y: return true;
        case Expr::Kind::Number:
        case Expr::Kind::Pi: return false;
        default:
            return (e.a && uses_symbols(*e.a)) || (e.b && uses_symbols(*e.b));
    }
}

namespace detail {

struct Token {
    enum class Kind { Number, X, Y, Pi, Sin, Cos, Plus, Minus, Star, Slash, Caret, LParen,
                      RParen, End };
    Kind kind;
    std::size_t offset;
    double value = 0.0;
    bool integer_literal = false;
    std::string text;
};

inline std::vector<Token> tokenize(const std::string& src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            bool integral = true;
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            if (i < src.size() && src[i] == '.') {
                integral = false;
                ++i;
                while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            }
            if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
                integral = false;
                ++i;
                if (i < src.size() && (src[i] == '+' || src[i] == '-')) ++i;
                if (i >= src.size() || !std::isdigit(static_cast<unsigned char>(src[i])))
                    throw ParseError(i, "exponent digits", "end of number");
                while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            }
            const std::string text = src.substr(start, i - start);
            out.push_back(Token{Token::Kind::Number, start, std::stod(text), integral, text});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            while (i < src.size() && std::isalpha(static_cast<unsigned char>(src[i]))) ++i;
            const std::string word = src.substr(start, i - start);
            Token::Kind kind;
            if (word == "x") kind = Token::Kind::X;
            else if (word == "y") kind = Token::Kind::Y;
            else if (word == "pi") kind = Token::Kind::Pi;
            else if (word == "sin") kind = Token::Kind::Sin;
            else if (word == "cos") kind = Token::Kind::Cos;
            else throw ParseError(start, "x, y, pi, sin or cos", "'" + word + "'");
            out.push_back(Token{kind, start, 0.0, false, word});
            continue;
        }
        Token::Kind kind;
        switch (c) {
            case '+': kind = Token::Kind::Plus; break;
            case '-': kind = Token::Kind::Minus; break;
            case '*': kind = Token::Kind::Star; break;
            case '/': kind = Token::Kind::Slash; break;
            case '^': kind = Token::Kind::Caret; break;
            case '(': kind = Token::Kind::LParen; break;
            case ')': kind = Token::Kind::RParen; break;
            default: throw ParseError(start, "an operator, number or symbol",
                                      std::string("'") + c + "'");
        }
        out.push_back(Token{kind, start, 0.0, false, std::string(1, c)});
        ++i;
    }
    out.push_back(Token{Token::Kind::End, src.size(), 0.0, false, "end of input"});
    return out;
}

/// Recursive-descent parser; precedence ^ > unary - > * / > + -.
class Parser {
  public:
    explicit Parser(const std::string& src) : tokens_(tokenize(src)) {}

    ExprPtr parse() {
        ExprPtr e = parse_expr();
        expect(Token::Kind::End, "end of input");
        return e;
    }

  private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& advance() { return tokens_[pos_++]; }
    void expect(Token::Kind k, const std::string& what) {
        if (peek().kind != k) throw ParseError(peek().offset, what, "'" + peek().text + "'");
        ++pos_;
    }

    ExprPtr parse_expr() {
        ExprPtr e = parse_term();
        while (peek().kind == Token::Kind::Plus || peek().kind == Token::Kind::Minus) {
            const bool plus = advance().kind == Token::Kind::Plus;
            e = make_node(plus ? Expr::Kind::Add : Expr::Kind::Sub, e, parse_term());
        }
        return e;
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        while (peek().kind == Token::Kind::Star || peek().kind == Token::Kind::Slash) {
            const Token& op = advance();
            ExprPtr rhs = parse_factor();
            if (op.kind == Token::Kind::Slash) {
                if (uses_symbols(*rhs))
                    throw ParseError(op.offset, "a constant divisor (no x or y)",
                                     "symbol-dependent divisor");
                if (evaluate(*rhs, 0.0, 0.0) == 0.0)
                    throw ParseError(op.offset, "a nonzero constant divisor", "zero");
                e = make_node(Expr::Kind::Div, e, rhs);
            } else {
                e = make_node(Expr::Kind::Mul, e, rhs);
            }
        }
        return e;
    }

    ExprPtr parse_factor() {
        if (peek().kind == Token::Kind::Minus) {
            const auto& t = advance();
            (void)t;
            return make_node(Expr::Kind::Neg, parse_factor());
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (peek().kind == Token::Kind::Caret) {
            advance();
            if (peek().kind != Token::Kind::Number || !peek().integer_literal)
                throw ParseError(peek().offset, "a non-negative integer exponent",
                                 "'" + peek().text + "'");
            const Token& t = advance();
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::Pow;
            e->exponent = static_cast<int>(t.value);
            e->a = base;
            return e;
        }
        return base;
    }

    ExprPtr parse_atom() {
        const Token& t = peek();
        switch (t.kind) {
            case Token::Kind::Number: {
                advance();
                auto e = std::make_shared<Expr>();
                e->kind = Expr::Kind::Number;
                e->number = t.value;
                return e;
            }
            case Token::Kind::X: advance(); return make_node(Expr::Kind::X);
            case Token::Kind::Y: advance(); return make_node(Expr::Kind::Y);
            case Token::Kind::Pi: advance(); return make_node(Expr::Kind::Pi);
            case Token::Kind::Sin:
            case Token::Kind::Cos: {
                const bool is_sin = t.kind == Token::Kind::Sin;
                advance();
                expect(Token::Kind::LParen, "'('");
                ExprPtr arg = parse_expr();
                expect(Token::Kind::RParen, "')'");
                return make_node(is_sin ? Expr::Kind::Sin : Expr::Kind::Cos, arg);
            }
            case Token::Kind::LParen: {
                advance();
                ExprPtr e = parse_expr();
                expect(Token::Kind::RParen, "')'");
                return e;
            }
            default:
                throw ParseError(t.offset, "a number, symbol, function or '('",
                                 "'" + t.text + "'");
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

inline int precedence(Expr::Kind k) {
    switch (k) {
        case Expr::Kind::Add:
        case Expr::Kind::Sub: return 1;
        case Expr::Kind::Mul:
        case Expr::Kind::Div: return 2;
        case Expr::Kind::Neg: return 3;
        case Expr::Kind::Pow: return 4;
        default: return 5;
    }
}

} // namespace detail

inline ExprPtr parse(const std::string& src) { return detail::Parser(src).parse(); }

inline std::string print(const Expr& e) {
    auto wrap = [](const Expr& child, int parent_prec) {
        const std::string s = print(child);
        return detail::precedence(child.kind) < parent_prec ? "(" + s + ")" : s;
    };
    switch (e.kind) {
        case Expr::Kind::Number: {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", e.number);
            return std::string(buf);
        }
        case Expr::Kind::X: return "x";
        case Expr::Kind::Y: return "y";
        case Expr::Kind::Pi: return "pi";
        case Expr::Kind::Neg: return "-" + wrap(*e.a, 3);
        case Expr::Kind::Add: return wrap(*e.a, 1) + " + " + wrap(*e.b, 1);
        case Expr::Kind::Sub: return wrap(*e.a, 1) + " - " + wrap(*e.b, 2);
        case Expr::Kind::Mul: return wrap(*e.a, 2) + "*" + wrap(*e.b, 2);
        case Expr::Kind::Div: return wrap(*e.a, 2) + "/" + wrap(*e.b, 3);
        case Expr::Kind::Pow: return wrap(*e.a, 5) + "^" + std::to_string(e.exponent);
        case Expr::Kind::Sin: return "sin(" + print(*e.a) + ")";
        case Expr::Kind::Cos: return "cos(" + print(*e.a) + ")";
    }
    return "";
}

/// Spectral fit of the expression. The lattice sampling is periodic by construction; an
/// audit compares expr(0, y) with expr(1, y) at 32 y-values and flags departures above
/// 1e-9 (error in strict mode, warning flag otherwise).
inline CylinderFunction lower_to_function(const ExprPtr& expr, const GridSpec& grid,
                                          bool strict = true, bool* warned = nullptr) {
    double worst = 0.0;
    for (double y : cgl_nodes(grid.interval, 32))
        worst = std::max(worst, std::abs(evaluate(*expr, 0.0, y) - evaluate(*expr, 1.0, y)));
    if (worst > 1e-9) {
        if (strict)
            throw ContractError("expression is not 1-periodic in x (audit gap " +
                                std::to_string(worst) + ")");
        if (warned) *warned = true;
    } else if (warned) {
        *warned = false;
    }
    return CylinderFunction::fit([&](double x, double y) { return evaluate(*expr, x, y); }, grid);
}

} // namespace cylkam::dsl
