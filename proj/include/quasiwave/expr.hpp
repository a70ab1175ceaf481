#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "quasiwave/errors.hpp"

namespace quasiwave {

/// Immutable expression tree in one free variable `theta`.
///
/// Node set: constants, theta, + - * /, power, exp, log, negation.
/// Trees are shared via shared_ptr and never mutated after construction,
/// so they are safe to copy across threads.
class ExprAst {
public:
    enum class Kind { Constant, Theta, Add, Sub, Mul, Div, Pow, Exp, Log, Neg };

    using Ptr = std::shared_ptr<const ExprAst>;

    static Ptr constant(double v) { return make(Kind::Constant, v, nullptr, nullptr); }
    static Ptr theta() { return make(Kind::Theta, 0.0, nullptr, nullptr); }
    static Ptr add(Ptr a, Ptr b) { return fold(Kind::Add, std::move(a), std::move(b)); }
    static Ptr sub(Ptr a, Ptr b) { return fold(Kind::Sub, std::move(a), std::move(b)); }
    static Ptr mul(Ptr a, Ptr b) { return fold(Kind::Mul, std::move(a), std::move(b)); }
    static Ptr div(Ptr a, Ptr b) { return fold(Kind::Div, std::move(a), std::move(b)); }
    static Ptr pow(Ptr a, Ptr b) { return fold(Kind::Pow, std::move(a), std::move(b)); }
    static Ptr exp(Ptr a) { return fold(Kind::Exp, std::move(a), nullptr); }
    static Ptr log(Ptr a) { return fold(Kind::Log, std::move(a), nullptr); }
    static Ptr neg(Ptr a) { return fold(Kind::Neg, std::move(a), nullptr); }

    Kind kind() const { return kind_; }
    double value() const { return value_; }
    const Ptr& left() const { return left_; }
    const Ptr& right() const { return right_; }

    bool is_constant(double v) const {
        return kind_ == Kind::Constant && value_ == v;
    }

    /// Evaluates at the given theta. Throws EvalError on division by zero,
    /// log of a non-positive value, or a power that leaves the reals.
    double eval(double theta) const {
        switch (kind_) {
        case Kind::Constant: return value_;
        case Kind::Theta: return theta;
        case Kind::Add: return left_->eval(theta) + right_->eval(theta);
        case Kind::Sub: return left_->eval(theta) - right_->eval(theta);
        case Kind::Mul: return left_->eval(theta) * right_->eval(theta);
        case Kind::Div: {
            const double num = left_->eval(theta);
            const double den = right_->eval(theta);
            if (den == 0.0) throw EvalError("division by zero");
            return num / den;
        }
        case Kind::Pow: {
            const double base = left_->eval(theta);
            const double expo = right_->eval(theta);
            const double r = std::pow(base, expo);
            if (!std::isfinite(r)) throw EvalError("power out of domain");
            return r;
        }
        case Kind::Exp: return std::exp(left_->eval(theta));
        case Kind::Log: {
            const double a = left_->eval(theta);
            if (a <= 0.0) throw EvalError("log of non-positive value");
            return std::log(a);
        }
        case Kind::Neg: return -left_->eval(theta);
        }
        throw EvalError("corrupt expression node");
    }

private:
    static Ptr make(Kind k, double v, Ptr a, Ptr b) {
        auto node = std::make_shared<ExprAst>();
        node->kind_ = k;
        node->value_ = v;
        node->left_ = std::move(a);
        node->right_ = std::move(b);
        return node;
    }

    // Constant folding of literal arithmetic, nothing fancier. Folding is
    // skipped when the literal operation itself would be a domain error.
    static Ptr fold(Kind k, Ptr a, Ptr b) {
        const bool a_const = a && a->kind_ == Kind::Constant;
        const bool b_const = b && b->kind_ == Kind::Constant;
        const bool unary = (k == Kind::Exp || k == Kind::Log || k == Kind::Neg);
        if (a_const && (unary || b_const)) {
            Ptr node = make(k, 0.0, a, b);
            try {
                return constant(node->eval(0.0));
            } catch (const EvalError&) {
                return node;
            }
        }
        return make(k, 0.0, std::move(a), std::move(b));
    }

    Kind kind_ = Kind::Constant;
    double value_ = 0.0;
    Ptr left_;
    Ptr right_;

public:
    ExprAst() = default; // for make_shared; use the factories above
};

namespace detail {

// Recursive-descent parser for
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' factor)?            ('^' is right-associative)
//   base   := number | 'theta' | func '(' expr ')' | '(' expr ')' | '-' base
//   func   := 'exp' | 'log'
class ExprParser {
public:
    explicit ExprParser(std::string_view text) : text_(text) {}

    ExprAst::Ptr parse() {
        ExprAst::Ptr e = expr();
        skip_ws();
        if (pos_ != text_.size())
            throw SyntaxError("unexpected trailing input", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    int peek() {
        skip_ws();
        return pos_ < text_.size() ? static_cast<unsigned char>(text_[pos_]) : -1;
    }

    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    ExprAst::Ptr expr() {
        ExprAst::Ptr acc = term();
        for (;;) {
            if (consume('+'))
                acc = ExprAst::add(acc, term());
            else if (consume('-'))
                acc = ExprAst::sub(acc, term());
            else
                return acc;
        }
    }

    ExprAst::Ptr term() {
        ExprAst::Ptr acc = factor();
        for (;;) {
            if (consume('*'))
                acc = ExprAst::mul(acc, factor());
            else if (consume('/'))
                acc = ExprAst::div(acc, factor());
            else
                return acc;
        }
    }

    ExprAst::Ptr factor() {
        ExprAst::Ptr b = base();
        if (consume('^'))
            return ExprAst::pow(b, factor());
        return b;
    }

    ExprAst::Ptr base() {
        const int c = peek();
        if (c < 0) throw SyntaxError("unexpected end of input", pos_);
        if (c == '-') {
            ++pos_;
            return ExprAst::neg(base());
        }
        if (c == '(') {
            ++pos_;
            ExprAst::Ptr e = expr();
            if (!consume(')')) throw SyntaxError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(c) || c == '.') return number();
        if (std::isalpha(c) || c == '_') return identifier();
        throw SyntaxError(std::string("unexpected character '") + static_cast<char>(c) + "'", pos_);
    }

    ExprAst::Ptr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        };
        digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            const std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                digits();
            else
                pos_ = mark; // lone 'e' is not an exponent
        }
        const std::string tok(text_.substr(start, pos_ - start));
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            return ExprAst::constant(v);
        } catch (const std::exception&) {
            throw SyntaxError("malformed number '" + tok + "'", start);
        }
    }

    ExprAst::Ptr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string name(text_.substr(start, pos_ - start));
        if (name == "theta") return ExprAst::theta();
        if (name == "exp" || name == "log") {
            if (!consume('(')) throw SyntaxError("expected '(' after '" + name + "'", pos_);
            ExprAst::Ptr arg = expr();
            if (!consume(')')) throw SyntaxError("expected ')'", pos_);
            return name == "exp" ? ExprAst::exp(arg) : ExprAst::log(arg);
        }
        throw UnknownIdentifierError(name, start);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Parses an arithmetic expression in the free variable `theta`.
inline ExprAst::Ptr parse_speed_expr(std::string_view text) {
    return detail::ExprParser(text).parse();
}

/// Symbolic derivative d/dtheta. No simplification guarantees beyond the
/// constant folding done by the node constructors.
inline ExprAst::Ptr derive_speed_expr(const ExprAst::Ptr& ast) {
    using K = ExprAst::Kind;
    switch (ast->kind()) {
    case K::Constant: return ExprAst::constant(0.0);
    case K::Theta: return ExprAst::constant(1.0);
    case K::Add: return ExprAst::add(derive_speed_expr(ast->left()), derive_speed_expr(ast->right()));
    case K::Sub: return ExprAst::sub(derive_speed_expr(ast->left()), derive_speed_expr(ast->right()));
    case K::Mul:
        return ExprAst::add(
            ExprAst::mul(derive_speed_expr(ast->left()), ast->right()),
            ExprAst::mul(ast->left(), derive_speed_expr(ast->right())));
    case K::Div:
        // (a/b)' = (a'b - ab') / b^2
        return ExprAst::div(
            ExprAst::sub(ExprAst::mul(derive_speed_expr(ast->left()), ast->right()),
                         ExprAst::mul(ast->left(), derive_speed_expr(ast->right()))),
            ExprAst::mul(ast->right(), ast->right()));
    case K::Pow: {
        const auto& base = ast->left();
        const auto& expo = ast->right();
        if (expo->kind() == K::Constant) {
            // (a^k)' = k a^(k-1) a'   -- stays real for negative bases
            return ExprAst::mul(
                ExprAst::mul(expo, ExprAst::pow(base, ExprAst::constant(expo->value() - 1.0))),
                derive_speed_expr(base));
        }
        // (a^b)' = a^b (b' log a + b a'/a)
        return ExprAst::mul(
            ast,
            ExprAst::add(ExprAst::mul(derive_speed_expr(expo), ExprAst::log(base)),
                         ExprAst::div(ExprAst::mul(expo, derive_speed_expr(base)), base)));
    }
    case K::Exp: return ExprAst::mul(ast, derive_speed_expr(ast->left()));
    case K::Log: return ExprAst::div(derive_speed_expr(ast->left()), ast->left());
    case K::Neg: return ExprAst::neg(derive_speed_expr(ast->left()));
    }
    throw EvalError("corrupt expression node");
}

} // namespace quasiwave
