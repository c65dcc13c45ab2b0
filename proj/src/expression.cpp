#include "stmca/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

#include "stmca/error.hpp"

namespace stmca {

enum class Op { number, variable, add, sub, mul, div, pow, neg, exp, log, sqrt, abs };

struct ExprNode {
    Op op;
    double value = 0.0;
    std::shared_ptr<const ExprNode> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr leaf(Op op, double v = 0.0) { return std::make_shared<ExprNode>(ExprNode{op, v, nullptr, nullptr}); }
NodePtr node(Op op, NodePtr a, NodePtr b = nullptr) {
    return std::make_shared<ExprNode>(ExprNode{op, 0.0, std::move(a), std::move(b)});
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr run() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return e;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParameterError("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        while (true) {
            if (eat('+')) lhs = node(Op::add, lhs, term());
            else if (eat('-')) lhs = node(Op::sub, lhs, term());
            else return lhs;
        }
    }
    NodePtr term() {
        NodePtr lhs = unary();
        while (true) {
            if (eat('*')) lhs = node(Op::mul, lhs, unary());
            else if (eat('/')) lhs = node(Op::div, lhs, unary());
            else return lhs;
        }
    }
    NodePtr unary() {
        if (eat('-')) return node(Op::neg, unary());
        if (eat('+')) return unary();
        return power();
    }
    NodePtr power() {
        NodePtr base = primary();
        if (eat('^')) return node(Op::pow, base, unary());
        return base;
    }
    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = 0.0;
            const auto [end, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
            if (ec != std::errc()) fail("malformed number");
            pos_ = static_cast<std::size_t>(end - s_.data());
            return leaf(Op::number, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "x") return leaf(Op::variable);
            if (name == "pi") return leaf(Op::number, std::numbers::pi);
            if (name == "e") return leaf(Op::number, std::numbers::e);
            Op f;
            if (name == "exp") f = Op::exp;
            else if (name == "log") f = Op::log;
            else if (name == "sqrt") f = Op::sqrt;
            else if (name == "abs") f = Op::abs;
            else {
                pos_ = start;
                fail("unknown identifier '" + name + "'");
            }
            if (!eat('(')) fail("expected '(' after " + name);
            NodePtr arg = expr();
            if (!eat(')')) fail("expected ')'");
            return node(f, arg);
        }
        fail("unexpected character");
    }
};

double eval(const ExprNode& n, double x) {
    switch (n.op) {
        case Op::number: return n.value;
        case Op::variable: return x;
        case Op::add: return eval(*n.lhs, x) + eval(*n.rhs, x);
        case Op::sub: return eval(*n.lhs, x) - eval(*n.rhs, x);
        case Op::mul: return eval(*n.lhs, x) * eval(*n.rhs, x);
        case Op::div: return eval(*n.lhs, x) / eval(*n.rhs, x);
        case Op::pow: return std::pow(eval(*n.lhs, x), eval(*n.rhs, x));
        case Op::neg: return -eval(*n.lhs, x);
        case Op::exp: return std::exp(eval(*n.lhs, x));
        case Op::log: return std::log(eval(*n.lhs, x));
        case Op::sqrt: return std::sqrt(eval(*n.lhs, x));
        case Op::abs: return std::abs(eval(*n.lhs, x));
    }
    return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.text_ = text;
    e.root_ = Parser(text).run();
    return e;
}

double Expression::operator()(double x) const { return eval(*root_, x); }

}  // namespace stmca
