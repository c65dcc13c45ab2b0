#pragma once

#include <memory>
#include <string>

namespace stmca {

struct ExprNode;

// Arithmetic expression in one variable x. Grammar: + - * / ^ (right
// associative, binding tighter than unary minus), parentheses, the
// functions exp log sqrt abs, and the constants pi and e.
class Expression {
public:
    // Throws ParameterError naming the offending position on malformed input.
    static Expression parse(const std::string& text);

    double operator()(double x) const;
    const std::string& text() const { return text_; }

private:
    std::string text_;
    std::shared_ptr<const ExprNode> root_;
};

}  // namespace stmca
