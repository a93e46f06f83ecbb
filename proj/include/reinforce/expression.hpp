#pragma once

#include "reinforce/types.hpp"

#include <array>
#include <memory>
#include <string>

namespace reinforce {

/// Arithmetic expression in x1, x2, x3 and eps.
///
/// Grammar: sums and differences of products and quotients of powers
/// (right associative '^', unary minus binds looser than '^'); atoms are
/// numbers, the variables, pi, and sin, cos, exp, ln, sqrt applied to a
/// parenthesized argument. '*' and '×' both denote multiplication.
class Expression {
public:
    enum class Var { X1, X2, X3, Eps };

    /// Throws ConfigError with the offending position on malformed input.
    static Expression parse(const std::string& text);
    static Expression constant(double value);

    double eval(const Vec3& x, double eps = 0.0) const;
    /// Symbolic partial derivative.
    Expression derivative(Var var) const;
    bool depends_on(Var var) const;
    bool is_constant() const { return !depends_on(Var::X1) && !depends_on(Var::X2) && !depends_on(Var::X3) && !depends_on(Var::Eps); }
    /// Canonical fully parenthesized form.
    std::string str() const;

    struct Node;

private:
    explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
    std::shared_ptr<const Node> root_;
};

struct SmoothField;

/// Vector field from three component expressions, with the symbolic gradient.
SmoothField make_field(const std::array<Expression, 3>& components, double eps = 0.0);

} // namespace reinforce
