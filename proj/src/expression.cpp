#include "reinforce/expression.hpp"

#include "reinforce/errors.hpp"
#include "reinforce/fine_scale_solver.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace reinforce {

struct Expression::Node {
    enum class Kind { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Ln, Sqrt };
    Kind kind = Kind::Num;
    double value = 0.0;
    Var var = Var::X1;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;
using Kind = Node::Kind;
using Var = Expression::Var;

NodePtr num(double v)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Num;
    n->value = v;
    return n;
}

NodePtr variable(Var v)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Var;
    n->var = v;
    return n;
}

bool is_num(const NodePtr& n, double v) { return n->kind == Kind::Num && n->value == v; }

// Builders fold constants and drop neutral elements so derivatives stay small.
NodePtr make(Kind k, NodePtr a, NodePtr b = nullptr)
{
    if (a->kind == Kind::Num && (!b || b->kind == Kind::Num)) {
        const double x = a->value;
        const double y = b ? b->value : 0.0;
        switch (k) {
        case Kind::Add: return num(x + y);
        case Kind::Sub: return num(x - y);
        case Kind::Mul: return num(x * y);
        case Kind::Div:
            if (y != 0.0)
                return num(x / y);
            break;
        case Kind::Pow: return num(std::pow(x, y));
        case Kind::Neg: return num(-x);
        default: break;
        }
    }
    switch (k) {
    case Kind::Add:
        if (is_num(a, 0.0))
            return b;
        if (is_num(b, 0.0))
            return a;
        break;
    case Kind::Sub:
        if (is_num(b, 0.0))
            return a;
        if (is_num(a, 0.0))
            return make(Kind::Neg, b);
        break;
    case Kind::Mul:
        if (is_num(a, 0.0) || is_num(b, 0.0))
            return num(0.0);
        if (is_num(a, 1.0))
            return b;
        if (is_num(b, 1.0))
            return a;
        break;
    case Kind::Div:
        if (is_num(a, 0.0))
            return num(0.0);
        if (is_num(b, 1.0))
            return a;
        break;
    case Kind::Pow:
        if (is_num(b, 1.0))
            return a;
        if (is_num(b, 0.0))
            return num(1.0);
        break;
    default: break;
    }
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

double eval_node(const Node& n, const Vec3& x, double eps)
{
    switch (n.kind) {
    case Kind::Num: return n.value;
    case Kind::Var:
        switch (n.var) {
        case Var::X1: return x[0];
        case Var::X2: return x[1];
        case Var::X3: return x[2];
        case Var::Eps: return eps;
        }
        return 0.0;
    case Kind::Add: return eval_node(*n.a, x, eps) + eval_node(*n.b, x, eps);
    case Kind::Sub: return eval_node(*n.a, x, eps) - eval_node(*n.b, x, eps);
    case Kind::Mul: return eval_node(*n.a, x, eps) * eval_node(*n.b, x, eps);
    case Kind::Div: return eval_node(*n.a, x, eps) / eval_node(*n.b, x, eps);
    case Kind::Pow: return std::pow(eval_node(*n.a, x, eps), eval_node(*n.b, x, eps));
    case Kind::Neg: return -eval_node(*n.a, x, eps);
    case Kind::Sin: return std::sin(eval_node(*n.a, x, eps));
    case Kind::Cos: return std::cos(eval_node(*n.a, x, eps));
    case Kind::Exp: return std::exp(eval_node(*n.a, x, eps));
    case Kind::Ln: return std::log(eval_node(*n.a, x, eps));
    case Kind::Sqrt: return std::sqrt(eval_node(*n.a, x, eps));
    }
    return 0.0;
}

bool depends(const Node& n, Var v)
{
    if (n.kind == Kind::Var)
        return n.var == v;
    return (n.a && depends(*n.a, v)) || (n.b && depends(*n.b, v));
}

NodePtr diff(const NodePtr& n, Var v)
{
    if (!depends(*n, v))
        return num(0.0);
    const NodePtr& a = n->a;
    const NodePtr& b = n->b;
    switch (n->kind) {
    case Kind::Num: return num(0.0);
    case Kind::Var: return num(1.0);
    case Kind::Add: return make(Kind::Add, diff(a, v), diff(b, v));
    case Kind::Sub: return make(Kind::Sub, diff(a, v), diff(b, v));
    case Kind::Mul: return make(Kind::Add, make(Kind::Mul, diff(a, v), b), make(Kind::Mul, a, diff(b, v)));
    case Kind::Div:
        return make(Kind::Div, make(Kind::Sub, make(Kind::Mul, diff(a, v), b), make(Kind::Mul, a, diff(b, v))),
                    make(Kind::Mul, b, b));
    case Kind::Pow:
        if (!depends(*b, v)) {
            // b a^(b-1) a'
            return make(Kind::Mul, make(Kind::Mul, b, make(Kind::Pow, a, make(Kind::Sub, b, num(1.0)))), diff(a, v));
        }
        // a^b (b' ln a + b a' / a)
        return make(Kind::Mul, n,
                    make(Kind::Add, make(Kind::Mul, diff(b, v), make(Kind::Ln, a)),
                         make(Kind::Div, make(Kind::Mul, b, diff(a, v)), a)));
    case Kind::Neg: return make(Kind::Neg, diff(a, v));
    case Kind::Sin: return make(Kind::Mul, make(Kind::Cos, a), diff(a, v));
    case Kind::Cos: return make(Kind::Neg, make(Kind::Mul, make(Kind::Sin, a), diff(a, v)));
    case Kind::Exp: return make(Kind::Mul, n, diff(a, v));
    case Kind::Ln: return make(Kind::Div, diff(a, v), a);
    case Kind::Sqrt: return make(Kind::Div, diff(a, v), make(Kind::Mul, num(2.0), n));
    }
    return num(0.0);
}

std::string to_str(const Node& n)
{
    switch (n.kind) {
    case Kind::Num: return fmt::format("{}", n.value);
    case Kind::Var:
        switch (n.var) {
        case Var::X1: return "x1";
        case Var::X2: return "x2";
        case Var::X3: return "x3";
        case Var::Eps: return "eps";
        }
        return "?";
    case Kind::Add: return "(" + to_str(*n.a) + " + " + to_str(*n.b) + ")";
    case Kind::Sub: return "(" + to_str(*n.a) + " - " + to_str(*n.b) + ")";
    case Kind::Mul: return "(" + to_str(*n.a) + " * " + to_str(*n.b) + ")";
    case Kind::Div: return "(" + to_str(*n.a) + " / " + to_str(*n.b) + ")";
    case Kind::Pow: return "(" + to_str(*n.a) + " ^ " + to_str(*n.b) + ")";
    case Kind::Neg: return "(-" + to_str(*n.a) + ")";
    case Kind::Sin: return "sin(" + to_str(*n.a) + ")";
    case Kind::Cos: return "cos(" + to_str(*n.a) + ")";
    case Kind::Exp: return "exp(" + to_str(*n.a) + ")";
    case Kind::Ln: return "ln(" + to_str(*n.a) + ")";
    case Kind::Sqrt: return "sqrt(" + to_str(*n.a) + ")";
    }
    return "?";
}

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    NodePtr parse()
    {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size())
            fail("unexpected trailing input");
        return e;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ConfigError(fmt::format("expression '{}': {} at position {}", s_, what, pos_));
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool accept(const std::string& tok)
    {
        skip();
        if (s_.compare(pos_, tok.size(), tok) == 0) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    bool accept_times() { return accept("*") || accept("×"); }

    NodePtr expr()
    {
        NodePtr lhs = term();
        for (;;) {
            if (accept("+"))
                lhs = make(Kind::Add, lhs, term());
            else if (accept("-") || accept("−"))
                lhs = make(Kind::Sub, lhs, term());
            else
                return lhs;
        }
    }

    NodePtr term()
    {
        NodePtr lhs = unary();
        for (;;) {
            if (accept_times())
                lhs = make(Kind::Mul, lhs, unary());
            else if (accept("/"))
                lhs = make(Kind::Div, lhs, unary());
            else
                return lhs;
        }
    }

    NodePtr unary()
    {
        if (accept("-") || accept("−"))
            return make(Kind::Neg, unary());
        if (accept("+"))
            return unary();
        return power();
    }

    NodePtr power()
    {
        NodePtr base = primary();
        if (accept("^"))
            return make(Kind::Pow, base, unary());
        return base;
    }

    NodePtr primary()
    {
        skip();
        if (pos_ >= s_.size())
            fail("unexpected end of input");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
            if (ec != std::errc())
                fail("malformed number");
            pos_ = static_cast<std::size_t>(ptr - s_.data());
            return num(v);
        }
        if (accept("(")) {
            NodePtr e = expr();
            if (!accept(")"))
                fail("expected ')'");
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
            const std::string id = s_.substr(start, pos_ - start);
            if (id == "x1")
                return variable(Var::X1);
            if (id == "x2")
                return variable(Var::X2);
            if (id == "x3")
                return variable(Var::X3);
            if (id == "eps")
                return variable(Var::Eps);
            if (id == "pi")
                return num(pi);
            Kind k;
            if (id == "sin")
                k = Kind::Sin;
            else if (id == "cos")
                k = Kind::Cos;
            else if (id == "exp")
                k = Kind::Exp;
            else if (id == "ln")
                k = Kind::Ln;
            else if (id == "sqrt")
                k = Kind::Sqrt;
            else {
                pos_ = start;
                fail("unknown identifier '" + id + "'");
            }
            if (!accept("("))
                fail("expected '(' after " + id);
            NodePtr arg = expr();
            if (!accept(")"))
                fail("expected ')'");
            return make(k, arg);
        }
        fail(fmt::format("unexpected character '{}'", c));
    }
};

} // namespace

Expression Expression::parse(const std::string& text) { return Expression(Parser(text).parse()); }

Expression Expression::constant(double value) { return Expression(num(value)); }

double Expression::eval(const Vec3& x, double eps) const { return eval_node(*root_, x, eps); }

Expression Expression::derivative(Var var) const { return Expression(diff(root_, var)); }

bool Expression::depends_on(Var var) const { return depends(*root_, var); }

std::string Expression::str() const { return to_str(*root_); }

SmoothField make_field(const std::array<Expression, 3>& components, double eps)
{
    std::array<std::array<Expression, 3>, 3> grad{{
        {components[0].derivative(Expression::Var::X1), components[0].derivative(Expression::Var::X2),
         components[0].derivative(Expression::Var::X3)},
        {components[1].derivative(Expression::Var::X1), components[1].derivative(Expression::Var::X2),
         components[1].derivative(Expression::Var::X3)},
        {components[2].derivative(Expression::Var::X1), components[2].derivative(Expression::Var::X2),
         components[2].derivative(Expression::Var::X3)},
    }};
    SmoothField f;
    f.value = [components, eps](const Vec3& x) {
        return Vec3{components[0].eval(x, eps), components[1].eval(x, eps), components[2].eval(x, eps)};
    };
    f.gradient = [grad, eps](const Vec3& x) {
        Mat3 g{};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                g[i][j] = grad[i][j].eval(x, eps);
        return g;
    };
    return f;
}

} // namespace reinforce
