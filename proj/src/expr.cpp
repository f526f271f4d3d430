#include "wpharm/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace wpharm {

struct Expr::Node {
    enum class Kind { Const, Theta, Unary, Binary } kind;
    double value = 0.0;
    char op = 0; // binary: + - * / ^
    std::string fn;
    std::unique_ptr<Node> a, b;

    double eval(double theta) const {
        switch (kind) {
        case Kind::Const: return value;
        case Kind::Theta: return theta;
        case Kind::Unary: {
            const double x = a->eval(theta);
            if (fn == "sin") return std::sin(x);
            if (fn == "cos") return std::cos(x);
            if (fn == "tan") return std::tan(x);
            if (fn == "exp") return std::exp(x);
            if (fn == "log") return std::log(x);
            if (fn == "sqrt") return std::sqrt(x);
            if (fn == "abs") return std::fabs(x);
            if (fn == "sign") return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
            if (fn == "neg") return -x;
            if (fn == "min") return std::min(x, b->eval(theta));
            if (fn == "max") return std::max(x, b->eval(theta));
            throw std::invalid_argument("unknown function " + fn);
        }
        case Kind::Binary: {
            const double x = a->eval(theta), y = b->eval(theta);
            switch (op) {
            case '+': return x + y;
            case '-': return x - y;
            case '*': return x * y;
            case '/': return x / y;
            case '^': return std::pow(x, y);
            }
            throw std::invalid_argument("unknown operator");
        }
        }
        return 0.0;
    }
};

namespace {

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    using NodePtr = std::unique_ptr<Expr::Node>;

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
            ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) {
        throw std::invalid_argument("expression error at position " +
                                    std::to_string(pos) + ": " + what);
    }

    NodePtr make_const(double v) {
        auto n = std::make_unique<Expr::Node>();
        n->kind = Expr::Node::Kind::Const;
        n->value = v;
        return n;
    }

    NodePtr sum() {
        NodePtr left = product();
        for (;;) {
            skip();
            if (eat('+')) {
                auto n = std::make_unique<Expr::Node>();
                n->kind = Expr::Node::Kind::Binary;
                n->op = '+';
                n->a = std::move(left);
                n->b = product();
                left = std::move(n);
            } else if (eat('-')) {
                auto n = std::make_unique<Expr::Node>();
                n->kind = Expr::Node::Kind::Binary;
                n->op = '-';
                n->a = std::move(left);
                n->b = product();
                left = std::move(n);
            } else {
                return left;
            }
        }
    }

    NodePtr product() {
        NodePtr left = unary();
        for (;;) {
            skip();
            if (eat('*')) {
                auto n = std::make_unique<Expr::Node>();
                n->kind = Expr::Node::Kind::Binary;
                n->op = '*';
                n->a = std::move(left);
                n->b = unary();
                left = std::move(n);
            } else if (eat('/')) {
                auto n = std::make_unique<Expr::Node>();
                n->kind = Expr::Node::Kind::Binary;
                n->op = '/';
                n->a = std::move(left);
                n->b = unary();
                left = std::move(n);
            } else {
                return left;
            }
        }
    }

    NodePtr unary() {
        skip();
        if (eat('-')) {
            auto n = std::make_unique<Expr::Node>();
            n->kind = Expr::Node::Kind::Unary;
            n->fn = "neg";
            n->a = unary(); // binds looser than ^, so -x^2 = -(x^2)
            return n;
        }
        (void)eat('+');
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        skip();
        if (eat('^')) {
            auto n = std::make_unique<Expr::Node>();
            n->kind = Expr::Node::Kind::Binary;
            n->op = '^';
            n->a = std::move(base);
            n->b = unary(); // right associative, allows 2^-3
            return n;
        }
        return base;
    }

    NodePtr atom() {
        skip();
        if (pos >= s.size()) fail("unexpected end");
        if (eat('(')) {
            NodePtr inner = sum();
            if (!eat(')')) fail("expected )");
            return inner;
        }
        const char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            const double v = std::stod(s.substr(pos), &used);
            pos += used;
            return make_const(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t end = pos;
            while (end < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[end])) ||
                    s[end] == '_'))
                ++end;
            const std::string name = s.substr(pos, end - pos);
            pos = end;
            if (name == "theta" || name == "t") {
                auto n = std::make_unique<Expr::Node>();
                n->kind = Expr::Node::Kind::Theta;
                return n;
            }
            if (name == "pi") return make_const(M_PI);
            // function call
            if (!eat('(')) fail("expected ( after " + name);
            auto n = std::make_unique<Expr::Node>();
            n->kind = Expr::Node::Kind::Unary;
            n->fn = name;
            n->a = sum();
            if (name == "min" || name == "max") {
                if (!eat(',')) fail("expected , in " + name);
                n->b = sum();
            }
            if (!eat(')')) fail("expected )");
            return n;
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

} // namespace

Expr::Expr(std::unique_ptr<Node> root) : root_(std::move(root)) {}
Expr::Expr(Expr&&) noexcept = default;
Expr& Expr::operator=(Expr&&) noexcept = default;
Expr::~Expr() = default;

Expr Expr::parse(const std::string& text) {
    Parser p{text};
    auto root = p.sum();
    p.skip();
    if (p.pos != text.size()) p.fail("trailing input");
    return Expr(std::move(root));
}

double Expr::eval(double theta) const { return root_->eval(theta); }

} // namespace wpharm
