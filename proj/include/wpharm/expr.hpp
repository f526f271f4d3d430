#pragma once

#include <memory>
#include <string>

namespace wpharm {

// Closed-form expressions in the boundary angle theta: numbers, theta, pi,
// + - * / ^, parentheses, and the functions sin cos tan exp log sqrt abs
// sign min max. Enough to state boundary families in the config alone.
class Expr {
public:
    static Expr parse(const std::string& text); // throws std::invalid_argument
    double eval(double theta) const;

    Expr(Expr&&) noexcept;
    Expr& operator=(Expr&&) noexcept;
    ~Expr();

    struct Node; // exposed for the parser implementation

private:
    explicit Expr(std::unique_ptr<Node> root);
    std::unique_ptr<Node> root_;
};

} // namespace wpharm
