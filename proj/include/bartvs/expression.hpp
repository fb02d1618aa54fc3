#ifndef BARTVS_EXPRESSION_HPP
#define BARTVS_EXPRESSION_HPP

#include <span>
#include <string>
#include <vector>

namespace bartvs {

/// Parsed arithmetic expression over variables x1..xk.
///
/// Grammar (whitespace-insensitive):
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('+' | '-') unary | power
///   power   := primary (('^' | '**') unary)?
///   primary := number | 'pi' | x<k> | func '(' expr ')' | '(' expr ')'
///   func    := cos | sin | tan | exp | log | sqrt | abs
/// The Unicode operators U+00D7, U+00F7 and U+2212 are accepted as *, / and -.
class Expression {
public:
    static Expression parse(const std::string& text);

    /// Evaluates with x[0] bound to x1. Non-finite results are returned as is.
    double evaluate(std::span<const double> x) const;

    /// Largest variable index referenced (x3 -> 3); 0 for constants.
    int arity() const { return arity_; }
    const std::string& text() const { return text_; }

private:
    enum class Op { constant, variable, neg, add, sub, mul, div, pow, func };
    enum class Fn { cos, sin, tan, exp, log, sqrt, abs };
    struct Node {
        Op op;
        double value = 0.0;
        int var = 0;
        Fn fn = Fn::cos;
        int lhs = -1;
        int rhs = -1;
    };

    std::vector<Node> nodes_;
    int root_ = -1;
    int arity_ = 0;
    std::string text_;

    double eval(int id, std::span<const double> x) const;

    friend class ExpressionParser;
};

} // namespace bartvs

#endif // BARTVS_EXPRESSION_HPP
