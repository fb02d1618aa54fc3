#include "bartvs/expression.hpp"

#include "bartvs/data.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

namespace bartvs {

class ExpressionParser {
public:
    explicit ExpressionParser(std::string text) : src_(normalize(std::move(text))) {}

    Expression run(const std::string& original)
    {
        out_.text_ = original;
        out_.root_ = expr();
        skip();
        if (pos_ != src_.size())
            fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return std::move(out_);
    }

private:
    std::string src_;
    std::size_t pos_ = 0;
    Expression out_;

    // Map the Unicode operator spellings onto ASCII.
    static std::string normalize(std::string s)
    {
        const std::pair<const char*, const char*> subs[] = {
            {"\xC3\x97", "*"}, {"\xC3\xB7", "/"}, {"\xE2\x88\x92", "-"}};
        for (const auto& [from, to] : subs) {
            const std::string f(from);
            for (auto at = s.find(f); at != std::string::npos; at = s.find(f, at))
                s.replace(at, f.size(), to);
        }
        return s;
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ValidationError("expression error at position " + std::to_string(pos_ + 1) + ": " + what);
    }

    void skip()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool accept(const char* tok)
    {
        skip();
        const std::string t(tok);
        if (src_.compare(pos_, t.size(), t) == 0) {
            pos_ += t.size();
            return true;
        }
        return false;
    }

    int add(Expression::Node n)
    {
        out_.nodes_.push_back(n);
        return static_cast<int>(out_.nodes_.size() - 1);
    }

    int binary(Expression::Op op, int l, int r) { return add({op, 0.0, 0, Expression::Fn::cos, l, r}); }

    int expr()
    {
        int lhs = term();
        for (;;) {
            if (accept("+"))
                lhs = binary(Expression::Op::add, lhs, term());
            else if (accept("-"))
                lhs = binary(Expression::Op::sub, lhs, term());
            else
                return lhs;
        }
    }

    int term()
    {
        int lhs = unary();
        for (;;) {
            skip();
            if (src_.compare(pos_, 2, "**") == 0)
                return lhs;  // handled by power()
            if (accept("*"))
                lhs = binary(Expression::Op::mul, lhs, unary());
            else if (accept("/"))
                lhs = binary(Expression::Op::div, lhs, unary());
            else
                return lhs;
        }
    }

    int unary()
    {
        if (accept("-"))
            return add({Expression::Op::neg, 0.0, 0, Expression::Fn::cos, unary(), -1});
        if (accept("+"))
            return unary();
        return power();
    }

    int power()
    {
        int base = primary();
        if (accept("^") || accept("**"))
            return binary(Expression::Op::pow, base, unary());
        return base;
    }

    int primary()
    {
        skip();
        if (pos_ >= src_.size())
            fail("unexpected end of expression");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(src_.substr(pos_), &used);
            } catch (const std::exception&) {
                fail("malformed number");
            }
            pos_ += used;
            return add({Expression::Op::constant, v});
        }
        if (c == '(') {
            ++pos_;
            int inner = expr();
            if (!accept(")"))
                fail("expected ')'");
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
            const std::string word = src_.substr(start, pos_ - start);
            if (word == "pi")
                return add({Expression::Op::constant, std::numbers::pi});
            if (word.size() > 1 && word[0] == 'x' &&
                word.find_first_not_of("0123456789", 1) == std::string::npos) {
                const int k = std::stoi(word.substr(1));
                if (k < 1) {
                    pos_ = start;
                    fail("variables are numbered from x1");
                }
                out_.arity_ = std::max(out_.arity_, k);
                return add({Expression::Op::variable, 0.0, k - 1});
            }
            const std::pair<const char*, Expression::Fn> fns[] = {
                {"cos", Expression::Fn::cos}, {"sin", Expression::Fn::sin},   {"tan", Expression::Fn::tan},
                {"exp", Expression::Fn::exp}, {"log", Expression::Fn::log},   {"sqrt", Expression::Fn::sqrt},
                {"abs", Expression::Fn::abs}};
            for (const auto& [name, fn] : fns) {
                if (word == name) {
                    if (!accept("("))
                        fail("expected '(' after " + word);
                    int arg = expr();
                    if (!accept(")"))
                        fail("expected ')'");
                    return add({Expression::Op::func, 0.0, 0, fn, arg, -1});
                }
            }
            pos_ = start;
            fail("unknown identifier '" + word + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
};

Expression Expression::parse(const std::string& text)
{
    return ExpressionParser(text).run(text);
}

double Expression::evaluate(std::span<const double> x) const
{
    if (static_cast<int>(x.size()) < arity_)
        throw ValidationError("expression needs " + std::to_string(arity_) + " variables, got " +
                              std::to_string(x.size()));
    return eval(root_, x);
}

double Expression::eval(int id, std::span<const double> x) const
{
    const Node& n = nodes_[id];
    switch (n.op) {
    case Op::constant: return n.value;
    case Op::variable: return x[n.var];
    case Op::neg: return -eval(n.lhs, x);
    case Op::add: return eval(n.lhs, x) + eval(n.rhs, x);
    case Op::sub: return eval(n.lhs, x) - eval(n.rhs, x);
    case Op::mul: return eval(n.lhs, x) * eval(n.rhs, x);
    case Op::div: return eval(n.lhs, x) / eval(n.rhs, x);
    case Op::pow: return std::pow(eval(n.lhs, x), eval(n.rhs, x));
    case Op::func: {
        const double a = eval(n.lhs, x);
        switch (n.fn) {
        case Fn::cos: return std::cos(a);
        case Fn::sin: return std::sin(a);
        case Fn::tan: return std::tan(a);
        case Fn::exp: return std::exp(a);
        case Fn::log: return std::log(a);
        case Fn::sqrt: return std::sqrt(a);
        case Fn::abs: return std::abs(a);
        }
    }
    }
    return std::nan("");
}

} // namespace bartvs
