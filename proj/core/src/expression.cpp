#include "kfp/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace kfp {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

class ExpressionParser {
public:
    ExpressionParser(const std::string& src, int dim, Expression& out)
        : src_(src), dim_(dim), out_(out) {}

    void run() {
        skip_ws();
        parse_expr();
        skip_ws();
        if (pos_ != src_.size()) {
            throw ExpressionError("unexpected trailing input", pos_);
        }
        out_.stack_need_ = max_depth_;
    }

private:
    const std::string& src_;
    int dim_;
    Expression& out_;
    size_t pos_ = 0;
    int depth_ = 0;
    int max_depth_ = 0;

    void emit(Expression::Instr in, int pops, int pushes) {
        out_.program_.push_back(in);
        depth_ += pushes - pops;
        max_depth_ = std::max(max_depth_, depth_);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    void parse_expr() {
        parse_term();
        while (true) {
            if (eat('+')) {
                parse_term();
                emit({Expression::Op::Add}, 2, 1);
            } else if (eat('-')) {
                parse_term();
                emit({Expression::Op::Sub}, 2, 1);
            } else {
                return;
            }
        }
    }

    void parse_term() {
        parse_factor();
        while (true) {
            if (eat('*')) {
                parse_factor();
                emit({Expression::Op::Mul}, 2, 1);
            } else if (eat('/')) {
                parse_factor();
                emit({Expression::Op::Div}, 2, 1);
            } else {
                return;
            }
        }
    }

    void parse_factor() {
        parse_unary();
        if (eat('^')) {
            parse_factor(); // right associative
            emit({Expression::Op::Pow}, 2, 1);
        }
    }

    void parse_unary() {
        if (eat('-')) {
            parse_unary();
            emit({Expression::Op::Neg}, 1, 1);
            return;
        }
        parse_primary();
    }

    void parse_primary() {
        const char c = peek();
        if (c == '(') {
            eat('(');
            parse_expr();
            if (!eat(')')) throw ExpressionError("expected ')'", pos_);
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            parse_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            parse_ident();
            return;
        }
        throw ExpressionError("expected number, variable, function or '('", pos_);
    }

    void parse_number() {
        skip_ws();
        const char* begin = src_.c_str() + pos_;
        char* end = nullptr;
        const double val = std::strtod(begin, &end);
        if (end == begin) throw ExpressionError("malformed number", pos_);
        pos_ += static_cast<size_t>(end - begin);
        emit({Expression::Op::PushConst, 0, val}, 0, 1);
    }

    void parse_ident() {
        skip_ws();
        const size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string name = src_.substr(start, pos_ - start);

        if (peek() == '(') {
            parse_call(name, start);
            return;
        }
        if (name == "t") {
            emit({Expression::Op::PushT}, 0, 1);
            return;
        }
        if (name == "pi") {
            emit({Expression::Op::PushConst, 0, kPi}, 0, 1);
            return;
        }
        if (name.size() >= 2 && (name[0] == 'v' || name[0] == 'x')) {
            bool digits = true;
            for (size_t i = 1; i < name.size(); ++i) {
                digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
            }
            if (digits) {
                const int idx = std::atoi(name.c_str() + 1);
                if (idx < 1 || idx > dim_) {
                    throw ExpressionError("variable index out of range for dimension " +
                                              std::to_string(dim_) + ": " + name,
                                          start);
                }
                emit({name[0] == 'v' ? Expression::Op::PushV : Expression::Op::PushX, idx - 1},
                     0, 1);
                return;
            }
        }
        throw ExpressionError("unknown identifier '" + name + "'", start);
    }

    void parse_call(const std::string& name, size_t start) {
        eat('(');
        parse_expr();
        int args = 1;
        while (eat(',')) {
            parse_expr();
            ++args;
        }
        if (!eat(')')) throw ExpressionError("expected ')'", pos_);

        struct Fn {
            const char* name;
            Expression::Op op;
            int arity;
        };
        static constexpr Fn fns[] = {
            {"sin", Expression::Op::Sin, 1}, {"cos", Expression::Op::Cos, 1},
            {"exp", Expression::Op::Exp, 1}, {"abs", Expression::Op::Abs, 1},
            {"max", Expression::Op::Max, 2}, {"min", Expression::Op::Min, 2},
        };
        for (const auto& f : fns) {
            if (name == f.name) {
                if (args != f.arity) {
                    throw ExpressionError("function '" + name + "' takes " +
                                              std::to_string(f.arity) + " argument(s)",
                                          start);
                }
                emit({f.op}, f.arity, 1);
                return;
            }
        }
        throw ExpressionError("unknown function '" + name + "'", start);
    }
};

Expression Expression::parse(const std::string& source, int dim) {
    if (dim < 1) throw std::invalid_argument("Expression: dimension must be >= 1");
    Expression e;
    e.source_ = source;
    e.dim_ = dim;
    ExpressionParser(source, dim, e).run();
    return e;
}

double Expression::eval(const Eigen::VectorXd& v, const Eigen::VectorXd& x, double t) const {
    double stack[64];
    if (stack_need_ > 64) throw std::runtime_error("expression too deep");
    int top = -1;
    for (const auto& in : program_) {
        switch (in.op) {
            case Op::PushConst: stack[++top] = in.value; break;
            case Op::PushV: stack[++top] = v[in.arg]; break;
            case Op::PushX: stack[++top] = x[in.arg]; break;
            case Op::PushT: stack[++top] = t; break;
            case Op::Add: stack[top - 1] += stack[top]; --top; break;
            case Op::Sub: stack[top - 1] -= stack[top]; --top; break;
            case Op::Mul: stack[top - 1] *= stack[top]; --top; break;
            case Op::Div: stack[top - 1] /= stack[top]; --top; break;
            case Op::Pow: stack[top - 1] = std::pow(stack[top - 1], stack[top]); --top; break;
            case Op::Neg: stack[top] = -stack[top]; break;
            case Op::Sin: stack[top] = std::sin(stack[top]); break;
            case Op::Cos: stack[top] = std::cos(stack[top]); break;
            case Op::Exp: stack[top] = std::exp(stack[top]); break;
            case Op::Abs: stack[top] = std::abs(stack[top]); break;
            case Op::Max: stack[top - 1] = std::max(stack[top - 1], stack[top]); --top; break;
            case Op::Min: stack[top - 1] = std::min(stack[top - 1], stack[top]); --top; break;
        }
    }
    return stack[0];
}

} // namespace kfp
