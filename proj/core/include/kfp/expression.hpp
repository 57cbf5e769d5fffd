#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kfp {

struct ExpressionError : std::runtime_error {
    ExpressionError(const std::string& msg, size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
          position(pos) {}
    size_t position;
};

/// Closed-form scalar expression over v1..vd, x1..xd, t.
///
/// Grammar: + - * / ^ (right associative), unary minus, parentheses,
/// numeric literals, the constant pi, functions sin, cos, exp, abs and the
/// two-argument max, min. Parsed once into a postfix program; evaluation is
/// allocation-free.
class Expression {
public:
    static Expression parse(const std::string& source, int dim);

    double eval(const Eigen::VectorXd& v, const Eigen::VectorXd& x, double t) const;

    const std::string& source() const { return source_; }
    int dim() const { return dim_; }

private:
    enum class Op : uint8_t {
        PushConst, PushV, PushX, PushT,
        Add, Sub, Mul, Div, Pow, Neg,
        Sin, Cos, Exp, Abs, Max, Min,
    };
    struct Instr {
        Op op;
        int arg = 0;
        double value = 0.0;
    };

    std::string source_;
    int dim_ = 0;
    std::vector<Instr> program_;
    int stack_need_ = 0;

    friend class ExpressionParser;
};

} // namespace kfp
