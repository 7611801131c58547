#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gconv {

/// Growth envelope (C, m) of an expression e:
///
///     |e(x) - e(y)| <= C * (1 + |x|^m + |y|^m) * |x - y|
///
/// with |x| the max norm of the argument vector. Computed bottom-up from the
/// syntax; sound but not tight. m is capped at 6 by the parser.
struct GrowthEnvelope {
    double C = 0.0;
    int m = 0;
};

/// Parse error with the byte offset of the offending token in the source.
class PayoffParseError : public std::runtime_error {
  public:
    PayoffParseError(const std::string& message, std::size_t offset)
        : std::runtime_error(message + " at byte " + std::to_string(offset)),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

  private:
    std::size_t offset_;
};

namespace detail {
class Parser;
}

/// Expression over variables x1..x3 (payoff coordinates), closed under
/// operations that keep it locally Lipschitz with polynomial growth:
/// +, -, *, min, max, pow (non-negative integer exponent), neg, abs,
/// sin, cos, and exp with its argument clamped at 40. call(e,K) and
/// put(e,K) are parsed as sugar for max(e-K,0) and max(K-e,0).
///
/// Immutable after parse; evaluation is pure and total.
class PayoffExpr {
  public:
    /// Number of distinct variables referenced (max index + 1), 0..3.
    int arity() const { return arity_; }

    const GrowthEnvelope& envelope() const { return envelope_; }

    /// Evaluates with args[i] bound to x{i+1}. args.size() >= arity().
    double eval(std::span<const double> args) const;

    double operator()(double x1) const { return eval({&x1, 1}); }
    double operator()(double x1, double x2) const {
        const double a[2] = {x1, x2};
        return eval({a, 2});
    }

    /// Canonical text form; parse(print(e)) reproduces print(e) exactly.
    std::string print() const;

  private:
    friend PayoffExpr parse_payoff(std::string_view src);
    friend class detail::Parser;

    enum class Op : unsigned char {
        literal, var, neg, abs, sin, cos, expb,
        add, sub, mul, vmin, vmax, pow
    };
    struct Node {
        Op op;
        double literal = 0.0;  // literal
        int var = 0;           // var: 0-based index
        int a = -1;            // first child
        int b = -1;            // second child
        int exponent = 0;      // pow
    };

    double eval_node(int idx, std::span<const double> args) const;
    void print_node(int idx, int parent_level, std::string& out) const;

    std::vector<Node> nodes_;
    int root_ = -1;
    int arity_ = 0;
    GrowthEnvelope envelope_;
};

/// Parses source text into an expression. Grammar, loosest to tightest
/// binding: additive (+,-), multiplicative (*), power (base^n with an
/// integer literal exponent), unary minus, primaries (literals, variables,
/// f(args), parentheses). Unary minus binds tighter than ^.
///
/// Throws PayoffParseError (with byte offset) on lexical errors, unknown
/// identifiers, arity mismatches, and growth envelopes exceeding degree 6.
PayoffExpr parse_payoff(std::string_view src);

}  // namespace gconv
