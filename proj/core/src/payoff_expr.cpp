#include "gconv/payoff_expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <utility>

namespace gconv {

namespace {

// |e(x)| <= A * (1 + |x|^d), tracked alongside the envelope so products can
// bound the Lipschitz factor of their partners.
struct ValueGrowth {
    double A = 0.0;
    int d = 0;
};

struct Analysis {
    GrowthEnvelope env;
    ValueGrowth vg;
};

constexpr double kExpClamp = 40.0;

Analysis combine_add(const Analysis& l, const Analysis& r) {
    return {{l.env.C + r.env.C, std::max(l.env.m, r.env.m)},
            {l.vg.A + r.vg.A, std::max(l.vg.d, r.vg.d)}};
}

// (1+|x|^a)(1+|x|^b) <= 3(1+|x|^{a+b}) justifies the factor 3.
Analysis combine_mul(const Analysis& l, const Analysis& r) {
    return {{3.0 * (l.vg.A * r.env.C + r.vg.A * l.env.C),
             std::max(l.vg.d + r.env.m, r.vg.d + l.env.m)},
            {3.0 * l.vg.A * r.vg.A, l.vg.d + r.vg.d}};
}

}  // namespace

double PayoffExpr::eval_node(int idx, std::span<const double> args) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    switch (n.op) {
        case Op::literal: return n.literal;
        case Op::var: return args[static_cast<std::size_t>(n.var)];
        case Op::neg: return -eval_node(n.a, args);
        case Op::abs: return std::fabs(eval_node(n.a, args));
        case Op::sin: return std::sin(eval_node(n.a, args));
        case Op::cos: return std::cos(eval_node(n.a, args));
        case Op::expb: return std::exp(std::min(eval_node(n.a, args), kExpClamp));
        case Op::add: return eval_node(n.a, args) + eval_node(n.b, args);
        case Op::sub: return eval_node(n.a, args) - eval_node(n.b, args);
        case Op::mul: return eval_node(n.a, args) * eval_node(n.b, args);
        case Op::vmin: return std::min(eval_node(n.a, args), eval_node(n.b, args));
        case Op::vmax: return std::max(eval_node(n.a, args), eval_node(n.b, args));
        case Op::pow: {
            double base = eval_node(n.a, args);
            double out = 1.0;
            for (int i = 0; i < n.exponent; ++i) out *= base;
            return out;
        }
    }
    return 0.0;  // unreachable
}

double PayoffExpr::eval(std::span<const double> args) const {
    if (static_cast<int>(args.size()) < arity_)
        throw std::invalid_argument("payoff expects " + std::to_string(arity_) +
                                    " arguments, got " + std::to_string(args.size()));
    return eval_node(root_, args);
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

void PayoffExpr::print_node(int idx, int min_level, std::string& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    int level;
    switch (n.op) {
        case Op::add:
        case Op::sub: level = 0; break;
        case Op::mul: level = 1; break;
        case Op::pow: level = 2; break;
        case Op::neg: level = 3; break;
        default: level = 4; break;
    }
    const bool parens = level < min_level;
    if (parens) out += '(';
    switch (n.op) {
        case Op::literal: out += format_double(n.literal); break;
        case Op::var: out += 'x'; out += static_cast<char>('1' + n.var); break;
        case Op::neg: out += '-'; print_node(n.a, 3, out); break;
        case Op::abs: out += "abs("; print_node(n.a, 0, out); out += ')'; break;
        case Op::sin: out += "sin("; print_node(n.a, 0, out); out += ')'; break;
        case Op::cos: out += "cos("; print_node(n.a, 0, out); out += ')'; break;
        case Op::expb: out += "exp("; print_node(n.a, 0, out); out += ')'; break;
        case Op::add:
            print_node(n.a, 0, out); out += '+'; print_node(n.b, 1, out); break;
        case Op::sub:
            print_node(n.a, 0, out); out += '-'; print_node(n.b, 1, out); break;
        case Op::mul:
            print_node(n.a, 1, out); out += '*'; print_node(n.b, 2, out); break;
        case Op::vmin:
            out += "min("; print_node(n.a, 0, out); out += ',';
            print_node(n.b, 0, out); out += ')'; break;
        case Op::vmax:
            out += "max("; print_node(n.a, 0, out); out += ',';
            print_node(n.b, 0, out); out += ')'; break;
        case Op::pow:
            print_node(n.a, 3, out); out += '^';
            out += std::to_string(n.exponent); break;
    }
    if (parens) out += ')';
}

std::string PayoffExpr::print() const {
    std::string out;
    print_node(root_, 0, out);
    return out;
}

namespace detail {

class Parser {
  public:
    explicit Parser(std::string_view src) : src_(src) {}

    PayoffExpr run() {
        PayoffExpr e;
        int root = parse_add();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        e.nodes_ = std::move(nodes_);
        e.root_ = root;
        e.arity_ = arity_;
        e.envelope_ = info_[static_cast<std::size_t>(root)].env;
        return e;
    }

  private:
    using Node = PayoffExpr::Node;
    using Op = PayoffExpr::Op;

    [[noreturn]] void fail(const std::string& msg) const { fail_at(msg, pos_); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
        throw PayoffParseError(msg, at);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    int push(Node n, Analysis a, std::size_t at) {
        if (a.env.m > 6)
            fail_at("growth envelope exceeds degree 6", at);
        nodes_.push_back(n);
        info_.push_back(a);
        return static_cast<int>(nodes_.size()) - 1;
    }

    int parse_add() {
        std::size_t at = pos_;
        int lhs = parse_mul();
        for (;;) {
            skip_ws();
            at = pos_;
            if (eat('+')) {
                int rhs = parse_mul();
                lhs = push({Op::add, 0, 0, lhs, rhs, 0}, combine_add(info(lhs), info(rhs)), at);
            } else if (eat('-')) {
                int rhs = parse_mul();
                lhs = push({Op::sub, 0, 0, lhs, rhs, 0}, combine_add(info(lhs), info(rhs)), at);
            } else {
                return lhs;
            }
        }
    }

    int parse_mul() {
        int lhs = parse_pow();
        for (;;) {
            skip_ws();
            std::size_t at = pos_;
            if (eat('*')) {
                int rhs = parse_pow();
                lhs = push({Op::mul, 0, 0, lhs, rhs, 0}, combine_mul(info(lhs), info(rhs)), at);
            } else {
                return lhs;
            }
        }
    }

    int parse_pow() {
        int base = parse_unary();
        skip_ws();
        std::size_t at = pos_;
        if (!eat('^')) return base;
        skip_ws();
        std::size_t exp_at = pos_;
        int exponent = parse_integer_literal("power exponent must be a non-negative integer literal");
        return make_pow(base, exponent, at, exp_at);
    }

    int parse_unary() {
        skip_ws();
        std::size_t at = pos_;
        if (eat('-')) {
            int child = parse_unary();
            return push({Op::neg, 0, 0, child, -1, 0}, info(child), at);
        }
        return parse_primary();
    }

    int parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            int inner = parse_add();
            if (!eat(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        fail(std::string("unexpected character '") + c + "'");
    }

    int parse_number() {
        std::size_t at = pos_;
        std::size_t end = pos_;
        auto is_digit = [&](std::size_t i) {
            return i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]));
        };
        while (is_digit(end) || (end < src_.size() && src_[end] == '.')) ++end;
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t e = end + 1;
            if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
            if (is_digit(e)) {
                while (is_digit(e)) ++e;
                end = e;
            }
        }
        double value = 0.0;
        auto res = std::from_chars(src_.data() + at, src_.data() + end, value);
        if (res.ec != std::errc() || res.ptr != src_.data() + end)
            fail_at("malformed number", at);
        pos_ = end;
        return push({Op::literal, value, 0, -1, -1, 0},
                    {{0.0, 0}, {std::fabs(value), 0}}, at);
    }

    int parse_integer_literal(const char* msg) {
        std::size_t at = pos_;
        std::size_t end = pos_;
        while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
        int value = 0;
        auto res = std::from_chars(src_.data() + at, src_.data() + end, value);
        if (at == end || res.ec != std::errc())
            fail_at(msg, at);
        pos_ = end;
        return value;
    }

    int parse_ident() {
        std::size_t at = pos_;
        std::size_t end = pos_;
        while (end < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
            ++end;
        std::string_view name = src_.substr(at, end - at);
        pos_ = end;

        if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '3') {
            int var = name[1] - '1';
            arity_ = std::max(arity_, var + 1);
            return push({Op::var, 0, var, -1, -1, 0}, {{1.0, 1}, {1.0, 1}}, at);
        }

        if (name == "abs" || name == "sin" || name == "cos" || name == "exp") {
            int child = parse_call_args(1, at)[0];
            Analysis ca = info(child);
            Op op;
            Analysis out;
            if (name == "abs") { op = Op::abs; out = ca; }
            else if (name == "sin") { op = Op::sin; out = {{ca.env.C, ca.env.m}, {1.0, 0}}; }
            else if (name == "cos") { op = Op::cos; out = {{ca.env.C, ca.env.m}, {1.0, 0}}; }
            else {
                double lip = std::exp(kExpClamp);
                op = Op::expb;
                out = {{lip * ca.env.C, ca.env.m}, {lip, 0}};
            }
            return push({op, 0, 0, child, -1, 0}, out, at);
        }
        if (name == "min" || name == "max") {
            auto args = parse_call_args(2, at);
            Op op = name == "min" ? Op::vmin : Op::vmax;
            return push({op, 0, 0, args[0], args[1], 0},
                        combine_add(info(args[0]), info(args[1])), at);
        }
        if (name == "call" || name == "put") {
            // call(e,K) = max(e-K, 0); put(e,K) = max(K-e, 0)
            auto args = parse_call_args(2, at);
            int lhs = name == "call" ? args[0] : args[1];
            int rhs = name == "call" ? args[1] : args[0];
            int diff = push({Op::sub, 0, 0, lhs, rhs, 0},
                            combine_add(info(lhs), info(rhs)), at);
            int zero = push({Op::literal, 0.0, 0, -1, -1, 0}, {{0.0, 0}, {0.0, 0}}, at);
            return push({Op::vmax, 0, 0, diff, zero, 0}, info(diff), at);
        }
        if (name == "pow") {
            if (!eat('(')) fail("expected '(' after pow");
            int base = parse_add();
            if (!eat(',')) fail("pow expects two arguments");
            skip_ws();
            std::size_t exp_at = pos_;
            int exponent = parse_integer_literal("pow exponent must be a non-negative integer literal");
            if (!eat(')')) fail("expected ')'");
            return make_pow(base, exponent, at, exp_at);
        }
        fail_at("unknown identifier '" + std::string(name) + "'", at);
    }

    std::vector<int> parse_call_args(int want, std::size_t call_at) {
        if (!eat('(')) fail("expected '(' after function name");
        std::vector<int> args;
        args.push_back(parse_add());
        while (eat(',')) args.push_back(parse_add());
        if (!eat(')')) fail("expected ')'");
        if (static_cast<int>(args.size()) != want)
            fail_at("expected " + std::to_string(want) + " argument(s), got " +
                        std::to_string(args.size()),
                    call_at);
        return args;
    }

    int make_pow(int base, int exponent, std::size_t at, std::size_t exp_at) {
        if (exponent < 0) fail_at("pow exponent must be non-negative", exp_at);
        Analysis a;
        if (exponent == 0) {
            a = {{0.0, 0}, {1.0, 0}};
        } else {
            a = info(base);
            for (int i = 1; i < exponent; ++i) a = combine_mul(a, info(base));
        }
        return push({Op::pow, 0, 0, base, -1, exponent}, a, at);
    }

    Analysis info(int idx) const { return info_[static_cast<std::size_t>(idx)]; }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::vector<Node> nodes_;
    std::vector<Analysis> info_;
    int arity_ = 0;
};

}  // namespace detail

PayoffExpr parse_payoff(std::string_view src) { return detail::Parser(src).run(); }

}  // namespace gconv
