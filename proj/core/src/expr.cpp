#include "mfg/expr.hpp"

#include <cctype>
#include <cmath>
#include <vector>

#include "mfg/errors.hpp"

namespace mfg {

struct Expression::Node {
    enum class Kind { constant, time_var, add, sub, mul, div, neg, ipow, mode };
    Kind kind;
    double value = 0.0;  // constant
    int mode_n = 0;      // mode frequency
    int axis = 0;        // 0: x1, 1: x2
    bool is_sin = false;
    int exponent = 1;  // ipow
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

struct Parser {
    const std::string& text;
    size_t pos = 0;
    int dim;

    explicit Parser(const std::string& t, int d) : text(t), dim(d) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("expression error at position " + std::to_string(pos) + ": " + msg +
                          " in \"" + text + "\"");
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    NodePtr parse_expr() {
        NodePtr acc = parse_term();
        while (true) {
            if (eat('+')) {
                Node n{Node::Kind::add};
                n.lhs = acc;
                n.rhs = parse_term();
                acc = make(std::move(n));
            } else if (eat('-')) {
                Node n{Node::Kind::sub};
                n.lhs = acc;
                n.rhs = parse_term();
                acc = make(std::move(n));
            } else {
                return acc;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr acc = parse_unary();
        while (true) {
            if (eat('*')) {
                Node n{Node::Kind::mul};
                n.lhs = acc;
                n.rhs = parse_unary();
                acc = make(std::move(n));
            } else if (eat('/')) {
                Node n{Node::Kind::div};
                n.lhs = acc;
                n.rhs = parse_unary();
                acc = make(std::move(n));
            } else {
                return acc;
            }
        }
    }

    NodePtr parse_unary() {
        if (eat('-')) {
            Node n{Node::Kind::neg};
            n.lhs = parse_unary();
            return make(std::move(n));
        }
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (eat('^')) {
            skip_ws();
            const int expo = parse_int();
            if (expo < 0) fail("negative exponents are not supported");
            Node n{Node::Kind::ipow};
            n.lhs = base;
            n.exponent = expo;
            return make(std::move(n));
        }
        return base;
    }

    int parse_int() {
        skip_ws();
        size_t start = pos;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) fail("expected an integer");
        return std::stoi(text.substr(start, pos - start));
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of expression");
        const char c = text[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t consumed = 0;
            double v = 0.0;
            try {
                v = std::stod(text.substr(pos), &consumed);
            } catch (const std::exception&) {
                fail("malformed number");
            }
            pos += consumed;
            Node n{Node::Kind::constant};
            n.value = v;
            return make(std::move(n));
        }
        if (c == '(') {
            ++pos;
            NodePtr inner_expr = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return inner_expr;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t start = pos;
            while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                                         text[pos] == '_'))
                ++pos;
            const std::string word = text.substr(start, pos - start);
            if (word == "t") {
                Node n{Node::Kind::time_var};
                return make(std::move(n));
            }
            if (word == "pi") {
                Node n{Node::Kind::constant};
                n.value = M_PI;
                return make(std::move(n));
            }
            const bool d1 = dim == 1;
            int axis = -1;
            bool is_sin = false;
            if (d1 && word == "sinx") axis = 0, is_sin = true;
            else if (d1 && word == "cosx") axis = 0, is_sin = false;
            else if (!d1 && word == "sinx1") axis = 0, is_sin = true;
            else if (!d1 && word == "cosx1") axis = 0, is_sin = false;
            else if (!d1 && word == "sinx2") axis = 1, is_sin = true;
            else if (!d1 && word == "cosx2") axis = 1, is_sin = false;
            if (axis < 0)
                fail("unknown symbol '" + word + "' (allowed: t, pi, " +
                     (d1 ? std::string("sinx(n), cosx(n)")
                         : std::string("sinx1(n), cosx1(n), sinx2(n), cosx2(n)")) +
                     ")");
            if (!eat('(')) fail("mode functions need an integer argument, e.g. " + word + "(1)");
            const int n_arg = parse_int();
            if (!eat(')')) fail("expected ')'");
            Node n{Node::Kind::mode};
            n.axis = axis;
            n.is_sin = is_sin;
            n.mode_n = n_arg;
            return make(std::move(n));
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

double eval_node(const Node& n, double t, double x1, double x2) {
    switch (n.kind) {
        case Node::Kind::constant:
            return n.value;
        case Node::Kind::time_var:
            return t;
        case Node::Kind::add:
            return eval_node(*n.lhs, t, x1, x2) + eval_node(*n.rhs, t, x1, x2);
        case Node::Kind::sub:
            return eval_node(*n.lhs, t, x1, x2) - eval_node(*n.rhs, t, x1, x2);
        case Node::Kind::mul:
            return eval_node(*n.lhs, t, x1, x2) * eval_node(*n.rhs, t, x1, x2);
        case Node::Kind::div:
            return eval_node(*n.lhs, t, x1, x2) / eval_node(*n.rhs, t, x1, x2);
        case Node::Kind::neg:
            return -eval_node(*n.lhs, t, x1, x2);
        case Node::Kind::ipow:
            return std::pow(eval_node(*n.lhs, t, x1, x2), n.exponent);
        case Node::Kind::mode: {
            const double arg = 2.0 * M_PI * n.mode_n * (n.axis == 0 ? x1 : x2);
            return n.is_sin ? std::sin(arg) : std::cos(arg);
        }
    }
    return 0.0;
}

bool uses_time(const Node& n) {
    if (n.kind == Node::Kind::time_var) return true;
    if (n.lhs && uses_time(*n.lhs)) return true;
    if (n.rhs && uses_time(*n.rhs)) return true;
    return false;
}

}  // namespace

Expression Expression::parse(const std::string& text, int dim) {
    Parser p(text, dim);
    Expression e;
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing characters");
    return e;
}

double Expression::eval(double t, double x1, double x2) const {
    return eval_node(*root_, t, x1, x2);
}

bool Expression::time_dependent() const { return uses_time(*root_); }

Eigen::VectorXd Expression::profile(const TorusGrid& grid) const {
    Eigen::VectorXd out(grid.site_count());
    const int nx = grid.points_per_dim();
    if (grid.dim() == 1) {
        for (int j = 0; j < nx; ++j) out[j] = eval(0.0, grid.coord(j));
    } else {
        for (int j1 = 0; j1 < nx; ++j1)
            for (int j2 = 0; j2 < nx; ++j2)
                out[grid.site(j1, j2)] = eval(0.0, grid.coord(j1), grid.coord(j2));
    }
    if (!out.allFinite()) throw NonFiniteError("expression produced non-finite values");
    return out;
}

SpaceTimeField Expression::sample(const GridPtr& grid) const {
    return SpaceTimeField::sample(grid,
                                  [this](double t, double x1, double x2) { return eval(t, x1, x2); });
}

}  // namespace mfg
