#pragma once

/// Field expressions: a small smooth-function language for user-supplied
/// profiles (H, u, axisymmetric data). Operators + - * / ^, functions
/// sin, cos, exp, log, sqrt, numeric literals, named variables. Everything
/// representable is smooth on its domain, which is what the jet substrate
/// requires. Parse errors and evaluation domain errors carry the byte
/// position and the offending subexpression.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "wavekahler/errors.hpp"
#include "wavekahler/jets.hpp"

namespace wk {

class Expr;

namespace detail {

struct Node {
    enum class Kind { Number, Variable, Unary, Binary, Call };
    Kind kind;
    double num = 0.0;
    std::string name;  // variable or function name
    char op = 0;       // + - * / ^
    std::vector<std::shared_ptr<const Node>> kids;
    int pos = 0, len = 0;  // source span
};

using NodePtr = std::shared_ptr<const Node>;

inline bool is_function_name(const std::string& s) {
    return s == "sin" || s == "cos" || s == "exp" || s == "log" || s == "sqrt";
}

struct Lexer {
    const std::string& src;
    std::size_t i = 0;

    struct Token {
        enum class Kind { Number, Ident, Op, LParen, RParen, End } kind;
        std::string text;
        double num = 0.0;
        int pos = 0;
    };

    explicit Lexer(const std::string& s) : src(s) { advance(); }

    Token cur;

    void advance() {
        while (i < src.size() && std::isspace(static_cast<unsigned char>(src[i]))) ++i;
        cur.pos = int(i);
        if (i >= src.size()) {
            cur.kind = Token::Kind::End;
            cur.text.clear();
            return;
        }
        const char c = src[i];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src.c_str() + i;
            char* end = nullptr;
            cur.num = std::strtod(begin, &end);
            if (end == begin) throw parse_error("malformed number", int(i));
            cur.kind = Token::Kind::Number;
            cur.text.assign(begin, static_cast<const char*>(end));
            i += std::size_t(end - begin);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
                ++j;
            cur.kind = Token::Kind::Ident;
            cur.text = src.substr(i, j - i);
            i = j;
            return;
        }
        if (c == '(') { cur.kind = Token::Kind::LParen; cur.text = "("; ++i; return; }
        if (c == ')') { cur.kind = Token::Kind::RParen; cur.text = ")"; ++i; return; }
        if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
            cur.kind = Token::Kind::Op;
            cur.text = std::string(1, c);
            ++i;
            return;
        }
        throw parse_error(std::string("unexpected character '") + c + "'", int(i));
    }
};

}  // namespace detail

class Expr {
  public:
    Expr() = default;

    static Expr parse(const std::string& src);

    bool valid() const { return node_ != nullptr; }

    std::set<std::string> variables() const {
        std::set<std::string> out;
        collect_vars(node_, out);
        return out;
    }

    std::string str() const { return print(node_, 0); }

    /// Fold subtrees without variables into literals. Subtrees whose folding
    /// would raise a domain error are left intact so evaluation reports them
    /// with position information.
    Expr folded() const {
        Expr e;
        e.src_ = src_;
        e.node_ = fold(node_);
        return e;
    }

    /// Compile against an ordered chart-coordinate list; every variable must
    /// name a chart coordinate.
    ScalarField bind(const std::vector<std::string>& coords) const {
        auto self = *this;
        compiled_check(node_, coords);
        return [self, coords](const JetPoint& p) { return self.eval_node(self.node_, p, coords); };
    }

    double eval_at(const std::vector<std::string>& coords, const std::vector<double>& x) const {
        if (coords.empty()) return lift(bind({"_"}), {0.0}, 0).value();
        return lift(bind(coords), x, 0).value();
    }

  private:
    detail::NodePtr node_;
    std::shared_ptr<const std::string> src_;

    static void collect_vars(const detail::NodePtr& n, std::set<std::string>& out) {
        if (!n) return;
        if (n->kind == detail::Node::Kind::Variable) out.insert(n->name);
        for (auto& k : n->kids) collect_vars(k, out);
    }

    void compiled_check(const detail::NodePtr& n, const std::vector<std::string>& coords) const {
        if (!n) throw construction_error("empty expression");
        if (n->kind == detail::Node::Kind::Variable) {
            for (auto& c : coords)
                if (c == n->name) return;
            throw construction_error("variable '" + n->name +
                                     "' is not a coordinate of the selected chart");
        }
        for (auto& k : n->kids) compiled_check(k, coords);
    }

    std::string span_text(const detail::NodePtr& n) const {
        if (!src_ || n->len <= 0) return "<expr>";
        return src_->substr(std::size_t(n->pos), std::size_t(n->len));
    }

    Jet eval_node(const detail::NodePtr& n, const JetPoint& p,
                  const std::vector<std::string>& coords) const {
        using K = detail::Node::Kind;
        switch (n->kind) {
            case K::Number:
                return Jet::constant(p.at(0).dim(), p.at(0).order(), n->num);
            case K::Variable: {
                for (std::size_t i = 0; i < coords.size(); ++i)
                    if (coords[i] == n->name) return p.at(i);
                throw construction_error("unbound variable '" + n->name + "'");
            }
            case K::Unary:
                return -eval_node(n->kids[0], p, coords);
            case K::Binary: {
                Jet a = eval_node(n->kids[0], p, coords);
                Jet b = eval_node(n->kids[1], p, coords);
                try {
                    switch (n->op) {
                        case '+': return a + b;
                        case '-': return a - b;
                        case '*': return a * b;
                        case '/': return a / b;
                        case '^': return pow_dispatch(a, n->kids[1], b);
                        default: break;
                    }
                } catch (const domain_error& e) {
                    throw domain_error(std::string(e.what()) + " in '" + span_text(n) +
                                       "' at position " + std::to_string(n->pos));
                }
                throw parse_error("unknown operator", n->pos);
            }
            case K::Call: {
                Jet a = eval_node(n->kids[0], p, coords);
                try {
                    if (n->name == "sin") return sin(a);
                    if (n->name == "cos") return cos(a);
                    if (n->name == "exp") return exp(a);
                    if (n->name == "log") return log(a);
                    if (n->name == "sqrt") return sqrt(a);
                } catch (const domain_error& e) {
                    throw domain_error(std::string(e.what()) + " in '" + span_text(n) +
                                       "' at position " + std::to_string(n->pos));
                }
                throw parse_error("unknown function '" + n->name + "'", n->pos);
            }
        }
        throw parse_error("corrupt expression tree", 0);
    }

    // Exponents that are constant subtrees dispatch to the scalar pow so
    // integer powers stay exact.
    static Jet pow_dispatch(const Jet& base, const detail::NodePtr& exp_node, const Jet& exp_jet) {
        bool constant = true;
        std::set<std::string> vars;
        collect_vars(exp_node, vars);
        constant = vars.empty();
        if (constant) return pow(base, exp_jet.value());
        return pow(base, exp_jet);
    }

    static detail::NodePtr fold(const detail::NodePtr& n) {
        using K = detail::Node::Kind;
        if (!n) return n;
        if (n->kind == K::Number || n->kind == K::Variable) return n;
        auto copy = std::make_shared<detail::Node>(*n);
        for (auto& k : copy->kids) k = fold(k);
        bool all_const = true;
        for (auto& k : copy->kids) all_const &= (k->kind == K::Number);
        if (!all_const) return copy;
        double v = 0.0;
        bool ok = true;
        if (copy->kind == K::Unary) {
            v = -copy->kids[0]->num;
        } else if (copy->kind == K::Binary) {
            const double a = copy->kids[0]->num, b = copy->kids[1]->num;
            switch (copy->op) {
                case '+': v = a + b; break;
                case '-': v = a - b; break;
                case '*': v = a * b; break;
                case '/': ok = (b != 0.0); v = ok ? a / b : 0.0; break;
                case '^': v = std::pow(a, b); ok = std::isfinite(v); break;
                default: ok = false;
            }
        } else {  // Call
            const double a = copy->kids[0]->num;
            if (copy->name == "sin") v = std::sin(a);
            else if (copy->name == "cos") v = std::cos(a);
            else if (copy->name == "exp") v = std::exp(a);
            else if (copy->name == "log") { ok = a > 0; v = ok ? std::log(a) : 0.0; }
            else if (copy->name == "sqrt") { ok = a > 0; v = ok ? std::sqrt(a) : 0.0; }
            else ok = false;
        }
        if (!ok) return copy;
        auto num = std::make_shared<detail::Node>();
        num->kind = K::Number;
        num->num = v;
        num->pos = n->pos;
        num->len = n->len;
        return num;
    }

    static std::string format_number(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        // prefer the shortest representation that round-trips
        for (int prec = 1; prec <= 16; ++prec) {
            char tmp[40];
            std::snprintf(tmp, sizeof tmp, "%.*g", prec, v);
            if (std::strtod(tmp, nullptr) == v) return tmp;
        }
        return buf;
    }

    static int precedence(const detail::NodePtr& n) {
        using K = detail::Node::Kind;
        switch (n->kind) {
            case K::Binary: return n->op == '^' ? 4 : (n->op == '*' || n->op == '/') ? 2 : 1;
            case K::Unary: return 3;
            default: return 5;
        }
    }

    static std::string print(const detail::NodePtr& n, int parent_prec) {
        using K = detail::Node::Kind;
        if (!n) return "";
        std::string out;
        switch (n->kind) {
            case K::Number: out = format_number(n->num); break;
            case K::Variable: out = n->name; break;
            case K::Unary: out = "-" + print(n->kids[0], precedence(n)); break;
            case K::Binary: {
                const int prec = precedence(n);
                // left-associative except '^'
                out = print(n->kids[0], n->op == '^' ? prec + 1 : prec) + n->op +
                      print(n->kids[1], n->op == '^' ? prec : prec + 1);
                break;
            }
            case K::Call: out = n->name + "(" + print(n->kids[0], 0) + ")"; break;
        }
        if (precedence(n) < parent_prec) return "(" + out + ")";
        return out;
    }

    friend struct ExprParser;
};

struct ExprParser {
    detail::Lexer lex;
    explicit ExprParser(const std::string& s) : lex(s) {}

    using NodePtr = detail::NodePtr;
    using Tok = detail::Lexer::Token::Kind;

    NodePtr make(detail::Node n, int pos, int end) {
        n.pos = pos;
        n.len = end - pos;
        return std::make_shared<detail::Node>(std::move(n));
    }

    NodePtr parse_expr() {
        int pos = lex.cur.pos;
        NodePtr left = parse_term();
        while (lex.cur.kind == Tok::Op && (lex.cur.text == "+" || lex.cur.text == "-")) {
            const char op = lex.cur.text[0];
            lex.advance();
            NodePtr right = parse_term();
            detail::Node n;
            n.kind = detail::Node::Kind::Binary;
            n.op = op;
            n.kids = {left, right};
            left = make(std::move(n), pos, int(lex.cur.pos));
        }
        return left;
    }

    NodePtr parse_term() {
        int pos = lex.cur.pos;
        NodePtr left = parse_unary();
        while (lex.cur.kind == Tok::Op && (lex.cur.text == "*" || lex.cur.text == "/")) {
            const char op = lex.cur.text[0];
            lex.advance();
            NodePtr right = parse_unary();
            detail::Node n;
            n.kind = detail::Node::Kind::Binary;
            n.op = op;
            n.kids = {left, right};
            left = make(std::move(n), pos, int(lex.cur.pos));
        }
        return left;
    }

    // unary minus binds looser than '^': -x^2 parses as -(x^2)
    NodePtr parse_unary() {
        if (lex.cur.kind == Tok::Op && lex.cur.text == "-") {
            int pos = lex.cur.pos;
            lex.advance();
            NodePtr inner = parse_unary();
            detail::Node n;
            n.kind = detail::Node::Kind::Unary;
            n.kids = {inner};
            return make(std::move(n), pos, int(lex.cur.pos));
        }
        if (lex.cur.kind == Tok::Op && lex.cur.text == "+") {
            lex.advance();
            return parse_unary();
        }
        return parse_power();
    }

    NodePtr parse_power() {
        int pos = lex.cur.pos;
        NodePtr base = parse_primary();
        if (lex.cur.kind == Tok::Op && lex.cur.text == "^") {
            lex.advance();
            NodePtr exp = parse_unary();  // right associative, allows 2^-3
            detail::Node n;
            n.kind = detail::Node::Kind::Binary;
            n.op = '^';
            n.kids = {base, exp};
            return make(std::move(n), pos, int(lex.cur.pos));
        }
        return base;
    }

    NodePtr parse_primary() {
        int pos = lex.cur.pos;
        if (lex.cur.kind == Tok::Number) {
            detail::Node n;
            n.kind = detail::Node::Kind::Number;
            n.num = lex.cur.num;
            lex.advance();
            return make(std::move(n), pos, int(lex.cur.pos));
        }
        if (lex.cur.kind == Tok::Ident) {
            const std::string name = lex.cur.text;
            lex.advance();
            if (lex.cur.kind == Tok::LParen) {
                if (!detail::is_function_name(name))
                    throw parse_error("unknown function '" + name + "'", pos);
                lex.advance();
                NodePtr arg = parse_expr();
                if (lex.cur.kind != Tok::RParen)
                    throw parse_error("expected ')'", lex.cur.pos);
                lex.advance();
                detail::Node n;
                n.kind = detail::Node::Kind::Call;
                n.name = name;
                n.kids = {arg};
                return make(std::move(n), pos, int(lex.cur.pos));
            }
            detail::Node n;
            n.kind = detail::Node::Kind::Variable;
            n.name = name;
            return make(std::move(n), pos, int(lex.cur.pos));
        }
        if (lex.cur.kind == Tok::LParen) {
            lex.advance();
            NodePtr inner = parse_expr();
            if (lex.cur.kind != Tok::RParen) throw parse_error("expected ')'", lex.cur.pos);
            lex.advance();
            return inner;
        }
        throw parse_error("expected a number, variable, function or '('", lex.cur.pos);
    }
};

inline Expr Expr::parse(const std::string& src) {
    ExprParser p(src);
    Expr e;
    e.src_ = std::make_shared<const std::string>(src);
    e.node_ = p.parse_expr();
    if (p.lex.cur.kind != detail::Lexer::Token::Kind::End)
        throw parse_error("unexpected trailing input '" + p.lex.cur.text + "'", p.lex.cur.pos);
    return e;
}

/// Reject any expression mentioning the fiber angle; used for H slots, where
/// phi-dependence is forbidden by construction. Runs on the raw source so the
/// message fires even when the rest of the expression would not parse.
inline void assert_no_phi(const std::string& src) {
    detail::Lexer lex(src);
    using Tok = detail::Lexer::Token::Kind;
    while (lex.cur.kind != Tok::End) {
        if (lex.cur.kind == Tok::Ident && lex.cur.text == "phi")
            throw construction_error("H must not depend on phi (found at position " +
                                     std::to_string(lex.cur.pos) + ")");
        lex.advance();
    }
}

/// Parse a field expression; when `forbid_phi` is set the phi-dependence
/// check runs before parsing.
inline Expr parse_field(const std::string& src, bool forbid_phi = false) {
    if (forbid_phi) assert_no_phi(src);
    return Expr::parse(src);
}

}  // namespace wk
