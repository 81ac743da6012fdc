#include "quis/expression.hpp"

#include "quis/error.hpp"
#include "quis/factor_store.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

namespace quis {

namespace {

std::shared_ptr<ExprNode> make(NodeKind kind, ExprNodePtr lhs = nullptr, ExprNodePtr rhs = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

bool nodes_equal(const ExprNode* a, const ExprNode* b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
    case NodeKind::Constant: return a->constant == b->constant;
    case NodeKind::FactorRef: return a->factor == b->factor;
    case NodeKind::Negate: return nodes_equal(a->lhs.get(), b->lhs.get());
    default: return nodes_equal(a->lhs.get(), b->lhs.get()) && nodes_equal(a->rhs.get(), b->rhs.get());
    }
}

// ---------------------------------------------------------------- tokenizer

enum class Tok : std::uint8_t { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    Tok kind = Tok::End;
    std::size_t pos = 0;
    std::string_view text;
    double number = 0.0;
};

std::string_view describe(const Token& t) {
    switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::Number: return "number";
    case Tok::Ident: return "identifier";
    default: return t.text;
    }
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) { advance(); }

    MeansEndExpr parse() {
        if (cur_.kind == Tok::End) throw Error(ErrorCode::EmptyExpression, "expression is empty");
        auto root = expr();
        if (cur_.kind != Tok::End) fail("unexpected " + std::string(describe(cur_)));
        return MeansEndExpr(std::move(root));
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::SyntaxError, what + " at column " + std::to_string(cur_.pos));
    }

    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        cur_ = Token{Tok::End, pos_, {}, 0.0};
        if (pos_ >= src_.size()) return;

        const char c = src_[pos_];
        const std::size_t start = pos_;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            scan_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            cur_ = Token{Tok::Ident, start, src_.substr(start, pos_ - start), 0.0};
            return;
        }
        Tok kind = Tok::End;
        switch (c) {
        case '+': kind = Tok::Plus; break;
        case '-': kind = Tok::Minus; break;
        case '*': kind = Tok::Star; break;
        case '/': kind = Tok::Slash; break;
        case '^': kind = Tok::Caret; break;
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        default:
            throw Error(ErrorCode::SyntaxError,
                        "unexpected character '" + std::string(1, c) + "' at column " + std::to_string(start));
        }
        ++pos_;
        cur_ = Token{kind, start, src_.substr(start, 1), 0.0};
    }

    // digits ('.' digits)? ([eE] [+-]? digits)?
    void scan_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            const std::size_t from = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            return pos_ > from;
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            if (!digits())
                throw Error(ErrorCode::SyntaxError, "expected digits after '.' at column " + std::to_string(pos_));
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (!digits())
                throw Error(ErrorCode::SyntaxError,
                            "expected exponent digits at column " + std::to_string(pos_));
        }
        const auto text = src_.substr(start, pos_ - start);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
            throw Error(ErrorCode::SyntaxError, "invalid number '" + std::string(text) + "' at column " +
                                                    std::to_string(start));
        cur_ = Token{Tok::Number, start, text, v};
    }

    ExprNodePtr expr() {
        auto lhs = term();
        while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
            const auto op = cur_.kind == Tok::Plus ? NodeKind::Add : NodeKind::Sub;
            advance();
            lhs = make(op, lhs, term());
        }
        return lhs;
    }

    ExprNodePtr term() {
        auto lhs = unary();
        while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
            const auto op = cur_.kind == Tok::Star ? NodeKind::Mul : NodeKind::Div;
            advance();
            lhs = make(op, lhs, unary());
        }
        return lhs;
    }

    ExprNodePtr unary() {
        if (cur_.kind == Tok::Minus) {
            advance();
            return make(NodeKind::Negate, unary());
        }
        return power();
    }

    ExprNodePtr power() {
        auto base = atom();
        if (cur_.kind == Tok::Caret) {
            advance();
            return make(NodeKind::Pow, base, unary());
        }
        return base;
    }

    ExprNodePtr atom() {
        switch (cur_.kind) {
        case Tok::Number: {
            auto n = make(NodeKind::Constant);
            n->constant = cur_.number;
            advance();
            return n;
        }
        case Tok::Ident: {
            auto n = make(NodeKind::FactorRef);
            n->factor = std::string(cur_.text);
            advance();
            return n;
        }
        case Tok::LParen: {
            advance();
            auto inner = expr();
            if (cur_.kind != Tok::RParen) fail("expected ')' but found " + std::string(describe(cur_)));
            advance();
            return inner;
        }
        default:
            fail("expected a number, factor name or '(' but found " + std::string(describe(cur_)));
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token cur_;
};

// ---------------------------------------------------------------- printing

int precedence(NodeKind k) {
    switch (k) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Negate: return 3;
    case NodeKind::Pow: return 4;
    default: return 5;
    }
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string print(const ExprNode& n);

std::string wrap(const ExprNode& n, bool parens) {
    return parens ? "(" + print(n) + ")" : print(n);
}

std::string op_symbol(NodeKind k) {
    switch (k) {
    case NodeKind::Add: return " + ";
    case NodeKind::Sub: return " - ";
    case NodeKind::Mul: return " * ";
    case NodeKind::Div: return " / ";
    case NodeKind::Pow: return "^";
    default: return "?";
    }
}

std::string print(const ExprNode& n) {
    switch (n.kind) {
    case NodeKind::Constant:
        // Negative literals do not exist in the grammar.
        return n.constant < 0 || std::signbit(n.constant) ? "(-" + format_number(-n.constant) + ")"
                                                         : format_number(n.constant);
    case NodeKind::FactorRef: return n.factor;
    case NodeKind::Negate: return "-" + wrap(*n.lhs, precedence(n.lhs->kind) < precedence(NodeKind::Negate));
    case NodeKind::Pow: {
        // The base must be an atom: -x^2 and x^y^z would re-associate.
        const bool lp = precedence(n.lhs->kind) <= precedence(NodeKind::Pow);
        const bool rp = precedence(n.rhs->kind) < precedence(NodeKind::Negate);
        return wrap(*n.lhs, lp) + "^" + wrap(*n.rhs, rp);
    }
    default: {
        const int p = precedence(n.kind);
        const bool lp = precedence(n.lhs->kind) < p;
        const bool rp = precedence(n.rhs->kind) <= p;
        return wrap(*n.lhs, lp) + op_symbol(n.kind) + wrap(*n.rhs, rp);
    }
    }
}

std::string kind_name(NodeKind k) {
    switch (k) {
    case NodeKind::Constant: return "Const";
    case NodeKind::FactorRef: return "Ref";
    case NodeKind::Negate: return "Neg";
    case NodeKind::Add: return "Add";
    case NodeKind::Sub: return "Sub";
    case NodeKind::Mul: return "Mul";
    case NodeKind::Div: return "Div";
    case NodeKind::Pow: return "Pow";
    }
    return "?";
}

std::string tree(const ExprNode& n) {
    switch (n.kind) {
    case NodeKind::Constant: return "Const " + format_number(n.constant);
    case NodeKind::FactorRef: return "Ref " + n.factor;
    case NodeKind::Negate: return "Neg(" + tree(*n.lhs) + ")";
    default: return kind_name(n.kind) + "(" + tree(*n.lhs) + ", " + tree(*n.rhs) + ")";
    }
}

void collect(const ExprNode& n, std::set<std::string>& out) {
    if (n.kind == NodeKind::FactorRef) out.insert(n.factor);
    if (n.lhs) collect(*n.lhs, out);
    if (n.rhs) collect(*n.rhs, out);
}

// ---------------------------------------------------------------- evaluation

double checked(double v, const char* what) {
    if (!std::isfinite(v)) throw Error(ErrorCode::DomainError, std::string(what) + " produced a non-finite value");
    return v;
}

double eval(const ExprNode& n, const FactorResolver& resolve) {
    switch (n.kind) {
    case NodeKind::Constant: return n.constant;
    case NodeKind::FactorRef: return checked(resolve(n.factor), "factor value");
    case NodeKind::Negate: return -eval(*n.lhs, resolve);
    case NodeKind::Add: return checked(eval(*n.lhs, resolve) + eval(*n.rhs, resolve), "addition");
    case NodeKind::Sub: return checked(eval(*n.lhs, resolve) - eval(*n.rhs, resolve), "subtraction");
    case NodeKind::Mul: return checked(eval(*n.lhs, resolve) * eval(*n.rhs, resolve), "multiplication");
    case NodeKind::Div: {
        const double num = eval(*n.lhs, resolve);
        const double den = eval(*n.rhs, resolve);
        if (den == 0.0) throw Error(ErrorCode::DivisionByZero, "division by zero");
        return checked(num / den, "division");
    }
    case NodeKind::Pow: {
        const double base = eval(*n.lhs, resolve);
        const double exponent = eval(*n.rhs, resolve);
        if (base < 0.0 && std::trunc(exponent) != exponent)
            throw Error(ErrorCode::DomainError, "negative base raised to a non-integer power");
        if (base == 0.0 && exponent < 0.0)
            throw Error(ErrorCode::DomainError, "zero raised to a negative power");
        return checked(std::pow(base, exponent), "power");
    }
    }
    return 0.0;
}

}  // namespace

MeansEndExpr MeansEndExpr::constant(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Constant;
    n->constant = v;
    return MeansEndExpr(std::move(n));
}

MeansEndExpr MeansEndExpr::ref(std::string factor) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::FactorRef;
    n->factor = std::move(factor);
    return MeansEndExpr(std::move(n));
}

MeansEndExpr MeansEndExpr::negate(const MeansEndExpr& operand) {
    return MeansEndExpr(make(NodeKind::Negate, operand.root_));
}

MeansEndExpr MeansEndExpr::binary(NodeKind op, const MeansEndExpr& lhs, const MeansEndExpr& rhs) {
    if (op == NodeKind::Constant || op == NodeKind::FactorRef || op == NodeKind::Negate)
        throw std::invalid_argument("binary() requires a binary operator");
    return MeansEndExpr(make(op, lhs.root_, rhs.root_));
}

bool MeansEndExpr::operator==(const MeansEndExpr& other) const {
    return nodes_equal(root_.get(), other.root_.get());
}

MeansEndExpr parse_expression(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const MeansEndExpr& expr) { return expr.empty() ? std::string() : print(expr.root()); }

std::string to_tree_string(const MeansEndExpr& expr) { return expr.empty() ? std::string() : tree(expr.root()); }

std::set<std::string> referenced_factors(const MeansEndExpr& expr) {
    std::set<std::string> out;
    if (!expr.empty()) collect(expr.root(), out);
    return out;
}

double evaluate(const MeansEndExpr& expr, const FactorResolver& resolve) {
    if (expr.empty()) throw Error(ErrorCode::EmptyExpression, "expression is empty");
    return eval(expr.root(), resolve);
}

double evaluate(const MeansEndExpr& expr, const EvalContext& ctx) {
    return evaluate(expr, [&](const std::string& factor) {
        try {
            return ctx.store.value(factor, ctx.site, ctx.year);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NoValue || e.code() == ErrorCode::UnknownFactor)
                throw Error(ErrorCode::MissingFactorValue, "factor '" + factor + "' has no value at site " +
                                                               ctx.site.raw() + " for " + std::to_string(ctx.year));
            throw;
        }
    });
}

}  // namespace quis
